#include "drlp/trace.hpp"

#include <json.hpp>

namespace drlp {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::FindVertex: return "find_vertex";
    case Phase::Pivot: return "pivot";
    case Phase::Flip: return "flip";
    case Phase::Certify: return "certify";
    case Phase::Correct: return "correct";
  }
  return "unknown";
}

std::string trace_line(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["phase"] = phase_name(r.phase);
  j["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  j["f"] = r.f;
  if (r.neuron) {
    j["neuron"] = {r.neuron->layer + 1, r.neuron->pos + 1};
  } else {
    j["neuron"] = nullptr;
  }
  j["t"] = r.t ? nlohmann::ordered_json(*r.t) : nlohmann::ordered_json(nullptr);
  j["alpha"] = r.alpha ? nlohmann::ordered_json(*r.alpha) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

void JsonlTraceWriter::operator()(const TraceRecord& r) const {
  *out_ << trace_line(r) << '\n';
  out_->flush();
}

}  // namespace drlp
