#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "drlp/network.hpp"

namespace drlp {

enum class Phase { FindVertex, Pivot, Flip, Certify, Correct };

const char* phase_name(Phase p);

struct TraceRecord {
  int step = 0;
  Phase phase = Phase::FindVertex;
  Vector x;
  double f = 0.0;
  std::optional<NeuronIndex> neuron;
  std::optional<double> t;
  std::optional<double> alpha;
};

using TraceSink = std::function<void(const TraceRecord&)>;

// One JSON object, no trailing newline. Neuron indices are written 1-based.
std::string trace_line(const TraceRecord& r);

// Writes one line per record and flushes.
class JsonlTraceWriter {
 public:
  explicit JsonlTraceWriter(std::ostream& out) : out_(&out) {}
  void operator()(const TraceRecord& r) const;

 private:
  std::ostream* out_;
};

}  // namespace drlp
