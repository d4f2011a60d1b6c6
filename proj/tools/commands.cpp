#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "drlp/bounds.hpp"
#include "drlp/model_io.hpp"
#include "drlp/problems.hpp"
#include "drlp/quadratic.hpp"
#include "drlp/rng.hpp"
#include "drlp/solver.hpp"

namespace drlp::cli {

using nlohmann::json;

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": '" + cell + "' is not a number");
    }
  }
  if (out.empty()) throw std::invalid_argument(what + " is empty");
  return out;
}

std::vector<int> parse_widths(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_numbers(text, "topology")) {
    if (v < 1 || v != static_cast<int>(v)) throw std::invalid_argument("topology entries must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

int exit_code_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::LocalMinimum: return kOk;
    case SolveStatus::Unbounded: return kUnbounded;
    case SolveStatus::NonRegular: return kNonRegular;
    case SolveStatus::StepLimit: return kStepLimit;
  }
  return kIoError;
}

json outcome_json(const SolveOutcome& out, double wall_ms) {
  json j;
  j["status"] = status_name(out.status);
  j["x"] = to_json(out.x);
  j["f"] = out.f;
  j["steps"] = out.steps;
  j["wall_ms"] = wall_ms;
  if (out.status == SolveStatus::Unbounded) j["direction"] = to_json(out.direction);
  if (out.status == SolveStatus::NonRegular) {
    json d = json::array();
    for (const NeuronIndex& c : out.diagnostic) d.push_back({c.layer + 1, c.pos + 1});
    j["diagnostic"] = d;
  }
  if (!out.message.empty()) j["message"] = out.message;
  return j;
}

// Adds 1e-8 relative noise to every bias, keeping paired biases negated.
std::pair<ReluNetwork, PairGroups> jitter_biases(const ReluNetwork& net, const PairGroups& pairs, Rng& rng) {
  std::vector<Vector> b = net.biases();
  for (auto& layer : b) {
    for (Eigen::Index i = 0; i < layer.size(); ++i) {
      layer[i] += 1e-8 * std::max(1.0, std::abs(layer[i])) * rng.uniform(-1.0, 1.0);
    }
  }
  for (const auto& [a, c] : pairs.pairs()) b[c.layer][c.pos] = -b[a.layer][a.pos];
  ReluNetwork jittered(net.weights(), std::move(b));
  PairGroups jp(jittered, pairs.pairs());
  return {std::move(jittered), std::move(jp)};
}

struct SolveFlags {
  std::string x0;
  bool x0_random = false;
  std::uint64_t seed = 0;
  int max_steps = 10000;
  double tol = 1e-9;
  std::string trace;
  std::string out;
  bool jitter = false;
  int starts = 1;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--x0", f.x0, "start point, comma separated");
  cmd->add_flag("--x0-random", f.x0_random, "start at a uniform point in [-1,1]^n0");
  cmd->add_option("--seed", f.seed, "seed for all randomness")->capture_default_str();
  cmd->add_option("--max-steps", f.max_steps, "step cap")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "descent tolerance (scaled by 1+|grad|)")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--trace", f.trace, "trace output (JSON lines)");
  cmd->add_option("--out", f.out, "outcome JSON (default stdout)");
  cmd->add_option("--starts", f.starts, "independent starts run in parallel")->capture_default_str()->check(CLI::PositiveNumber);
}

Vector start_point(const SolveFlags& f, int n0, std::uint64_t seed, const std::optional<Vector>& fallback) {
  if (!f.x0.empty()) {
    Vector x = to_vector(parse_numbers(f.x0, "x0"));
    if (x.size() != n0) {
      throw std::invalid_argument("x0 has " + std::to_string(x.size()) + " entries, expected " + std::to_string(n0));
    }
    return x;
  }
  if (!f.x0_random && fallback) return *fallback;
  Rng rng(seed);
  return rng.uniform_vector(n0, -1.0, 1.0);
}

struct RunResult {
  SolveOutcome outcome;
  double wall_ms = 0.0;
  int jitters = 0;
};

using Solver = std::function<SolveOutcome(const ReluNetwork&, const PairGroups&, const Vector&, const SolverOptions&)>;

SolveOutcome run_simplex(const ReluNetwork& net, const PairGroups& pairs, const Vector& x0, const SolverOptions& opts) {
  return drlsimplex(net, x0, opts, pairs);
}

RunResult run_with_retries(const Solver& solver, const ReluNetwork& net, const PairGroups& pairs, const Vector& x0,
                           SolverOptions opts, bool jitter) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.outcome = solver(net, pairs, x0, opts);
  Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  std::optional<std::pair<ReluNetwork, PairGroups>> current;
  while (jitter && res.outcome.status == SolveStatus::NonRegular && res.jitters < 3) {
    current = jitter_biases(current ? current->first : net, current ? current->second : pairs, rng);
    ++res.jitters;
    res.outcome = solver(current->first, current->second, x0, opts);
  }
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Runs `starts` independent instances; streams the trace when there is one.
RunResult solve_flags(const Solver& solver, const ReluNetwork& net, const PairGroups& pairs, const SolveFlags& f,
                      const std::optional<Vector>& default_x0) {
  const int n0 = net.input_dim();
  SolverOptions base;
  base.max_steps = f.max_steps;
  base.descent_tol = f.tol;
  std::unique_ptr<std::ofstream> trace_file;
  if (!f.trace.empty()) {
    trace_file = std::make_unique<std::ofstream>(f.trace);
    if (!*trace_file) throw ParseError("cannot write '" + f.trace + "'");
  }
  if (f.starts == 1) {
    SolverOptions opts = base;
    opts.seed = f.seed;
    opts.keep_trace = false;
    if (trace_file) opts.on_record = JsonlTraceWriter(*trace_file);
    return run_with_retries(solver, net, pairs, start_point(f, n0, f.seed, default_x0), opts, f.jitter);
  }
  std::vector<std::future<RunResult>> jobs;
  for (int k = 0; k < f.starts; ++k) {
    SolverOptions opts = base;
    opts.seed = f.seed + static_cast<std::uint64_t>(k);
    opts.keep_trace = static_cast<bool>(trace_file);
    const Vector x0 = start_point(f, n0, opts.seed, k == 0 ? default_x0 : std::nullopt);
    jobs.push_back(std::async(std::launch::async, [&, opts, x0] {
      return run_with_retries(solver, net, pairs, x0, opts, f.jitter);
    }));
  }
  std::vector<RunResult> results;
  for (auto& j : jobs) results.push_back(j.get());
  std::size_t best = 0;
  bool found = false;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const SolveOutcome& o = results[k].outcome;
    if (o.status != SolveStatus::LocalMinimum) continue;
    if (!found || o.f < results[best].outcome.f) best = k;
    found = true;
  }
  if (trace_file) {
    JsonlTraceWriter w(*trace_file);
    for (const TraceRecord& r : results[best].outcome.trace) w(r);
  }
  return std::move(results[best]);
}

void emit(const RunResult& r, const std::string& out, json extra, int& exit_code) {
  json j = outcome_json(r.outcome, r.wall_ms);
  if (r.jitters > 0) j["jitter_restarts"] = r.jitters;
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_json(j, out);
  exit_code = exit_code_for(r.outcome.status);
}

// ---- check ---------------------------------------------------------------

struct CheckLine {
  std::string name;
  bool pass = true;
  bool skipped = false;
  std::string detail;
};

CheckLine check_gradient(const ReluNetwork& net, Rng& rng, int points) {
  CheckLine line{"gradient_fd"};
  const int n0 = net.input_dim();
  const double h = 1e-6, eps = 1e-4;
  int tested = 0;
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const Vector x = rng.uniform_vector(n0, -1.0, 1.0);
    const ActivationPattern s = activation_pattern(net, x);
    bool constant = true;
    for (int i = 0; i < n0 && constant; ++i) {
      Vector e = Vector::Zero(n0);
      e[i] = eps;
      constant = activation_pattern(net, x + e) == s && activation_pattern(net, x - e) == s;
    }
    if (!constant) continue;
    const Vector g = gradient(net, s);
    Vector fd(n0);
    for (int i = 0; i < n0; ++i) {
      Vector e = Vector::Zero(n0);
      e[i] = h;
      fd[i] = (eval(net, x + e) - eval(net, x - e)) / (2 * h);
    }
    const double err = (g - fd).lpNorm<Eigen::Infinity>() / (1.0 + g.lpNorm<Eigen::Infinity>());
    worst = std::max(worst, err);
    ++tested;
  }
  line.pass = worst <= 1e-6;
  line.detail = std::to_string(tested) + " points, worst relative error " + std::to_string(worst);
  return line;
}

CheckLine check_arguments(const ReluNetwork& net, Rng& rng, int points) {
  CheckLine line{"argument_stability"};
  const int n0 = net.input_dim();
  int patterns = 0, capped = 0;
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    Vector x = rng.uniform_vector(n0, -1.0, 1.0);
    if (k % 2 == 1) {
      // project onto the hyperplane of a random neuron
      const ActivationPattern s = activation_pattern(net, x);
      const NeuronIndex c = net.layout().unflat(rng.next() % net.neuron_count());
      const Vector v = normal(net, s, c);
      if (v.squaredNorm() > 1e-12) x -= subjective_arguments(net, s, x)[c.layer][c.pos] / v.squaredNorm() * v;
    }
    std::vector<ActivationPattern> all;
    try {
      all = enumerate_compatible(net, x, 1e-9, 1u << 10);
    } catch (const CapExceeded&) {
      ++capped;
      continue;
    }
    const LayerValues A = relu_arguments(net, x);
    double scale = 1.0;
    for (const auto& a : A) scale = std::max(scale, 1.0 + a.lpNorm<Eigen::Infinity>());
    for (const ActivationPattern& s : all) {
      const LayerValues As = subjective_arguments(net, s, x);
      for (std::size_t l = 0; l < A.size(); ++l) worst = std::max(worst, (A[l] - As[l]).lpNorm<Eigen::Infinity>() / scale);
      worst = std::max(worst, std::abs(eval(net, x) - subjective_eval(net, s, x)) / scale);
      ++patterns;
    }
  }
  line.pass = worst <= 1e-10;
  line.detail = std::to_string(patterns) + " compatible patterns, worst scaled deviation " + std::to_string(worst);
  if (capped > 0) line.detail += ", " + std::to_string(capped) + " points over the enumeration cap";
  return line;
}

CheckLine check_vertex(const ReluNetwork& net, std::uint64_t seed) {
  CheckLine line{"vertex_pseudoinverse"};
  SolverOptions opts;
  opts.seed = seed;
  opts.keep_trace = false;
  DrlSimplex solver(net, opts);
  Rng rng(seed);
  SolverState st = solver.initialize(rng.uniform_vector(net.input_dim(), -1.0, 1.0));
  if (auto early = solver.find_vertex(st)) {
    if (early->status == SolveStatus::NonRegular && !early->diagnostic.empty()) {
      line.pass = false;
      line.detail = std::string("NonRegular: ") + early->message;
    } else {
      line.skipped = true;
      line.detail = std::string("no vertex reached (") + status_name(early->status) + ")";
    }
    return line;
  }
  const Matrix A = owner_columns(net, st.s, st.P.owners);
  const double err = (st.P.rows * A - Matrix::Identity(A.cols(), A.cols())).lpNorm<Eigen::Infinity>();
  const std::vector<NeuronIndex> crit = critical_indices(net, st.s, st.x, 1e-7);
  if (static_cast<int>(crit.size()) != net.input_dim()) {
    line.pass = false;
    line.detail = "NonRegular: " + std::to_string(crit.size()) + " critical neurons at the vertex, expected " +
                  std::to_string(net.input_dim());
    return line;
  }
  line.pass = err <= 1e-8;
  line.detail = "max |P A - I| = " + std::to_string(err);
  return line;
}

}  // namespace

void register_commands(CLI::App& app, int& exit_code) {
  // random-net
  {
    auto* cmd = app.add_subcommand("random-net", "write a network with uniform random parameters");
    auto topology = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto low = std::make_shared<double>(-1.0);
    auto high = std::make_shared<double>(1.0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--topology", *topology, "widths n0,...,1")->required();
    cmd->add_option("--seed", *seed)->capture_default_str();
    cmd->add_option("--low", *low)->capture_default_str();
    cmd->add_option("--high", *high)->capture_default_str();
    cmd->add_option("--out", *out, "model JSON (default stdout)");
    cmd->callback([=, &exit_code] {
      const ReluNetwork net = build_random(parse_widths(*topology), *seed, *low, *high);
      if (out->empty()) {
        std::cout << model_to_json(net).dump() << '\n';
      } else {
        save_model(*out, net);
      }
      exit_code = kOk;
    });
  }

  // solve
  {
    auto* cmd = app.add_subcommand("solve", "find a local minimum of a model");
    auto model = std::make_shared<std::string>();
    auto flags = std::make_shared<SolveFlags>();
    cmd->add_option("--model", *model)->required();
    add_solve_flags(cmd, *flags);
    cmd->add_flag("--jitter-on-nonregular", flags->jitter, "retry with jittered biases after a non-regular abort");
    cmd->callback([=, &exit_code] {
      const Model m = load_model(*model);
      if (flags->x0.empty() && !flags->x0_random) throw std::invalid_argument("give --x0 or --x0-random");
      emit(solve_flags(run_simplex, m.net, m.pairs, *flags, std::nullopt), flags->out, json::object(), exit_code);
    });
  }

  // quantile / clad / train-l1
  {
    auto* cmd = app.add_subcommand("quantile", "quantile regression with optional L1 penalty");
    auto data = std::make_shared<std::string>();
    auto response = std::make_shared<std::string>();
    auto alpha = std::make_shared<double>(0.5);
    auto lambda = std::make_shared<double>(0.0);
    auto flags = std::make_shared<SolveFlags>();
    cmd->add_option("--data", *data, "CSV file")->required();
    cmd->add_option("--response", *response, "response column name or 1-based index (default last)");
    cmd->add_option("--alpha", *alpha, "quantile level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--lambda", *lambda, "L1 penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
    add_solve_flags(cmd, *flags);
    cmd->callback([=, &exit_code] {
      const RegressionData d = load_csv(*data, response->empty() ? std::nullopt : std::optional(*response));
      const CompiledProblem prob = build_quantile_lasso(d, *alpha, *lambda);
      const RunResult r = solve_flags(run_simplex, prob.net, prob.pairs, *flags, std::nullopt);
      std::vector<std::string> names{"(intercept)"};
      names.insert(names.end(), d.predictor_names.begin(), d.predictor_names.end());
      emit(r, flags->out, {{"coefficients", to_json(r.outcome.x)}, {"names", names}}, exit_code);
    });
  }
  {
    auto* cmd = app.add_subcommand("clad", "censored least absolute deviation regression");
    auto data = std::make_shared<std::string>();
    auto response = std::make_shared<std::string>();
    auto flags = std::make_shared<SolveFlags>();
    cmd->add_option("--data", *data, "CSV file")->required();
    cmd->add_option("--response", *response, "response column name or 1-based index (default last)");
    add_solve_flags(cmd, *flags);
    cmd->callback([=, &exit_code] {
      const RegressionData d = load_csv(*data, response->empty() ? std::nullopt : std::optional(*response));
      const CompiledProblem prob = build_clad(d);
      const RunResult r = solve_flags(run_simplex, prob.net, prob.pairs, *flags, std::nullopt);
      emit(r, flags->out, {{"coefficients", to_json(r.outcome.x)}, {"names", d.predictor_names}}, exit_code);
    });
  }
  {
    auto* cmd = app.add_subcommand("train-l1", "fit the first layer of a model under L1 loss");
    auto model = std::make_shared<std::string>();
    auto data = std::make_shared<std::string>();
    auto response = std::make_shared<std::string>();
    auto out_model = std::make_shared<std::string>();
    auto flags = std::make_shared<SolveFlags>();
    cmd->add_option("--model", *model, "base model JSON")->required();
    cmd->add_option("--data", *data, "CSV file")->required();
    cmd->add_option("--response", *response, "response column name or 1-based index (default last)");
    cmd->add_option("--out-model", *out_model, "write the trained model here");
    add_solve_flags(cmd, *flags);
    cmd->callback([=, &exit_code] {
      const Model base = load_model(*model);
      const RegressionData d = load_csv(*data, response->empty() ? std::nullopt : std::optional(*response));
      const CompiledProblem prob = build_l1_first_layer(base.net, d);
      for (const std::string& w : prob.warnings) std::cerr << "warning: " << w << '\n';
      const RunResult r =
          solve_flags(run_simplex, prob.net, prob.pairs, *flags, first_layer_coordinates(base.net));
      if (!out_model->empty()) save_model(*out_model, with_first_layer(base.net, r.outcome.x));
      emit(r, flags->out, {{"coefficients", to_json(r.outcome.x)}}, exit_code);
    });
  }

  // lasso
  {
    auto* cmd = app.add_subcommand("lasso", "least squares with L1 penalty");
    auto data = std::make_shared<std::string>();
    auto response = std::make_shared<std::string>();
    auto lambda = std::make_shared<double>(0.0);
    auto flags = std::make_shared<SolveFlags>();
    cmd->add_option("--data", *data, "CSV file")->required();
    cmd->add_option("--response", *response, "response column name or 1-based index (default last)");
    cmd->add_option("--lambda", *lambda, "L1 penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
    add_solve_flags(cmd, *flags);
    cmd->callback([=, &exit_code] {
      const RegressionData d = load_csv(*data, response->empty() ? std::nullopt : std::optional(*response));
      const LassoProblem prob = build_lasso(d, *lambda);
      const Solver quad = [&](const ReluNetwork& net, const PairGroups& pairs, const Vector& x0,
                              const SolverOptions& opts) { return solve_quadratic(net, prob.fit, x0, opts, pairs); };
      const RunResult r = solve_flags(quad, prob.penalty.net, prob.penalty.pairs, *flags, std::nullopt);
      emit(r, flags->out, {{"coefficients", to_json(r.outcome.x)}, {"names", d.predictor_names}}, exit_code);
    });
  }

  // bounds / regions
  {
    auto* cmd = app.add_subcommand("bounds", "region-count upper bounds for a topology (input and hidden widths)");
    auto topology = std::make_shared<std::string>();
    cmd->add_option("--topology", *topology, "n0,n1,...,nL")->required();
    cmd->callback([=, &exit_code] {
      const std::vector<int> t = parse_widths(*topology);
      // big integers are written as bare JSON numbers
      std::cout << "{\"montufar\":" << montufar_bound(t).str() << ",\"improved\":" << improved_bound(t).str()
                << "}\n";
      exit_code = kOk;
    });
  }
  {
    auto* cmd = app.add_subcommand("regions", "bounds plus an empirical region count for a model");
    auto model = std::make_shared<std::string>();
    auto box = std::make_shared<std::string>("-10,10");
    auto samples = std::make_shared<std::size_t>(100000);
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--model", *model)->required();
    cmd->add_option("--box", *box, "lo,hi for every coordinate, or lo1,hi1,lo2,hi2,...")->capture_default_str();
    cmd->add_option("--samples", *samples)->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", *seed)->capture_default_str();
    cmd->callback([=, &exit_code] {
      const Model m = load_model(*model);
      const int n0 = m.net.input_dim();
      const std::vector<double> v = parse_numbers(*box, "box");
      Box b{Vector(n0), Vector(n0)};
      if (v.size() == 2) {
        b.lower.setConstant(v[0]);
        b.upper.setConstant(v[1]);
      } else if (v.size() == static_cast<std::size_t>(2 * n0)) {
        for (int i = 0; i < n0; ++i) {
          b.lower[i] = v[2 * i];
          b.upper[i] = v[2 * i + 1];
        }
      } else {
        throw std::invalid_argument("box needs 2 or 2*n0 numbers");
      }
      const std::vector<int> t = bound_topology(m.net);
      std::cout << "{\"montufar\":" << montufar_bound(t).str() << ",\"improved\":" << improved_bound(t).str()
                << ",\"empirical\":" << count_regions_empirical(m.net, b, *samples, *seed) << "}\n";
      exit_code = kOk;
    });
  }

  // check
  {
    auto* cmd = app.add_subcommand("check", "run invariant checks on a model");
    auto model = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto points = std::make_shared<int>(100);
    cmd->add_option("--model", *model)->required();
    cmd->add_option("--seed", *seed)->capture_default_str();
    cmd->add_option("--points", *points)->capture_default_str()->check(CLI::PositiveNumber);
    cmd->callback([=, &exit_code] {
      const Model m = load_model(*model);
      Rng rng(*seed);
      std::vector<CheckLine> lines;
      lines.push_back(check_gradient(m.net, rng, *points));
      lines.push_back(check_arguments(m.net, rng, *points));
      lines.push_back(check_vertex(m.net, *seed));
      bool ok = true;
      for (const CheckLine& l : lines) {
        const char* tag = l.skipped ? "SKIP" : (l.pass ? "PASS" : "FAIL");
        std::cout << tag << ' ' << l.name << ": " << l.detail << '\n';
        ok = ok && l.pass;
      }
      exit_code = ok ? kOk : kCheckFailed;
    });
  }
}

}  // namespace drlp::cli
