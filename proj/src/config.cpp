#include "dhs/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dhs/errors.hpp"

namespace dhs {

using nlohmann::json;

namespace {

const char* parameter_key(const std::string& family) { return family == "quadratic" ? "c" : "nu"; }

const char* boundary_name(Boundary b) { return b == Boundary::ZeroPad ? "zero_pad" : "periodic"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "zero_pad") return Boundary::ZeroPad;
  if (s == "periodic") return Boundary::Periodic;
  throw ConfigurationError("window.boundary: expected \"zero_pad\" or \"periodic\", got \"" + s + "\"");
}

// Typed read of j[key] with the field path in every error message.
template <class T>
T field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigurationError(path + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigurationError(path + key + ": wrong type");
  }
}

template <class T>
T field_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  return j.contains(key) ? field<T>(j, key, path) : fallback;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigurationError(message);
}

json start_to_json(const StartSpec& s) {
  json j{{"strategy", to_string(s.strategy)}, {"amplitude", s.amplitude}};
  if (s.width) j["width"] = *s.width;
  return j;
}

StartSpec start_from_json(const json& j, const std::string& path) {
  require(j.is_object(), path + ": expected an object");
  StartSpec s;
  s.strategy = parse_strategy(field<std::string>(j, "strategy", path + "."));
  require(s.strategy != StartStrategy::Explicit, path + ".strategy: explicit starts cannot come from a config");
  s.amplitude = field<double>(j, "amplitude", path + ".");
  require(std::isfinite(s.amplitude) && s.amplitude > 0.0, path + ".amplitude: must be positive");
  if (j.contains("width")) {
    s.width = field<double>(j, "width", path + ".");
    require(*s.width > 0.0, path + ".width: must be positive");
  }
  return s;
}

SolveOptions parse_solver(const json& j) {
  const std::string p = "solver.";
  SolveOptions o;
  o.max_iter = field_or(j, "max_iter", p, o.max_iter);
  o.grad_tol = field_or(j, "grad_tol", p, o.grad_tol);
  o.trivial_tol = field_or(j, "trivial_tol", p, o.trivial_tol);
  o.seed = field_or(j, "seed", p, o.seed);
  o.threads = field_or(j, "threads", p, o.threads);
  o.window_doubling = field_or(j, "window_doubling", p, o.window_doubling);
  require(o.max_iter >= 1, "solver.max_iter: must be >= 1");
  require(o.grad_tol > 0.0, "solver.grad_tol: must be positive");
  require(o.trivial_tol > 0.0, "solver.trivial_tol: must be positive");
  require(o.threads >= 1, "solver.threads: must be >= 1");
  if (j.contains("starts")) {
    const json& s = j.at("starts");
    require(s.is_array(), "solver.starts: expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
      o.starts.push_back(start_from_json(s[i], "solver.starts[" + std::to_string(i) + "]"));
    }
  }
  return o;
}

SamplingPlan parse_check(const json& j) {
  const std::string p = "check.";
  SamplingPlan plan;
  plan.seed = field_or(j, "seed", p, plan.seed);
  plan.radii = field_or(j, "radii", p, plan.radii);
  plan.directions = field_or(j, "directions", p, plan.directions);
  plan.radius_min = field_or(j, "radius_min", p, plan.radius_min);
  plan.radius_max = field_or(j, "radius_max", p, plan.radius_max);
  require(plan.radii >= 2, "check.radii: must be >= 2");
  require(plan.directions >= 1, "check.directions: must be >= 1");
  require(plan.radius_min > 0.0 && plan.radius_max > plan.radius_min,
          "check.radius_min/radius_max: need 0 < radius_min < radius_max");
  return plan;
}

}  // namespace

CoefficientMatrices ProblemConfig::coefficient_matrices() const {
  const int w = 2 * block_dim;
  CoefficientMatrices c{block_dim, {}};
  for (const auto& m : matrices) {
    c.matrices.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        m.data(), w, w));
  }
  return c;
}

Nonlinearity ProblemConfig::make_nonlinearity() const {
  return make_family(nonlinearity.family, nonlinearity.parameter, block_dim, period);
}

ProblemConfig ProblemConfig::with_parameter(double parameter) const {
  ProblemConfig c = *this;
  c.nonlinearity.parameter = parameter;
  return c;
}

Window ProblemConfig::make_window() const { return Window::symmetric(window.half_width, window.boundary); }

bool operator==(const ProblemConfig& a, const ProblemConfig& b) { return to_json(a) == to_json(b); }

ProblemConfig parse_config(const json& j) {
  require(j.is_object(), "config: expected a JSON object");
  ProblemConfig c;
  c.block_dim = field<int>(j, "block_dim", "");
  c.period = field<int>(j, "period", "");
  require(c.block_dim >= 1, "block_dim: must be >= 1");
  require(c.period >= 1, "period: must be >= 1");

  c.matrices = field<std::vector<std::vector<double>>>(j, "matrices", "");
  require(static_cast<int>(c.matrices.size()) == c.period,
          "matrices: expected " + std::to_string(c.period) + " matrices (one per period node), got " +
              std::to_string(c.matrices.size()));
  const int w = 2 * c.block_dim;
  for (int t = 0; t < c.period; ++t) {
    const auto& m = c.matrices[static_cast<std::size_t>(t)];
    const std::string where = "matrices[" + std::to_string(t) + "]";
    require(static_cast<int>(m.size()) == w * w, where + ": expected " + std::to_string(w * w) +
                                                       " entries (2N x 2N row-major), got " +
                                                       std::to_string(m.size()));
    for (int r = 0; r < w; ++r) {
      for (int k = 0; k < w; ++k) {
        const double a = m[static_cast<std::size_t>(r * w + k)];
        require(std::isfinite(a), where + ": non-finite entry");
        require(std::abs(a - m[static_cast<std::size_t>(k * w + r)]) <= kSymmetryTol,
                where + ": S(" + std::to_string(t) + ") is not symmetric");
      }
    }
  }

  const json nl = field<json>(j, "nonlinearity", "");
  c.nonlinearity.family = field<std::string>(nl, "family", "nonlinearity.");
  const json params = field<json>(nl, "params", "nonlinearity.");
  c.nonlinearity.parameter = field<double>(params, parameter_key(c.nonlinearity.family), "nonlinearity.params.");
  try {
    (void)c.make_nonlinearity();
  } catch (const DomainError& e) {
    throw ConfigurationError(std::string("nonlinearity.params: ") + e.what());
  }

  if (j.contains("window")) {
    const json& win = j.at("window");
    c.window.half_width = field_or(win, "half_width", "window.", c.window.half_width);
    c.window.boundary = parse_boundary(field_or<std::string>(win, "boundary", "window.", "zero_pad"));
    require(c.window.half_width >= 0, "window.half_width: must be >= 0");
  }
  if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
  if (j.contains("check")) c.check = parse_check(j.at("check"));
  if (j.contains("output")) c.output_dir = field_or<std::string>(j.at("output"), "dir", "output.", "");
  return c;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ProblemConfig& c) {
  json starts = json::array();
  for (const auto& s : c.solver.starts) starts.push_back(start_to_json(s));
  json solver{{"max_iter", c.solver.max_iter},
              {"grad_tol", c.solver.grad_tol},
              {"trivial_tol", c.solver.trivial_tol},
              {"seed", c.solver.seed},
              {"threads", c.solver.threads},
              {"window_doubling", c.solver.window_doubling}};
  if (!c.solver.starts.empty()) solver["starts"] = starts;
  return {{"block_dim", c.block_dim},
          {"period", c.period},
          {"matrices", c.matrices},
          {"nonlinearity",
           {{"family", c.nonlinearity.family},
            {"params", {{parameter_key(c.nonlinearity.family), c.nonlinearity.parameter}}}}},
          {"window", {{"half_width", c.window.half_width}, {"boundary", boundary_name(c.window.boundary)}}},
          {"solver", solver},
          {"check",
           {{"seed", c.check.seed},
            {"radii", c.check.radii},
            {"directions", c.check.directions},
            {"radius_min", c.check.radius_min},
            {"radius_max", c.check.radius_max}}},
          {"output", {{"dir", c.output_dir}}}};
}

json to_json(const HypothesisReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json checks = json::array();
    for (const auto& s : e.checks) {
      checks.push_back({{"name", s.name}, {"status", to_string(s.status)}, {"measured", s.measured}, {"bound", s.bound}});
    }
    json je{{"hypothesis", e.hypothesis}, {"status", to_string(e.status)}, {"message", e.message}, {"checks", checks}};
    if (e.witness) {
      je["witness"] = {{"n", e.witness->n},
                       {"z", e.witness->z},
                       {"measured", e.witness->measured},
                       {"quantity", e.witness->quantity}};
    }
    entries.push_back(je);
  }
  json j{{"entries", entries}, {"delta0_estimate", r.delta0_estimate}, {"any_fail", r.any_fail()},
         {"any_inconclusive", r.any_inconclusive()}};
  if (r.growth) {
    j["growth"] = {{"epsilon", r.growth->epsilon},
                   {"exponent", r.growth->exponent},
                   {"constant", r.growth->constant},
                   {"verified", r.growth->verified}};
  }
  return j;
}

namespace {

// JSON has no inf/nan; report them as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const VerificationReport& r) {
  json j{{"passed", r.passed},
         {"linf_norm", r.linf_norm},
         {"grad_inf_norm", r.grad_inf_norm},
         {"dhs_residual_inf", r.residual.inf_norm},
         {"dhs_residual_worst_node", r.residual.worst_node},
         {"decay",
          {{"rate", number(r.decay.rate)},
           {"r_squared", r.decay.r_squared},
           {"samples", r.decay.samples},
           {"conclusive", r.decay.conclusive}}},
         {"energy_identity_defect", r.energy_identity},
         {"checks",
          {{"nontrivial", r.nontrivial_ok},
           {"dhs_residual", r.residual_ok},
           {"decay", r.decay_ok},
           {"energy_identity", r.energy_ok},
           {"window_stability", r.stability_ok}}},
         {"failures", r.failures}};
  if (r.stability) {
    j["window_stability"] = {{"converged", r.stability->converged},
                             {"difference", number(r.stability->difference)},
                             {"iterations", r.stability->iterations},
                             {"doubled_half_width", r.stability->doubled.half_width()}};
  }
  return j;
}

json to_json(const SolveResult& r) {
  json j{{"status", to_string(r.status)},
         {"start", r.start},
         {"phi", r.phi},
         {"grad_inf_norm", r.grad_inf_norm},
         {"iterations", r.iterations},
         {"regularizations", r.regularizations},
         {"descent_steps", r.descent_steps},
         {"linf_norm", linf_norm(r.orbit)},
         {"window", {{"first", r.orbit.window().first()}, {"last", r.orbit.window().last()}}}};
  if (r.verification) j["verification"] = to_json(*r.verification);
  return j;
}

void write_orbit_csv(std::ostream& os, const BlockVector& x) {
  const int N = x.block_dim();
  os << "n";
  for (int i = 1; i <= N; ++i) os << ",x1_" << i;
  for (int i = 1; i <= N; ++i) os << ",x2_" << i;
  os << '\n' << std::setprecision(17);
  const Window& w = x.window();
  for (int n = w.first(); n <= w.last(); ++n) {
    os << n;
    for (double v : x.block(n)) os << ',' << v;
    os << '\n';
  }
}

void write_orbit_csv(const std::string& path, const BlockVector& x) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  write_orbit_csv(out, x);
}

BlockVector read_orbit_csv(std::istream& is, int block_dim, Boundary boundary) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigurationError("orbit file is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  const auto header = split(line);
  const std::size_t cols = 1 + 2 * static_cast<std::size_t>(block_dim);
  if (header.size() != cols) {
    throw DimensionError("orbit file has " + std::to_string(header.size()) + " columns; block_dim " +
                         std::to_string(block_dim) + " needs " + std::to_string(cols));
  }
  std::vector<double> data;
  int first = 0;
  int expect = 0;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols) {
      throw DimensionError("orbit row " + std::to_string(rows + 1) + " has " + std::to_string(cells.size()) +
                           " columns, expected " + std::to_string(cols));
    }
    int n = 0;
    try {
      n = std::stoi(cells[0]);
      for (std::size_t k = 1; k < cols; ++k) data.push_back(std::stod(cells[k]));
    } catch (const std::logic_error&) {
      throw ConfigurationError("orbit row " + std::to_string(rows + 1) + ": not a number");
    }
    if (rows == 0) first = expect = n;
    if (n != expect) throw ConfigurationError("orbit nodes must be consecutive (got n=" + cells[0] + ")");
    ++expect;
    ++rows;
  }
  if (rows == 0) throw ConfigurationError("orbit file has no rows");
  const int last = first + rows - 1;
  if (first != -last) throw ConfigurationError("orbit nodes must span a symmetric window [-M, M]");
  return BlockVector(Window::symmetric(last, boundary), block_dim, std::move(data));
}

BlockVector read_orbit_csv(const std::string& path, int block_dim, Boundary boundary) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open orbit file " + path);
  return read_orbit_csv(in, block_dim, boundary);
}

void write_bands_csv(std::ostream& os, const std::vector<BandSample>& bands) {
  const auto m = bands.empty() ? 0 : bands.front().bands.size();
  os << "theta";
  for (Eigen::Index i = 1; i <= m; ++i) os << ",band_" << i;
  os << '\n' << std::setprecision(17);
  for (const auto& b : bands) {
    os << b.theta;
    for (Eigen::Index i = 0; i < b.bands.size(); ++i) os << ',' << b.bands[i];
    os << '\n';
  }
}

}  // namespace dhs
