#include "dhs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include "dhs/config.hpp"
#include "dhs/errors.hpp"

namespace dhs::cli {
namespace {

using nlohmann::json;

struct Flags {
  std::string config;
  std::string out;
  std::string orbit;
  int grid = 256;
  std::optional<std::uint64_t> seed;
  std::optional<int> window;
  std::optional<int> threads;
  bool skip_check = false;
};

ProblemConfig load(const Flags& f) {
  ProblemConfig c = load_config(f.config);
  if (f.window) {
    if (*f.window < 0) throw ConfigurationError("--window: must be >= 0");
    c.window.half_width = *f.window;
  }
  if (f.seed) {
    c.solver.seed = *f.seed;
    c.check.seed = *f.seed;
  }
  if (f.threads) {
    if (*f.threads < 1) throw ConfigurationError("--threads: must be >= 1");
    c.solver.threads = *f.threads;
  }
  if (!f.out.empty()) c.output_dir = f.out;
  return c;
}

std::filesystem::path output_file(const ProblemConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.output_dir);
  return std::filesystem::path(c.output_dir) / name;
}

void emit(std::ostream& out, const ProblemConfig& c, const std::string& name, const json& j) {
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!c.output_dir.empty()) {
    std::ofstream f(output_file(c, name));
    f << text;
  }
}

int cmd_check(const Flags& flags, std::ostream& out, std::ostream& err) {
  const ProblemConfig c = load(flags);
  const HypothesisReport rep = check_hypotheses(c.make_nonlinearity(), c.coefficient_matrices(), c.check);
  for (const auto& e : rep.entries) {
    if (e.status == Status::Inconclusive) err << "warning: (" << e.hypothesis << ") inconclusive: " << e.message << '\n';
    if (e.status == Status::Fail) err << "(" << e.hypothesis << ") failed: " << e.message << '\n';
  }
  emit(out, c, "check.json", {{"command", "check"}, {"report", to_json(rep)}});
  return rep.any_fail() ? kFailed : kOk;
}

std::vector<double> flatten(const std::vector<BandSample>& bands) {
  std::vector<double> v;
  for (const auto& b : bands) v.insert(v.end(), b.bands.data(), b.bands.data() + b.bands.size());
  return v;
}

int cmd_spectrum(const Flags& flags, std::ostream& out, std::ostream&) {
  const ProblemConfig c = load(flags);
  const PeriodicCoefficients coeffs(c.coefficient_matrices());
  const auto bands = band_structure(coeffs, flags.grid);
  const auto values = flatten(bands);
  constexpr double kTol = 1e-9;
  const auto inclusion = spectral_inclusion(values, coeffs.lambda0(), coeffs.Lambda0(), kTol);

  double neg_lo = kInfinity, neg_hi = -kInfinity, pos_lo = kInfinity, pos_hi = -kInfinity;
  for (double v : values) {
    if (v < 0) {
      neg_lo = std::min(neg_lo, v);
      neg_hi = std::max(neg_hi, v);
    } else {
      pos_lo = std::min(pos_lo, v);
      pos_hi = std::max(pos_hi, v);
    }
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json summary{{"command", "spectrum"},
               {"lambda0", coeffs.lambda0()},
               {"Lambda0", coeffs.Lambda0()},
               {"grid", flags.grid},
               {"band_extrema", {{"negative", {num(neg_lo), num(neg_hi)}}, {"positive", {num(pos_lo), num(pos_hi)}}}},
               {"inclusion", {{"passed", inclusion.passed}, {"worst_violation", inclusion.worst_violation}}}};
  bool ok = inclusion.passed;

  // Periodic window of L whole cells: its spectrum is the symbol spectrum at
  // theta = 2 pi j / L, j = 0..L-1.
  const int T = coeffs.period();
  const int cells = (2 * c.window.half_width + 1) / T;
  if (cells >= 1) {
    const auto dec = eigendecompose(assemble(Window::cells(cells * T), coeffs));
    std::vector<double> expected = flatten(band_structure(coeffs, std::max(cells, 2)));
    if (cells == 1) expected.resize(expected.size() / 2);  // theta = 0 only
    std::sort(expected.begin(), expected.end());
    double mismatch = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      mismatch = std::max(mismatch, std::abs(expected[i] - dec.eigenvalues[static_cast<Eigen::Index>(i)]));
    }
    const std::vector<double> eig(dec.eigenvalues.data(), dec.eigenvalues.data() + dec.size());
    const auto inc = spectral_inclusion(eig, coeffs.lambda0(), coeffs.Lambda0(), kTol);
    summary["periodic_window"] = {{"nodes", cells * T},
                                  {"inclusion", {{"passed", inc.passed}, {"worst_violation", inc.worst_violation}}},
                                  {"symbol_mismatch", mismatch}};
    ok = ok && inc.passed && mismatch <= kTol;
  }

  const auto zp = eigendecompose(assemble(Window::symmetric(c.window.half_width, Boundary::ZeroPad), coeffs));
  json gap = json::array();
  for (const auto& g : gap_mode_report(zp)) {
    gap.push_back({{"index", g.index}, {"eigenvalue", g.eigenvalue}, {"boundary_mass", g.boundary_mass}});
  }
  summary["zero_pad_window"] = {{"half_width", c.window.half_width}, {"gap_modes", gap}};

  if (!c.output_dir.empty()) {
    std::ofstream f(output_file(c, "bands.csv"));
    write_bands_csv(f, bands);
    summary["bands_csv"] = "bands.csv";
  }
  emit(out, c, "spectrum.json", summary);
  return ok ? kOk : kFailed;
}

int cmd_bands(const Flags& flags, std::ostream& out, std::ostream&) {
  const ProblemConfig c = load(flags);
  const auto bands = band_structure(PeriodicCoefficients(c.coefficient_matrices()), flags.grid);
  if (c.output_dir.empty()) {
    write_bands_csv(out, bands);
  } else {
    std::ofstream f(output_file(c, "bands.csv"));
    write_bands_csv(f, bands);
  }
  return kOk;
}

int cmd_solve(const Flags& flags, std::ostream& out, std::ostream& err) {
  const ProblemConfig c = load(flags);
  if (c.window.boundary != Boundary::ZeroPad) throw ConfigurationError("solve: window.boundary must be zero_pad");
  json report{{"command", "solve"}, {"skip_check", flags.skip_check}};
  if (!flags.skip_check) {
    const HypothesisReport rep = check_hypotheses(c.make_nonlinearity(), c.coefficient_matrices(), c.check);
    if (rep.any_fail()) {
      err << "hypothesis check failed; rerun with --skip-check to solve anyway\n";
      report["check"] = to_json(rep);
      emit(out, c, "solve.json", report);
      return kFailed;
    }
  }
  const auto ctx =
      FunctionalContext::build(c.make_window(), PeriodicCoefficients(c.coefficient_matrices()), c.make_nonlinearity());
  const auto results = multi_start(ctx, c.solver);
  json orbits = json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    json o = to_json(results[k]);
    if (!c.output_dir.empty()) {
      const std::string name = "orbit_" + std::to_string(k) + ".csv";
      write_orbit_csv(output_file(c, name).string(), results[k].orbit);
      o["file"] = name;
    }
    orbits.push_back(o);
  }
  report["half_width"] = c.window.half_width;
  report["starts"] = c.solver.starts.empty() ? default_starts().size() : c.solver.starts.size();
  report["orbits"] = orbits;
  emit(out, c, "solve.json", report);
  if (results.empty()) {
    err << "no verified nontrivial orbit found\n";
    return kNoOrbit;
  }
  return kOk;
}

int cmd_verify(const Flags& flags, std::ostream& out, std::ostream& err) {
  const ProblemConfig c = load(flags);
  if (flags.orbit.empty()) throw ConfigurationError("verify: --orbit PATH is required");
  const BlockVector x = read_orbit_csv(flags.orbit, c.block_dim, Boundary::ZeroPad);
  const auto ctx = FunctionalContext::build(x.window(), PeriodicCoefficients(c.coefficient_matrices()),
                                            c.make_nonlinearity());
  const VerificationReport rep = verify_orbit(ctx, x, c.solver);
  for (const auto& f : rep.failures) err << "verify: " << f << '\n';
  emit(out, c, "verify.json",
       {{"command", "verify"}, {"orbit", flags.orbit}, {"phi", Phi(ctx, x)}, {"report", to_json(rep)}});
  return rep.passed ? kOk : kFailed;
}

json error_json(const char* kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete Hamiltonian systems: spectra, hypothesis checks and homoclinic orbits"};
  app.require_subcommand(1);
  Flags flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Problem configuration (JSON)")->required();
    sub->add_option("--out", flags.out, "Directory for report and CSV files");
    sub->add_option("--window", flags.window, "Window half-width M (overrides the config)");
    sub->add_option("--seed", flags.seed, "Seed for sampling and random starts");
  };
  CLI::App* check = app.add_subcommand("check", "Sample R and report hypotheses (R0)-(R4)");
  common(check);
  CLI::App* spectrum = app.add_subcommand("spectrum", "Band structure summary and spectral inclusion");
  common(spectrum);
  spectrum->add_option("--grid", flags.grid, "Number of quasimomentum samples K")->check(CLI::Range(2, 1 << 20));
  CLI::App* bands = app.add_subcommand("bands", "Band structure as CSV");
  common(bands);
  bands->add_option("--grid", flags.grid, "Number of quasimomentum samples K")->check(CLI::Range(2, 1 << 20));
  CLI::App* solve = app.add_subcommand("solve", "Search for homoclinic orbits");
  common(solve);
  solve->add_flag("--skip-check", flags.skip_check, "Solve even if a hypothesis check fails");
  solve->add_option("--threads", flags.threads, "Concurrent solves in multi-start");
  CLI::App* verify = app.add_subcommand("verify", "Verify an orbit CSV");
  common(verify);
  verify->add_option("--orbit", flags.orbit, "Orbit CSV (n,x1_*,x2_*)")->required();

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << e.what() << '\n';
    out << error_json("usage", e.what()).dump(2) << '\n';
    return kConfigError;
  }

  try {
    if (*check) return cmd_check(flags, out, err);
    if (*spectrum) return cmd_spectrum(flags, out, err);
    if (*bands) return cmd_bands(flags, out, err);
    if (*solve) return cmd_solve(flags, out, err);
    return cmd_verify(flags, out, err);
  } catch (const HypothesisViolation& e) {
    err << e.what() << '\n';
    out << error_json("hypothesis", e.what()).dump(2) << '\n';
    return kFailed;
  } catch (const NumericalError& e) {
    err << e.what() << '\n';
    out << error_json("numerical", e.what()).dump(2) << '\n';
    return kFailed;
  } catch (const std::logic_error& e) {
    // ConfigurationError, DimensionError and DomainError.
    err << e.what() << '\n';
    out << error_json("configuration", e.what()).dump(2) << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    out << error_json("io", e.what()).dump(2) << '\n';
    return kConfigError;
  }
}

}  // namespace dhs::cli
