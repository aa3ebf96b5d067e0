// da-entropy: generate targets, run the exact data augmentation recursion,
// certify its convergence identities, and cross-check with sampled chains.
//
// Exit codes: 0 success, 1 check failure, 2 usage/config error,
// 3 hypothesis violation (non-positive target or infinite D(p0|pi)).

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "da_entropy/da_entropy.hpp"

namespace {

using namespace daent;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitHypothesis = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    if (s.empty() || s[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a nonnegative integer, got '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a number, got '" + s + "'");
  }
}

std::vector<std::size_t> parse_index_list(const std::string& s, const std::string& what) {
  std::vector<std::size_t> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_u64(item, what));
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

struct GenSpec {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::uint64_t seed = 0;
  double concentration = 1.0;
};

Target generate(const GenSpec& g) {
  if (g.nx < 1 || g.ny < 1) throw UsageError("nx and ny must be >= 1");
  if (!(g.concentration > 0.0)) throw UsageError("concentration must be positive");
  return random_positive_target(g.nx, g.ny, g.seed, g.concentration);
}

GenSpec parse_gen(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3 && parts.size() != 4) throw UsageError("--gen expects nx,ny,seed[,conc]");
  GenSpec g;
  g.nx = parse_u64(parts[0], "--gen nx");
  g.ny = parse_u64(parts[1], "--gen ny");
  g.seed = parse_u64(parts[2], "--gen seed");
  if (parts.size() == 4) g.concentration = parse_double(parts[3], "--gen conc");
  return g;
}

Retention parse_retain(const std::string& s) {
  if (s == "all") return Retention::all();
  if (s == "none") return Retention::none();
  if (s.rfind("thin:", 0) == 0) {
    const auto k = parse_u64(s.substr(5), "--retain thin:k");
    if (k < 1) throw UsageError("--retain thin:k needs k >= 1");
    return Retention::thin(k);
  }
  throw UsageError("--retain expects all, none or thin:k");
}

JointDensity parse_p0(const std::string& s, const Target& target) {
  const std::size_t nx = target.nx(), ny = target.ny();
  if (s == "uniform") return JointDensity::uniform(nx, ny);
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("unknown --p0 preset '" + s + "'");
  const std::string kind = s.substr(0, colon);
  const std::string arg = s.substr(colon + 1);
  if (kind == "degenerate") {
    const auto ij = split(arg, ',');
    if (ij.size() != 2) throw UsageError("--p0 degenerate:i,j");
    const auto i = parse_u64(ij[0], "--p0 degenerate i");
    const auto j = parse_u64(ij[1], "--p0 degenerate j");
    if (i >= nx || j >= ny) throw UsageError("--p0 degenerate cell lies outside the grid");
    return JointDensity::point_mass(nx, ny, i, j);
  }
  if (kind == "random") {
    return random_positive_target(nx, ny, parse_u64(arg, "--p0 random seed")).joint();
  }
  if (kind == "file") {
    JointDensity p = load_density(arg);
    if (!p.same_shape(target.joint())) {
      throw UsageError("--p0 file is " + std::to_string(p.nx()) + "x" + std::to_string(p.ny()) +
                       " but the target is " + std::to_string(nx) + "x" + std::to_string(ny));
    }
    return p;
  }
  throw UsageError("unknown --p0 preset '" + s + "'");
}

// Options shared by run, verify and sample.
struct RunConfig {
  std::string target_path;
  std::string gen;
  std::string p0 = "uniform";
  double eps = 1e-10;
  std::size_t max_steps = 10000;
  std::string retain;
  std::string out_prefix;
  std::string format = "csv";

  void attach(CLI::App* app, const std::string& default_retain, double default_eps) {
    retain = default_retain;
    eps = default_eps;
    app->add_option("--target", target_path, "Target density JSON file");
    app->add_option("--gen", gen, "Generate the target: nx,ny,seed[,conc]");
    app->add_option("--p0", p0, "uniform | degenerate:i,j | random:seed | file:path")
        ->capture_default_str();
    app->add_option("--eps", eps, "Stop once D(p(t)|pi) <= eps")->capture_default_str();
    app->add_option("--max-steps", max_steps, "Maximum number of half-steps")->capture_default_str();
    app->add_option("--retain", retain, "all | none | thin:k")->capture_default_str();
    app->add_option("--out-prefix", out_prefix, "Write outputs to <prefix>.<kind>.<ext>");
    app->add_option("--format", format, "Trace format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  }

  Target load_target() const {
    if (target_path.empty() == gen.empty()) {
      throw UsageError("exactly one of --target and --gen is required");
    }
    if (!(eps > 0.0)) throw UsageError("--eps must be positive");
    if (max_steps < 1) throw UsageError("--max-steps must be >= 1");
    if (!gen.empty()) return generate(parse_gen(gen));
    // Positivity is enforced by the engine so that an infinite D(p0|pi)
    // can be reported as such.
    return make_target(load_density(target_path), false);
  }
};

void emit(const RunConfig& cfg, const std::string& kind, const std::string& ext,
          const std::string& payload) {
  if (cfg.out_prefix.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  write_file_atomic(cfg.out_prefix + "." + kind + "." + ext, payload);
}

// Summary and diagnostics go to stdout when payloads go to files.
std::ostream& info_stream(const RunConfig& cfg) {
  return cfg.out_prefix.empty() ? std::cerr : std::cout;
}

DATrace run_trace(const RunConfig& cfg, const Target& target, const JointDensity& p0) {
  DATrace trace = run(p0, target, cfg.max_steps, cfg.eps, parse_retain(cfg.retain));
  if (trace.stop_reason() == StopReason::InfiniteInitialDivergence) {
    throw HypothesisViolation("D(p0|pi) is infinite: p0 puts mass where the target has none; the "
                              "hypothesis D(p0|pi) < inf is violated");
  }
  return trace;
}

int cmd_gen(const GenSpec& g, const std::string& out) {
  const Target target = generate(g);
  const std::string payload = density_to_json(target.joint()).dump(2) + "\n";
  std::ostream& info = out.empty() ? std::cerr : std::cout;
  if (out.empty()) {
    std::cout << payload;
  } else {
    write_file_atomic(out, payload);
  }
  info << "min_entry=" << format_real(target.joint().min_entry())
       << " strictly_positive=" << (target.strictly_positive() ? "true" : "false") << "\n";
  return kExitOk;
}

int cmd_run(const RunConfig& cfg) {
  const Target target = cfg.load_target();
  const JointDensity p0 = parse_p0(cfg.p0, target);
  std::ostream& info = info_stream(cfg);
  DATrace trace = run(p0, target, cfg.max_steps, cfg.eps, parse_retain(cfg.retain));
  if (cfg.format == "csv") {
    emit(cfg, "trace", "csv", trace_to_csv(trace));
  } else {
    emit(cfg, "trace", "json", trace_to_json(trace).dump(2));
  }
  const TraceRecord& last = trace.final_record();
  info << "stop_reason=" << to_string(trace.stop_reason()) << " half_steps=" << last.t
       << " final_D=" << last.d_to_target << " final_V=" << format_real(last.tv_to_target) << "\n";
  if (trace.stop_reason() == StopReason::InfiniteInitialDivergence) {
    std::cerr << "error: D(p0|pi) is infinite; the hypothesis D(p0|pi) < inf is violated\n";
    return kExitHypothesis;
  }
  return kExitOk;
}

struct VerifyOptions {
  std::string checks = "lemma1,lemma2,lemma3,cauchy,lsc,reconstruction,detailed_balance";
  std::optional<std::size_t> t;
  std::optional<std::size_t> n;
};

// Evenly spaced subset of the retained iterates with t >= 1.
std::vector<std::size_t> cauchy_indices(const DATrace& trace, std::size_t max_count) {
  std::vector<std::size_t> all;
  for (std::size_t t : trace.retained_indices()) {
    if (t >= 1) all.push_back(t);
  }
  if (all.size() <= max_count) return all;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < max_count; ++k) out.push_back(all[k * (all.size() - 1) / (max_count - 1)]);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int cmd_verify(const RunConfig& cfg, const VerifyOptions& opt) {
  const Target target = cfg.load_target();
  const JointDensity p0 = parse_p0(cfg.p0, target);
  const std::vector<std::string> known = {"lemma1", "lemma2", "lemma3", "cauchy",
                                          "lsc", "reconstruction", "detailed_balance"};
  std::vector<std::string> selected;
  for (const auto& c : split(opt.checks, ',')) {
    if (std::find(known.begin(), known.end(), c) == known.end()) {
      throw UsageError("unknown check '" + c + "'");
    }
    selected.push_back(c);
  }
  auto wants = [&](const char* c) {
    return std::find(selected.begin(), selected.end(), c) != selected.end();
  };

  const DATrace trace = run_trace(cfg, target, p0);
  const std::size_t last = trace.final_t();
  std::vector<LemmaReport> reports;

  // Explicit --t/--n must be in range; default grids are clipped to the trace.
  auto t_values = [&](std::size_t lo, std::vector<std::size_t> defaults) {
    if (opt.t) {
      if (*opt.t < lo) throw UsageError("--t must be >= " + std::to_string(lo) + " for this check");
      return std::vector<std::size_t>{*opt.t};
    }
    return defaults;
  };
  auto n_values = [&](std::size_t lo) {
    if (opt.n) return std::vector<std::size_t>{*opt.n};
    std::vector<std::size_t> ns;
    for (std::size_t n = lo; n <= 8; ++n) ns.push_back(n);
    return ns;
  };
  auto in_range = [&](std::size_t hi) {
    if (hi <= last) return true;
    if (opt.t || opt.n) {
      throw StateNotRetained("iterate t=" + std::to_string(hi) + " is past the end of the trace (t=" +
                             std::to_string(last) + ")");
    }
    return false;
  };

  if (wants("lemma1")) {
    std::vector<std::size_t> ts;
    for (std::size_t t = 0; t < last; ++t) ts.push_back(t);
    for (std::size_t t : t_values(0, ts)) {
      if (in_range(t + 1)) reports.push_back(lemma1_check(trace, t));
    }
  }
  if (wants("lemma2")) {
    for (std::size_t t : t_values(1, {1, 2, 3})) {
      for (std::size_t n : n_values(1)) {
        if (n >= 1 && in_range(t + n)) reports.push_back(lemma2_check(trace, t, n));
      }
    }
  }
  if (wants("lemma3")) {
    for (std::size_t t : t_values(1, {1, 2, 3})) {
      for (std::size_t n : n_values(0)) {
        if (in_range(t + n)) reports.push_back(lemma3_check(trace, t, n));
      }
    }
  }
  if (wants("cauchy")) {
    const auto idx = cauchy_indices(trace, 16);
    for (auto& r : cauchy_check(trace, idx)) reports.push_back(std::move(r));
  }
  if (wants("lsc")) {
    const std::size_t t = opt.t.value_or(1);
    if (t < last || opt.t) {
      if (t > last) throw StateNotRetained("--t is past the end of the trace");
      reports.push_back(lsc_gap(trace, t, opt.n.value_or(last - t)));
    }
  }
  if (wants("reconstruction")) reports.push_back(reconstruction_check(target));
  if (wants("detailed_balance")) {
    reports.push_back(detailed_balance_check(target, Axis::X));
    reports.push_back(detailed_balance_check(target, Axis::Y));
  }

  emit(cfg, "verify", "json", verification_to_json(reports).dump(2));
  const ReportSummary s = summarize(reports);
  info_stream(cfg) << "checks_run=" << s.checks_run << " passes=" << s.passes
                   << " failures=" << s.failures << " trace_stop=" << to_string(trace.stop_reason())
                   << " half_steps=" << last << "\n";
  return s.failures == 0 ? kExitOk : kExitCheckFailure;
}

struct SampleOptions {
  std::size_t replicas = 100000;
  std::uint64_t seed = 1;
  std::string times = "0,2,20";
  std::optional<std::uint64_t> budget;
  std::string draws_path;
};

// Consistency is asserted only when the 5-sigma scale is meaningful.
constexpr std::size_t kMinAssertedReplicas = 100;

std::uint64_t resolve_budget(const SampleOptions& opt) {
  if (opt.budget) return *opt.budget;
  if (const char* env = std::getenv("DA_ENTROPY_BUDGET")) return parse_u64(env, "DA_ENTROPY_BUDGET");
  return kDefaultSampleBudget;
}

int cmd_sample(const RunConfig& cfg, const SampleOptions& opt) {
  const Target target = cfg.load_target();
  const JointDensity p0 = parse_p0(cfg.p0, target);
  if (opt.replicas < 1) throw UsageError("--replicas must be >= 1");
  const auto times = parse_index_list(opt.times, "--times");
  const std::size_t horizon = *std::max_element(times.begin(), times.end());

  if (relative_entropy(p0, target.joint()).is_infinite()) {
    throw HypothesisViolation("D(p0|pi) is infinite; the hypothesis D(p0|pi) < inf is violated");
  }
  if (!target.strictly_positive()) throw TargetNotPositive("sample: target has a zero cell");

  const ChainDraws draws = run_chains(target, p0, opt.replicas, horizon, opt.seed, resolve_budget(opt));
  const DATrace exact = run_fixed(p0, target, horizon, Retention::all());
  const auto entries = consistency_report(draws, exact, times);
  const bool asserted = opt.replicas >= kMinAssertedReplicas;

  if (!opt.draws_path.empty()) write_file_atomic(opt.draws_path, draws_to_csv(draws));
  emit(cfg, "consistency", "json", consistency_to_json(entries, opt.replicas, opt.seed, asserted).dump(2));

  bool ok = true;
  std::ostream& info = info_stream(cfg);
  for (const auto& e : entries) {
    info << "t=" << e.t << " tv=" << format_real(e.tv) << " bound=" << format_real(5.0 * e.scale)
         << (e.within_bound() ? " ok" : " EXCEEDED") << "\n";
    ok = ok && e.within_bound();
  }
  if (!asserted) info << "replicas < " << kMinAssertedReplicas << ": bounds reported, not asserted\n";
  return (!asserted || ok) ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact density evolution and convergence certificates for data augmentation"};
  app.require_subcommand(1);

  GenSpec gen_spec;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "Write a random strictly positive target as JSON");
  gen->add_option("--nx", gen_spec.nx, "Size of X")->required();
  gen->add_option("--ny", gen_spec.ny, "Size of Y")->required();
  gen->add_option("--seed", gen_spec.seed, "Generator seed")->required();
  gen->add_option("--conc", gen_spec.concentration, "Gamma concentration")->capture_default_str();
  gen->add_option("--out", gen_out, "Output path (stdout when omitted)");

  RunConfig run_cfg;
  CLI::App* run_cmd = app.add_subcommand("run", "Iterate the density recursion and export the trace");
  run_cfg.attach(run_cmd, "none", 1e-10);

  RunConfig verify_cfg;
  VerifyOptions verify_opt;
  CLI::App* verify = app.add_subcommand("verify", "Certify the convergence identities on a trace");
  verify_cfg.attach(verify, "all", 1e-16);
  verify->add_option("--checks", verify_opt.checks, "Comma-separated checks")->capture_default_str();
  verify->add_option("--t", verify_opt.t, "Restrict checks to this t");
  verify->add_option("--n", verify_opt.n, "Restrict checks to this n (horizon for lsc)");

  RunConfig sample_cfg;
  SampleOptions sample_opt;
  CLI::App* sample = app.add_subcommand("sample", "Compare sampled chains with the exact iterates");
  sample_cfg.attach(sample, "all", 1e-10);
  sample->add_option("--replicas", sample_opt.replicas, "Independent chains")->capture_default_str();
  sample->add_option("--seed", sample_opt.seed, "Sampler seed")->capture_default_str();
  sample->add_option("--times", sample_opt.times, "Comma-separated half-step indices")
      ->capture_default_str();
  sample->add_option("--budget", sample_opt.budget, "Cap on replicas * half_steps");
  sample->add_option("--draws", sample_opt.draws_path, "Write draws CSV (replica,t,x,y)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_spec, gen_out);
    if (*run_cmd) return cmd_run(run_cfg);
    if (*verify) return cmd_verify(verify_cfg, verify_opt);
    if (*sample) return cmd_sample(sample_cfg, sample_opt);
  } catch (const HypothesisViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const PositivityViolation& e) {
    std::cerr << "error: " << e.what() << " (the target must be strictly positive)\n";
    return kExitHypothesis;
  } catch (const TargetNotPositive& e) {
    std::cerr << "error: " << e.what() << " (the target must be strictly positive)\n";
    return kExitHypothesis;
  } catch (const NotConverged& e) {
    std::cerr << "config error: " << e.what() << "; raise --max-steps or --eps\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
