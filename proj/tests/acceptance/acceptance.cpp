// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero iff any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "da_entropy/da_entropy.hpp"

using namespace daent;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // 0 means unbounded
  std::function<Outcome()> body;
};

std::string fmt(double v) { return format_real(v); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Grid sizes spread from 2x2 to 20x30 over `count` instances.
std::pair<std::size_t, std::size_t> spread_size(std::size_t k, std::size_t count) {
  const std::size_t denom = count > 1 ? count - 1 : 1;
  return {2 + (k * 18) / denom, 2 + (k * 28) / denom};
}

JointDensity varied_start(std::size_t k, std::size_t nx, std::size_t ny) {
  switch (k % 3) {
    case 0: return JointDensity::uniform(nx, ny);
    case 1: return JointDensity::point_mass(nx, ny, k % nx, (k / 3) % ny);
    default: return random_positive_target(nx, ny, 9000 + k, 0.3).joint();
  }
}

// Shared by criteria 1, 2, 5 and 6.
struct LemmaOneCorpus {
  std::vector<DATrace> traces;
};

const LemmaOneCorpus& lemma1_corpus() {
  static const LemmaOneCorpus corpus = [] {
    LemmaOneCorpus c;
    for (std::size_t k = 0; k < 100; ++k) {
      const auto [nx, ny] = spread_size(k, 100);
      const Target target = random_positive_target(nx, ny, 1000 + k);
      c.traces.push_back(run_fixed(varied_start(k, nx, ny), target, 50));
    }
    return c;
  }();
  return corpus;
}

std::vector<DATrace> lemma2_traces() {
  std::vector<DATrace> out;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto [nx, ny] = spread_size(k, 20);
    out.push_back(run_fixed(varied_start(k, nx, ny), random_positive_target(nx, ny, 2000 + k), 12));
  }
  return out;
}

Outcome ac1_lemma1() {
  double worst = 0.0;
  std::size_t checks = 0;
  bool ok = true;
  for (const auto& trace : lemma1_corpus().traces) {
    for (std::size_t t = 0; t < 50; ++t) {
      const LemmaReport r = lemma1_check(trace, t);
      ok = ok && r.pass && !r.infinite && r.residual_or_slack <= 1e-10;
      worst = std::max(worst, r.residual_or_slack);
      ++checks;
    }
  }
  return {ok, std::to_string(checks) + " identities, worst residual " + sci(worst) + " (tol 1e-10)"};
}

Outcome ac2_monotone() {
  double worst_rise = 0.0;
  for (const auto& trace : lemma1_corpus().traces) {
    const auto& recs = trace.records();
    for (std::size_t k = 1; k < recs.size(); ++k) {
      worst_rise = std::max(worst_rise, recs[k].d_to_target.value() - recs[k - 1].d_to_target.value());
    }
  }
  return {worst_rise <= 1e-12, "largest increase of D(p_t|pi) " + sci(worst_rise) + " (tol 1e-12)"};
}

Outcome ac3_lemma2() {
  double worst_even = HUGE_VAL, worst_odd = 0.0;
  bool ok = true;
  for (const auto& trace : lemma2_traces()) {
    for (std::size_t t = 1; t <= 3; ++t) {
      for (std::size_t n = 1; n <= 8; ++n) {
        const LemmaReport r = lemma2_check(trace, t, n);
        if (n % 2 == 0) {
          worst_even = std::min(worst_even, r.residual_or_slack);
          ok = ok && r.residual_or_slack >= -1e-10;
        } else {
          worst_odd = std::max(worst_odd, r.residual_or_slack);
          ok = ok && r.residual_or_slack <= 1e-10;
        }
        ok = ok && r.pass;
      }
    }
  }
  return {ok, "min even slack " + sci(worst_even) + " (>= -1e-10), max odd residual " + sci(worst_odd) +
                  " (<= 1e-10)"};
}

Outcome ac4_lemma3() {
  double min_slack = HUGE_VAL, tight = 0.0;
  bool ok = true;
  for (const auto& trace : lemma2_traces()) {
    for (std::size_t t = 1; t <= 3; ++t) {
      for (std::size_t n = 0; n <= 8; ++n) {
        const LemmaReport r = lemma3_check(trace, t, n);
        min_slack = std::min(min_slack, r.residual_or_slack);
        ok = ok && r.pass && r.residual_or_slack >= -1e-10;
        if (n <= 1) {
          tight = std::max(tight, r.residual_or_slack);
          ok = ok && r.residual_or_slack <= 1e-10;
        }
      }
    }
  }
  return {ok, "min slack " + sci(min_slack) + " (>= -1e-10), max slack at n in {0,1} " + sci(tight) +
                  " (<= 1e-10)"};
}

Outcome ac5_pinsker() {
  double worst_trace = HUGE_VAL;
  for (const auto& trace : lemma1_corpus().traces) {
    for (const auto& r : trace.records()) {
      worst_trace = std::min(worst_trace, r.d_to_target.value() - 0.5 * r.tv_to_target * r.tv_to_target);
    }
  }
  Rng rng(5150);
  double worst_pairs = HUGE_VAL;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t nx = 1 + k % 8, ny = 1 + (k / 8) % 7;
    std::vector<double> a(nx * ny), b(nx * ny);
    for (double& v : a) v = rng.uniform() < 0.25 ? 0.0 : rng.gamma(0.5);
    for (double& v : b) v = rng.uniform() < 0.05 ? 0.0 : rng.gamma(0.5);
    if (compensated_sum(a) == 0.0) a[0] = 1.0;
    if (compensated_sum(b) == 0.0) b[0] = 1.0;
    const ExtReal gap = pinsker_gap(JointDensity::normalize(nx, ny, a), JointDensity::normalize(nx, ny, b));
    if (gap.is_finite()) worst_pairs = std::min(worst_pairs, gap.value());
  }
  return {worst_trace >= -1e-12 && worst_pairs >= -1e-12,
          "min D - V^2/2: trace steps " + sci(worst_trace) + ", 10000 random pairs " + sci(worst_pairs) +
              " (>= -1e-12)"};
}

Outcome ac6_cauchy() {
  double min_slack = HUGE_VAL;
  std::size_t pairs = 0;
  bool ok = true;
  for (const auto& trace : lemma1_corpus().traces) {
    for (const auto& r : cauchy_check(trace, trace.retained_indices())) {
      min_slack = std::min(min_slack, r.residual_or_slack);
      ok = ok && r.pass;
      ++pairs;
    }
  }
  return {ok, std::to_string(pairs) + " pairs, min slack of |dD| - V^2/2 " + sci(min_slack) +
                  " (>= -1e-10)"};
}

Outcome ac7_convergence() {
  bool ok = true;
  std::size_t worst_steps = 0;
  double worst_final = 0.0;
  const std::vector<std::pair<std::size_t, std::size_t>> sizes = {
      {2, 2}, {3, 7}, {10, 10}, {5, 40}, {25, 25}, {50, 1}, {1, 50}, {40, 30}, {50, 50}, {50, 50}};
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto [nx, ny] = sizes[k];
    const Target target = random_positive_target(nx, ny, 3000 + k);
    const DATrace trace = run(JointDensity::uniform(nx, ny), target, 10000, 1e-8, Retention::none());
    ok = ok && trace.stop_reason() == StopReason::Converged;
    worst_steps = std::max(worst_steps, trace.final_t());
    worst_final = std::max(worst_final, trace.final_record().d_to_target.value());
  }
  for (std::size_t seed = 0; seed < 40; ++seed) {
    const std::size_t nx = 1 + (seed * 7) % 50, ny = 1 + (seed * 13) % 50;
    const Target target = random_positive_target(nx, ny, 3100 + seed);
    const DATrace trace = run(JointDensity::uniform(nx, ny), target, 10000, 1e-8, Retention::none());
    ok = ok && trace.stop_reason() == StopReason::Converged;
    worst_steps = std::max(worst_steps, trace.final_t());
    worst_final = std::max(worst_final, trace.final_record().d_to_target.value());
  }
  double worst_ind = 0.0;
  Rng rng(77);
  for (std::size_t k = 0; k < 20; ++k) {
    const std::size_t nx = 1 + k % 6, ny = 1 + (k * 5) % 9;
    std::vector<double> px(nx), py(ny);
    for (double& v : px) v = rng.gamma(1.0) + 1e-3;
    for (double& v : py) v = rng.gamma(1.0) + 1e-3;
    const double sx = compensated_sum(px), sy = compensated_sum(py);
    for (double& v : px) v /= sx;
    for (double& v : py) v /= sy;
    const Target target = independence_target(MarginalDensity::from_values(Axis::X, px),
                                              MarginalDensity::from_values(Axis::Y, py));
    const DATrace trace = run_fixed(varied_start(k, nx, ny), target, 2);
    worst_ind = std::max(worst_ind, total_variation(trace.density_at(2), target.joint()));
  }
  ok = ok && worst_ind <= 1e-12;
  return {ok, "50 random targets up to 50x50: max half-steps " + std::to_string(worst_steps) +
                  " (<= 10000), max final D " + sci(worst_final) + " (<= 1e-8); independence TV after 2 " +
                  "half-steps " + sci(worst_ind) + " (<= 1e-12)"};
}

Outcome ac8_reconstruction() {
  double worst_tv = 0.0, worst_ref = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    const auto [nx, ny] = spread_size(k, 50);
    const Target target = random_positive_target(nx, ny, 4000 + k);
    const Reconstruction rec = reconstruct_from_conditionals(target.cond_x_given_y(), target.cond_y_given_x());
    worst_tv = std::max(worst_tv, total_variation(rec.joint, target.joint()));
    worst_ref = std::max(worst_ref, rec.compatibility_residual);
  }
  double min_incompatible = HUGE_VAL;
  for (std::size_t k = 0; k < 20; ++k) {
    const Target a = random_positive_target(3, 3, 4100 + 2 * k);
    const Target b = random_positive_target(3, 3, 4101 + 2 * k);
    min_incompatible = std::min(
        min_incompatible, reconstruct_from_conditionals(a.cond_x_given_y(), b.cond_y_given_x()).compatibility_residual);
  }
  const bool ok = worst_tv <= 1e-10 && worst_ref <= 1e-10 && min_incompatible > kDefaultIncompatibilityThreshold;
  return {ok, "own conditionals: max TV " + sci(worst_tv) + ", reference spread " + sci(worst_ref) +
                  " (<= 1e-10); incompatible pairs min residual " + fmt(min_incompatible) + " (> 0.01)"};
}

Outcome ac9_lsc() {
  bool ok = true;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < 30; ++k) {
    const auto [nx, ny] = spread_size(k, 30);
    const Target target = random_positive_target(nx, ny, 5000 + k);
    const DATrace trace = run(varied_start(k, nx, ny), target, 10000, 1e-16, Retention::all());
    if (trace.stop_reason() != StopReason::Converged || trace.final_t() < 2) {
      ok = false;
      continue;
    }
    const LemmaReport r = lsc_gap(trace, 1, trace.final_t() - 1);
    ok = ok && r.pass;
    worst_ratio = std::max(worst_ratio, std::abs(r.residual_or_slack) / r.tolerance);
  }
  return {ok, "30 converged traces: max |gap| / max(1e-6, 10 D(p_{1+N}|pi)) = " + sci(worst_ratio) + " (<= 1)"};
}

Outcome ac10_detailed_balance() {
  double worst = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    const auto [nx, ny] = spread_size(k, 50);
    const Target target = random_positive_target(nx, ny, 6000 + k);
    worst = std::max({worst, detailed_balance_residual(target, Axis::X), detailed_balance_residual(target, Axis::Y)});
  }
  return {worst <= 1e-12, "max residual over 50 targets, both axes " + sci(worst) + " (<= 1e-12)"};
}

Outcome ac11_sampler() {
  bool ok = true;
  std::string detail;
  const std::size_t replicas = 100000;
  const std::vector<std::size_t> times = {0, 2, 20};
  const std::vector<std::pair<std::size_t, std::size_t>> sizes = {{2, 2}, {4, 5}};
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto [nx, ny] = sizes[k];
    const Target target = random_positive_target(nx, ny, 7000 + k);
    for (const JointDensity& p0 : {JointDensity::uniform(nx, ny), JointDensity::point_mass(nx, ny, 0, 0)}) {
      const ChainDraws draws = run_chains(target, p0, replicas, 20, 7100 + k);
      const DATrace exact = run_fixed(p0, target, 20);
      for (const auto& e : consistency_report(draws, exact, times)) {
        const double bound = 5.0 * std::sqrt(static_cast<double>(nx * ny) / replicas);
        ok = ok && e.tv <= bound;
        detail += std::to_string(nx) + "x" + std::to_string(ny) + "@t" + std::to_string(e.t) + "=" +
                  sci(e.tv) + " ";
      }
    }
  }
  return {ok, "TV vs 5*sqrt(nx*ny/1e5) (2x2: 0.0316, 4x5: 0.0707): " + detail};
}

int run_cli_status(const std::string& args) {
  const std::string cmd = std::string(DA_ENTROPY_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac12_hypothesis() {
  const auto dir = std::filesystem::temp_directory_path() / "da_entropy_acceptance";
  std::filesystem::create_directories(dir);
  const auto holey = (dir / "holey.json").string();
  write_file_atomic(holey, R"({"nx":2,"ny":2,"w":[[0.5,0.0],[0.25,0.25]]})");
  const int code_infinite = run_cli_status("run --target " + holey);
  const int code_positivity = run_cli_status("run --target " + holey + " --p0 degenerate:0,0");
  std::filesystem::remove_all(dir);

  const JointDensity q = JointDensity::from_rows({{0.5, 0.0}, {0.25, 0.25}});
  const ExtReal d = relative_entropy(JointDensity::uniform(2, 2), q);
  const ExtReal gap = pinsker_gap(JointDensity::uniform(2, 2), q);
  const DATrace trace = run(JointDensity::uniform(2, 2), make_target(q, false), 10, 1e-10);
  const bool no_nan = !std::isnan(d.as_double()) && !std::isnan(gap.as_double()) &&
                      trace_to_csv(trace).find("nan") == std::string::npos;
  const bool ok = code_infinite == 3 && code_positivity == 3 && d.is_infinite() && gap.is_infinite() &&
                  trace.stop_reason() == StopReason::InfiniteInitialDivergence && no_nan;
  return {ok, "exit codes " + std::to_string(code_infinite) + "/" + std::to_string(code_positivity) +
                  " (want 3/3); D(uniform|q) = " + d.to_string() + "; stop reason " +
                  to_string(trace.stop_reason())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "One-step entropy decomposition", 10.0, ac1_lemma1},
      {2, "Monotone descent of D(p_t|pi)", 0.0, ac2_monotone},
      {3, "Multi-step even/odd relations", 0.0, ac3_lemma2},
      {4, "Telescoping step bound", 0.0, ac4_lemma3},
      {5, "Pinsker inequality", 0.0, ac5_pinsker},
      {6, "Cauchy bound V^2/2 <= |dD|", 0.0, ac6_cauchy},
      {7, "Convergence in relative entropy", 30.0, ac7_convergence},
      {8, "Uniqueness from two conditionals", 0.0, ac8_reconstruction},
      {9, "Lower-semicontinuity proxy", 0.0, ac9_lsc},
      {10, "Detailed balance of induced chains", 0.0, ac10_detailed_balance},
      {11, "Sampler consistency", 60.0, ac11_sampler},
      {12, "Hypothesis-violation paths", 0.0, ac12_hypothesis},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
      o.pass = false;
      o.detail += "; runtime over limit " + fmt(c.time_limit_s) + " s";
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << " AC" << c.id << " " << c.title << " [" << timing << "]: "
              << o.detail << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
