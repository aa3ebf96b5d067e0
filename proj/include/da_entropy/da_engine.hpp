#pragma once

// Exact density evolution of the two-component data augmentation sampler.
//
// One half-step maps p(t) to p(t+1):
//   t even:  p(t+1)(x, y) = p(t)_Y(y) * pi(x | y)   (refresh X given Y)
//   t odd:   p(t+1)(x, y) = p(t)_X(x) * pi(y | x)   (refresh Y given X)
// so t = 0 counts as even and the first update redraws X.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "da_entropy/dist_core.hpp"
#include "da_entropy/errors.hpp"
#include "da_entropy/ext_real.hpp"
#include "da_entropy/info_metrics.hpp"

namespace daent {

enum class Update { None, RefreshX, RefreshY };

inline constexpr const char* to_string(Update u) {
  switch (u) {
    case Update::None: return "None";
    case Update::RefreshX: return "RefreshX";
    case Update::RefreshY: return "RefreshY";
  }
  return "?";
}

struct DAState {
  std::size_t t = 0;
  JointDensity density;
  Update last_update = Update::None;
};

struct TraceRecord {
  std::size_t t = 0;
  ExtReal d_to_target;
  double tv_to_target = 0.0;
  // D(p(t) | p(t+1)); absent on the last record.
  std::optional<ExtReal> d_step;
  // |D(p(t)|pi) - D(p(t)|p(t+1)) - D(p(t+1)|pi)|; absent on the last record
  // or when a term is infinite.
  std::optional<double> lemma1_residual;
  // Renormalization drift of the composition that produced p(t).
  double renorm_drift = 0.0;
};

enum class StopReason { Converged, MaxIters, InfiniteInitialDivergence };

inline constexpr const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "Converged";
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::InfiniteInitialDivergence: return "InfiniteInitialDivergence";
  }
  return "?";
}

/// Which iterates a trace keeps. The final iterate is always kept.
class Retention {
 public:
  static Retention all() { return Retention(Kind::All, 1); }
  static Retention none() { return Retention(Kind::None, 0); }
  static Retention thin(std::size_t every) {
    if (every == 0) throw std::invalid_argument("Retention::thin: k must be >= 1");
    return Retention(Kind::Thin, every);
  }

  bool keeps(std::size_t t) const {
    switch (kind_) {
      case Kind::All: return true;
      case Kind::None: return false;
      case Kind::Thin: return t % every_ == 0;
    }
    return false;
  }
  bool is_none() const { return kind_ == Kind::None; }
  std::string to_string() const {
    switch (kind_) {
      case Kind::All: return "all";
      case Kind::None: return "none";
      case Kind::Thin: return "thin:" + std::to_string(every_);
    }
    return "?";
  }

 private:
  enum class Kind { All, None, Thin };
  Retention(Kind k, std::size_t every) : kind_(k), every_(every) {}

  Kind kind_;
  std::size_t every_;
};

class DATrace {
 public:
  DATrace(Target target, Retention retention)
      : target_(std::move(target)), retention_(retention) {}

  const Target& target() const { return target_; }
  const std::vector<TraceRecord>& records() const { return records_; }
  const std::vector<DAState>& states() const { return states_; }
  StopReason stop_reason() const { return stop_reason_; }
  const Retention& retention() const { return retention_; }
  std::size_t final_t() const { return records_.empty() ? 0 : records_.back().t; }
  const TraceRecord& final_record() const { return records_.back(); }

  const DAState* find_state(std::size_t t) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), t,
                               [](const DAState& s, std::size_t v) { return s.t < v; });
    return (it != states_.end() && it->t == t) ? &*it : nullptr;
  }
  bool retains(std::size_t t) const { return find_state(t) != nullptr; }
  const JointDensity& density_at(std::size_t t) const {
    const DAState* s = find_state(t);
    if (s == nullptr) {
      throw StateNotRetained("iterate t=" + std::to_string(t) + " is not retained (retain=" +
                             retention_.to_string() + ", final t=" + std::to_string(final_t()) + ")");
    }
    return s->density;
  }
  std::vector<std::size_t> retained_indices() const {
    std::vector<std::size_t> out;
    out.reserve(states_.size());
    for (const auto& s : states_) out.push_back(s.t);
    return out;
  }

  // Assembly interface for run() and for hand-built traces in tests.
  void push_record(TraceRecord r) { records_.push_back(std::move(r)); }
  void push_state(DAState s) {
    if (!states_.empty() && states_.back().t >= s.t) {
      throw std::invalid_argument("DATrace: states must be pushed in increasing t");
    }
    states_.push_back(std::move(s));
  }
  void set_stop_reason(StopReason r) { stop_reason_ = r; }

 private:
  Target target_;
  Retention retention_;
  std::vector<TraceRecord> records_;
  std::vector<DAState> states_;
  StopReason stop_reason_ = StopReason::MaxIters;
};

namespace detail {

// The half-step map without the positivity precondition.
inline std::pair<DAState, double> half_step_unchecked(const DAState& s, const Target& target) {
  if (!s.density.same_shape(target.joint())) {
    throw DimensionMismatch("da_half_step: density and target grids differ");
  }
  if (s.t % 2 == 0) {
    Composition c = compose_tracked(marginal(s.density, Axis::Y), target.cond_x_given_y());
    return {DAState{s.t + 1, std::move(c.joint), Update::RefreshX}, c.renorm_drift};
  }
  Composition c = compose_tracked(marginal(s.density, Axis::X), target.cond_y_given_x());
  return {DAState{s.t + 1, std::move(c.joint), Update::RefreshY}, c.renorm_drift};
}

inline void require_positive(const Target& target, const char* who) {
  if (!target.strictly_positive()) {
    throw TargetNotPositive(std::string(who) + ": target has a zero cell");
  }
}

}  // namespace detail

inline DAState initial_state(JointDensity p0) { return DAState{0, std::move(p0), Update::None}; }

inline DAState da_half_step(const DAState& s, const Target& target) {
  if (!s.density.same_shape(target.joint())) {
    throw DimensionMismatch("da_half_step: density and target grids differ");
  }
  detail::require_positive(target, "da_half_step");
  return detail::half_step_unchecked(s, target).first;
}

namespace detail {

// eps <= 0 disables the convergence stop.
inline DATrace run_impl(const JointDensity& p0, const Target& target, std::size_t max_half_steps,
                        double eps, Retention retain) {
  if (!p0.same_shape(target.joint())) throw DimensionMismatch("run: p0 and target grids differ");

  DATrace trace(target, retain);
  const JointDensity& pi = target.joint();

  DAState cur = initial_state(p0);
  ExtReal d_cur = relative_entropy(cur.density, pi);
  if (d_cur.is_infinite()) {
    trace.push_record(TraceRecord{0, d_cur, total_variation(cur.density, pi), std::nullopt,
                                  std::nullopt, 0.0});
    trace.push_state(std::move(cur));
    trace.set_stop_reason(StopReason::InfiniteInitialDivergence);
    return trace;
  }
  detail::require_positive(target, "run");

  double drift_cur = 0.0;
  for (;;) {
    TraceRecord rec{cur.t, d_cur, total_variation(cur.density, pi), std::nullopt, std::nullopt,
                    drift_cur};
    const bool converged = eps > 0.0 && d_cur.value() <= eps;
    if (converged || cur.t >= max_half_steps) {
      trace.push_record(rec);
      trace.push_state(std::move(cur));
      trace.set_stop_reason(converged ? StopReason::Converged : StopReason::MaxIters);
      return trace;
    }
    auto [next, drift_next] = detail::half_step_unchecked(cur, target);
    const ExtReal d_step = relative_entropy(cur.density, next.density);
    const ExtReal d_next = relative_entropy(next.density, pi);
    rec.d_step = d_step;
    if (d_step.is_finite() && d_next.is_finite()) {
      rec.lemma1_residual = std::abs(d_cur.value() - d_step.value() - d_next.value());
    }
    trace.push_record(rec);
    if (retain.keeps(cur.t)) trace.push_state(std::move(cur));
    cur = std::move(next);
    d_cur = d_next;
    drift_cur = drift_next;
  }
}

}  // namespace detail

/// Iterates half-steps from p0 until D(p(t)|pi) <= eps or t reaches
/// max_half_steps. An infinite D(p0|pi) ends the run at t = 0 before the
/// positivity check, so callers can tell the two hypothesis failures apart.
inline DATrace run(const JointDensity& p0, const Target& target, std::size_t max_half_steps,
                   double eps, Retention retain = Retention::all()) {
  if (max_half_steps < 1) throw std::invalid_argument("run: max_half_steps must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("run: eps must be positive");
  return detail::run_impl(p0, target, max_half_steps, eps, retain);
}

/// Exactly half_steps iterations with no convergence stop; the stop reason
/// is MaxIters unless D(p0|pi) is infinite.
inline DATrace run_fixed(const JointDensity& p0, const Target& target, std::size_t half_steps,
                         Retention retain = Retention::all()) {
  return detail::run_impl(p0, target, half_steps, 0.0, retain);
}

/// Largest entrywise deviation from pi over two half-steps started at pi.
inline double fixed_point_residual(const Target& target) {
  const JointDensity& pi = target.joint();
  DAState s = initial_state(pi);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    s = detail::half_step_unchecked(s, target).first;
    for (std::size_t c = 0; c < pi.size(); ++c) {
      worst = std::max(worst, std::abs(s.density.weights()[c] - pi.weights()[c]));
    }
  }
  return worst;
}

}  // namespace daent
