#pragma once

// Numerical certificates for the identities and inequalities behind the
// convergence of the data augmentation recursion. Every check reads
// retained iterates from a DATrace and never recomputes the recursion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "da_entropy/da_engine.hpp"
#include "da_entropy/dist_core.hpp"
#include "da_entropy/errors.hpp"
#include "da_entropy/ext_real.hpp"
#include "da_entropy/info_metrics.hpp"

namespace daent {

inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kInequalityTolerance = 1e-10;
inline constexpr double kDetailedBalanceTolerance = 1e-12;
inline constexpr double kLscFloor = 1e-6;
inline constexpr double kDefaultIncompatibilityThreshold = 0.01;

enum class CheckName {
  Lemma1,
  Lemma2Even,
  Lemma2Odd,
  Lemma3,
  Cauchy,
  LSC,
  DetailedBalance,
  Reconstruction,
};

inline constexpr const char* to_string(CheckName n) {
  switch (n) {
    case CheckName::Lemma1: return "Lemma1";
    case CheckName::Lemma2Even: return "Lemma2Even";
    case CheckName::Lemma2Odd: return "Lemma2Odd";
    case CheckName::Lemma3: return "Lemma3";
    case CheckName::Cauchy: return "Cauchy";
    case CheckName::LSC: return "LSC";
    case CheckName::DetailedBalance: return "DetailedBalance";
    case CheckName::Reconstruction: return "Reconstruction";
  }
  return "?";
}

/// Both sides of one certified relation.
///
/// Identities pass when |residual| <= tolerance. Inequalities lhs <= rhs are
/// reported with slack = rhs - lhs and pass when slack >= -tolerance.
struct LemmaReport {
  CheckName name = CheckName::Lemma1;
  std::size_t t = 0;
  std::optional<std::size_t> n;
  ExtReal lhs;
  ExtReal rhs;
  double residual_or_slack = 0.0;
  bool pass = false;
  double tolerance = 0.0;
  bool identity = true;
  // Set when an infinite divergence made the relation vacuous or violated.
  bool infinite = false;
  std::string note;
};

namespace detail {

inline LemmaReport identity_report(CheckName name, std::size_t t, std::optional<std::size_t> n,
                                   ExtReal lhs, ExtReal rhs, double tol) {
  LemmaReport r{name, t, n, lhs, rhs, 0.0, false, tol, true, false, {}};
  if (lhs.is_infinite() || rhs.is_infinite()) {
    r.infinite = true;
    if (lhs.is_infinite() && rhs.is_infinite()) {
      r.pass = true;
      r.note = "both sides infinite; identity holds vacuously";
    } else {
      r.residual_or_slack = std::numeric_limits<double>::infinity();
      r.note = "one side infinite";
    }
    return r;
  }
  r.residual_or_slack = std::abs(lhs.value() - rhs.value());
  r.pass = r.residual_or_slack <= tol;
  return r;
}

// lhs <= rhs
inline LemmaReport inequality_report(CheckName name, std::size_t t, std::optional<std::size_t> n,
                                     ExtReal lhs, ExtReal rhs, double tol) {
  LemmaReport r{name, t, n, lhs, rhs, 0.0, false, tol, false, false, {}};
  if (lhs.is_infinite() || rhs.is_infinite()) {
    r.infinite = true;
    if (rhs.is_infinite()) {
      r.residual_or_slack = lhs.is_infinite() ? 0.0 : std::numeric_limits<double>::infinity();
      r.pass = true;
      r.note = "right side infinite";
    } else {
      r.residual_or_slack = -std::numeric_limits<double>::infinity();
      r.note = "left side infinite";
    }
    return r;
  }
  r.residual_or_slack = rhs.value() - lhs.value();
  r.pass = r.residual_or_slack >= -tol;
  return r;
}

}  // namespace detail

/// D(p|pi) = D(p|p') + D(p'|pi) for a density p and its half-step successor p'.
inline LemmaReport lemma1_report(const JointDensity& p, const JointDensity& next,
                                 const JointDensity& pi, std::size_t t) {
  const ExtReal lhs = relative_entropy(p, pi);
  const ExtReal rhs = relative_entropy(p, next) + relative_entropy(next, pi);
  return detail::identity_report(CheckName::Lemma1, t, std::nullopt, lhs, rhs, kIdentityTolerance);
}

inline LemmaReport lemma1_check(const DATrace& trace, std::size_t t) {
  return lemma1_report(trace.density_at(t), trace.density_at(t + 1), trace.target().joint(), t);
}

/// n even: D(p_t|p_{t+n}) <= D(p_t|p_{t+n-1}).
/// n odd:  D(p_t|p_{t+n}) = D(p_t|p_{t+1}) + D(p_{t+1}|p_{t+n}).
inline LemmaReport lemma2_check(const DATrace& trace, std::size_t t, std::size_t n) {
  if (t < 1 || n < 1) throw std::invalid_argument("lemma2_check: requires t >= 1 and n >= 1");
  const JointDensity& pt = trace.density_at(t);
  const JointDensity& ptn = trace.density_at(t + n);
  const ExtReal lhs = relative_entropy(pt, ptn);
  if (n % 2 == 0) {
    const ExtReal rhs = relative_entropy(pt, trace.density_at(t + n - 1));
    return detail::inequality_report(CheckName::Lemma2Even, t, n, lhs, rhs, kInequalityTolerance);
  }
  const JointDensity& pt1 = trace.density_at(t + 1);
  const ExtReal rhs = relative_entropy(pt, pt1) + relative_entropy(pt1, ptn);
  return detail::identity_report(CheckName::Lemma2Odd, t, n, lhs, rhs, kIdentityTolerance);
}

/// D(p_t|p_{t+n}) <= D(p_t|pi) - D(p_{t+n}|pi).
inline LemmaReport lemma3_check(const DATrace& trace, std::size_t t, std::size_t n) {
  if (t < 1) throw std::invalid_argument("lemma3_check: requires t >= 1");
  const JointDensity& pi = trace.target().joint();
  const JointDensity& pt = trace.density_at(t);
  const JointDensity& ptn = trace.density_at(t + n);
  const ExtReal lhs = relative_entropy(pt, ptn);
  const ExtReal d_t = relative_entropy(pt, pi);
  const ExtReal d_tn = relative_entropy(ptn, pi);
  if (d_tn.is_infinite()) {
    LemmaReport r{CheckName::Lemma3, t, n, lhs, ExtReal::infinity(), 0.0, false,
                  kInequalityTolerance, false, true, "D(p_{t+n}|pi) infinite"};
    return r;
  }
  return detail::inequality_report(CheckName::Lemma3, t, n, lhs, d_t - d_tn, kInequalityTolerance);
}

/// V(p_t, p_k) over all pairs of the listed iterates.
inline DenseMatrix cauchy_matrix(const DATrace& trace, const std::vector<std::size_t>& indices) {
  std::vector<const JointDensity*> ps;
  ps.reserve(indices.size());
  for (std::size_t t : indices) ps.push_back(&trace.density_at(t));
  DenseMatrix m(indices.size(), indices.size(), 0.0);
  for (std::size_t a = 0; a < ps.size(); ++a) {
    for (std::size_t b = a + 1; b < ps.size(); ++b) {
      const double v = total_variation(*ps[a], *ps[b]);
      m(a, b) = v;
      m(b, a) = v;
    }
  }
  return m;
}

/// V(p_t,p_k)^2 / 2 <= |D(p_t|pi) - D(p_k|pi)| for every listed pair t < k.
inline std::vector<LemmaReport> cauchy_check(const DATrace& trace,
                                             const std::vector<std::size_t>& indices) {
  const DenseMatrix v = cauchy_matrix(trace, indices);
  std::vector<ExtReal> d;
  d.reserve(indices.size());
  for (std::size_t t : indices) d.push_back(relative_entropy(trace.density_at(t), trace.target().joint()));
  std::vector<LemmaReport> out;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      const ExtReal lhs = ExtReal::finite(0.5 * v(a, b) * v(a, b));
      ExtReal rhs = ExtReal::infinity();
      if (d[a].is_finite() && d[b].is_finite()) rhs = ExtReal::finite(std::abs(d[a].value() - d[b].value()));
      const std::size_t lo = std::min(indices[a], indices[b]);
      const std::size_t hi = std::max(indices[a], indices[b]);
      out.push_back(detail::inequality_report(CheckName::Cauchy, lo, hi - lo, lhs, rhs,
                                              kInequalityTolerance));
    }
  }
  return out;
}

struct Reconstruction {
  JointDensity joint;
  // Largest total variation between the reconstruction from reference x0 = 0
  // and from any other reference row.
  double compatibility_residual;
};

namespace detail {

inline JointDensity reconstruct_at(const ConditionalKernel& cx, const ConditionalKernel& cy,
                                   std::size_t x0) {
  const std::size_t ny = cx.ny();
  std::vector<double> u(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double num = cy.prob(x0, j);
    const double den = cx.prob(x0, j);
    if (num <= 0.0 || den <= 0.0) {
      throw ZeroConditional("reconstruct_from_conditionals: zero kernel entry at (" +
                            std::to_string(x0) + ", " + std::to_string(j) + ")");
    }
    u[j] = num / den;
  }
  const double total = compensated_sum(u);
  for (double& x : u) x /= total;
  return compose(MarginalDensity::from_values(Axis::Y, std::move(u)), cx);
}

}  // namespace detail

/// The joint implied by a pair of conditionals: with reference row x0,
/// m_Y(y) is proportional to cy(y|x0) / cx(x0|y), and the joint is m_Y * cx.
inline Reconstruction reconstruct_from_conditionals(const ConditionalKernel& cx,
                                                    const ConditionalKernel& cy) {
  if (cx.direction() != Direction::XgivenY || cy.direction() != Direction::YgivenX) {
    throw AxisMismatch("reconstruct_from_conditionals: expected (XgivenY, YgivenX) kernels");
  }
  if (cx.nx() != cy.nx() || cx.ny() != cy.ny()) {
    throw DimensionMismatch("reconstruct_from_conditionals: kernel grids differ");
  }
  JointDensity base = detail::reconstruct_at(cx, cy, 0);
  double worst = 0.0;
  for (std::size_t x0 = 1; x0 < cx.nx(); ++x0) {
    worst = std::max(worst, total_variation(base, detail::reconstruct_at(cx, cy, x0)));
  }
  return {std::move(base), worst};
}

/// Reconstructs pi from its own conditionals; lhs is V(reconstruction, pi).
inline LemmaReport reconstruction_check(const Target& target) {
  const Reconstruction rec =
      reconstruct_from_conditionals(target.cond_x_given_y(), target.cond_y_given_x());
  const double tv = total_variation(rec.joint, target.joint());
  LemmaReport r{CheckName::Reconstruction, 0, std::nullopt, ExtReal::finite(tv),
                ExtReal::finite(0.0), std::max(tv, rec.compatibility_residual), false,
                kIdentityTolerance, true, false, {}};
  r.pass = r.residual_or_slack <= kIdentityTolerance;
  r.note = "compatibility_residual=" + format_real(rec.compatibility_residual);
  return r;
}

/// Finite-horizon stand-in for the liminf bound: gap = D(p_t|p_{t+N}) -
/// D(p_t|pi), passing when |gap| <= max(1e-6, 10 D(p_{t+N}|pi)).
inline LemmaReport lsc_gap(const DATrace& trace, std::size_t t, std::size_t horizon) {
  if (trace.stop_reason() != StopReason::Converged) {
    throw NotConverged("lsc_gap: trace stopped with " + std::string(to_string(trace.stop_reason())));
  }
  const JointDensity& pi = trace.target().joint();
  const JointDensity& pt = trace.density_at(t);
  const JointDensity& ptn = trace.density_at(t + horizon);
  const ExtReal lhs = relative_entropy(pt, ptn);
  const ExtReal rhs = relative_entropy(pt, pi);
  const ExtReal tail = relative_entropy(ptn, pi);
  LemmaReport r{CheckName::LSC, t, horizon, lhs, rhs, 0.0, false, 0.0, true, false,
                "finite-horizon proxy for a liminf bound"};
  if (lhs.is_infinite() || rhs.is_infinite() || tail.is_infinite()) {
    r.infinite = true;
    r.residual_or_slack = std::numeric_limits<double>::infinity();
    r.tolerance = std::numeric_limits<double>::infinity();
    r.pass = lhs.is_infinite() && rhs.is_infinite();
    return r;
  }
  r.residual_or_slack = lhs.value() - rhs.value();
  r.tolerance = std::max(kLscFloor, 10.0 * tail.value());
  r.pass = std::abs(r.residual_or_slack) <= r.tolerance;
  return r;
}

/// Transition matrix of the single-coordinate chain from one full sweep:
/// K(x -> x') = sum_y pi(y|x) pi(x'|y), dually for axis Y.
inline DenseMatrix induced_marginal_kernel(const Target& target, Axis axis) {
  detail::require_positive(target, "induced_marginal_kernel");
  const ConditionalKernel& cx = target.cond_x_given_y();
  const ConditionalKernel& cy = target.cond_y_given_x();
  const std::size_t nx = target.nx(), ny = target.ny();
  if (axis == Axis::X) {
    DenseMatrix k(nx, nx);
    for (std::size_t a = 0; a < nx; ++a) {
      for (std::size_t b = 0; b < nx; ++b) {
        CompensatedSum acc;
        for (std::size_t j = 0; j < ny; ++j) acc.add(cy.prob(a, j) * cx.prob(b, j));
        k(a, b) = acc.value();
      }
    }
    return k;
  }
  DenseMatrix k(ny, ny);
  for (std::size_t a = 0; a < ny; ++a) {
    for (std::size_t b = 0; b < ny; ++b) {
      CompensatedSum acc;
      for (std::size_t i = 0; i < nx; ++i) acc.add(cx.prob(i, a) * cy.prob(i, b));
      k(a, b) = acc.value();
    }
  }
  return k;
}

/// max over pairs of |m(a) K(a->b) - m(b) K(b->a)| with m the target marginal.
inline double detailed_balance_residual(const Target& target, Axis axis) {
  const DenseMatrix k = induced_marginal_kernel(target, axis);
  const MarginalDensity& m = axis == Axis::X ? target.marg_x() : target.marg_y();
  double worst = 0.0;
  for (std::size_t a = 0; a < k.rows(); ++a) {
    for (std::size_t b = a + 1; b < k.cols(); ++b) {
      worst = std::max(worst, std::abs(m[a] * k(a, b) - m[b] * k(b, a)));
    }
  }
  return worst;
}

inline LemmaReport detailed_balance_check(const Target& target, Axis axis) {
  const double res = detailed_balance_residual(target, axis);
  LemmaReport r{CheckName::DetailedBalance, 0, std::nullopt, ExtReal::finite(res),
                ExtReal::finite(0.0), res, res <= kDetailedBalanceTolerance,
                kDetailedBalanceTolerance, true, false, std::string("axis ") + to_string(axis)};
  return r;
}

struct ReportSummary {
  std::size_t checks_run = 0;
  std::size_t passes = 0;
  std::size_t failures = 0;
  // Largest |residual| (identities) or largest violation -slack (inequalities,
  // clamped at 0) per check name.
  std::map<std::string, double> worst_residual_by_lemma;
};

inline ReportSummary summarize(const std::vector<LemmaReport>& reports) {
  ReportSummary s;
  for (const auto& r : reports) {
    ++s.checks_run;
    (r.pass ? s.passes : s.failures) += 1;
    const double badness = r.identity ? std::abs(r.residual_or_slack)
                                      : std::max(0.0, -r.residual_or_slack);
    auto [it, inserted] = s.worst_residual_by_lemma.emplace(to_string(r.name), badness);
    if (!inserted) it->second = std::max(it->second, badness);
  }
  return s;
}

}  // namespace daent
