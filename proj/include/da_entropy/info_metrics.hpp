#pragma once

// Relative entropy (nats), total variation (sum of absolute differences, in
// [0, 2]) and Pinsker's bound D >= V^2 / 2.

#include <cmath>
#include <span>

#include "da_entropy/dist_core.hpp"
#include "da_entropy/errors.hpp"
#include "da_entropy/ext_real.hpp"
#include "da_entropy/numeric.hpp"

namespace daent {

namespace detail {

// (1 + d) log(1 + d) - d, accurate near d = 0 where the closed form cancels.
inline double entropy_integrand(double d) {
  if (std::abs(d) < 0.05) {
    // sum_{k>=2} (-1)^k d^k / (k (k - 1))
    double term = d * d;
    double acc = 0.0;
    for (int k = 2; k <= 18; ++k) {
      acc += ((k % 2 == 0) ? 1.0 : -1.0) * term / (k * (k - 1));
      term *= d;
    }
    return acc;
  }
  return (1.0 + d) * std::log1p(d) - d;
}

}  // namespace detail

/// D(p|q) for two pmfs over the same index set.
///
/// Evaluated as sum q * h((p - q) / q) with h(d) = (1+d) log(1+d) - d, which
/// equals p log(p/q) - p + q cell by cell: every term is nonnegative and
/// close pairs keep full relative precision. Cells with p = 0 contribute q,
/// and p > 0 = q gives infinity.
inline ExtReal relative_entropy(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionMismatch("relative_entropy: size mismatch");
  CompensatedSum acc;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double pc = p[c];
    const double qc = q[c];
    if (qc == 0.0) {
      if (pc > 0.0) return ExtReal::infinity();
      continue;
    }
    if (pc == 0.0) {
      acc.add(qc);
      continue;
    }
    acc.add(qc * detail::entropy_integrand((pc - qc) / qc));
  }
  // Mass mismatch of the two inputs (<= 2e-12) is the only source of a
  // negative total; divergences are reported as nonnegative.
  return ExtReal::finite(std::max(0.0, acc.value()));
}

inline ExtReal relative_entropy(const JointDensity& p, const JointDensity& q) {
  if (!p.same_shape(q)) throw DimensionMismatch("relative_entropy: grid shapes differ");
  return relative_entropy(p.weights(), q.weights());
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionMismatch("total_variation: size mismatch");
  CompensatedSum acc;
  for (std::size_t c = 0; c < p.size(); ++c) acc.add(std::abs(p[c] - q[c]));
  return acc.value();
}

inline double total_variation(const JointDensity& p, const JointDensity& q) {
  if (!p.same_shape(q)) throw DimensionMismatch("total_variation: grid shapes differ");
  return total_variation(p.weights(), q.weights());
}

/// D(p|q) - V(p,q)^2 / 2. Never below -1e-12 for valid inputs.
inline ExtReal pinsker_gap(const JointDensity& p, const JointDensity& q) {
  const ExtReal d = relative_entropy(p, q);
  const double v = total_variation(p, q);
  return d - ExtReal::finite(0.5 * v * v);
}

/// Relative entropy between the axis marginals of p and q.
inline ExtReal marginal_relative_entropy(const JointDensity& p, const JointDensity& q, Axis axis) {
  if (!p.same_shape(q)) throw DimensionMismatch("marginal_relative_entropy: grid shapes differ");
  const MarginalDensity mp = marginal(p, axis);
  const MarginalDensity mq = marginal(q, axis);
  return relative_entropy(mp.values(), mq.values());
}

}  // namespace daent
