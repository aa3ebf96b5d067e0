#pragma once

// Stochastic data augmentation chains, used to cross-check the exact
// density recursion. Replica r draws from its own substream seeded by
// (seed, r), so the output does not depend on execution order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "da_entropy/da_engine.hpp"
#include "da_entropy/dist_core.hpp"
#include "da_entropy/errors.hpp"
#include "da_entropy/info_metrics.hpp"
#include "da_entropy/random.hpp"

namespace daent {

inline constexpr std::uint64_t kDefaultSampleBudget = 200'000'000;

struct Cell {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

class ChainDraws {
 public:
  ChainDraws(std::uint64_t seed, std::size_t replicas, std::size_t half_steps, std::size_t nx,
             std::size_t ny)
      : seed_(seed), replicas_(replicas), half_steps_(half_steps), nx_(nx), ny_(ny),
        cells_(replicas * (half_steps + 1)) {}

  std::uint64_t seed() const { return seed_; }
  std::size_t replicas() const { return replicas_; }
  std::size_t half_steps() const { return half_steps_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  Cell at(std::size_t replica, std::size_t t) const { return cells_[replica * (half_steps_ + 1) + t]; }
  Cell& at(std::size_t replica, std::size_t t) { return cells_[replica * (half_steps_ + 1) + t]; }

  friend bool operator==(const ChainDraws&, const ChainDraws&) = default;

 private:
  std::uint64_t seed_;
  std::size_t replicas_;
  std::size_t half_steps_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<Cell> cells_;
};

struct EmpiricalDensity {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t n = 0;

  JointDensity to_joint() const {
    std::vector<double> w(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
      w[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    }
    return JointDensity::normalize(nx, ny, std::move(w));
  }
};

namespace detail {

// Inverse-CDF lookup over a fixed ordering.
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const double> probs) : cdf_(probs.size()) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      acc.add(probs[k]);
      cdf_[k] = acc.value();
    }
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
    return std::min(k, cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

inline std::vector<CategoricalTable> slice_tables(const ConditionalKernel& k) {
  std::vector<CategoricalTable> tables;
  tables.reserve(k.slice_count());
  std::vector<double> slice(k.slice_length());
  for (std::size_t s = 0; s < k.slice_count(); ++s) {
    for (std::size_t e = 0; e < slice.size(); ++e) slice[e] = k.at(s, e);
    tables.emplace_back(slice);
  }
  return tables;
}

}  // namespace detail

/// replicas independent chains of length half_steps + 1, each started from
/// p0 and refreshed with the same parity convention as the exact engine.
inline ChainDraws run_chains(const Target& target, const JointDensity& p0, std::size_t replicas,
                             std::size_t half_steps, std::uint64_t seed,
                             std::uint64_t budget = kDefaultSampleBudget) {
  detail::require_positive(target, "run_chains");
  if (!p0.same_shape(target.joint())) throw DimensionMismatch("run_chains: p0 and target grids differ");
  if (replicas < 1) throw std::invalid_argument("run_chains: replicas must be >= 1");
  if (static_cast<double>(replicas) * static_cast<double>(half_steps) > static_cast<double>(budget)) {
    throw BudgetExceeded("run_chains: replicas * half_steps = " +
                         std::to_string(replicas * half_steps) + " exceeds budget " +
                         std::to_string(budget));
  }
  const std::size_t ny = target.ny();
  const detail::CategoricalTable start(p0.weights());
  const auto x_given_y = detail::slice_tables(target.cond_x_given_y());
  const auto y_given_x = detail::slice_tables(target.cond_y_given_x());

  ChainDraws draws(seed, replicas, half_steps, target.nx(), ny);
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(substream_seed(seed, r));
    const std::size_t c = start.draw(rng);
    Cell cur{static_cast<std::uint32_t>(c / ny), static_cast<std::uint32_t>(c % ny)};
    draws.at(r, 0) = cur;
    for (std::size_t t = 0; t < half_steps; ++t) {
      if (t % 2 == 0) {
        cur.x = static_cast<std::uint32_t>(x_given_y[cur.y].draw(rng));
      } else {
        cur.y = static_cast<std::uint32_t>(y_given_x[cur.x].draw(rng));
      }
      draws.at(r, t + 1) = cur;
    }
  }
  return draws;
}

/// Cross-replica histogram at time t.
inline EmpiricalDensity empirical_at(const ChainDraws& draws, std::size_t t) {
  if (t > draws.half_steps()) {
    throw IndexOutOfRange("empirical_at: t=" + std::to_string(t) + " beyond half_steps=" +
                          std::to_string(draws.half_steps()));
  }
  EmpiricalDensity e{draws.nx(), draws.ny(), std::vector<std::uint64_t>(draws.nx() * draws.ny(), 0),
                     draws.replicas()};
  for (std::size_t r = 0; r < draws.replicas(); ++r) {
    const Cell c = draws.at(r, t);
    ++e.counts[c.x * draws.ny() + c.y];
  }
  return e;
}

/// Counts of (value at t) -> (value at t + 2) for one coordinate. For axis X,
/// t must be odd (X freshly drawn); for axis Y, t must be even and >= 2.
inline DenseMatrix empirical_transitions(const ChainDraws& draws, Axis axis, std::size_t t) {
  const bool ok = axis == Axis::X ? (t % 2 == 1) : (t % 2 == 0 && t >= 2);
  if (!ok) throw std::invalid_argument("empirical_transitions: t has the wrong parity for this axis");
  if (t + 2 > draws.half_steps()) throw IndexOutOfRange("empirical_transitions: t + 2 beyond draws");
  const std::size_t n = axis == Axis::X ? draws.nx() : draws.ny();
  DenseMatrix counts(n, n, 0.0);
  for (std::size_t r = 0; r < draws.replicas(); ++r) {
    const Cell a = draws.at(r, t);
    const Cell b = draws.at(r, t + 2);
    if (axis == Axis::X) {
      counts(a.x, b.x) += 1.0;
    } else {
      counts(a.y, b.y) += 1.0;
    }
  }
  return counts;
}

struct ConsistencyEntry {
  std::size_t t = 0;
  double tv = 0.0;
  // sqrt(nx * ny / replicas); consistency is asserted at 5 * scale.
  double scale = 0.0;
  bool within_bound() const { return tv <= 5.0 * scale; }
};

inline std::vector<ConsistencyEntry> consistency_report(const ChainDraws& draws, const DATrace& trace,
                                                        const std::vector<std::size_t>& times) {
  const double scale = std::sqrt(static_cast<double>(draws.nx() * draws.ny()) /
                                 static_cast<double>(draws.replicas()));
  std::vector<ConsistencyEntry> out;
  out.reserve(times.size());
  for (std::size_t t : times) {
    const JointDensity emp = empirical_at(draws, t).to_joint();
    out.push_back({t, total_variation(emp, trace.density_at(t)), scale});
  }
  return out;
}

}  // namespace daent
