#pragma once

// Finite joint, marginal and conditional distributions on an nx-by-ny grid.
//
// All grids are indexed (i, j) with i over X and j over Y and stored
// row-major. Every type is immutable after construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "da_entropy/errors.hpp"
#include "da_entropy/numeric.hpp"
#include "da_entropy/random.hpp"

namespace daent {

enum class Axis { X, Y };
enum class Direction { XgivenY, YgivenX };

inline constexpr Axis conditioning_axis(Direction d) {
  return d == Direction::XgivenY ? Axis::Y : Axis::X;
}

inline constexpr const char* to_string(Axis a) { return a == Axis::X ? "X" : "Y"; }
inline constexpr const char* to_string(Direction d) {
  return d == Direction::XgivenY ? "XgivenY" : "YgivenX";
}

// Mass within this distance of 1 is accepted as is.
inline constexpr double kMassTolerance = 1e-12;
// Mass within this distance of 1 is renormalized; beyond it is rejected.
inline constexpr double kRenormalizeLimit = 1e-9;

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionMismatch("DenseMatrix: data size does not match shape");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline void check_entries(std::span<const double> w, const char* what) {
  for (double v : w) {
    if (!std::isfinite(v)) throw InvalidDensity(std::string(what) + ": non-finite entry");
    if (v < 0.0) throw InvalidDensity(std::string(what) + ": negative entry");
  }
}

// Applies the mass policy in place: keep, renormalize, or reject.
inline void settle_mass(std::vector<double>& w, const char* what) {
  const double total = compensated_sum(w);
  const double err = std::abs(total - 1.0);
  if (err <= kMassTolerance) return;
  if (err > kRenormalizeLimit) {
    throw InvalidDensity(std::string(what) + ": total mass " + std::to_string(total) +
                         " is not 1");
  }
  for (double& v : w) v /= total;
}

}  // namespace detail

/// Probability mass function on the grid X x Y.
class JointDensity {
 public:
  /// Strict constructor. Weights must sum to 1 within 1e-9 and are
  /// renormalized when the error exceeds 1e-12.
  static JointDensity from_weights(std::size_t nx, std::size_t ny, std::vector<double> w) {
    check_shape(nx, ny, w.size());
    detail::check_entries(w, "JointDensity");
    detail::settle_mass(w, "JointDensity");
    return JointDensity(nx, ny, std::move(w));
  }

  /// Accepts arbitrary nonnegative weights and divides by their total.
  static JointDensity normalize(std::size_t nx, std::size_t ny, std::vector<double> w) {
    check_shape(nx, ny, w.size());
    detail::check_entries(w, "JointDensity");
    const double total = compensated_sum(w);
    if (!(total > 0.0)) throw InvalidDensity("JointDensity: total weight must be positive");
    for (double& v : w) v /= total;
    return JointDensity(nx, ny, std::move(w));
  }

  static JointDensity from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InvalidDensity("JointDensity: no rows");
    const std::size_t ny = rows.front().size();
    std::vector<double> w;
    w.reserve(rows.size() * ny);
    for (const auto& r : rows) {
      if (r.size() != ny) throw DimensionMismatch("JointDensity: ragged rows");
      w.insert(w.end(), r.begin(), r.end());
    }
    return from_weights(rows.size(), ny, std::move(w));
  }

  static JointDensity uniform(std::size_t nx, std::size_t ny) {
    check_shape(nx, ny, nx * ny);
    return JointDensity(nx, ny, std::vector<double>(nx * ny, 1.0 / static_cast<double>(nx * ny)));
  }

  static JointDensity point_mass(std::size_t nx, std::size_t ny, std::size_t i, std::size_t j) {
    check_shape(nx, ny, nx * ny);
    if (i >= nx || j >= ny) throw IndexOutOfRange("JointDensity: point mass outside grid");
    std::vector<double> w(nx * ny, 0.0);
    w[i * ny + j] = 1.0;
    return JointDensity(nx, ny, std::move(w));
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return w_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * ny_ + j]; }
  std::span<const double> weights() const { return w_; }
  double min_entry() const { return *std::min_element(w_.begin(), w_.end()); }
  bool same_shape(const JointDensity& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

  friend bool operator==(const JointDensity&, const JointDensity&) = default;

 private:
  friend JointDensity make_joint_unchecked(std::size_t, std::size_t, std::vector<double>);

  JointDensity(std::size_t nx, std::size_t ny, std::vector<double> w)
      : nx_(nx), ny_(ny), w_(std::move(w)) {}

  static void check_shape(std::size_t nx, std::size_t ny, std::size_t n) {
    if (nx == 0 || ny == 0) throw InvalidDensity("JointDensity: nx and ny must be >= 1");
    if (n != nx * ny) throw DimensionMismatch("JointDensity: weight count != nx*ny");
  }

  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> w_;
};

// For library code that has already normalized exactly.
inline JointDensity make_joint_unchecked(std::size_t nx, std::size_t ny, std::vector<double> w) {
  return JointDensity(nx, ny, std::move(w));
}

class MarginalDensity {
 public:
  static MarginalDensity from_values(Axis axis, std::vector<double> v) {
    if (v.empty()) throw InvalidDensity("MarginalDensity: empty");
    detail::check_entries(v, "MarginalDensity");
    detail::settle_mass(v, "MarginalDensity");
    return MarginalDensity(axis, std::move(v));
  }

  Axis axis() const { return axis_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const { return v_; }
  double min_entry() const { return *std::min_element(v_.begin(), v_.end()); }

 private:
  friend MarginalDensity marginal(const JointDensity&, Axis);

  MarginalDensity(Axis axis, std::vector<double> v) : axis_(axis), v_(std::move(v)) {}

  Axis axis_;
  std::vector<double> v_;
};

/// Family of conditional pmfs. Entries are stored in grid coordinates:
/// prob(i, j) is P(X=i | Y=j) for XgivenY and P(Y=j | X=i) for YgivenX.
/// Slices whose conditioning event had zero mass hold the uniform pmf and
/// are flagged undefined.
class ConditionalKernel {
 public:
  /// Validated constructor from a grid-coordinate matrix (nx rows, ny cols).
  static ConditionalKernel from_matrix(Direction dir, const DenseMatrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw InvalidDensity("ConditionalKernel: empty");
    detail::check_entries(m.data(), "ConditionalKernel");
    ConditionalKernel k(dir, m.rows(), m.cols());
    for (std::size_t s = 0; s < k.slice_count(); ++s) {
      std::vector<double> slice(k.slice_length());
      for (std::size_t e = 0; e < slice.size(); ++e) slice[e] = m.data()[k.index(s, e)];
      detail::settle_mass(slice, "ConditionalKernel slice");
      for (std::size_t e = 0; e < slice.size(); ++e) k.k_[k.index(s, e)] = slice[e];
    }
    return k;
  }

  Direction direction() const { return dir_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double prob(std::size_t i, std::size_t j) const { return k_[i * ny_ + j]; }

  // Slices are columns for XgivenY and rows for YgivenX.
  std::size_t slice_count() const { return dir_ == Direction::XgivenY ? ny_ : nx_; }
  std::size_t slice_length() const { return dir_ == Direction::XgivenY ? nx_ : ny_; }
  // Entry e of slice s.
  double at(std::size_t s, std::size_t e) const { return k_[index(s, e)]; }
  bool is_defined(std::size_t s) const { return defined_[s] != 0; }
  bool all_defined() const {
    return std::all_of(defined_.begin(), defined_.end(), [](auto d) { return d != 0; });
  }
  double min_entry() const { return *std::min_element(k_.begin(), k_.end()); }
  std::span<const double> grid() const { return k_; }

 private:
  friend ConditionalKernel conditional(const JointDensity&, Direction);

  ConditionalKernel(Direction dir, std::size_t nx, std::size_t ny)
      : dir_(dir), nx_(nx), ny_(ny), k_(nx * ny, 0.0), defined_(dir == Direction::XgivenY ? ny : nx, 1) {}

  std::size_t index(std::size_t s, std::size_t e) const {
    return dir_ == Direction::XgivenY ? e * ny_ + s : s * ny_ + e;
  }

  Direction dir_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<double> k_;
  std::vector<std::uint8_t> defined_;
};

inline MarginalDensity marginal(const JointDensity& p, Axis axis) {
  const std::size_t n = axis == Axis::X ? p.nx() : p.ny();
  std::vector<double> v(n);
  if (axis == Axis::X) {
    for (std::size_t i = 0; i < p.nx(); ++i) {
      CompensatedSum acc;
      for (std::size_t j = 0; j < p.ny(); ++j) acc.add(p(i, j));
      v[i] = acc.value();
    }
  } else {
    for (std::size_t j = 0; j < p.ny(); ++j) {
      CompensatedSum acc;
      for (std::size_t i = 0; i < p.nx(); ++i) acc.add(p(i, j));
      v[j] = acc.value();
    }
  }
  return MarginalDensity(axis, std::move(v));
}

inline ConditionalKernel conditional(const JointDensity& p, Direction dir) {
  ConditionalKernel k(dir, p.nx(), p.ny());
  const MarginalDensity m = marginal(p, conditioning_axis(dir));
  const std::size_t len = k.slice_length();
  for (std::size_t s = 0; s < k.slice_count(); ++s) {
    const double mass = m[s];
    if (mass > 0.0) {
      for (std::size_t e = 0; e < len; ++e) {
        const std::size_t idx = k.index(s, e);
        k.k_[idx] = p.weights()[idx] / mass;
      }
    } else {
      k.defined_[s] = 0;
      for (std::size_t e = 0; e < len; ++e) k.k_[k.index(s, e)] = 1.0 / static_cast<double>(len);
    }
  }
  return k;
}

struct Composition {
  JointDensity joint;
  // |total - 1| of the raw product before renormalization.
  double renorm_drift;
};

/// m(conditioning value) * k(other | conditioning value), renormalized.
inline Composition compose_tracked(const MarginalDensity& m, const ConditionalKernel& k) {
  if (m.axis() != conditioning_axis(k.direction())) {
    throw AxisMismatch(std::string("compose: marginal on axis ") + to_string(m.axis()) +
                       " cannot feed a " + to_string(k.direction()) + " kernel");
  }
  if (m.size() != k.slice_count()) throw DimensionMismatch("compose: marginal length != slice count");
  const std::size_t nx = k.nx(), ny = k.ny();
  std::vector<double> w(nx * ny);
  CompensatedSum total;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double weight = k.direction() == Direction::XgivenY ? m[j] : m[i];
      const double v = weight * k.prob(i, j);
      w[i * ny + j] = v;
      total.add(v);
    }
  }
  const double sum = total.value();
  if (!(sum > 0.0)) throw InvalidDensity("compose: product has no mass");
  if (sum != 1.0) {
    for (double& v : w) v /= sum;
  }
  return {make_joint_unchecked(nx, ny, std::move(w)), std::abs(sum - 1.0)};
}

inline JointDensity compose(const MarginalDensity& m, const ConditionalKernel& k) {
  return compose_tracked(m, k).joint;
}

/// A target joint together with its conditionals and marginals.
class Target {
 public:
  const JointDensity& joint() const { return joint_; }
  const ConditionalKernel& cond_x_given_y() const { return cx_; }
  const ConditionalKernel& cond_y_given_x() const { return cy_; }
  const MarginalDensity& marg_x() const { return mx_; }
  const MarginalDensity& marg_y() const { return my_; }
  bool strictly_positive() const { return positive_; }
  std::size_t nx() const { return joint_.nx(); }
  std::size_t ny() const { return joint_.ny(); }

 private:
  friend Target make_target(const JointDensity&, bool);

  explicit Target(const JointDensity& p)
      : joint_(p),
        cx_(conditional(p, Direction::XgivenY)),
        cy_(conditional(p, Direction::YgivenX)),
        mx_(marginal(p, Axis::X)),
        my_(marginal(p, Axis::Y)),
        positive_(p.min_entry() > 0.0) {}

  JointDensity joint_;
  ConditionalKernel cx_;
  ConditionalKernel cy_;
  MarginalDensity mx_;
  MarginalDensity my_;
  bool positive_;
};

/// Throws PositivityViolation when require_positive and some cell is zero.
inline Target make_target(const JointDensity& p, bool require_positive = true) {
  Target t(p);
  if (require_positive && !t.strictly_positive()) {
    throw PositivityViolation("target has a zero cell; the positivity hypothesis fails");
  }
  return t;
}

/// iid Gamma(concentration, 1) cell weights, normalized. Larger
/// concentration gives flatter targets.
inline Target random_positive_target(std::size_t nx, std::size_t ny, std::uint64_t seed,
                                     double concentration = 1.0) {
  if (nx == 0 || ny == 0) throw InvalidDensity("random_positive_target: nx and ny must be >= 1");
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw InvalidDensity("random_positive_target: concentration must be positive");
  }
  Rng rng(seed);
  std::vector<double> w(nx * ny);
  for (double& v : w) v = std::max(rng.gamma(concentration), std::numeric_limits<double>::min());
  return make_target(JointDensity::normalize(nx, ny, std::move(w)), true);
}

inline Target independence_target(const MarginalDensity& px, const MarginalDensity& py) {
  if (px.axis() != Axis::X || py.axis() != Axis::Y) {
    throw AxisMismatch("independence_target: expected an X marginal and a Y marginal");
  }
  if (px.min_entry() <= 0.0 || py.min_entry() <= 0.0) {
    throw PositivityViolation("independence_target: marginals must be strictly positive");
  }
  std::vector<double> w(px.size() * py.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t j = 0; j < py.size(); ++j) w[i * py.size() + j] = px[i] * py[j];
  }
  return make_target(JointDensity::from_weights(px.size(), py.size(), std::move(w)), true);
}

}  // namespace daent
