#pragma once

// Reference computations for tests. Deliberately naive: nested loops over
// plain nested vectors, textbook p*log(p/q), no compensation, no library
// types. Used to freeze expected values and to cross-check the library.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline double kl(const Grid& p, const Grid& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      if (p[i][j] == 0.0) continue;
      if (q[i][j] == 0.0) return std::numeric_limits<double>::infinity();
      s += p[i][j] * std::log(p[i][j] / q[i][j]);
    }
  }
  return s;
}

inline double tv(const Grid& p, const Grid& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].size(); ++j) s += std::abs(p[i][j] - q[i][j]);
  }
  return s;
}

inline std::vector<double> row_sums(const Grid& p) {
  std::vector<double> v(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (double x : p[i]) v[i] += x;
  }
  return v;
}

inline std::vector<double> col_sums(const Grid& p) {
  std::vector<double> v(p[0].size(), 0.0);
  for (const auto& row : p) {
    for (std::size_t j = 0; j < row.size(); ++j) v[j] += row[j];
  }
  return v;
}

// One half-step of the recursion written straight from the product form:
// t even -> p_Y(y) pi(x,y)/pi_Y(y); t odd -> p_X(x) pi(x,y)/pi_X(x).
inline Grid half_step(const Grid& p, const Grid& pi, std::size_t t) {
  Grid out = pi;
  if (t % 2 == 0) {
    const auto py = col_sums(p);
    const auto piy = col_sums(pi);
    for (std::size_t i = 0; i < pi.size(); ++i) {
      for (std::size_t j = 0; j < pi[i].size(); ++j) out[i][j] = py[j] * pi[i][j] / piy[j];
    }
  } else {
    const auto px = row_sums(p);
    const auto pix = row_sums(pi);
    for (std::size_t i = 0; i < pi.size(); ++i) {
      for (std::size_t j = 0; j < pi[i].size(); ++j) out[i][j] = px[i] * pi[i][j] / pix[i];
    }
  }
  return out;
}

inline std::vector<Grid> iterate(const Grid& p0, const Grid& pi, std::size_t steps) {
  std::vector<Grid> seq{p0};
  for (std::size_t t = 0; t < steps; ++t) seq.push_back(half_step(seq.back(), pi, t));
  return seq;
}

// Sweep kernel for X by double summation over y.
inline Grid sweep_kernel_x(const Grid& pi) {
  const auto pix = row_sums(pi);
  const auto piy = col_sums(pi);
  const std::size_t nx = pi.size(), ny = pi[0].size();
  Grid k(nx, std::vector<double>(nx, 0.0));
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < nx; ++b) {
      for (std::size_t j = 0; j < ny; ++j) k[a][b] += (pi[a][j] / pix[a]) * (pi[b][j] / piy[j]);
    }
  }
  return k;
}

}  // namespace oracle
