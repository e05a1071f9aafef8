// The infinity-to-one norm max_{x, y in {-1,1}^L} x^T B y of a square matrix.
//
// For fixed x the best y is sign(B^T x), so the norm is the maximum of
// |B^T x|_1 over x; x and -x give the same value, which lets the exact mode
// fix x_0 = +1 and walk the remaining 2^(L-1) sign vectors in Gray-code order
// with one rank-one update of B^T x per step.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace specpb {

template <typename Scalar>
struct InfOneResult {
  Scalar value{0};
  Eigen::VectorXi x;  ///< entries in {-1, +1}
  Eigen::VectorXi y;
  bool exact = true;
};

struct InfOneOptions {
  int exact_cap = 16;       ///< largest L solved by enumeration
  int restarts = 64;        ///< heuristic multi-start count
  std::uint64_t seed = 0;
};

namespace detail {

template <typename Scalar>
Eigen::VectorXi sign_vector(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  Eigen::VectorXi s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) s(i) = v(i) < Scalar(0) ? -1 : 1;
  return s;
}

template <typename Scalar>
Scalar abs_sum(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  Scalar sum{0};
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += v(i) < Scalar(0) ? Scalar(-v(i)) : v(i);
  return sum;
}

}  // namespace detail

/// Exact for L <= options.exact_cap, alternating sign ascent beyond.
template <typename Derived>
InfOneResult<typename Derived::Scalar> norm_inf_one(const Eigen::MatrixBase<Derived>& B_in,
                                                    const InfOneOptions& options = {}) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (B_in.rows() != B_in.cols()) throw std::invalid_argument("norm_inf_one: matrix must be square");
  const Mat B = B_in;
  const Eigen::Index L = B.rows();

  InfOneResult<Scalar> best;
  best.x = Eigen::VectorXi::Ones(L);
  best.y = Eigen::VectorXi::Ones(L);
  if (L == 0) return best;

  if (L <= options.exact_cap) {
    Eigen::VectorXi x = Eigen::VectorXi::Ones(L);
    Vec v = B.colwise().sum().transpose();  // B^T x for x = all ones
    best.value = detail::abs_sum<Scalar>(v);
    best.x = x;
    const std::uint64_t count = std::uint64_t{1} << (L - 1);
    for (std::uint64_t k = 1; k < count; ++k) {
      // Gray code g(k) = k ^ (k >> 1) flips bit ctz(k); bit j maps to x_{j+1}
      const int j = std::countr_zero(k) + 1;
      x(j) = -x(j);
      v += Scalar(2 * x(j)) * B.row(j).transpose();
      const Scalar value = detail::abs_sum<Scalar>(v);
      if (value > best.value) {
        best.value = value;
        best.x = x;
      }
    }
    const Vec bt = B.transpose() * best.x.template cast<Scalar>();
    best.y = detail::sign_vector<Scalar>(bt);
    // recompute so the value does not carry the rounding of the updates
    best.value = best.x.template cast<Scalar>().dot(B * best.y.template cast<Scalar>());
    return best;
  }

  best.exact = false;
  std::mt19937_64 rng(options.seed);
  std::bernoulli_distribution coin(0.5);
  bool have = false;
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    Eigen::VectorXi x(L);
    for (Eigen::Index i = 0; i < L; ++i) x(i) = restart == 0 || coin(rng) ? 1 : -1;
    Eigen::VectorXi y = detail::sign_vector<Scalar>(Vec(B.transpose() * x.template cast<Scalar>()));
    Scalar value = x.template cast<Scalar>().dot(B * y.template cast<Scalar>());
    for (;;) {
      const Eigen::VectorXi nx = detail::sign_vector<Scalar>(Vec(B * y.template cast<Scalar>()));
      const Eigen::VectorXi ny = detail::sign_vector<Scalar>(Vec(B.transpose() * nx.template cast<Scalar>()));
      const Scalar nv = nx.template cast<Scalar>().dot(B * ny.template cast<Scalar>());
      if (!(nv > value)) break;
      x = nx;
      y = ny;
      value = nv;
    }
    if (!have || value > best.value) {
      best.value = value;
      best.x = x;
      best.y = y;
      have = true;
    }
  }
  return best;
}

}  // namespace specpb
