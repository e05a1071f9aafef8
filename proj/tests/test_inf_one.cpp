#include "specpb/inf_one.hpp"

#include <doctest.h>

#include <random>

using namespace specpb;

namespace {

/// max over all x, y in {-1,1}^L of x^T B y, enumerating both vectors.
template <typename Scalar>
Scalar brute_force(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& B) {
  const int L = static_cast<int>(B.rows());
  Scalar best{};
  bool have = false;
  for (std::uint32_t xm = 0; xm < (1u << L); ++xm) {
    for (std::uint32_t ym = 0; ym < (1u << L); ++ym) {
      Scalar v{0};
      for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
          const int s = ((xm >> i) & 1 ? -1 : 1) * ((ym >> j) & 1 ? -1 : 1);
          v += s > 0 ? B(i, j) : Scalar(-B(i, j));
        }
      }
      if (!have || v > best) best = v;
      have = true;
    }
  }
  return best;
}

Eigen::MatrixXd random_antisymmetric(int L, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    for (int j = i + 1; j < L; ++j) {
      B(i, j) = g(rng);
      B(j, i) = -B(i, j);
    }
  }
  return B;
}

}  // namespace

TEST_CASE("two by two antisymmetric matrix") {
  for (double b : {1.0, -2.5, 0.0, 1e-9}) {
    Eigen::Matrix2d B;
    B << 0, b, -b, 0;
    const auto r = norm_inf_one(B);
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(2 * std::abs(b)));
    CHECK(r.value == doctest::Approx(brute_force<double>(B)));
  }
}

TEST_CASE("empty and zero matrices") {
  CHECK(norm_inf_one(Eigen::MatrixXd(0, 0)).value == 0.0);
  const auto r = norm_inf_one(Eigen::MatrixXd::Zero(5, 5));
  CHECK(r.value == 0.0);
  CHECK(r.x.size() == 5);
  CHECK_THROWS_AS(norm_inf_one(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("exact mode agrees with brute force and its witnesses") {
  std::mt19937_64 rng(17);
  for (int L = 1; L <= 7; ++L) {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd B = random_antisymmetric(L, rng);
      const auto r = norm_inf_one(B);
      CHECK(r.exact);
      CHECK(r.value == doctest::Approx(brute_force<double>(B)).epsilon(1e-12));
      const double witness = r.x.cast<double>().dot(B * r.y.cast<double>());
      CHECK(witness == r.value);
      CHECK((r.x.array().abs() == 1).all());
      CHECK((r.y.array().abs() == 1).all());
    }
  }
}

TEST_CASE("general square matrices, not only antisymmetric ones") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> e(-9, 9);
  for (int trial = 0; trial < 30; ++trial) {
    const int L = 2 + trial % 5;
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> B(L, L);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) B(i, j) = e(rng);
    CHECK(norm_inf_one(B).value == brute_force<long>(B));
  }
}

TEST_CASE("integer matrices of size eight") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> e(-100, 100);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> B = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j) {
        B(i, j) = e(rng);
        B(j, i) = -B(i, j);
      }
    CHECK(norm_inf_one(B).value == brute_force<long>(B));
  }
}

TEST_CASE("heuristic mode above the cap") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd B = random_antisymmetric(18, rng);
  InfOneOptions heuristic;
  heuristic.exact_cap = 12;
  heuristic.seed = 3;
  const auto h = norm_inf_one(B, heuristic);
  CHECK_FALSE(h.exact);
  InfOneOptions exact;
  exact.exact_cap = 18;
  const auto x = norm_inf_one(B, exact);
  CHECK(x.exact);
  CHECK(h.value <= x.value + 1e-9);
  CHECK(h.value > 0.5 * x.value);
  CHECK(h.value == doctest::Approx(h.x.cast<double>().dot(B * h.y.cast<double>())));
  // same seed, same answer
  CHECK(norm_inf_one(B, heuristic).value == h.value);
}

TEST_CASE("value is invariant under simultaneous permutation") {
  std::mt19937_64 rng(41);
  const Eigen::MatrixXd B = random_antisymmetric(9, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> P(9);
  P.setIdentity();
  std::shuffle(P.indices().data(), P.indices().data() + 9, rng);
  const Eigen::MatrixXd C = P * B * P.transpose();
  CHECK(norm_inf_one(C).value == doctest::Approx(norm_inf_one(B).value).epsilon(1e-12));
}
