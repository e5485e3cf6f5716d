#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "dmabep/errors.hpp"
#include "dmabep/signal_space.hpp"

using namespace dmabep;

namespace {

// Independent label oracle: per-position Gray labels concatenated by hand.
int popcount_distance(const VectorSet& v, std::size_t m, std::size_t n) {
  int d = 0;
  for (std::size_t pos = 0; pos < v.n_streams(); ++pos) {
    d += std::popcount(v.alphabet().bit_labels[v.symbol(m, pos)] ^ v.alphabet().bit_labels[v.symbol(n, pos)]);
  }
  return d;
}

double mean_vector_energy(const VectorSet& v) {
  return v.vectors().colwise().squaredNorm().sum() / static_cast<double>(v.n_vectors());
}

}  // namespace

TEST_CASE("BPSK alphabet") {
  const auto a = build_alphabet(2, 1);
  REQUIRE(a.points.size() == 2);
  CHECK(a.points(0) == cd(1.0, 0.0));
  CHECK(a.points(1) == cd(-1.0, 0.0));
  CHECK(a.bit_labels[0] == 0u);
  CHECK(a.bit_labels[1] == 1u);
}

TEST_CASE("QPSK alphabet: energy and Gray adjacency") {
  const auto a = build_alphabet(4, 1);
  REQUIRE(a.bits_per_symbol == 2);
  const double r = 1.0 / std::sqrt(2.0);
  double energy = 0.0;
  for (Eigen::Index s = 0; s < 4; ++s) {
    CHECK(std::abs(std::abs(a.points(s).real()) - r) < 1e-15);
    CHECK(std::abs(std::abs(a.points(s).imag()) - r) < 1e-15);
    energy += std::norm(a.points(s));
  }
  CHECK(energy / 4.0 == doctest::Approx(1.0).epsilon(1e-15));
  // neighbours at the minimum distance sqrt(2) differ in exactly one bit
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t t = 0; t < 4; ++t) {
      const double dist = std::abs(a.points(static_cast<Eigen::Index>(s)) - a.points(static_cast<Eigen::Index>(t)));
      if (std::abs(dist - std::sqrt(2.0)) < 1e-12) CHECK(std::popcount(a.bit_labels[s] ^ a.bit_labels[t]) == 1);
    }

  const auto scaled = build_alphabet(4, 2);
  for (Eigen::Index s = 0; s < 4; ++s) {
    CHECK(std::abs(scaled.points(s) - a.points(s) / std::sqrt(2.0)) < 1e-15);
  }
}

TEST_CASE("square QAM Gray property for every order") {
  for (std::size_t M : {4u, 16u, 64u}) {
    const auto a = build_alphabet(M, 1);
    double energy = 0.0;
    for (std::size_t s = 0; s < M; ++s) {
      energy += std::norm(a.points(static_cast<Eigen::Index>(s)));
      for (std::size_t t = 0; t < M; ++t) {
        const int dr = std::abs(a.lattice_re[s] - a.lattice_re[t]);
        const int di = std::abs(a.lattice_im[s] - a.lattice_im[t]);
        if (dr + di == 2) CHECK(std::popcount(a.bit_labels[s] ^ a.bit_labels[t]) == 1);
        if (s != t) CHECK(a.bit_labels[s] != a.bit_labels[t]);
      }
    }
    CHECK(energy / static_cast<double>(M) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("unsupported alphabet sizes") {
  CHECK_THROWS_AS(build_alphabet(8, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_alphabet(3, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_alphabet(4, 0), std::invalid_argument);
}

TEST_CASE("vector enumeration") {
  SUBCASE("BPSK, one stream") {
    const auto v = enumerate_vectors(build_alphabet(2, 1), 1);
    REQUIRE(v.n_vectors() == 2);
    CHECK(v.hamming(0, 1) == 1);
    CHECK(v.hamming(1, 0) == 1);
    CHECK(v.hamming(0, 0) == 0);
  }
  SUBCASE("QPSK, two streams") {
    const auto v = enumerate_vectors(build_alphabet(4, 2), 2);
    REQUIRE(v.n_vectors() == 16);
    int max_d = 0;
    for (std::size_t m = 0; m < 16; ++m)
      for (std::size_t n = 0; n < 16; ++n) max_d = std::max(max_d, popcount_distance(v, m, n));
    CHECK(max_d == 4);
    const auto D = v.hamming_table();
    CHECK(D.cast<int>().maxCoeff() == 4);
  }
  SUBCASE("BPSK, three streams") {
    const auto v = enumerate_vectors(build_alphabet(2, 3), 3);
    REQUIRE(v.n_vectors() == 8);
    int total = 0;
    for (std::size_t m = 0; m < 8; ++m)
      for (std::size_t n = 0; n < 8; ++n)
        if (m != n) total += v.hamming(m, n);
    CHECK(total == 96);
  }
  SUBCASE("lexicographic order, first position most significant") {
    const auto a = build_alphabet(4, 2);
    const auto v = enumerate_vectors(a, 2);
    CHECK(v.symbol(1, 0) == 0);
    CHECK(v.symbol(1, 1) == 1);
    CHECK(v.symbol(4, 0) == 1);
    CHECK(v.symbol(4, 1) == 0);
    CHECK(v.vector(6)(0) == a.points(1));
    CHECK(v.vector(6)(1) == a.points(2));
  }
  SUBCASE("budget guard") {
    CHECK_THROWS_AS(enumerate_vectors(build_alphabet(16, 5), 5), ResourceLimitError);
    CHECK_THROWS_AS(enumerate_vectors(build_alphabet(4, 2), 2, 15), ResourceLimitError);
    CHECK_NOTHROW(enumerate_vectors(build_alphabet(4, 2), 2, 16));
  }
}

TEST_CASE("hamming table properties against the popcount oracle") {
  for (std::size_t M : {2u, 4u, 16u}) {
    for (std::size_t nd = 1; nd <= 3; ++nd) {
      const auto v = enumerate_vectors(build_alphabet(M, nd), nd);
      const auto D = v.hamming_table();
      const int max_bits = static_cast<int>(nd * v.alphabet().bits_per_symbol);
      CHECK(mean_vector_energy(v) == doctest::Approx(1.0).epsilon(1e-12));
      bool all_match = true;
      for (std::size_t m = 0; m < v.n_vectors(); ++m) {
        if (D(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) != 0) all_match = false;
        for (std::size_t n = 0; n < v.n_vectors(); ++n) {
          const int d = D(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
          if (d != popcount_distance(v, m, n) || d != D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) ||
              d > max_bits) {
            all_match = false;
          }
        }
      }
      CHECK_MESSAGE(all_match, "M=" << M << " N_d=" << nd);
    }
  }
}

TEST_CASE("difference vectors") {
  const auto bpsk = enumerate_vectors(build_alphabet(2, 1), 1);
  CHECK(difference(bpsk, 0, 1)(0) == cd(2.0, 0.0));
  CHECK_THROWS_AS(difference(bpsk, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(difference(bpsk, 0, 2), std::invalid_argument);

  const auto a = build_alphabet(4, 2);
  const auto v = enumerate_vectors(a, 2);
  for (std::size_t m = 0; m < v.n_vectors(); ++m)
    for (std::size_t n = 0; n < v.n_vectors(); ++n) {
      if (m == n) continue;
      CHECK((difference(v, m, n) + difference(v, n, m)).norm() == 0.0);
    }
  // vectors 0 and 1 differ only in the second symbol, between QPSK neighbours
  const auto d = difference(v, 0, 1);
  CHECK(d(0) == cd(0.0, 0.0));
  CHECK(std::abs(d(1)) == doctest::Approx(std::sqrt(2.0) / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(d(1) - (a.points(0) - a.points(1))) < 1e-16);
}

TEST_CASE("difference set reproduces every pair-weighted sum") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  for (std::size_t M : {2u, 4u, 16u}) {
    for (std::size_t nd = 1; nd <= 3; ++nd) {
      if (M == 16 && nd == 3) continue;
      const auto v = enumerate_vectors(build_alphabet(M, nd), nd);
      const auto ds = build_difference_set(v);
      Eigen::MatrixXcd A(2, static_cast<Eigen::Index>(nd));
      for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = cd(n01(rng), n01(rng));
      auto term = [&](const Eigen::VectorXcd& delta) { return std::exp(-(A * delta).squaredNorm()); };

      double pairs = 0.0;
      double total = 0.0;
      for (std::size_t m = 0; m < v.n_vectors(); ++m)
        for (std::size_t n = 0; n < v.n_vectors(); ++n) {
          if (m == n) continue;
          pairs += v.hamming(m, n) * term(difference(v, m, n));
          total += v.hamming(m, n);
        }
      double grouped = 0.0;
      for (std::size_t k = 0; k < ds.size(); ++k) {
        grouped += ds.weights(static_cast<Eigen::Index>(k)) * term(ds.deltas.col(static_cast<Eigen::Index>(k)));
      }
      CHECK(ds.total_weight == total);
      CHECK(ds.weights.sum() == total);
      CHECK(grouped == doctest::Approx(pairs).epsilon(1e-12));
    }
  }
}
