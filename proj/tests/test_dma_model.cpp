#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dmabep/dma_model.hpp"

using namespace dmabep;
using std::numbers::pi;

namespace {

DmaGeometry geometry(std::size_t nd, std::size_t ne, double spacing = 0.00535) {
  DmaGeometry g;
  g.n_microstrips = nd;
  g.n_elements_per_strip = ne;
  g.attenuation = 0.6;
  g.wavenumber = 827.67;
  g.element_spacing = spacing;
  return g;
}

Eigen::VectorXd random_phases(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST_CASE("propagation coefficient") {
  CHECK(propagation_coefficient(0.6, 827.67, 0.0) == cd(1.0, 0.0));

  const cd half_turn = propagation_coefficient(0.0, pi, 1.0);
  CHECK(half_turn.real() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(half_turn.imag()) < 1e-15);

  // mpmath, 30 digits: exp(-0.00535 * 0.6), -0.00535 * 827.67
  const cd h = propagation_coefficient(0.6, 827.67, 0.00535);
  CHECK(std::abs(h) == doctest::Approx(0.996795146541727598).epsilon(1e-14));
  // -4.4280345 wrapped into (-pi, pi]
  CHECK(std::arg(h) == doctest::Approx(-4.4280345 + 2.0 * pi).epsilon(1e-13));
}

TEST_CASE("propagation matrix repeats per strip and decays geometrically") {
  const auto single = build_propagation_matrix(geometry(1, 1));
  REQUIRE(single.size() == 1);
  CHECK(single.diagonal(0) == cd(1.0, 0.0));

  const double d = 0.004;
  const auto H = build_propagation_matrix(geometry(2, 2, d));
  const cd step = std::exp(-d * cd(0.6, 827.67));
  CHECK(H.diagonal(0) == cd(1.0, 0.0));
  CHECK(H.diagonal(2) == cd(1.0, 0.0));
  CHECK(std::abs(H.diagonal(1) - step) < 1e-15);
  CHECK(H.diagonal(1) == H.diagonal(3));

  const auto big = build_propagation_matrix(geometry(1, 10));
  for (Eigen::Index l = 1; l < 10; ++l) {
    CHECK(std::abs(big.diagonal(l)) / std::abs(big.diagonal(l - 1)) ==
          doctest::Approx(0.996795146541727598).epsilon(1e-13));
    CHECK(std::abs(big.diagonal(l)) <= 1.0);
  }
}

TEST_CASE("geometry validation") {
  auto g = geometry(2, 2);
  g.n_microstrips = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = geometry(2, 2);
  g.attenuation = -1.0;
  CHECK_THROWS_AS(build_propagation_matrix(g), std::invalid_argument);
  g = geometry(2, 2);
  g.element_spacing = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("lorentzian weights") {
  CHECK(std::abs(lorentzian_weight(0.0) - cd(0.5, 0.5)) < 1e-16);
  CHECK(std::abs(lorentzian_weight(pi / 2) - cd(0.0, 1.0)) < 1e-16);
  CHECK(std::abs(lorentzian_weight(3 * pi / 2) - cd(0.0, 0.0)) < 1e-16);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double phi = u(rng);
    const cd q = lorentzian_weight(phi);
    CHECK(lorentzian_residual(q) <= 1e-15);
    CHECK(std::abs(lorentzian_weight(lorentzian_phase(q)) - q) < 1e-14);
  }
}

TEST_CASE("weight matrix construction") {
  SUBCASE("single strip column vector") {
    Eigen::VectorXd phases(2);
    phases << 0.0, pi / 2;
    const auto Q = build_weight_matrix(geometry(1, 2), phases);
    REQUIRE(Q.n_rows() == 2);
    REQUIRE(Q.n_cols() == 1);
    CHECK(std::abs(Q.entries()(0, 0) - cd(0.5, 0.5)) < 1e-16);
    CHECK(std::abs(Q.entries()(1, 0) - cd(0.0, 1.0)) < 1e-16);
  }
  SUBCASE("one element per strip is diagonal") {
    const auto Q = build_weight_matrix(geometry(2, 1), Eigen::VectorXd::Zero(2));
    CHECK(std::abs(Q.entries()(0, 0) - cd(0.5, 0.5)) < 1e-16);
    CHECK(std::abs(Q.entries()(1, 1) - cd(0.5, 0.5)) < 1e-16);
    CHECK(Q.entries()(0, 1) == cd(0.0, 0.0));
    CHECK(Q.entries()(1, 0) == cd(0.0, 0.0));
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(build_weight_matrix(geometry(2, 3), Eigen::VectorXd::Zero(5)), std::invalid_argument);
  }
  SUBCASE("random phases respect the mask and the circle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const auto g = geometry(1 + trial % 4, 1 + trial % 5);
      const auto Q = build_weight_matrix(g, random_phases(g.n_total(), rng));
      const auto M = build_mask(g);
      for (Eigen::Index r = 0; r < Q.entries().rows(); ++r) {
        for (Eigen::Index c = 0; c < Q.entries().cols(); ++c) {
          const cd q = Q.entries()(r, c);
          if (M.entries(r, c) == 0.0) {
            CHECK(q == cd(0.0, 0.0));
          } else {
            CHECK(lorentzian_residual(q) <= 1e-12);
          }
        }
      }
      CHECK((M.entries.cast<cd>().cwiseProduct(Q.entries()) - Q.entries()).norm() == 0.0);
    }
  }
}

TEST_CASE("mask layout") {
  CHECK(build_mask(geometry(1, 3)).entries == Eigen::MatrixXd::Ones(3, 1));
  CHECK(build_mask(geometry(2, 1)).entries == Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd expected(4, 2);
  expected << 1, 0, 1, 0, 0, 1, 0, 1;
  const auto M = build_mask(geometry(2, 2));
  CHECK(M.entries == expected);
  CHECK(M.entries.sum() == 4.0);
}

TEST_CASE("dma transmit") {
  SUBCASE("identity propagation, single weight") {
    PropagationMatrix H{Eigen::VectorXcd::Ones(1)};
    Eigen::MatrixXcd Q(1, 1);
    Q(0, 0) = cd(0.3, 0.4);
    Eigen::VectorXcd s(1);
    s(0) = 1.0;
    CHECK(dma_transmit(H, Q, s)(0) == cd(0.3, 0.4));
  }
  SUBCASE("zero input") {
    const auto g = geometry(3, 4);
    std::mt19937_64 rng(1);
    const auto t = dma_transmit(build_propagation_matrix(g), build_weight_matrix(g, random_phases(12, rng)).entries(),
                                Eigen::VectorXcd::Zero(3));
    CHECK(t.norm() == 0.0);
  }
  SUBCASE("dimension mismatch") {
    const auto g = geometry(2, 2);
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(dma_transmit(build_propagation_matrix(g), build_weight_matrix(g, random_phases(4, rng)).entries(),
                                 Eigen::VectorXcd::Zero(3)),
                    std::invalid_argument);
  }
  SUBCASE("matches an index-level triple loop") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n01;
    for (std::size_t nd = 1; nd <= 4; ++nd) {
      for (std::size_t ne : {1u, 3u, 10u}) {
        const auto g = geometry(nd, ne);
        const auto H = build_propagation_matrix(g);
        const auto Q = build_weight_matrix(g, random_phases(g.n_total(), rng)).entries();
        Eigen::VectorXcd s(static_cast<Eigen::Index>(nd));
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = cd(n01(rng), n01(rng));

        const Eigen::VectorXcd t = dma_transmit(H, Q, s);
        Eigen::VectorXcd loop = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.n_total()));
        for (std::size_t r = 0; r < g.n_total(); ++r)
          for (std::size_t c = 0; c < g.n_total(); ++c)
            for (std::size_t k = 0; k < nd; ++k) {
              const cd h = r == c ? H.diagonal(static_cast<Eigen::Index>(r)) : cd(0.0, 0.0);
              loop(static_cast<Eigen::Index>(r)) +=
                  h * Q(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) * s(static_cast<Eigen::Index>(k));
            }
        CHECK((t - loop).norm() <= 1e-13 * loop.norm());
        // element (i, l) is h_{l,i} q_{l,i} s_i
        for (std::size_t i = 0; i < nd; ++i)
          for (std::size_t l = 0; l < ne; ++l) {
            const auto r = static_cast<Eigen::Index>(g.index(i, l));
            const auto c = static_cast<Eigen::Index>(i);
            CHECK(std::abs(t(r) - H.diagonal(r) * Q(r, c) * s(c)) <= 1e-15 * (1.0 + std::abs(t(r))));
          }
      }
    }
  }
}
