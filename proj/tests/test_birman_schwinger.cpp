#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "latticefibers/birman_schwinger.hpp"
#include "latticefibers/spectral.hpp"

using namespace latfib;

namespace {

// Direct count of periodic-box eigenvalues strictly past z on the given side.
std::int64_t direct_count(const MassPair& m, const QuasiMomentum& k, const Potential& v,
                          const LatticeBox& box, double z, SpectralSide side) {
    const auto w = dense_eigenvalues(Eigen::MatrixXcd(assemble(m, k, v, box).matrix));
    std::int64_t c = 0;
    for (double e : w) {
        if (side == SpectralSide::below ? e < z : e > z) ++c;
    }
    return c;
}

}  // namespace

TEST_CASE("single-site kernel matches the scalar lattice sum") {
    // 1D, v = -delta_0: the 1x1 BS matrix is |v| * N^{-1} sum_q (E(q) - z)^{-1}.
    // For large N this converges to 1 / sqrt((c - z)^2 - r^2).
    const MassPair m(1, 1);
    const QuasiMomentum k{0.0};  // band [0, 4], c = 2, r = 2
    const double z = -0.5;
    const std::int64_t R = 1000;
    const auto bs = bs_matrix(m, k, Potential::delta(1, -1.0), z, LatticeBox(1, R, Boundary::periodic));
    REQUIRE(bs.matrix.rows() == 1);
    CHECK(bs.side == SpectralSide::below);
    const double exact = 1.0 / std::sqrt((2.0 - z) * (2.0 - z) - 4.0);
    CHECK(bs.matrix(0, 0).real() == Catch::Approx(exact).margin(1e-6));
    CHECK(bs.matrix(0, 0).imag() == 0.0);
}

TEST_CASE("kernel vanishes as z goes far from the band") {
    const MassPair m(1, 1);
    const auto bs = bs_matrix(m, QuasiMomentum{0.0}, Potential::delta(1, -1.0), -1e6,
                              LatticeBox(1, 200, Boundary::periodic));
    CHECK(std::abs(bs.matrix(0, 0)) < 2e-6);
    CHECK(bs_count(bs) == 0);
}

TEST_CASE("counting principle, rank one") {
    // bound state at 2 - sqrt(5) ~ -0.236: one eigenvalue below z = -0.1,
    // none below z = -0.5
    const MassPair m(1, 1);
    const QuasiMomentum k{0.0};
    const Potential v = Potential::delta(1, -1.0);
    const LatticeBox box(1, 1000, Boundary::periodic);
    CHECK(bs_count(bs_matrix(m, k, v, -0.1, box)) == 1);
    CHECK(bs_count(bs_matrix(m, k, v, -0.5, box)) == 0);
}

TEST_CASE("exact integer agreement with direct periodic counts") {
    const MassPair m(1, 1.5);
    const QuasiMomentum k{0.4};
    Potential v(1);
    v.set({0}, -1.2);
    v.set({3}, -0.4);
    const LatticeBox box(1, 25, Boundary::periodic);
    const auto band = band_params(m, k);
    for (double z : {band.band_min - 1e-3, band.band_min - 0.05, band.band_min - 0.2,
                     band.band_min - 0.6, band.band_min - 2.0}) {
        const std::int64_t via_bs = bs_count(bs_matrix(m, k, v, z, box));
        const std::int64_t direct = direct_count(m, k, v, box, z, SpectralSide::below);
        CHECK(via_bs == direct);
    }
}

TEST_CASE("exact integer agreement in 2d") {
    const MassPair m(1, 1);
    const QuasiMomentum k{0.9, -1.7};
    Potential v(2);
    v.set({0, 0}, -2.5);
    v.set({1, 0}, -0.7);
    const LatticeBox box(2, 6, Boundary::periodic);
    const auto band = band_params(m, k);
    for (double z : {band.band_min - 0.01, band.band_min - 0.3, band.band_min - 1.5}) {
        CHECK(bs_count(bs_matrix(m, k, v, z, box)) ==
              direct_count(m, k, v, box, z, SpectralSide::below));
    }
}

TEST_CASE("repulsive side counts above the band") {
    const MassPair m(1, 1);
    const QuasiMomentum k{0.4};
    Potential v(1);
    v.set({0}, 1.2);
    v.set({3}, 0.4);
    const LatticeBox box(1, 25, Boundary::periodic);
    const auto band = band_params(m, k);
    for (double z : {band.band_max + 1e-3, band.band_max + 0.05, band.band_max + 0.6}) {
        const auto bs = bs_matrix(m, k, v, z, box);
        CHECK(bs.side == SpectralSide::above);
        CHECK(bs_count(bs) == direct_count(m, k, v, box, z, SpectralSide::above));
    }
}

TEST_CASE("repulsive counts mirror attractive ones through the staggering map") {
    // sigma(h0 + v) = 2 d mu0 - sigma(h0 - v) on the infinite lattice; at
    // large N the converged integer counts must agree.
    const MassPair m(1, 1);
    const QuasiMomentum k{0.0};
    Potential plus(1), minus(1);
    plus.set({0}, 1.0);
    minus.set({0}, -1.0);
    const LatticeBox box(1, 1000, Boundary::periodic);
    const double offset = 4.0;  // 2 d mu0
    for (double z : {4.1, 4.5, 6.0}) {
        CHECK(bs_count(bs_matrix(m, k, plus, z, box)) ==
              bs_count(bs_matrix(m, k, minus, offset - z, box)));
    }
}

TEST_CASE("count is monotone in z") {
    const MassPair m(1, 1);
    const QuasiMomentum k{0.0};
    Potential v(1);
    v.set({0}, -1.5);
    v.set({1}, -1.0);
    const LatticeBox box(1, 400, Boundary::periodic);
    std::int64_t prev = -1;
    for (double z : {-3.0, -1.0, -0.3, -0.05, -0.001}) {
        const std::int64_t c = bs_count(bs_matrix(m, k, v, z, box));
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(prev >= 1);
}

TEST_CASE("input validation") {
    const MassPair m(1, 1);
    const QuasiMomentum k{0.0};
    const Potential v = Potential::delta(1, -1.0);
    // open box rejected
    CHECK_THROWS_AS(bs_matrix(m, k, v, -0.5, LatticeBox(1, 10, Boundary::open)), std::invalid_argument);
    // z inside the band rejected
    CHECK_THROWS_AS(bs_matrix(m, k, v, 1.0, LatticeBox(1, 10, Boundary::periodic)), std::invalid_argument);
    // z on the wrong side for the sign of v
    CHECK_THROWS_AS(bs_matrix(m, k, v, 5.0, LatticeBox(1, 10, Boundary::periodic)), std::invalid_argument);
    // indefinite potential rejected
    Potential mixed(1);
    mixed.set({0}, -1.0);
    mixed.set({1}, 1.0);
    CHECK_THROWS_AS(bs_matrix(m, k, mixed, -0.5, LatticeBox(1, 10, Boundary::periodic)),
                    std::invalid_argument);
    // support outside the box rejected
    Potential far(1);
    far.set({20}, -1.0);
    CHECK_THROWS_AS(bs_matrix(m, k, far, -0.5, LatticeBox(1, 10, Boundary::periodic)),
                    std::invalid_argument);
    // rule potentials rejected
    CHECK_THROWS_AS(bs_matrix(m, QuasiMomentum{0.0, 0.0}, appendix_potential(), -0.5,
                              LatticeBox(2, 10, Boundary::periodic)),
                    std::invalid_argument);
    // empty potential counts zero
    CHECK(bs_count(bs_matrix(m, k, Potential(1), -0.5, LatticeBox(1, 10, Boundary::periodic))) == 0);
}
