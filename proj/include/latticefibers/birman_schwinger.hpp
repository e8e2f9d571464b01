#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "latticefibers/assembly.hpp"
#include "latticefibers/spectral.hpp"

namespace latfib {

/// Birman-Schwinger operator |v|^{1/2} r0(k,z) |v|^{1/2} compressed to the
/// support of v, built on a periodic box where the free resolvent is exactly
/// diagonal in the momentum grid.
struct BSOperator {
    Eigen::MatrixXcd matrix;  // Hermitian, |supp v| x |supp v|
    SpectralSide side = SpectralSide::below;
    double z = 0.0;
    std::vector<LatticePoint> support;
    BandParams band;
};

inline BSOperator bs_matrix(const MassPair& masses, const QuasiMomentum& k, const Potential& v,
                            double z, const LatticeBox& box) {
    if (box.boundary() != Boundary::periodic) {
        throw std::invalid_argument("bs_matrix: resolvent is diagonal only on periodic boxes");
    }
    if (v.dim() != box.dim() || k.dim() != box.dim()) {
        throw std::invalid_argument("bs_matrix: dimension mismatch");
    }
    if (!v.finite_support()) throw std::invalid_argument("bs_matrix: potential must have finite support");

    bool has_neg = false, has_pos = false;
    std::vector<LatticePoint> supp;
    std::vector<double> strengths;
    for (const auto& [x, val] : v.table()) {
        for (std::int64_t c : x) {
            if (std::abs(c) > box.radius()) {
                throw std::invalid_argument("bs_matrix: support must lie inside the box");
            }
        }
        (val < 0 ? has_neg : has_pos) = true;
        supp.push_back(x);
        strengths.push_back(val);
    }
    if (has_neg && has_pos) {
        throw std::invalid_argument("bs_matrix: principle not implemented for indefinite v");
    }

    BSOperator bs;
    bs.side = has_pos ? SpectralSide::above : SpectralSide::below;
    bs.z = z;
    bs.band = band_params(masses, k);
    bs.support = supp;
    if (bs.side == SpectralSide::below && !(z < bs.band.band_min)) {
        throw std::invalid_argument("bs_matrix: z must lie strictly below the band for attractive v");
    }
    if (bs.side == SpectralSide::above && !(z > bs.band.band_max)) {
        throw std::invalid_argument("bs_matrix: z must lie strictly above the band for repulsive v");
    }

    const int d = box.dim();
    const std::int64_t L = box.side();
    std::int64_t ngrid = 1;
    for (int j = 0; j < d; ++j) ngrid *= L;

    // Grid resolvent kernel; the sign makes the matrix positive on the
    // relevant side: (E - z)^{-1} below, (z - E)^{-1} above.
    const auto ns = static_cast<std::int64_t>(supp.size());
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(ns, ns);
    std::vector<double> q(static_cast<std::size_t>(d));
    for (std::int64_t m = 0; m < ngrid; ++m) {
        std::int64_t rem = m;
        for (int j = d - 1; j >= 0; --j) {
            // DFT grid of the periodic box; any constant offset would break
            // the exact equivalence with the position-basis assembly
            q[static_cast<std::size_t>(j)] =
                2.0 * kPi * static_cast<double>(rem % L) / static_cast<double>(L);
            rem /= L;
        }
        const double e = dispersion_value(masses, k, q);
        const double denom = (bs.side == SpectralSide::below) ? e - z : z - e;
        for (std::int64_t a = 0; a < ns; ++a) {
            for (std::int64_t b = 0; b < ns; ++b) {
                double phase = 0.0;
                for (int j = 0; j < d; ++j) {
                    phase += q[static_cast<std::size_t>(j)] *
                             static_cast<double>(supp[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] -
                                                 supp[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
                }
                g(a, b) += std::exp(std::complex<double>(0.0, phase)) / denom;
            }
        }
    }
    g /= static_cast<double>(ngrid);

    bs.matrix.resize(ns, ns);
    for (std::int64_t a = 0; a < ns; ++a) {
        const double sa = std::sqrt(std::abs(strengths[static_cast<std::size_t>(a)]));
        for (std::int64_t b = 0; b < ns; ++b) {
            const double sb = std::sqrt(std::abs(strengths[static_cast<std::size_t>(b)]));
            bs.matrix(a, b) = sa * g(a, b) * sb;
        }
    }
    // exact hermitian symmetrization of roundoff
    bs.matrix = ((bs.matrix + bs.matrix.adjoint()) / 2.0).eval();
    return bs;
}

/// Counting principle: the number of BS eigenvalues >= 1 equals the number of
/// eigenvalues of the periodic-box h(k) strictly past z on the matching side.
inline std::int64_t bs_count(const BSOperator& bs) {
    if (bs.matrix.rows() == 0) return 0;
    const std::vector<double> w = dense_eigenvalues(Eigen::MatrixXcd(bs.matrix));
    std::int64_t count = 0;
    for (double e : w) {
        if (std::abs(e - 1.0) < 1e-10) {
            throw std::runtime_error("bs_count: counting threshold degenerate; perturb z");
        }
        if (e >= 1.0) ++count;
    }
    return count;
}

}  // namespace latfib
