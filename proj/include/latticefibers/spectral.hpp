#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <lapacke.h>

#include "latticefibers/assembly.hpp"

namespace latfib {

/// All eigenvalues of a real symmetric matrix, ascending (LAPACK dsyevd).
inline std::vector<double> dense_eigenvalues(Eigen::MatrixXd a) {
    const auto n = static_cast<lapack_int>(a.rows());
    std::vector<double> w(static_cast<std::size_t>(n));
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0) throw std::runtime_error("dsyevd failed, info=" + std::to_string(info));
    return w;
}

/// All eigenvalues of a complex Hermitian matrix, ascending (LAPACK zheevd).
inline std::vector<double> dense_eigenvalues(Eigen::MatrixXcd a) {
    const auto n = static_cast<lapack_int>(a.rows());
    std::vector<double> w(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                           reinterpret_cast<lapack_complex_double*>(a.data()), n,
                                           w.data());
    if (info != 0) throw std::runtime_error("zheevd failed, info=" + std::to_string(info));
    return w;
}

inline void check_finite(const SparseC& m) {
    for (int outer = 0; outer < m.outerSize(); ++outer) {
        for (SparseC::InnerIterator it(m, outer); it; ++it) {
            if (!std::isfinite(it.value().real()) || !std::isfinite(it.value().imag())) {
                throw std::invalid_argument("matrix has non-finite entries");
            }
        }
    }
}

/// Full sorted spectrum of a fiber operator (dense path). Gauged operators
/// take the real symmetric route.
inline std::vector<double> eigenvalues(const FiberOperator& op) {
    check_finite(op.matrix);
    if (op.gauge == Gauge::phase_gauged) {
        return dense_eigenvalues(Eigen::MatrixXd(op.matrix.real()));
    }
    return dense_eigenvalues(Eigen::MatrixXcd(op.matrix));
}

enum class SpectralSide { below, above };

/// Lanczos with full reorthogonalization for the extreme eigenvalues of a
/// real symmetric sparse matrix. Deterministic start vector.
inline std::vector<double> extremal_eigenvalues(const Eigen::SparseMatrix<double>& a,
                                                SpectralSide side, int how_many, double tol) {
    if (how_many < 1) throw std::invalid_argument("extremal_eigenvalues: how_many must be >= 1");
    const auto n = static_cast<std::int64_t>(a.rows());
    if (how_many >= n) {
        auto w = dense_eigenvalues(Eigen::MatrixXd(a));
        if (side == SpectralSide::above) std::reverse(w.begin(), w.end());
        w.resize(static_cast<std::size_t>(std::min<std::int64_t>(how_many, n)));
        return w;
    }

    const int max_iter = static_cast<int>(std::min<std::int64_t>(n, std::max(400, 40 * how_many)));
    std::mt19937_64 rng(0x5eedULL + static_cast<std::uint64_t>(n));
    std::normal_distribution<double> gauss;

    Eigen::MatrixXd basis(n, max_iter + 1);
    for (std::int64_t i = 0; i < n; ++i) basis(i, 0) = gauss(rng);
    basis.col(0).normalize();

    std::vector<double> alpha, beta;
    double best_resid = std::numeric_limits<double>::infinity();
    for (int m = 0; m < max_iter; ++m) {
        Eigen::VectorXd w = a * basis.col(m);
        const double am = basis.col(m).dot(w);
        alpha.push_back(am);
        w -= am * basis.col(m);
        if (m > 0) w -= beta.back() * basis.col(m - 1);
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass) {
            w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
        }
        const double bm = w.norm();

        const int steps = m + 1;
        if ((steps >= 2 * how_many && steps % 10 == 0) || bm < 1e-14 || m == max_iter - 1) {
            // Ritz values of the tridiagonal section.
            std::vector<double> diag(alpha), off(beta);
            std::vector<double> z(static_cast<std::size_t>(steps) * steps);
            off.resize(static_cast<std::size_t>(std::max(steps - 1, 0)));
            const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', steps, diag.data(),
                                                  off.data(), z.data(), steps);
            if (info != 0) throw std::runtime_error("dstev failed");
            // diag now ascending; residual of Ritz pair i is |beta_m * z(last, i)|
            std::vector<double> out;
            double worst = 0.0;
            bool ok = steps >= how_many;
            for (int t = 0; t < how_many && ok; ++t) {
                const int i = (side == SpectralSide::below) ? t : steps - 1 - t;
                const double resid = std::abs(bm * z[static_cast<std::size_t>(i) * steps + steps - 1]);
                worst = std::max(worst, resid);
                if (resid > tol && bm >= 1e-14) ok = false;
                out.push_back(diag[static_cast<std::size_t>(i)]);
            }
            if (ok) return out;
            best_resid = std::min(best_resid, worst);
        }
        if (bm < 1e-14) break;  // invariant subspace exhausted
        basis.col(m + 1) = w / bm;
        beta.push_back(bm);
    }
    throw std::runtime_error("extremal_eigenvalues: no convergence, best residual " +
                             std::to_string(best_resid));
}

inline std::vector<double> extremal_eigenvalues(const FiberOperator& op, SpectralSide side,
                                                int how_many, double tol) {
    const FiberOperator* gauged = &op;
    FiberOperator tmp{};
    if (op.gauge == Gauge::raw) {
        tmp = gauge_shift(op);
        gauged = &tmp;
    }
    return extremal_eigenvalues(Eigen::SparseMatrix<double>(real_matrix(*gauged)), side, how_many, tol);
}

/// Spectrum classified against the analytic band with margin delta.
struct SpectrumResult {
    std::vector<double> eigenvalues;  // ascending; may be extremal-only
    bool complete_spectrum = true;
    BandParams band;
    double margin = 0.0;
    std::vector<double> below;  // < band_min - margin
    std::vector<double> above;  // > band_max + margin
    std::int64_t n_below = 0;
    std::int64_t n_above = 0;
};

inline void classify_against_band(SpectrumResult& res) {
    res.below.clear();
    res.above.clear();
    for (double e : res.eigenvalues) {
        if (e < res.band.band_min - res.margin) res.below.push_back(e);
        if (e > res.band.band_max + res.margin) res.above.push_back(e);
    }
    res.n_below = static_cast<std::int64_t>(res.below.size());
    res.n_above = static_cast<std::int64_t>(res.above.size());
}

inline constexpr std::int64_t kDenseSizeLimit = 8192;

/// Assembles h^d(k) on the open box of radius R and counts eigenvalues
/// strictly outside the band with margin delta. Dense up to kDenseSizeLimit,
/// Lanczos chunks beyond it.
inline SpectrumResult count_discrete(const MassPair& masses, const QuasiMomentum& k,
                                     const Potential& v, std::int64_t radius, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("count_discrete: margin must be positive");
    const LatticeBox box(k.dim(), radius, Boundary::open);
    const FiberOperator op = gauge_shift(assemble(masses, k, v, box));

    SpectrumResult res;
    res.band = op.band;
    res.margin = delta;

    if (op.size() <= kDenseSizeLimit) {
        res.eigenvalues = eigenvalues(op);
        classify_against_band(res);
        return res;
    }

    res.complete_spectrum = false;
    const Eigen::SparseMatrix<double> a = real_matrix(op);
    const double tol = std::min(1e-10, 0.1 * delta);
    for (SpectralSide side : {SpectralSide::below, SpectralSide::above}) {
        int want = 4;
        std::vector<double> vals;
        for (;;) {
            vals = extremal_eigenvalues(a, side, want, tol);
            const double threshold =
                (side == SpectralSide::below) ? res.band.band_min - delta : res.band.band_max + delta;
            const bool saturated = (side == SpectralSide::below)
                                       ? vals.back() >= threshold
                                       : vals.back() <= threshold;
            if (saturated || want >= 64) break;
            want *= 2;
        }
        for (double e : vals) res.eigenvalues.push_back(e);
    }
    std::sort(res.eigenvalues.begin(), res.eigenvalues.end());
    classify_against_band(res);
    return res;
}

enum class Verdict { Stable, Growing, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Growing: return "Growing";
        default: return "Inconclusive";
    }
}

struct ConvergenceVerdict {
    std::vector<std::int64_t> radii;
    std::vector<std::int64_t> counts;  // n_below + n_above per radius
    std::vector<SpectrumResult> results;
    Verdict verdict = Verdict::Inconclusive;
    std::int64_t stable_count = -1;
    double margin = 0.0;
};

inline Verdict convergence_verdict(const std::vector<std::int64_t>& counts) {
    const std::size_t n = counts.size();
    if (n >= 2 && counts[n - 1] == counts[n - 2]) return Verdict::Stable;
    if (n >= 3 && counts[n - 3] < counts[n - 2] && counts[n - 2] < counts[n - 1]) {
        return Verdict::Growing;
    }
    return Verdict::Inconclusive;
}

/// Heuristic finite-volume protocol: counts per radius, Stable when the last
/// two agree, Growing when strictly increasing over the last three.
inline ConvergenceVerdict convergence_study(const MassPair& masses, const QuasiMomentum& k,
                                            const Potential& v,
                                            const std::vector<std::int64_t>& radii, double delta) {
    if (radii.size() < 3 || !std::is_sorted(radii.begin(), radii.end()) ||
        std::adjacent_find(radii.begin(), radii.end()) != radii.end()) {
        throw std::invalid_argument("convergence_study: radii must be strictly increasing, length >= 3");
    }
    ConvergenceVerdict cv;
    cv.radii = radii;
    cv.margin = delta;
    for (std::int64_t r : radii) {
        cv.results.push_back(count_discrete(masses, k, v, r, delta));
        cv.counts.push_back(cv.results.back().n_below + cv.results.back().n_above);
    }
    cv.verdict = convergence_verdict(cv.counts);
    if (cv.verdict == Verdict::Stable) cv.stable_count = cv.counts.back();
    return cv;
}

}  // namespace latfib
