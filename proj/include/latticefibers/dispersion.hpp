#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "latticefibers/masses.hpp"
#include "latticefibers/torus.hpp"

namespace latfib {

/// epsilon(p) = sum_i (1 - cos p_i), the single-particle lattice dispersion.
inline double epsilon(std::span<const double> p) {
    double s = 0.0;
    for (double pi : p) s += 1.0 - std::cos(pi);
    return s;
}

/// Fourier symbol E_k(p) = (1/m1) eps(p) + (1/m2) eps(k - p).
inline double dispersion_value(const MassPair& masses, const QuasiMomentum& k,
                               std::span<const double> p) {
    if (static_cast<int>(p.size()) != k.dim()) {
        throw std::invalid_argument("dispersion_value: p and k dimensions differ");
    }
    double s = 0.0;
    for (int j = 0; j < k.dim(); ++j) {
        s += (1.0 - std::cos(p[j])) / masses.m1() + (1.0 - std::cos(k[j] - p[j])) / masses.m2();
    }
    return s;
}

/// Shifted-cosine band data of E_k: per-axis amplitudes r_j = |mu(k_j)| and
/// phases p_j with E_k(p + p(k)) = center - sum_j r_j cos p_j, plus the band
/// edges and the mass-ratio functional A(k) = min_j r_j / r(0).
struct BandParams {
    std::vector<double> amplitude;  // r_j = |mu(k_j)|
    std::vector<double> phase;      // p_j, zero when r_j = 0
    double center = 0.0;            // d * mu(0)
    double band_min = 0.0;          // center - sum r_j
    double band_max = 0.0;          // center + sum r_j
    double ratio = 0.0;             // A(k) in [0, 1]

    int dim() const { return static_cast<int>(amplitude.size()); }
};

inline BandParams band_params(const MassPair& masses, const QuasiMomentum& k) {
    const int d = k.dim();
    BandParams bp;
    bp.amplitude.resize(d);
    bp.phase.resize(d);
    double rsum = 0.0;
    double rmin = mu0(masses);
    for (int j = 0; j < d; ++j) {
        const std::complex<double> m = mu(masses, k[j]);
        const double r = std::abs(m);
        bp.amplitude[j] = r;
        // The shifted representation fixes the phase as -arg mu(k_j); it
        // coincides with the arcsin form up to sign and extends it to the
        // degenerate equal-mass case. Zero amplitude carries zero phase.
        bp.phase[j] = (r == 0.0) ? 0.0 : -std::arg(m);
        rsum += r;
        rmin = std::min(rmin, r);
    }
    bp.center = d * mu0(masses);
    bp.band_min = bp.center - rsum;
    bp.band_max = bp.center + rsum;
    bp.ratio = rmin / mu0(masses);
    return bp;
}

/// The shift vector p(k) of Eq-represent form, as plain angles.
inline std::vector<double> phase_shift(const MassPair& masses, const QuasiMomentum& k) {
    return band_params(masses, k).phase;
}

struct SandwichResult {
    bool lower_ok = false;
    bool upper_ok = false;
    bool upper_applicable = false;  // false exactly when A(k) = 0
    double lower_slack = 0.0;
    double upper_slack = 0.0;
};

/// Checks E_k(p + p(k)) - E_min(k) <= E_0(p) and, when A(k) > 0,
/// E_0(p) <= (E_k(p + p(k)) - E_min(k)) / A(k). Slacks are nonnegative when
/// the inequalities hold.
inline SandwichResult sandwich_check(const MassPair& masses, const QuasiMomentum& k,
                                     std::span<const double> p) {
    if (static_cast<int>(p.size()) != k.dim()) {
        throw std::invalid_argument("sandwich_check: p and k dimensions differ");
    }
    const BandParams bp = band_params(masses, k);
    std::vector<double> shifted(p.begin(), p.end());
    for (int j = 0; j < k.dim(); ++j) shifted[j] += bp.phase[j];
    const double lhs = dispersion_value(masses, k, shifted) - bp.band_min;
    const double mid = dispersion_value(masses, QuasiMomentum::zero(k.dim()), p);

    SandwichResult res;
    res.lower_slack = mid - lhs;
    res.lower_ok = res.lower_slack >= 0.0;
    if (bp.ratio > 0.0) {
        res.upper_applicable = true;
        res.upper_slack = lhs / bp.ratio - mid;
        res.upper_ok = res.upper_slack >= 0.0;
    }
    return res;
}

}  // namespace latfib
