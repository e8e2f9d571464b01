#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace latfib {

/// Particle masses (m1, m2) of the two-body system. Immutable after construction.
class MassPair {
  public:
    MassPair(double m1, double m2) : m1_(m1), m2_(m2) {
        if (!(m1 > 0.0) || !(m2 > 0.0)) {
            throw std::invalid_argument("MassPair: masses must be positive");
        }
    }

    double m1() const { return m1_; }
    double m2() const { return m2_; }

    bool equal_masses() const { return m1_ == m2_; }

  private:
    double m1_;
    double m2_;
};

/// Hopping symbol mu(y) = 1/m1 + e^{-iy}/m2. The y = pi endpoint is handled
/// exactly (sin(pi) rounds to ~1.2e-16 otherwise), so mu(pi) is identically
/// real and vanishes for equal masses -- the degenerate regime must be exact.
inline std::complex<double> mu(const MassPair& masses, double y) {
    if (y == std::numbers::pi || y == -std::numbers::pi) {
        return std::complex<double>(1.0 / masses.m1() - 1.0 / masses.m2(), 0.0);
    }
    return std::complex<double>(1.0 / masses.m1() + std::cos(y) / masses.m2(),
                                -std::sin(y) / masses.m2());
}

/// mu(0) = 1/m1 + 1/m2 (real).
inline double mu0(const MassPair& masses) {
    return 1.0 / masses.m1() + 1.0 / masses.m2();
}

}  // namespace latfib
