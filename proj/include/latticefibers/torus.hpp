#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace latfib {

inline constexpr double kPi = std::numbers::pi;

/// Reduce an angle into the half-open cell (-pi, pi].
inline double wrap_angle(double y) {
    double w = std::remainder(y, 2.0 * kPi);  // in [-pi, pi]
    if (w <= -kPi) w = kPi;
    return w;
}

/// A point k on the torus T^d = (-pi, pi]^d. Components are wrapped on
/// construction; arithmetic wraps back into the cell.
class QuasiMomentum {
  public:
    explicit QuasiMomentum(std::vector<double> components) : comps_(std::move(components)) {
        if (comps_.empty()) throw std::invalid_argument("QuasiMomentum: dimension must be >= 1");
        for (double& c : comps_) c = wrap_angle(c);
    }

    QuasiMomentum(std::initializer_list<double> components)
        : QuasiMomentum(std::vector<double>(components)) {}

    static QuasiMomentum zero(int dim) { return QuasiMomentum(std::vector<double>(dim, 0.0)); }

    int dim() const { return static_cast<int>(comps_.size()); }
    double operator[](int j) const { return comps_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& components() const { return comps_; }

    QuasiMomentum operator+(const QuasiMomentum& o) const {
        check_dim(o.dim());
        std::vector<double> s(comps_);
        for (int j = 0; j < dim(); ++j) s[j] = wrap_angle(s[j] + o[j]);
        return QuasiMomentum(std::move(s));
    }

    bool operator==(const QuasiMomentum& o) const { return comps_ == o.comps_; }

    void check_dim(int d) const {
        if (d != dim()) throw std::invalid_argument("QuasiMomentum: dimension mismatch");
    }

  private:
    std::vector<double> comps_;
};

/// Which boundary face of the cell k sits on: the set alpha of coordinates
/// exactly equal to pi (1-based, increasing) and its size l. l = 0 means k
/// lies in the open cube (-pi, pi)^d.
struct BoundaryClass {
    int l = 0;
    std::vector<int> alpha;  // 1-based indices, strictly increasing
};

inline BoundaryClass classify_quasimomentum(const QuasiMomentum& k) {
    BoundaryClass bc;
    for (int j = 0; j < k.dim(); ++j) {
        if (k[j] == kPi) bc.alpha.push_back(j + 1);
    }
    bc.l = static_cast<int>(bc.alpha.size());
    return bc;
}

}  // namespace latfib
