#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include "latticefibers/dispersion.hpp"
#include "latticefibers/masses.hpp"
#include "latticefibers/potential.hpp"
#include "latticefibers/torus.hpp"

namespace latfib {

enum class Boundary { open, periodic };

/// Finite box {-R..R}^d with a stable lexicographic index map (first
/// coordinate most significant).
class LatticeBox {
  public:
    LatticeBox(int dim, std::int64_t radius, Boundary boundary)
        : dim_(dim), radius_(radius), boundary_(boundary) {
        if (dim < 1) throw std::invalid_argument("LatticeBox: dimension must be >= 1");
        if (radius < 1) throw std::invalid_argument("LatticeBox: radius must be >= 1");
    }

    int dim() const { return dim_; }
    std::int64_t radius() const { return radius_; }
    std::int64_t side() const { return 2 * radius_ + 1; }
    Boundary boundary() const { return boundary_; }

    std::int64_t size() const {
        std::int64_t s = 1;
        for (int j = 0; j < dim_; ++j) s *= side();
        return s;
    }

    std::int64_t index(const LatticePoint& x) const {
        std::int64_t idx = 0;
        for (int j = 0; j < dim_; ++j) {
            const std::int64_t c = x[static_cast<std::size_t>(j)];
            if (c < -radius_ || c > radius_) throw std::out_of_range("LatticeBox::index: point outside box");
            idx = idx * side() + (c + radius_);
        }
        return idx;
    }

    LatticePoint point(std::int64_t idx) const {
        LatticePoint x(static_cast<std::size_t>(dim_));
        for (int j = dim_ - 1; j >= 0; --j) {
            x[static_cast<std::size_t>(j)] = idx % side() - radius_;
            idx /= side();
        }
        return x;
    }

  private:
    int dim_;
    std::int64_t radius_;
    Boundary boundary_;
};

enum class Gauge { raw, phase_gauged };
enum class OperatorBasis { position, momentum };

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

/// A finite Hermitian matrix model of h^d(k) = h0^d(k) + v, with its band
/// data and assembly metadata. Both triangles are stored with exactly
/// conjugate values.
struct FiberOperator {
    int dim = 1;
    std::int64_t points_per_axis = 0;
    Boundary boundary = Boundary::open;
    OperatorBasis basis = OperatorBasis::position;
    Gauge gauge = Gauge::raw;
    SparseC matrix;
    BandParams band;
    MassPair masses{1.0, 1.0};
    QuasiMomentum k{0.0};
    std::string potential_id;

    std::int64_t size() const { return matrix.rows(); }

    LatticeBox box() const {
        if (basis != OperatorBasis::position || points_per_axis % 2 == 0) {
            throw std::logic_error("FiberOperator::box: not a position-basis odd box");
        }
        return LatticeBox(dim, (points_per_axis - 1) / 2, boundary);
    }
};

/// Position-basis assembly: diagonal d*mu(0) + v(x), hop (x, x+e_j) entry
/// -mu(k_j)/2 with the conjugate on the mirrored entry. Open boundaries drop
/// cross-boundary hops; periodic ones wrap with the same coefficient.
inline FiberOperator assemble(const MassPair& masses, const QuasiMomentum& k, const Potential& v,
                              const LatticeBox& box) {
    if (v.dim() != box.dim() || k.dim() != box.dim()) {
        throw std::invalid_argument("assemble: dimension mismatch");
    }
    const int d = box.dim();
    const std::int64_t n = box.size();
    const double diag0 = d * mu0(masses);

    std::vector<std::complex<double>> hop(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) hop[static_cast<std::size_t>(j)] = -0.5 * mu(masses, k[j]);

    std::vector<Eigen::Triplet<std::complex<double>>> trips;
    trips.reserve(static_cast<std::size_t>(n * (2 * d + 1)));
    for (std::int64_t i = 0; i < n; ++i) {
        LatticePoint x = box.point(i);
        trips.emplace_back(i, i, std::complex<double>(diag0 + v.value(x), 0.0));
        for (int j = 0; j < d; ++j) {
            std::int64_t& c = x[static_cast<std::size_t>(j)];
            const std::int64_t orig = c;
            std::int64_t next = orig + 1;
            if (next > box.radius()) {
                if (box.boundary() == Boundary::open) continue;
                next = -box.radius();
            }
            c = next;
            const std::int64_t i2 = box.index(x);
            c = orig;
            const std::complex<double> h = hop[static_cast<std::size_t>(j)];
            trips.emplace_back(i, i2, h);
            trips.emplace_back(i2, i, std::conj(h));
        }
    }

    FiberOperator op;
    op.dim = d;
    op.points_per_axis = box.side();
    op.boundary = box.boundary();
    op.basis = OperatorBasis::position;
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.band = band_params(masses, k);
    op.masses = masses;
    op.k = k;
    return op;
}

/// Momentum-space (Friedrichs) discretization on the DFT grid q_m = 2 pi m / N:
/// diagonal E_k(q_m), convolution entries N^{-d} sum_x v(x) e^{-i (q_m - q_m', x)}.
/// The exact DFT conjugate of the periodic assembly when N = 2R + 1.
inline FiberOperator assemble_friedrichs(const MassPair& masses, const QuasiMomentum& k,
                                         const Potential& v, std::int64_t points_per_axis) {
    const std::int64_t N = points_per_axis;
    if (N < 2) throw std::invalid_argument("assemble_friedrichs: need at least 2 points per axis");
    if (v.dim() != k.dim()) throw std::invalid_argument("assemble_friedrichs: dimension mismatch");
    if (!v.finite_support()) {
        throw std::invalid_argument("assemble_friedrichs: rule-based infinite potentials not representable on a periodic grid");
    }
    const int d = k.dim();
    std::int64_t n = 1;
    for (int j = 0; j < d; ++j) n *= N;

    const auto grid_point = [&](std::int64_t idx) {
        std::vector<double> q(static_cast<std::size_t>(d));
        for (int j = d - 1; j >= 0; --j) {
            q[static_cast<std::size_t>(j)] = 2.0 * kPi * static_cast<double>(idx % N) / static_cast<double>(N);
            idx /= N;
        }
        return q;
    };

    const double scale = 1.0 / static_cast<double>(n);
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(n, n);
    for (std::int64_t a = 0; a < n; ++a) {
        const auto qa = grid_point(a);
        mat(a, a) += dispersion_value(masses, k, qa);
        for (std::int64_t b = 0; b < n; ++b) {
            const auto qb = grid_point(b);
            std::complex<double> conv = 0.0;
            for (const auto& [x, val] : v.table()) {
                double phase = 0.0;
                for (int j = 0; j < d; ++j) {
                    phase -= (qa[static_cast<std::size_t>(j)] - qb[static_cast<std::size_t>(j)]) *
                             static_cast<double>(x[static_cast<std::size_t>(j)]);
                }
                conv += val * std::exp(std::complex<double>(0.0, phase));
            }
            mat(a, b) += scale * conv;
        }
    }
    // Mirror the strict triangles so hermiticity is exact by construction.
    for (std::int64_t a = 0; a < n; ++a) {
        mat(a, a) = std::complex<double>(mat(a, a).real(), 0.0);
        for (std::int64_t b = a + 1; b < n; ++b) mat(b, a) = std::conj(mat(a, b));
    }

    FiberOperator op;
    op.dim = d;
    op.points_per_axis = N;
    op.boundary = Boundary::periodic;
    op.basis = OperatorBasis::momentum;
    op.matrix = mat.sparseView();
    op.band = band_params(masses, k);
    op.masses = masses;
    op.k = k;
    return op;
}

/// Conjugation by the diagonal unitary x -> e^{i (x, p(k))}: hoppings become
/// the real amplitudes -r(k_j)/2, spectrum unchanged. Entries are rewritten
/// exactly rather than multiplied by phases.
inline FiberOperator gauge_shift(const FiberOperator& op) {
    if (op.gauge != Gauge::raw) throw std::invalid_argument("gauge_shift: operator already gauged");
    if (op.basis != OperatorBasis::position) {
        throw std::invalid_argument("gauge_shift: momentum-basis operator has no position gauge");
    }
    if (op.boundary != Boundary::open) {
        // Wrap edges pick up the phase e^{-i 2R p(k_j)}, so the diagonal
        // gauge is a similarity only on open boxes.
        throw std::invalid_argument("gauge_shift: periodic wrap edges are not phase-gauge invariant");
    }
    const LatticeBox box = op.box();
    FiberOperator out = op;
    out.gauge = Gauge::phase_gauged;
    for (int outer = 0; outer < out.matrix.outerSize(); ++outer) {
        for (SparseC::InnerIterator it(out.matrix, outer); it; ++it) {
            if (it.row() == it.col()) continue;
            const LatticePoint a = box.point(it.row());
            const LatticePoint b = box.point(it.col());
            int axis = -1;
            for (int j = 0; j < box.dim(); ++j) {
                if (a[static_cast<std::size_t>(j)] != b[static_cast<std::size_t>(j)]) { axis = j; break; }
            }
            it.valueRef() = std::complex<double>(-0.5 * op.band.amplitude[static_cast<std::size_t>(axis)], 0.0);
        }
    }
    return out;
}

/// Extract the real symmetric form of a gauged operator.
inline Eigen::SparseMatrix<double> real_matrix(const FiberOperator& op) {
    if (op.gauge != Gauge::phase_gauged) throw std::invalid_argument("real_matrix: operator must be gauged");
    return op.matrix.real();
}

struct MirrorResult {
    FiberOperator mirrored;  // assembled from (masses, k, -v)
    double scale = -1.0;
    double offset = 0.0;  // 2 d mu(0): sigma(h0 + v) = offset - sigma(h0 - v)
};

/// Staggering mirror: the sign unitary U = diag((-1)^{sum x_j}) intertwines
/// h0(k) + v with 2 d mu(0) I - (h0(k) - v), entrywise exactly on open boxes.
/// Periodic wrap edges have even displacement and break the identity, so
/// periodic input is rejected.
inline MirrorResult staggering_mirror(const MassPair& masses, const QuasiMomentum& k,
                                      const Potential& v, const LatticeBox& box) {
    if (box.boundary() != Boundary::open) {
        throw std::invalid_argument("staggering_mirror: only open boxes (wrap hops are parity-even)");
    }
    Potential neg(v.dim());
    for (const auto& [x, val] : v.table()) neg.set(x, -val);
    if (v.rule()) {
        ExpLineRule r = *v.rule();
        r.amplitude = -r.amplitude;
        neg.set_rule(std::move(r));
    }
    if (v.decay()) neg.set_decay(*v.decay());
    MirrorResult res;
    res.mirrored = assemble(masses, k, neg, box);
    res.offset = 2.0 * box.dim() * mu0(masses);
    return res;
}

/// Sign matrix of the staggering transformation on a box.
inline Eigen::VectorXd staggering_signs(const LatticeBox& box) {
    Eigen::VectorXd s(box.size());
    for (std::int64_t i = 0; i < box.size(); ++i) {
        const LatticePoint x = box.point(i);
        std::int64_t sum = 0;
        for (std::int64_t c : x) sum += c;
        s(i) = (sum % 2 == 0) ? 1.0 : -1.0;
    }
    return s;
}

/// Debug dump: matrix market coordinate file plus a JSON sidecar with the
/// assembly metadata.
inline void dump_operator(const FiberOperator& op, const std::string& path_prefix) {
    std::ofstream mm(path_prefix + ".mtx");
    if (!mm) throw std::runtime_error("dump_operator: cannot open " + path_prefix + ".mtx");
    mm << "%%MatrixMarket matrix coordinate complex general\n";
    mm << op.matrix.rows() << " " << op.matrix.cols() << " " << op.matrix.nonZeros() << "\n";
    mm.precision(17);
    for (int outer = 0; outer < op.matrix.outerSize(); ++outer) {
        for (SparseC::InnerIterator it(op.matrix, outer); it; ++it) {
            mm << (it.row() + 1) << " " << (it.col() + 1) << " " << it.value().real() << " "
               << it.value().imag() << "\n";
        }
    }
    nlohmann::ordered_json side;
    side["masses"] = {op.masses.m1(), op.masses.m2()};
    side["k"] = op.k.components();
    side["band"] = {{"band_min", op.band.band_min},
                    {"band_max", op.band.band_max},
                    {"center", op.band.center},
                    {"ratio", op.band.ratio}};
    side["gauge"] = (op.gauge == Gauge::raw) ? "raw" : "phase-gauged";
    side["boundary"] = (op.boundary == Boundary::open) ? "open" : "periodic";
    side["basis"] = (op.basis == OperatorBasis::position) ? "position" : "momentum";
    std::ofstream js(path_prefix + ".json");
    js << side.dump(2) << "\n";
}

}  // namespace latfib
