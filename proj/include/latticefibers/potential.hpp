#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace latfib {

using LatticePoint = std::vector<std::int64_t>;

/// Closed-form infinite-support rule: v(x) = amplitude * e^{-rate * |x_axis|}
/// on the line { x : x_j = line_offset[..] for j != axis }, zero elsewhere.
/// `axis` is 1-based; `line_offset` lists the d-1 fixed off-axis coordinates
/// in increasing coordinate order.
struct ExpLineRule {
    int axis = 1;
    double rate = 1.0;
    double amplitude = 1.0;
    LatticePoint line_offset;
};

/// Certificate |v(x)| <= amplitude * e^{-rate * |x|_inf}.
struct DecayCertificate {
    double rate = 1.0;
    double amplitude = 1.0;
};

/// Real potential v on Z^d: a finite table plus an optional exponential-line
/// rule for the infinite-support cases. Values add where both apply.
class Potential {
  public:
    explicit Potential(int dim) : dim_(dim) {
        if (dim < 0) throw std::invalid_argument("Potential: negative dimension");
    }

    static Potential delta(int dim, double strength) {
        Potential v(dim);
        v.set(LatticePoint(static_cast<std::size_t>(dim), 0), strength);
        return v;
    }

    int dim() const { return dim_; }

    void set(const LatticePoint& x, double value) {
        check_point(x);
        if (value == 0.0) {
            table_.erase(x);
        } else {
            table_[x] = value;
        }
    }

    void set_rule(ExpLineRule rule) {
        if (rule.axis < 1 || rule.axis > dim_) throw std::invalid_argument("Potential: rule axis out of range");
        if (static_cast<int>(rule.line_offset.size()) != dim_ - 1) {
            throw std::invalid_argument("Potential: rule line_offset must have d-1 entries");
        }
        if (!(rule.rate > 0.0)) throw std::invalid_argument("Potential: rule rate must be positive");
        rule_ = std::move(rule);
    }

    void set_decay(DecayCertificate cert) { decay_ = cert; }

    const std::map<LatticePoint, double>& table() const { return table_; }
    const std::optional<ExpLineRule>& rule() const { return rule_; }
    const std::optional<DecayCertificate>& decay() const { return decay_; }

    bool finite_support() const { return !rule_.has_value(); }

    double value(std::span<const std::int64_t> x) const {
        if (static_cast<int>(x.size()) != dim_) {
            throw std::invalid_argument("Potential::value: dimension mismatch");
        }
        double v = 0.0;
        auto it = table_.find(LatticePoint(x.begin(), x.end()));
        if (it != table_.end()) v = it->second;
        if (rule_) v += rule_value(*rule_, x);
        return v;
    }

    double value(const LatticePoint& x) const { return value(std::span<const std::int64_t>(x)); }

    bool is_zero() const { return table_.empty() && !rule_.has_value(); }

    /// Max-norm radius of the tabled support (0 for an empty table).
    std::int64_t table_radius() const {
        std::int64_t r = 0;
        for (const auto& [x, v] : table_) {
            for (std::int64_t c : x) r = std::max(r, std::abs(c));
        }
        return r;
    }

  private:
    static double rule_value(const ExpLineRule& rule, std::span<const std::int64_t> x) {
        std::size_t off = 0;
        for (int j = 1; j <= static_cast<int>(x.size()); ++j) {
            if (j == rule.axis) continue;
            if (x[static_cast<std::size_t>(j - 1)] != rule.line_offset[off]) return 0.0;
            ++off;
        }
        const auto t = static_cast<double>(std::abs(x[static_cast<std::size_t>(rule.axis - 1)]));
        return rule.amplitude * std::exp(-rule.rate * t);
    }

    void check_point(const LatticePoint& x) const {
        if (static_cast<int>(x.size()) != dim_) {
            throw std::invalid_argument("Potential: point dimension mismatch");
        }
    }

    int dim_;
    std::map<LatticePoint, double> table_;
    std::optional<ExpLineRule> rule_;
    std::optional<DecayCertificate> decay_;
};

/// Lattice strip Pi_n^{d-l}(alpha): |x_j| <= n for every j in alpha.
struct StripSpec {
    int dim = 1;
    std::vector<int> alpha;  // 1-based, strictly increasing, nonempty
    std::int64_t half_width = 0;

    StripSpec(int d, std::vector<int> a, std::int64_t n) : dim(d), alpha(std::move(a)), half_width(n) {
        if (alpha.empty()) throw std::invalid_argument("StripSpec: alpha must be nonempty");
        if (!std::is_sorted(alpha.begin(), alpha.end()) ||
            std::adjacent_find(alpha.begin(), alpha.end()) != alpha.end()) {
            throw std::invalid_argument("StripSpec: alpha must be strictly increasing");
        }
        if (alpha.front() < 1 || alpha.back() > dim) throw std::invalid_argument("StripSpec: alpha out of range");
        if (half_width < 0) throw std::invalid_argument("StripSpec: negative half width");
    }
};

inline bool in_strip(std::span<const std::int64_t> x, const StripSpec& strip) {
    if (static_cast<int>(x.size()) != strip.dim) {
        throw std::invalid_argument("in_strip: dimension mismatch");
    }
    for (int j : strip.alpha) {
        if (std::abs(x[static_cast<std::size_t>(j - 1)]) > strip.half_width) return false;
    }
    return true;
}

inline bool in_strip(const LatticePoint& x, const StripSpec& strip) {
    return in_strip(std::span<const std::int64_t>(x), strip);
}

/// Theorem-style support test: does supp v escape Pi_n^{d-l}(alpha) for every
/// n? Decidable for the shipped representations: finite tables never escape,
/// an exponential line escapes iff its free axis belongs to alpha.
inline bool support_escapes_strips(const Potential& v, const std::vector<int>& alpha) {
    if (alpha.empty()) throw std::invalid_argument("support_escapes_strips: alpha must be nonempty");
    for (int j : alpha) {
        if (j < 1 || j > v.dim()) throw std::invalid_argument("support_escapes_strips: alpha out of range");
    }
    if (v.finite_support()) return false;
    const ExpLineRule& rule = *v.rule();
    return std::find(alpha.begin(), alpha.end(), rule.axis) != alpha.end();
}

struct HypothesisCertificate {
    bool holds_A = false;
    bool holds_B = false;
    std::string reason;
};

/// Sufficient-condition certifier for the standing hypotheses on v: finite
/// support or certified exponential decay imply both (A) and (B). This does
/// not decide the hypotheses for arbitrary potentials.
inline HypothesisCertificate hypothesis_certificate(const Potential& v) {
    HypothesisCertificate c;
    if (v.finite_support()) {
        c.holds_A = c.holds_B = true;
        c.reason = "finite support";
        return c;
    }
    if (v.decay() || v.rule()) {
        // An exponential line rule is itself an exponential-decay bound.
        c.holds_A = c.holds_B = true;
        c.reason = v.decay() ? "exponential decay certificate" : "exponential line rule";
        return c;
    }
    c.reason = "no finite support and no decay certificate";
    return c;
}

/// Restriction of v to the fiber through x_hat: the (d-l)-dimensional
/// potential y -> v(x) where x carries x_hat on the alpha coordinates and y
/// on the rest.
inline Potential restrict_to_fiber(const Potential& v, const std::vector<int>& alpha,
                                   const LatticePoint& x_hat) {
    const int d = v.dim();
    const int l = static_cast<int>(alpha.size());
    if (l >= d) throw std::invalid_argument("restrict_to_fiber: |alpha| must be < d");
    if (static_cast<int>(x_hat.size()) != l) {
        throw std::invalid_argument("restrict_to_fiber: x_hat must index the alpha coordinates");
    }
    std::vector<bool> in_alpha(static_cast<std::size_t>(d) + 1, false);
    for (int j : alpha) {
        if (j < 1 || j > d) throw std::invalid_argument("restrict_to_fiber: alpha out of range");
        in_alpha[static_cast<std::size_t>(j)] = true;
    }

    Potential fiber(d - l);
    for (const auto& [x, val] : v.table()) {
        bool match = true;
        std::size_t ai = 0;
        LatticePoint y;
        y.reserve(static_cast<std::size_t>(d - l));
        for (int j = 1; j <= d; ++j) {
            const std::int64_t c = x[static_cast<std::size_t>(j - 1)];
            if (in_alpha[static_cast<std::size_t>(j)]) {
                if (c != x_hat[ai]) { match = false; break; }
                ++ai;
            } else {
                y.push_back(c);
            }
        }
        if (match) fiber.set(y, fiber.value(y) + val);
    }

    if (v.rule()) {
        const ExpLineRule& rule = *v.rule();
        if (in_alpha[static_cast<std::size_t>(rule.axis)]) {
            // The free axis is pinned by x_hat: the restriction is a single
            // delta at the off-axis offsets (if those match x_hat elsewhere).
            bool match = true;
            std::size_t ai = 0, oi = 0;
            std::int64_t pinned = 0;
            LatticePoint y;
            for (int j = 1; j <= d; ++j) {
                if (in_alpha[static_cast<std::size_t>(j)]) {
                    if (j == rule.axis) {
                        pinned = x_hat[ai];
                    } else if (x_hat[ai] != rule.line_offset[oi]) {
                        match = false;
                        break;
                    }
                    ++ai;
                    if (j != rule.axis) ++oi;
                } else {
                    if (j != rule.axis) {
                        y.push_back(rule.line_offset[oi]);
                        ++oi;
                    }
                }
            }
            if (match) {
                const double val = rule.amplitude * std::exp(-rule.rate * static_cast<double>(std::abs(pinned)));
                if (val != 0.0) fiber.set(y, fiber.value(y) + val);
            }
        } else {
            // The free axis survives: the restriction is again a line rule in
            // the reduced coordinates, provided x_hat sits on the line.
            bool match = true;
            std::size_t ai = 0, oi = 0;
            int reduced_axis = 0;
            LatticePoint reduced_offset;
            int reduced_index = 0;
            for (int j = 1; j <= d; ++j) {
                if (in_alpha[static_cast<std::size_t>(j)]) {
                    if (x_hat[ai] != rule.line_offset[oi]) { match = false; break; }
                    ++ai;
                    ++oi;
                } else {
                    ++reduced_index;
                    if (j == rule.axis) {
                        reduced_axis = reduced_index;
                    } else {
                        reduced_offset.push_back(rule.line_offset[oi]);
                        ++oi;
                    }
                }
            }
            if (match) {
                ExpLineRule reduced{reduced_axis, rule.rate, rule.amplitude, std::move(reduced_offset)};
                fiber.set_rule(std::move(reduced));
            }
        }
    }
    if (v.decay()) fiber.set_decay(*v.decay());
    return fiber;
}

// --- JSON round trip (CLI file format) ---------------------------------

inline nlohmann::ordered_json potential_to_json(const Potential& v) {
    nlohmann::ordered_json j;
    j["dimension"] = v.dim();
    auto entries = nlohmann::ordered_json::array();
    for (const auto& [x, val] : v.table()) {
        auto e = nlohmann::ordered_json::array();
        for (std::int64_t c : x) e.push_back(c);
        e.push_back(val);
        entries.push_back(std::move(e));
    }
    j["entries"] = std::move(entries);
    if (v.rule()) {
        const auto& r = *v.rule();
        j["rule"] = {{"kind", "exp_line"}, {"axis", r.axis},      {"rate", r.rate},
                     {"amplitude", r.amplitude}, {"line_offset", r.line_offset}};
    }
    if (v.decay()) {
        j["decay"] = {{"rate", v.decay()->rate}, {"amplitude", v.decay()->amplitude}};
    }
    return j;
}

inline Potential potential_from_json(const nlohmann::json& j) {
    Potential v(j.at("dimension").get<int>());
    for (const auto& e : j.at("entries")) {
        if (e.size() != static_cast<std::size_t>(v.dim()) + 1) {
            throw std::invalid_argument("potential entry must be [x..., value]");
        }
        LatticePoint x;
        for (std::size_t i = 0; i + 1 < e.size(); ++i) x.push_back(e[i].get<std::int64_t>());
        v.set(x, e.back().get<double>());
    }
    if (j.contains("rule")) {
        const auto& r = j.at("rule");
        if (r.at("kind").get<std::string>() != "exp_line") {
            throw std::invalid_argument("unknown potential rule kind");
        }
        ExpLineRule rule;
        rule.axis = r.at("axis").get<int>();
        rule.rate = r.at("rate").get<double>();
        rule.amplitude = r.at("amplitude").get<double>();
        rule.line_offset = r.at("line_offset").get<LatticePoint>();
        v.set_rule(std::move(rule));
    }
    if (j.contains("decay")) {
        v.set_decay({j.at("decay").at("rate").get<double>(), j.at("decay").at("amplitude").get<double>()});
    }
    return v;
}

/// The paper's d=2 example: v(x) = e^{-|x1|} on Z x {0}.
inline Potential appendix_potential() {
    Potential v(2);
    v.set_rule(ExpLineRule{1, 1.0, 1.0, {0}});
    v.set_decay({1.0, 1.0});
    return v;
}

}  // namespace latfib
