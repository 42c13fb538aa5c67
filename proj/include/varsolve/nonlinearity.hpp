#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "varsolve/common.hpp"
#include "varsolve/quadrature.hpp"

namespace varsolve {

using ScalarFn = std::function<double(double)>;

/// A continuous scalar component function together with its primitive
/// t -> integral from 0 to t. A closed-form primitive is used when supplied;
/// otherwise the primitive falls back to adaptive quadrature. An optional
/// closed-form derivative feeds the solver's Newton steps.
class ComponentFunction {
public:
    explicit ComponentFunction(ScalarFn f) : f_(std::move(f)) {}

    ComponentFunction(ScalarFn f, ScalarFn primitive, ScalarFn derivative = nullptr)
        : f_(std::move(f)), primitive_(std::move(primitive)),
          derivative_(std::move(derivative)) {
        if (primitive_ && std::abs(primitive_(0.0)) > 1e-12)
            throw StructuralError("closed-form primitive must vanish at 0");
    }

    double operator()(double t) const { return f_(t); }

    bool has_closed_primitive() const { return static_cast<bool>(primitive_); }
    bool has_closed_derivative() const { return static_cast<bool>(derivative_); }

    /// Integral of the evaluator from 0 to t (antisymmetric in orientation).
    double primitive(double t) const {
        if (primitive_) return primitive_(t);
        if (t == 0.0) return 0.0;
        return adaptive_simpson(f_, 0.0, t, 1e-10, 40);
    }

    /// Slope of the evaluator; central finite difference when no closed form.
    double derivative(double t) const {
        if (derivative_) return derivative_(t);
        const double h = 1e-6 * std::max(1.0, std::abs(t));
        return (f_(t + h) - f_(t - h)) / (2.0 * h);
    }

private:
    ScalarFn f_;
    ScalarFn primitive_;
    ScalarFn derivative_;
};

/// Component-wise nonlinearity f(u) = (f_1(u_1), ..., f_n(u_n)).
class Nonlinearity {
public:
    explicit Nonlinearity(std::vector<ComponentFunction> components)
        : comps_(std::move(components)) {
        if (comps_.empty()) throw InvalidDimensionError("nonlinearity needs >= 1 component");
    }

    /// One scalar function broadcast to all n components.
    static Nonlinearity shared(int n, ComponentFunction f) {
        if (n < 1) throw InvalidDimensionError("nonlinearity needs >= 1 component");
        return Nonlinearity(std::vector<ComponentFunction>(n, f));
    }

    int size() const { return static_cast<int>(comps_.size()); }
    const ComponentFunction& component(int k) const { return comps_[k]; }

    void evaluate(const std::vector<double>& u, std::vector<double>& out) const {
        for (std::size_t k = 0; k < comps_.size(); ++k) out[k] = comps_[k](u[k]);
    }

    double sum_primitives(const std::vector<double>& u) const {
        double s = 0.0;
        for (std::size_t k = 0; k < comps_.size(); ++k) s += comps_[k].primitive(u[k]);
        return s;
    }

private:
    std::vector<ComponentFunction> comps_;
};

/// Lipschitz perturbation h(u) = (h_1(u_1), ..., h_n(u_n)) with declared
/// constants L_k and L = max L_k. Requires h_k(0) = 0.
class Perturbation {
public:
    Perturbation(std::vector<ComponentFunction> components, std::vector<double> lipschitz)
        : comps_(std::move(components)), lipschitz_(std::move(lipschitz)) {
        if (comps_.size() != lipschitz_.size())
            throw InvalidDimensionError("one Lipschitz constant per component required");
        if (comps_.empty()) throw InvalidDimensionError("perturbation needs >= 1 component");
        max_lipschitz_ = 0.0;
        for (std::size_t k = 0; k < comps_.size(); ++k) {
            if (!(lipschitz_[k] >= 0.0))
                throw StructuralError("Lipschitz constants must be >= 0");
            if (std::abs(comps_[k](0.0)) > 1e-12)
                throw StructuralError("perturbation component " + std::to_string(k + 1) +
                                      " does not vanish at 0");
            max_lipschitz_ = std::max(max_lipschitz_, lipschitz_[k]);
        }
    }

    static Perturbation shared(int n, ComponentFunction h, double lipschitz) {
        return Perturbation(std::vector<ComponentFunction>(n, std::move(h)),
                            std::vector<double>(n, lipschitz));
    }

    /// The identically-zero perturbation with L = 0.
    static Perturbation none(int n) {
        ComponentFunction zero([](double) { return 0.0; },
                               [](double) { return 0.0; },
                               [](double) { return 0.0; });
        return shared(n, zero, 0.0);
    }

    int size() const { return static_cast<int>(comps_.size()); }
    const ComponentFunction& component(int k) const { return comps_[k]; }
    const std::vector<double>& lipschitz_constants() const { return lipschitz_; }
    double lipschitz_bound() const { return max_lipschitz_; } // L

    void evaluate(const std::vector<double>& u, std::vector<double>& out) const {
        for (std::size_t k = 0; k < comps_.size(); ++k) out[k] = comps_[k](u[k]);
    }

    double sum_primitives(const std::vector<double>& u) const {
        double s = 0.0;
        for (std::size_t k = 0; k < comps_.size(); ++k) s += comps_[k].primitive(u[k]);
        return s;
    }

private:
    std::vector<ComponentFunction> comps_;
    std::vector<double> lipschitz_;
    double max_lipschitz_ = 0.0;
};

/// Verdict on the hypothesis L < lambda_1.
struct LipschitzCheck {
    bool pass = false;
    double lipschitz = 0.0;            // L
    double lambda1 = 0.0;
    double coercivity_coefficient = 0.0; // (lambda_1 - L) / 2
};

inline LipschitzCheck check_lipschitz_condition(double L, double lambda1) {
    LipschitzCheck c;
    c.lipschitz = L;
    c.lambda1 = lambda1;
    c.pass = L < lambda1;
    c.coercivity_coefficient = (lambda1 - L) / 2.0;
    return c;
}

struct LipschitzEstimate {
    double estimate = 0.0;  // max sampled slope, a lower bound on the true constant
    double declared = 0.0;
    bool falsified = false; // estimate exceeds declared by more than 1e-9
};

/// Empirical slope scan of each h_k on [-R, R]. The sample stream is
/// deterministic and prefix-stable, so the estimate is monotone in
/// `samples`: a finite scan can refute a declared constant, never certify it.
inline std::vector<LipschitzEstimate>
estimate_lipschitz(const Perturbation& p, double box_radius, int samples,
                   std::uint64_t seed = 0x5eed1234abcdu) {
    if (!(box_radius > 0.0))
        throw InvalidDimensionError("estimate_lipschitz requires a box radius > 0");
    if (samples < 2) throw InvalidDimensionError("estimate_lipschitz requires samples >= 2");

    std::vector<LipschitzEstimate> out(p.size());
    for (int k = 0; k < p.size(); ++k) {
        const auto& h = p.component(k);
        Rng rng(seed + static_cast<std::uint64_t>(k));
        std::uniform_real_distribution<double> uni(-box_radius, box_radius);
        double best = 0.0;
        // Even indices walk adjacent pairs of dyadic grids of growing
        // resolution; odd indices draw random pairs. Both streams are
        // prefix-stable, which makes the running max monotone in `samples`.
        int level = 1, pos = 0;
        for (int i = 0; i < samples; ++i) {
            double t1, t2;
            if (i % 2 == 0) {
                const int cells = 1 << level;
                t1 = -box_radius + 2.0 * box_radius * pos / cells;
                t2 = -box_radius + 2.0 * box_radius * (pos + 1) / cells;
                if (++pos >= cells) {
                    pos = 0;
                    if (level < 40) ++level;
                }
            } else {
                t1 = uni(rng);
                t2 = uni(rng);
            }
            if (t1 == t2) continue;
            const double slope = std::abs(h(t1) - h(t2)) / std::abs(t1 - t2);
            best = std::max(best, slope);
        }
        out[k].estimate = best;
        out[k].declared = p.lipschitz_constants()[k];
        out[k].falsified = best > out[k].declared + 1e-9;
    }
    return out;
}

} // namespace varsolve
