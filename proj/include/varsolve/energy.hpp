#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <vector>

#include "varsolve/asymptotics.hpp"
#include "varsolve/matrix.hpp"
#include "varsolve/nonlinearity.hpp"

namespace varsolve {

/// The problem A u = lambda f(u) + h(u): matrix, nonlinearity, perturbation
/// and parameter, with the hypothesis L < lambda_1 checked at construction.
struct ProblemInstance {
    SpdMatrix matrix;
    Nonlinearity f;
    Perturbation h;
    double lambda;
    LipschitzCheck lipschitz_check;

    ProblemInstance(SpdMatrix A, Nonlinearity f_in, Perturbation h_in, double lambda_in)
        : matrix(std::move(A)), f(std::move(f_in)), h(std::move(h_in)), lambda(lambda_in) {
        if (f.size() != matrix.order() || h.size() != matrix.order())
            throw InvalidDimensionError("nonlinearity/perturbation size must match matrix order");
        if (!(lambda > 0.0)) throw StructuralError("lambda must be positive");
        matrix.require_positive_definite();
        lipschitz_check = check_lipschitz_condition(h.lipschitz_bound(), matrix.lambda_min());
    }

    int dimension() const { return matrix.order(); }

    /// T = 1^t A 1 + n L, the coefficient of the constant-vector energy bound.
    double constant_T() const {
        return structural_constant_T(matrix, h.lipschitz_bound());
    }
};

/// Two-sided check of Phi against its quadratic envelopes.
struct CoercivityReport {
    double phi = 0.0;
    double lower_bound = 0.0; // (lambda_1 - L)/2 * ||u||^2
    double upper_bound = 0.0; // u^t A u / 2 + L/2 ||u||^2
    bool lower_ok = false;
    bool upper_ok = false;
    bool ok() const { return lower_ok && upper_ok; }
};

/// Phi(u) = u^t A u / 2 - sum H_k(u_k), Psi(u) = sum F_k(u_k),
/// J(u) = Phi(u) - lambda Psi(u). Critical points of J are exactly the
/// solutions of the system. Pure given the immutable instance; evaluation
/// counters are diagnostics only.
class EnergyFunctional {
public:
    explicit EnergyFunctional(const ProblemInstance& p) : p_(&p) {}

    const ProblemInstance& problem() const { return *p_; }
    int dimension() const { return p_->dimension(); }

    double phi(const std::vector<double>& u) const {
        phi_evals_.fetch_add(1, std::memory_order_relaxed);
        return 0.5 * p_->matrix.quadratic_form(u) - p_->h.sum_primitives(u);
    }

    double psi(const std::vector<double>& u) const {
        return p_->f.sum_primitives(u);
    }

    double j_lambda(const std::vector<double>& u) const {
        j_evals_.fetch_add(1, std::memory_order_relaxed);
        return phi(u) - p_->lambda * psi(u);
    }

    /// grad J(u) = A u - lambda f(u) - h(u); zeros solve the system.
    void gradient(const std::vector<double>& u, std::vector<double>& out) const {
        grad_evals_.fetch_add(1, std::memory_order_relaxed);
        p_->matrix.mul(u, out);
        for (int k = 0; k < p_->dimension(); ++k)
            out[k] -= p_->lambda * p_->f.component(k)(u[k]) + p_->h.component(k)(u[k]);
    }

    std::vector<double> gradient(const std::vector<double>& u) const {
        std::vector<double> g(u.size());
        gradient(u, g);
        return g;
    }

    /// ||A u - lambda f(u) - h(u)||_2, recomputed from scratch.
    double residual(const std::vector<double>& u) const {
        return norm2(gradient(u));
    }

    CoercivityReport coercivity_certificate(const std::vector<double>& u,
                                            double tol = 1e-9) const {
        const double n2 = norm2(u);
        const double quad = p_->matrix.quadratic_form(u);
        const double L = p_->h.lipschitz_bound();
        CoercivityReport rep;
        rep.phi = phi(u);
        rep.lower_bound = 0.5 * (p_->matrix.lambda_min() - L) * n2 * n2;
        rep.upper_bound = 0.5 * quad + 0.5 * L * n2 * n2;
        const double slack = tol * std::max(1.0, n2 * n2);
        rep.lower_ok = rep.phi >= rep.lower_bound - slack;
        rep.upper_ok = rep.phi <= rep.upper_bound + slack;
        return rep;
    }

    /// Upper bound on the sublevel quotient at radius r, obtained by taking
    /// u = 0 in the infimum and boxing {Phi < r} inside |u_k| <= c with
    /// c = sqrt(2 r / (lambda_1 - L)): returns (sum_k max_{|t|<=c} F_k) / r.
    double varphi_upper_bound(double r) const {
        if (!(r > 0.0)) throw InvalidDimensionError("varphi bound needs r > 0");
        const double gap = p_->matrix.lambda_min() - p_->h.lipschitz_bound();
        if (!(gap > 0.0))
            throw StructuralError("varphi bound requires L < lambda_1");
        const double c = std::sqrt(2.0 * r / gap);
        double s = 0.0;
        for (int k = 0; k < p_->dimension(); ++k)
            s += boxed_primitive_max(p_->f.component(k), c);
        return s / r;
    }

    std::uint64_t phi_evaluations() const { return phi_evals_.load(); }
    std::uint64_t gradient_evaluations() const { return grad_evals_.load(); }
    std::uint64_t j_evaluations() const { return j_evals_.load(); }

private:
    const ProblemInstance* p_;
    mutable std::atomic<std::uint64_t> phi_evals_{0};
    mutable std::atomic<std::uint64_t> grad_evals_{0};
    mutable std::atomic<std::uint64_t> j_evals_{0};
};

} // namespace varsolve
