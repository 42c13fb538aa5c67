#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "varsolve/matrix.hpp"
#include "varsolve/nonlinearity.hpp"

namespace varsolve {

/// Lower bound on max_{|xi| <= t} F(xi) for the primitive F of `c`:
/// dense scan over [-t, t] at resolution t/10^4, then golden-section
/// refinement around the best sample.
inline double boxed_primitive_max(const ComponentFunction& c, double t) {
    if (!(t > 0.0)) throw InvalidDimensionError("boxed max needs t > 0");
    const int cells = 20000; // step t/1e4 across [-t, t]
    double best = 0.0;       // xi = 0 always admissible, F(0) = 0
    double best_x = 0.0;
    for (int i = 0; i <= cells; ++i) {
        const double x = -t + 2.0 * t * i / cells;
        const double v = c.primitive(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    const double step = 2.0 * t / cells;
    double lo = std::max(-t, best_x - step);
    double hi = std::min(t, best_x + step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = c.primitive(x1), f2 = c.primitive(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-14 * t; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = c.primitive(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = c.primitive(x1);
        }
    }
    best = std::max(best, std::max(f1, f2));
    return best;
}

enum class QuotientMode { boxed_max, pointwise };

/// Sampled quotient sequence with its running extremes.
struct QuotientTail {
    std::vector<double> abscissas;
    std::vector<double> quotients;
    std::vector<double> running_inf;
    std::vector<double> running_sup;
};

/// Evaluates sum_k max_{|xi|<=t} F_k(xi) / t^2 (boxed_max) or
/// sum_k F_k(t) / t^2 (pointwise) along a witness sequence. The result is an
/// estimate of the liminf/limsup via its running extremes, never a
/// certificate.
inline QuotientTail estimate_quotient_tail(const Nonlinearity& f,
                                           const std::vector<double>& sequence,
                                           QuotientMode mode, Regime direction) {
    if (sequence.size() < 3)
        throw InvalidDimensionError("witness sequence needs length >= 3");
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (sequence[i] == 0.0)
            throw InvalidDimensionError("witness sequence hits t = 0");
        if (i > 0) {
            const bool ok = direction == Regime::at_infinity
                                ? sequence[i] > sequence[i - 1]
                                : (sequence[i] < sequence[i - 1] && sequence[i] > 0.0);
            if (!ok)
                throw StructuralError("witness sequence is not strictly monotone "
                                      "for the requested direction");
        }
    }
    QuotientTail tail;
    tail.abscissas = sequence;
    for (double t : sequence) {
        double s = 0.0;
        for (int k = 0; k < f.size(); ++k) {
            s += mode == QuotientMode::boxed_max
                     ? boxed_primitive_max(f.component(k), std::abs(t))
                     : f.component(k).primitive(t);
        }
        const double q = s / (t * t);
        tail.quotients.push_back(q);
        tail.running_inf.push_back(tail.running_inf.empty()
                                       ? q
                                       : std::min(tail.running_inf.back(), q));
        tail.running_sup.push_back(tail.running_sup.empty()
                                       ? q
                                       : std::max(tail.running_sup.back(), q));
    }
    return tail;
}

enum class Provenance { unset, analytic, empirical };

/// One oscillation coefficient: an extended real plus where it came from.
struct Coefficient {
    double value = 0.0;
    Provenance provenance = Provenance::unset;
    std::optional<QuotientTail> witness; // tail used for empirical estimates

    bool is_set() const { return provenance != Provenance::unset; }
    std::string describe() const {
        if (!is_set()) return "unset";
        std::string v = std::isinf(value) ? (value > 0 ? "inf" : "-inf") : fmt17(value);
        return v + (provenance == Provenance::analytic ? " (analytic)" : " (empirical)");
    }
};

/// The four oscillation coefficients. A-coefficients are liminfs of the
/// boxed-max quotient (always >= 0); B-coefficients are limsups of the
/// pointwise quotient.
struct AsymptoticProfile {
    Coefficient a_inf, b_sup;   // behavior at +infinity
    Coefficient a_zero, b_zero; // behavior at 0+

    const Coefficient& a(Regime r) const { return r == Regime::at_infinity ? a_inf : a_zero; }
    const Coefficient& b(Regime r) const { return r == Regime::at_infinity ? b_sup : b_zero; }
    Coefficient& a(Regime r) { return r == Regime::at_infinity ? a_inf : a_zero; }
    Coefficient& b(Regime r) { return r == Regime::at_infinity ? b_sup : b_zero; }

    static Coefficient analytic(double v) {
        if (std::isnan(v)) throw StructuralError("analytic coefficient is NaN");
        return Coefficient{v, Provenance::analytic, std::nullopt};
    }

    void set_analytic(Regime r, double a_value, double b_value) {
        if (a_value < 0.0)
            throw StructuralError("A-coefficients are nonnegative by construction");
        a(r) = analytic(a_value);
        b(r) = analytic(b_value);
    }

    /// Estimate both coefficients of a regime from a witness sequence.
    void estimate(Regime r, const Nonlinearity& f, const std::vector<double>& sequence) {
        auto at = estimate_quotient_tail(f, sequence, QuotientMode::boxed_max, r);
        auto bt = estimate_quotient_tail(f, sequence, QuotientMode::pointwise, r);
        a(r) = Coefficient{at.running_inf.back(), Provenance::empirical, at};
        b(r) = Coefficient{bt.running_sup.back(), Provenance::empirical, bt};
    }
};

/// Verdict on the oscillation inequality A < (lambda_1 - L)/T * B.
struct ConditionReport {
    Regime regime = Regime::at_infinity;
    bool pass = false;
    double a_value = 0.0;
    double b_value = 0.0;
    double factor = 0.0; // (lambda_1 - L)/T
    double rhs = 0.0;    // factor * B
    double constant_T = 0.0;
    bool empirical = false; // any input coefficient is an estimate
};

inline double structural_constant_T(const SpdMatrix& A, double L) {
    return A.ones_form() + A.order() * L;
}

inline ConditionReport oscillation_condition(const AsymptoticProfile& profile,
                                             const SpdMatrix& A, double L,
                                             Regime regime) {
    const Coefficient& ca = profile.a(regime);
    const Coefficient& cb = profile.b(regime);
    if (!ca.is_set() || !cb.is_set())
        throw StructuralError("oscillation coefficients for the requested regime are unset");

    ConditionReport rep;
    rep.regime = regime;
    rep.a_value = ca.value;
    rep.b_value = cb.value;
    rep.constant_T = structural_constant_T(A, L);
    rep.empirical = ca.provenance == Provenance::empirical ||
                    cb.provenance == Provenance::empirical;
    const double lambda1 = A.lambda_min();
    rep.factor = (lambda1 - L) / rep.constant_T;
    if (rep.factor <= 0.0) {
        rep.rhs = -kInf;
        rep.pass = false;
        return rep;
    }
    rep.rhs = std::isinf(rep.b_value) ? rep.b_value : rep.factor * rep.b_value;
    rep.pass = rep.a_value < rep.rhs;
    return rep;
}

/// Open interval of admissible parameters: ] T/(2B), (lambda_1 - L)/(2A) [.
struct LambdaInterval {
    double lower = 0.0;
    double upper = kInf;
    bool empty = false;
    double constant_T = 0.0;

    bool contains(double lambda) const { return !empty && lower < lambda && lambda < upper; }

    std::string describe() const {
        auto end = [](double v) {
            return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : fmt17(v);
        };
        return "]" + end(lower) + ", " + end(upper) + "[" + (empty ? " (empty)" : "");
    }
};

inline LambdaInterval lambda_interval(const AsymptoticProfile& profile,
                                      const SpdMatrix& A, double L, Regime regime) {
    const Coefficient& ca = profile.a(regime);
    const Coefficient& cb = profile.b(regime);
    if (!ca.is_set() || !cb.is_set())
        throw StructuralError("oscillation coefficients for the requested regime are unset");

    LambdaInterval iv;
    iv.constant_T = structural_constant_T(A, L);
    const double a = ca.value;
    const double b = cb.value;
    const double lambda1 = A.lambda_min();

    if (std::isinf(b) && b > 0)
        iv.lower = 0.0;
    else if (b > 0)
        iv.lower = iv.constant_T / (2.0 * b);
    else
        iv.lower = kInf;

    if (a == 0.0)
        iv.upper = kInf;
    else if (std::isinf(a))
        iv.upper = 0.0;
    else
        iv.upper = (lambda1 - L) / (2.0 * a);

    iv.empty = !(iv.lower < iv.upper) || !(iv.upper > 0.0);
    return iv;
}

} // namespace varsolve
