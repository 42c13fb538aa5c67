#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varsolve/energy.hpp"

namespace varsolve {

namespace detail {

/// Dense LU solve with partial pivoting; returns false on (near-)singularity.
inline bool lu_solve(std::vector<double> m, int n, std::vector<double>& rhs) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int p = col;
        double best = std::abs(m[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(m[r * n + col]);
            if (v > best) {
                best = v;
                p = r;
            }
        }
        if (!(best > 1e-300)) return false;
        if (p != col) {
            for (int j = 0; j < n; ++j) std::swap(m[p * n + j], m[col * n + j]);
            std::swap(rhs[p], rhs[col]);
        }
        const double d = m[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = m[r * n + col] / d;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) m[r * n + j] -= f * m[col * n + j];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int j = i + 1; j < n; ++j) s -= m[i * n + j] * rhs[j];
        rhs[i] = s / m[i * n + i];
    }
    return true;
}

/// Jacobian of the gradient map: A - lambda diag(f'(u)) - diag(h'(u)).
inline std::vector<double> newton_matrix(const ProblemInstance& p,
                                         const std::vector<double>& u) {
    const int n = p.dimension();
    std::vector<double> m = p.matrix.entries();
    for (int k = 0; k < n; ++k)
        m[k * static_cast<std::size_t>(n) + k] -=
            p.lambda * p.f.component(k).derivative(u[k]) +
            p.h.component(k).derivative(u[k]);
    return m;
}

} // namespace detail

struct SolveConfig {
    double residual_tol = 1e-8;
    int max_iters = 100000;
    double dedupe_radius = 1e-6;             // relative Euclidean distance
    std::vector<std::vector<double>> starts; // explicit initial vectors
    int random_starts = 0;                   // seeded uniform draws for multistart
    double start_box = 1.0;                  // sup-norm radius for those draws
    int cascade_random_starts = 8;           // per-stage draws inside the sublevel box
    std::vector<double> radius_schedule;     // r_m, monotone per regime
    Regime regime = Regime::at_infinity;
    std::uint64_t seed = 0;
};

inline std::vector<double> geometric_schedule(double r1, double ratio, int count) {
    if (!(r1 > 0.0) || !(ratio > 0.0) || count < 1)
        throw InvalidDimensionError("geometric schedule needs r1 > 0, ratio > 0, count >= 1");
    std::vector<double> s(count);
    double r = r1;
    for (int i = 0; i < count; ++i, r *= ratio) s[i] = r;
    return s;
}

/// r_m = (lambda_1 - L)/2 * c_m^2 for a witness sequence of box radii c_m.
inline std::vector<double> schedule_from_witness(const SpdMatrix& A, double L,
                                                 const std::vector<double>& c) {
    const double gap = A.lambda_min() - L;
    if (!(gap > 0.0)) throw StructuralError("schedule requires L < lambda_1");
    std::vector<double> s;
    s.reserve(c.size());
    for (double ci : c) s.push_back(0.5 * gap * ci * ci);
    return s;
}

enum class SolutionOrigin { multistart, cascade };

struct SolutionRecord {
    std::vector<double> u;
    double phi = 0.0;
    double j_value = 0.0;
    double residual = 0.0;
    double norm2 = 0.0;
    double norm_inf = 0.0;
    SolutionOrigin origin = SolutionOrigin::multistart;
    double cascade_radius = std::numeric_limits<double>::quiet_NaN();
    int hessian_sign = 0; // sign of the smallest eigenvalue of the Jacobian at u

    std::string origin_label() const {
        return origin == SolutionOrigin::multistart
                   ? "multistart"
                   : "cascade(r=" + fmt17(cascade_radius) + ")";
    }
};

struct MinimizeResult {
    bool converged = false;
    std::vector<double> u;
    double grad_norm = kInf;
    int iters = 0;
    std::vector<double> grad_trace; // sampled gradient norms
};

/// Relative Euclidean distance used for deduplication.
inline double relative_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d2) / std::max({1.0, norm2(a), norm2(b)});
}

/// Descent to a critical point of J: backtracking gradient steps for
/// globalization, damped Newton steps on the residual once they help.
/// Non-convergence is reported, not thrown.
inline MinimizeResult local_minimize(const EnergyFunctional& E,
                                     std::vector<double> u, const SolveConfig& cfg,
                                     int iter_cap = 0) {
    const int n = E.dimension();
    const int cap = iter_cap > 0 ? iter_cap : cfg.max_iters;
    MinimizeResult res;
    std::vector<double> g(n), trial(n), gtrial(n);
    E.gradient(u, g);
    double gn = norm2(g);
    double jval = E.j_lambda(u);
    double step = 1.0;
    int stalls = 0;

    int it = 0;
    for (; it < cap && gn > cfg.residual_tol; ++it) {
        if (it % 200 == 0) res.grad_trace.push_back(gn);

        // Newton step with backtracking on the residual norm.
        bool moved = false;
        std::vector<double> s = g;
        for (double& v : s) v = -v;
        if (detail::lu_solve(detail::newton_matrix(E.problem(), u), n, s)) {
            double alpha = 1.0;
            for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
                for (int i = 0; i < n; ++i) trial[i] = u[i] + alpha * s[i];
                E.gradient(trial, gtrial);
                const double gn2 = norm2(gtrial);
                if (std::isfinite(gn2) && gn2 * gn2 <= (1.0 - 2e-4 * alpha) * gn * gn) {
                    u = trial;
                    g = gtrial;
                    gn = gn2;
                    jval = E.j_lambda(u);
                    moved = true;
                    break;
                }
            }
        }
        if (moved) {
            stalls = 0;
            continue;
        }

        // Armijo backtracking along the normalized steepest descent direction.
        double alpha = step;
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt, alpha *= 0.5) {
            for (int i = 0; i < n; ++i) trial[i] = u[i] - alpha * g[i] / gn;
            const double jt = E.j_lambda(trial);
            if (std::isfinite(jt) && jt <= jval - 1e-4 * alpha * gn) {
                u = trial;
                jval = jt;
                E.gradient(u, g);
                gn = norm2(g);
                step = alpha * 2.0;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (++stalls >= 3) break;
            step = std::max(1.0, norm_inf(u));
        } else {
            stalls = 0;
        }
    }
    res.converged = gn <= cfg.residual_tol;
    res.u = std::move(u);
    res.grad_norm = gn;
    res.iters = it;
    res.grad_trace.push_back(gn);
    return res;
}

/// Diagnostic curvature tag: sign of the smallest eigenvalue of the Jacobian
/// A - lambda diag(f') - diag(h') at u.
inline int hessian_min_sign(const EnergyFunctional& E, const std::vector<double>& u) {
    auto eig = detail::jacobi_eigenvalues(detail::newton_matrix(E.problem(), u),
                                          E.dimension());
    const double scale = std::max(1.0, std::abs(eig.back()));
    if (eig.front() > 1e-9 * scale) return 1;
    if (eig.front() < -1e-9 * scale) return -1;
    return 0;
}

inline SolutionRecord certify(const EnergyFunctional& E, const std::vector<double>& u,
                              SolutionOrigin origin, double cascade_radius,
                              const SolveConfig& cfg) {
    SolutionRecord r;
    r.u = u;
    r.residual = E.residual(u); // independent of the optimizer's stopping test
    r.phi = E.phi(u);
    r.j_value = E.j_lambda(u);
    r.norm2 = norm2(u);
    r.norm_inf = norm_inf(u);
    r.origin = origin;
    r.cascade_radius = cascade_radius;
    r.hessian_sign = hessian_min_sign(E, u);
    (void)cfg;
    return r;
}

struct NonConvergence {
    int start_index = -1;
    std::vector<double> last;
    double grad_norm = kInf;
    int iters = 0;
    std::vector<double> grad_trace;
};

struct MultistartResult {
    std::vector<SolutionRecord> records; // deduped, sorted by phi ascending
    std::vector<NonConvergence> failures;
    int distinct_count = 0;
};

namespace detail {

inline bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline void sort_and_dedupe(std::vector<SolutionRecord>& recs, double dedupe_radius) {
    std::sort(recs.begin(), recs.end(), [](const SolutionRecord& x, const SolutionRecord& y) {
        if (x.phi != y.phi) return x.phi < y.phi;
        return lex_less(x.u, y.u);
    });
    std::vector<SolutionRecord> kept;
    for (auto& r : recs) {
        bool dup = false;
        for (const auto& k : kept)
            if (relative_distance(r.u, k.u) <= dedupe_radius) {
                dup = true;
                break;
            }
        if (!dup) kept.push_back(std::move(r));
    }
    recs = std::move(kept);
}

} // namespace detail

/// Local minimization from every start, with residual certification,
/// deduplication and a deterministic ordering by Phi.
inline MultistartResult multistart_solve(const EnergyFunctional& E, const SolveConfig& cfg) {
    std::vector<std::vector<double>> starts = cfg.starts;
    if (cfg.random_starts > 0) {
        Rng rng(cfg.seed);
        std::uniform_real_distribution<double> uni(-cfg.start_box, cfg.start_box);
        for (int i = 0; i < cfg.random_starts; ++i) {
            std::vector<double> s(E.dimension());
            for (double& v : s) v = uni(rng);
            starts.push_back(std::move(s));
        }
    }
    if (starts.empty())
        throw InvalidDimensionError("multistart_solve needs at least one start");

    MultistartResult out;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (static_cast<int>(starts[i].size()) != E.dimension())
            throw InvalidDimensionError("start vector dimension mismatch");
        MinimizeResult m = local_minimize(E, starts[i], cfg);
        if (m.converged) {
            SolutionRecord rec = certify(E, m.u, SolutionOrigin::multistart,
                                         std::numeric_limits<double>::quiet_NaN(), cfg);
            if (rec.residual <= cfg.residual_tol) {
                out.records.push_back(std::move(rec));
                continue;
            }
        }
        NonConvergence nc;
        nc.start_index = static_cast<int>(i);
        nc.last = std::move(m.u);
        nc.grad_norm = m.grad_norm;
        nc.iters = m.iters;
        nc.grad_trace = std::move(m.grad_trace);
        out.failures.push_back(std::move(nc));
    }
    detail::sort_and_dedupe(out.records, cfg.dedupe_radius);
    out.distinct_count = static_cast<int>(out.records.size());
    return out;
}

struct SublevelResult {
    enum class Status { interior, boundary, no_convergence };
    Status status = Status::no_convergence;
    std::vector<double> u;
    double phi = 0.0;
    double j_value = 0.0;
    double residual = kInf;
    double margin = 0.0; // r - phi at the final point
};

namespace detail {

/// Gradient descent on J(u) - mu * log(r - Phi(u)), starting inside
/// {Phi < r}; steps that would leave the set are rejected by the line search.
inline void barrier_descend(const EnergyFunctional& E, double r, double mu,
                            std::vector<double>& u, int max_inner) {
    const int n = E.dimension();
    const ProblemInstance& p = E.problem();
    std::vector<double> gj(n), gphi(n), g(n), trial(n), htmp(n);
    auto barrier_value = [&](const std::vector<double>& x) {
        const double ph = E.phi(x);
        if (!(ph < r)) return kInf;
        return E.j_lambda(x) - mu * std::log(r - ph);
    };
    double fval = barrier_value(u);
    double step = 1.0;
    for (int it = 0; it < max_inner; ++it) {
        const double ph = E.phi(u);
        E.gradient(u, gj);
        // grad Phi = A u - h(u)
        p.matrix.mul(u, gphi);
        p.h.evaluate(u, htmp);
        for (int i = 0; i < n; ++i) gphi[i] -= htmp[i];
        const double w = mu / (r - ph);
        for (int i = 0; i < n; ++i) g[i] = gj[i] + w * gphi[i];
        const double gn = norm2(g);
        if (gn <= 1e-12 * (1.0 + std::abs(fval))) break;

        double alpha = step;
        bool accepted = false;
        for (int bt = 0; bt < 70; ++bt, alpha *= 0.5) {
            for (int i = 0; i < n; ++i) trial[i] = u[i] - alpha * g[i] / gn;
            const double ft = barrier_value(trial);
            if (std::isfinite(ft) && ft <= fval - 1e-4 * alpha * gn) {
                u = trial;
                fval = ft;
                step = alpha * 2.0;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
}

/// Start candidates for a sublevel stage: the origin, a halving ladder of
/// constant vectors (both signs), and seeded random draws in the sup-norm
/// box of the stage.
inline std::vector<std::vector<double>>
sublevel_starts(const EnergyFunctional& E, double r, const SolveConfig& cfg,
                std::uint64_t stage_seed) {
    const int n = E.dimension();
    const double box = sup_norm_radius(E.problem().matrix, r);
    std::vector<std::vector<double>> starts;
    starts.emplace_back(n, 0.0);
    for (double beta = box; beta > 1e-18 * box; beta *= 0.5) {
        starts.emplace_back(n, beta);
        starts.emplace_back(n, -beta);
    }
    Rng rng(stage_seed);
    std::uniform_real_distribution<double> uni(-box, box);
    for (int i = 0; i < cfg.cascade_random_starts; ++i) {
        std::vector<double> s(n);
        for (double& v : s) v = uni(rng);
        starts.push_back(std::move(s));
    }
    for (const auto& s : cfg.starts)
        if (static_cast<int>(s.size()) == n) starts.push_back(s);

    // keep admissible starts only, ranked by J, capped for cost
    std::vector<std::pair<double, std::vector<double>>> ranked;
    for (auto& s : starts) {
        if (E.phi(s) >= r * (1.0 - 1e-9)) continue;
        ranked.emplace_back(E.j_lambda(s), std::move(s));
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<std::vector<double>> out;
    out.emplace_back(n, 0.0);
    for (auto& [j, s] : ranked) {
        if (out.size() >= 18) break;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace detail

/// Minimize J over the open sublevel set {Phi < r} with a logarithmic
/// barrier, then polish unconstrained. A result is `interior` only when the
/// final point keeps a margin r - Phi >= 1e-6 r and its residual certifies;
/// otherwise the stage reports boundary attainment.
inline SublevelResult minimize_on_sublevel(const EnergyFunctional& E, double r,
                                           const SolveConfig& cfg,
                                           std::uint64_t stage_seed = 0) {
    if (!(r > 0.0)) throw InvalidDimensionError("sublevel radius must be positive");
    SublevelResult best;
    bool have = false;

    for (const auto& start : detail::sublevel_starts(E, r, cfg, stage_seed ^ cfg.seed)) {
        std::vector<double> u = start;
        const double scale = std::max(1.0, std::abs(E.j_lambda(u)));
        for (double mu = 1e-2 * scale; mu >= 1e-10 * scale; mu *= 0.1)
            detail::barrier_descend(E, r, mu, u, 150);

        MinimizeResult polish = local_minimize(E, u, cfg, 5000);
        // keep the polished point unless the barrier point is meaningfully
        // lower in J or polishing escaped the sublevel set: the final Newton
        // steps must not paper over a boundary-pressed constrained minimizer
        const double j_barrier = E.j_lambda(u);
        const double j_polish = E.phi(polish.u) < r * (1.0 - 1e-12)
                                    ? E.j_lambda(polish.u)
                                    : kInf;
        const double slack = 1e-9 * std::max(1.0, std::abs(j_barrier));
        std::vector<double>& candidate = j_polish <= j_barrier + slack ? polish.u : u;

        SublevelResult cur;
        cur.u = candidate;
        cur.phi = E.phi(candidate);
        cur.j_value = E.j_lambda(candidate);
        cur.residual = E.residual(candidate);
        cur.margin = r - cur.phi;
        cur.status = (cur.margin >= 1e-6 * r && cur.residual <= cfg.residual_tol)
                         ? SublevelResult::Status::interior
                         : SublevelResult::Status::boundary;

        const bool better =
            !have || cur.j_value < best.j_value ||
            (cur.j_value == best.j_value && detail::lex_less(cur.u, best.u));
        if (better) {
            best = std::move(cur);
            have = true;
        }
    }
    if (!have) best.status = SublevelResult::Status::no_convergence;
    return best;
}

struct CascadeStage {
    double radius = 0.0;
    SublevelResult::Status status = SublevelResult::Status::no_convergence;
    double phi = 0.0;
    double residual = kInf;
    double margin = 0.0;
    bool kept = false;
    std::string note;
};

struct CascadeResult {
    std::vector<SolutionRecord> records;
    std::vector<CascadeStage> stages;
    bool multiplicity_evidence = false;
    std::string note;
};

/// Walk the radius schedule, harvesting one interior-certified minimizer per
/// level. Kept records are pairwise distinct; in the growing regime Phi
/// increases strictly along them, in the shrinking regime the sup-norm
/// decreases strictly and records must be nontrivial. The finite prefix is
/// evidence, never a claim of infinitude.
inline CascadeResult cascade(const EnergyFunctional& E, const SolveConfig& cfg) {
    const auto& sched = cfg.radius_schedule;
    if (sched.empty()) throw InvalidDimensionError("cascade needs a radius schedule");
    for (std::size_t i = 0; i < sched.size(); ++i) {
        if (!(sched[i] > 0.0)) throw StructuralError("cascade radii must be positive");
        if (i > 0) {
            const bool ok = cfg.regime == Regime::at_infinity ? sched[i] > sched[i - 1]
                                                              : sched[i] < sched[i - 1];
            if (!ok)
                throw StructuralError("radius schedule must be strictly monotone for the regime");
        }
    }

    CascadeResult out;
    for (std::size_t m = 0; m < sched.size(); ++m) {
        const double r = sched[m];
        SublevelResult sr = minimize_on_sublevel(
            E, r, cfg, 0x9e3779b97f4a7c15ull * (m + 1));
        CascadeStage stage;
        stage.radius = r;
        stage.status = sr.status;
        stage.phi = sr.phi;
        stage.residual = sr.residual;
        stage.margin = sr.margin;

        if (sr.status == SublevelResult::Status::interior) {
            SolutionRecord rec = certify(E, sr.u, SolutionOrigin::cascade, r, cfg);
            bool accept = rec.residual <= cfg.residual_tol;
            if (accept)
                for (const auto& k : out.records)
                    if (relative_distance(rec.u, k.u) <= cfg.dedupe_radius) {
                        accept = false;
                        stage.note = "duplicate of an earlier record";
                        break;
                    }
            if (accept && !out.records.empty()) {
                if (cfg.regime == Regime::at_infinity) {
                    if (!(rec.phi > out.records.back().phi)) {
                        accept = false;
                        stage.note = "phi not strictly increasing";
                    }
                } else {
                    if (!(rec.norm_inf < out.records.back().norm_inf)) {
                        accept = false;
                        stage.note = "sup-norm not strictly decreasing";
                    }
                }
            }
            if (accept && cfg.regime == Regime::at_zero && rec.norm2 <= cfg.residual_tol) {
                accept = false;
                stage.note = "trivial record rejected in the shrinking regime";
            }
            if (accept) {
                stage.kept = true;
                out.records.push_back(std::move(rec));
            }
        } else if (sr.status == SublevelResult::Status::boundary) {
            stage.note = "constrained minimizer attained the boundary";
        } else {
            stage.note = "no convergence at this level";
        }
        out.stages.push_back(std::move(stage));
    }

    out.multiplicity_evidence = !out.records.empty();
    if (!out.multiplicity_evidence) {
        out.note = "no multiplicity evidence: every level ended on the boundary or "
                   "was rejected; the functional may simply possess a global "
                   "minimum, or the tolerances are too tight to certify more";
    }
    return out;
}

struct WitnessReport {
    std::vector<double> peaks;
    std::vector<double> values;          // J(b 1)
    std::vector<double> constant_bounds; // (T/2) b^2 - lambda sum F_k(b)
    bool inequality_ok = true;
    int decreasing_from = -1; // values strictly decrease from this index on
    int negative_from = -1;   // values negative from this index on
    bool unbounded_evidence = false;

    std::string verdict() const {
        return unbounded_evidence ? "unbounded-below evidence" : "bounded-below evidence";
    }
};

/// Evaluate J along constant vectors b_m * 1 and compare against the
/// structural bound (T/2) b^2 - lambda sum F_k(b).
inline WitnessReport unboundedness_witness(const EnergyFunctional& E,
                                           const std::vector<double>& peaks) {
    WitnessReport rep;
    rep.peaks = peaks;
    const ProblemInstance& p = E.problem();
    const double T = p.constant_T();
    for (double b : peaks) {
        std::vector<double> s(p.dimension(), b);
        const double val = E.j_lambda(s);
        const double bound = 0.5 * T * b * b - p.lambda * E.psi(s);
        rep.values.push_back(val);
        rep.constant_bounds.push_back(bound);
        if (val > bound + 1e-9 * std::max(1.0, std::abs(bound)))
            rep.inequality_ok = false;
    }
    const int n = static_cast<int>(rep.values.size());
    for (int i = n - 1; i >= 0; --i) {
        if (i + 1 < n && !(rep.values[i + 1] < rep.values[i])) break;
        rep.decreasing_from = i;
    }
    for (int i = n - 1; i >= 0; --i) {
        if (!(rep.values[i] < 0.0)) break;
        rep.negative_from = i;
    }
    rep.unbounded_evidence = rep.decreasing_from >= 0 && rep.negative_from >= 0 &&
                             rep.decreasing_from < n - 1;
    return rep;
}

} // namespace varsolve
