#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "varsolve/config.hpp"

namespace varsolve {

/// Everything `analyze` reports: spectral data, hypothesis verdicts and the
/// admissible parameter intervals. Rendering is deterministic: two runs on
/// the same config produce byte-identical text.
struct AnalysisReport {
    std::string matrix_desc;
    int order = 0;
    std::vector<double> spectrum;
    double lambda1 = 0.0, lambda_n = 0.0;
    double trace = 0.0, offdiag_sum = 0.0, ones_form = 0.0;
    double lipschitz = 0.0;
    LipschitzCheck lip;
    double constant_T = 0.0;
    std::optional<double> grid_T_paper_variant; // (2+L)(m+n), grids only
    std::optional<ConditionReport> condition_inf, condition_zero;
    std::optional<LambdaInterval> interval_inf, interval_zero;
    double lambda = 0.0;
    Regime regime = Regime::at_infinity;
    std::optional<bool> lambda_admissible; // against the regime's interval
    std::uint64_t seed = 0;

    std::string to_text() const {
        std::ostringstream os;
        os << "varsolve analysis\n";
        os << "seed: " << seed << "\n";
        os << "matrix: " << matrix_desc << "\n";
        os << "order: " << order << "\n";
        os << "lambda_1: " << fmt17(lambda1) << "\n";
        os << "lambda_n: " << fmt17(lambda_n) << "\n";
        os << "trace: " << fmt17(trace) << "\n";
        os << "offdiag_sum: " << fmt17(offdiag_sum) << "\n";
        os << "ones_form: " << fmt17(ones_form) << "\n";
        os << "L: " << fmt17(lipschitz) << "\n";
        os << "lipschitz_condition: " << (lip.pass ? "pass" : "FAIL")
           << " (coercivity coefficient " << fmt17(lip.coercivity_coefficient) << ")\n";
        os << "T: " << fmt17(constant_T) << "\n";
        if (grid_T_paper_variant)
            os << "T_paper_variant: " << fmt17(*grid_T_paper_variant)
               << " ((2+L)(m+n), paper variant)\n";
        auto print_regime = [&](const char* name, const std::optional<ConditionReport>& c,
                                const std::optional<LambdaInterval>& iv) {
            if (!c) return;
            os << "regime " << name << ":\n";
            os << "  A: " << fmt17(c->a_value) << "\n";
            os << "  B: " << fmt17(c->b_value) << "\n";
            os << "  condition: " << (c->pass ? "pass" : "FAIL") << " (A "
               << (c->pass ? "<" : ">=") << " " << fmt17(c->rhs) << ")"
               << (c->empirical ? " [estimate, not certificate]" : "") << "\n";
            if (iv) os << "  lambda_interval: " << iv->describe() << "\n";
        };
        print_regime("infinity", condition_inf, interval_inf);
        print_regime("zero", condition_zero, interval_zero);
        os << "lambda: " << fmt17(lambda) << "\n";
        if (lambda_admissible)
            os << "lambda_admissible: " << (*lambda_admissible ? "yes" : "no") << "\n";
        return os.str();
    }
};

inline AnalysisReport analyze(const LoadedConfig& cfg) {
    const ProblemInstance& p = cfg.problem;
    AnalysisReport rep;
    rep.matrix_desc = p.matrix.describe();
    rep.order = p.matrix.order();
    rep.spectrum = p.matrix.spectrum();
    rep.lambda1 = p.matrix.lambda_min();
    rep.lambda_n = p.matrix.lambda_max();
    rep.trace = p.matrix.trace();
    rep.offdiag_sum = p.matrix.upper_offdiag_sum();
    rep.ones_form = p.matrix.ones_form();
    rep.lipschitz = p.h.lipschitz_bound();
    rep.lip = p.lipschitz_check;
    rep.constant_T = p.constant_T();
    rep.lambda = p.lambda;
    rep.regime = cfg.regime;
    rep.seed = cfg.solver.seed;
    if (p.matrix.structure() == SpdMatrix::Structure::grid_laplacian)
        rep.grid_T_paper_variant = (2.0 + rep.lipschitz) *
                                   (p.matrix.grid_rows() + p.matrix.grid_cols());

    auto fill = [&](Regime r, std::optional<ConditionReport>& cond,
                    std::optional<LambdaInterval>& ivl) {
        if (!cfg.profile.a(r).is_set() || !cfg.profile.b(r).is_set()) return;
        cond = oscillation_condition(cfg.profile, p.matrix, rep.lipschitz, r);
        ivl = lambda_interval(cfg.profile, p.matrix, rep.lipschitz, r);
    };
    fill(Regime::at_infinity, rep.condition_inf, rep.interval_inf);
    fill(Regime::at_zero, rep.condition_zero, rep.interval_zero);

    const auto& ivl = cfg.regime == Regime::at_infinity ? rep.interval_inf : rep.interval_zero;
    if (ivl) rep.lambda_admissible = ivl->contains(p.lambda);
    return rep;
}

/// Which hypotheses block a solve, if any.
struct HypothesisGate {
    bool ok = true;
    std::vector<std::string> failures;

    void require(bool pass, const std::string& what) {
        if (!pass) {
            ok = false;
            failures.push_back(what);
        }
    }
};

inline HypothesisGate check_hypotheses(const LoadedConfig& cfg, const AnalysisReport& rep) {
    HypothesisGate gate;
    gate.require(rep.lip.pass, "Lipschitz bound violates L < lambda_1");
    const auto& cond = cfg.regime == Regime::at_infinity ? rep.condition_inf : rep.condition_zero;
    const auto& ivl = cfg.regime == Regime::at_infinity ? rep.interval_inf : rep.interval_zero;
    if (cond && !cond->pass)
        gate.require(false, std::string("oscillation condition fails in the ") +
                                to_string(cfg.regime) + " regime");
    if (ivl && !ivl->contains(cfg.problem.lambda))
        gate.require(false, "lambda lies outside the admissible interval " + ivl->describe());
    return gate;
}

struct RunResult {
    int exit_code = 0;
    AnalysisReport analysis;
    HypothesisGate gate;
    bool overridden = false;
    std::vector<SolutionRecord> records;
    std::vector<NonConvergence> failures;
    std::optional<CascadeResult> cascade_detail;
    std::vector<double> grid_roundtrip; // max |stencil - algebraic| per record
    std::vector<std::string> warnings;
};

/// Residual of the grid-form equation at every node (ghost boundary zeros),
/// compared entrywise against the algebraic gradient. Returns the largest
/// absolute difference.
inline double grid_residual_roundtrip(const ProblemInstance& p, const GridIndexMap& map,
                                      const std::vector<double>& w) {
    const int m = map.rows, n = map.cols;
    auto at = [&](int i, int j) -> double {
        if (i < 1 || i > m || j < 1 || j > n) return 0.0; // Dirichlet frame
        return w[map.to_linear(i, j) - 1];
    };
    std::vector<double> algebraic(p.dimension());
    p.matrix.mul(w, algebraic);
    for (int k = 0; k < p.dimension(); ++k)
        algebraic[k] -= p.lambda * p.f.component(k)(w[k]) + p.h.component(k)(w[k]);

    double worst = 0.0;
    for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= m; ++i) {
            const int k = map.to_linear(i, j) - 1;
            const double second_diff = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) +
                                       (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1));
            const double stencil = -second_diff - p.lambda * p.f.component(k)(w[k]) -
                                   p.h.component(k)(w[k]);
            worst = std::max(worst, std::abs(stencil - algebraic[k]));
        }
    return worst;
}

namespace appdetail {

inline SolveConfig effective_solver(const LoadedConfig& cfg, bool want_multistart) {
    SolveConfig s = cfg.solver;
    if (want_multistart && s.starts.empty() && s.random_starts <= 0) {
        // default recipe: the origin plus seeded draws in a moderate box
        s.starts.emplace_back(cfg.problem.dimension(), 0.0);
        s.random_starts = 16;
        if (s.start_box <= 0.0) s.start_box = 10.0;
    }
    return s;
}

} // namespace appdetail

inline RunResult run_solve(const LoadedConfig& cfg, bool override_hypotheses) {
    RunResult out;
    out.analysis = analyze(cfg);
    out.gate = check_hypotheses(cfg, out.analysis);
    if (!out.gate.ok && !override_hypotheses) {
        out.exit_code = 2;
        return out;
    }
    out.overridden = !out.gate.ok;
    EnergyFunctional E(cfg.problem);
    auto ms = multistart_solve(E, appdetail::effective_solver(cfg, true));
    out.records = std::move(ms.records);
    out.failures = std::move(ms.failures);
    return out;
}

inline RunResult run_cascade(const LoadedConfig& cfg, bool override_hypotheses) {
    RunResult out;
    out.analysis = analyze(cfg);
    out.gate = check_hypotheses(cfg, out.analysis);
    if (!out.gate.ok && !override_hypotheses) {
        out.exit_code = 2;
        return out;
    }
    out.overridden = !out.gate.ok;
    if (cfg.solver.radius_schedule.empty())
        throw ConfigError("cascade mode needs solver.radius_schedule");
    EnergyFunctional E(cfg.problem);
    auto cas = cascade(E, cfg.solver);
    out.records = cas.records;
    if (!cas.multiplicity_evidence) out.warnings.push_back(cas.note);
    out.cascade_detail = std::move(cas);
    return out;
}

/// The grid application: solve on the assembled grid matrix, verify the
/// stencil/algebraic residual round trip, keep grid layouts exportable.
inline RunResult run_grid(const LoadedConfig& cfg, bool override_hypotheses) {
    if (!cfg.grid_map)
        throw ConfigError("grid mode needs a matrix with tag \"grid\"");
    RunResult out = cfg.solver.radius_schedule.empty()
                        ? run_solve(cfg, override_hypotheses)
                        : run_cascade(cfg, override_hypotheses);
    if (out.exit_code != 0) return out;
    for (const auto& rec : out.records) {
        const double diff = grid_residual_roundtrip(cfg.problem, *cfg.grid_map, rec.u);
        out.grid_roundtrip.push_back(diff);
        if (diff > 1e-10)
            throw NumericalError("grid-form residual deviates from the algebraic residual by " +
                                     fmt17(diff),
                                 diff);
    }
    return out;
}

// ---------------------------------------------------------------------------
// output writers

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

inline std::string spectrum_text(const std::vector<double>& eig) {
    std::string s;
    for (double v : eig) s += fmt17(v) + "\n";
    return s;
}

inline std::string records_csv(const std::vector<SolutionRecord>& recs) {
    std::ostringstream os;
    os << "index,phi,j_lambda,residual,norm2,norm_inf,origin";
    int dim = recs.empty() ? 0 : static_cast<int>(recs.front().u.size());
    for (int k = 1; k <= dim; ++k) os << ",u" << k;
    os << "\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        os << i + 1 << "," << fmt17(r.phi) << "," << fmt17(r.j_value) << ","
           << fmt17(r.residual) << "," << fmt17(r.norm2) << "," << fmt17(r.norm_inf) << ","
           << r.origin_label();
        for (double v : r.u) os << "," << fmt17(v);
        os << "\n";
    }
    return os.str();
}

inline std::string records_text(const std::vector<SolutionRecord>& recs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        os << "solution " << i + 1 << "\n";
        os << "  origin: " << r.origin_label() << "\n";
        os << "  phi: " << fmt17(r.phi) << "\n";
        os << "  j_lambda: " << fmt17(r.j_value) << "\n";
        os << "  residual: " << fmt17(r.residual) << "\n";
        os << "  norm2: " << fmt17(r.norm2) << "\n";
        os << "  norm_inf: " << fmt17(r.norm_inf) << "\n";
        os << "  curvature_tag: " << r.hessian_sign << "\n";
        os << "  u:";
        for (double v : r.u) os << " " << fmt17(v);
        os << "\n";
    }
    return os.str();
}

/// Series files for cascade plots: (m, phi) and (m, sup-norm).
inline void emit_plot_data(const std::vector<SolutionRecord>& recs,
                           const std::filesystem::path& dir) {
    std::ostringstream phi, nrm;
    phi << "m,phi\n";
    nrm << "m,norm_inf\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        phi << i + 1 << "," << fmt17(recs[i].phi) << "\n";
        nrm << i + 1 << "," << fmt17(recs[i].norm_inf) << "\n";
    }
    write_file(dir / "series_phi.csv", phi.str());
    write_file(dir / "series_norm.csv", nrm.str());
}

/// One CSV matrix per grid solution, row-major with the zero Dirichlet frame.
inline void emit_grid_solutions(const std::vector<SolutionRecord>& recs,
                                const GridIndexMap& map,
                                const std::filesystem::path& dir) {
    for (std::size_t idx = 0; idx < recs.size(); ++idx) {
        std::ostringstream os;
        for (int i = 0; i <= map.rows + 1; ++i) {
            for (int j = 0; j <= map.cols + 1; ++j) {
                const bool interior = i >= 1 && i <= map.rows && j >= 1 && j <= map.cols;
                os << (interior ? fmt17(recs[idx].u[map.to_linear(i, j) - 1]) : "0");
                if (j <= map.cols) os << ",";
            }
            os << "\n";
        }
        write_file(dir / ("solution_" + std::to_string(idx + 1) + ".csv"), os.str());
    }
}

inline std::string nonconvergence_log(const std::vector<NonConvergence>& fails) {
    std::ostringstream os;
    for (const auto& f : fails) {
        os << "start " << f.start_index << ": no convergence after " << f.iters
           << " iterations, gradient norm " << fmt17(f.grad_norm) << "\n  trace:";
        for (double g : f.grad_trace) os << " " << fmt17(g);
        os << "\n";
    }
    return os.str();
}

/// Write the full artifact set for a run into `dir`.
inline void write_outputs(const LoadedConfig& cfg, const RunResult& res,
                          const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream report;
    if (res.overridden) {
        report << "WARNING: hypothesis override active; the multiplicity guarantees "
                  "do not apply to this run\n";
        for (const auto& f : res.gate.failures) report << "  failed: " << f << "\n";
    }
    report << res.analysis.to_text();
    if (!res.gate.ok && res.exit_code == 2) {
        report << "run refused: hypotheses not satisfied (use --override-hypotheses "
                  "to proceed without guarantees)\n";
        for (const auto& f : res.gate.failures) report << "  failed: " << f << "\n";
    }
    report << "records: " << res.records.size() << "\n";
    if (res.cascade_detail) {
        const auto& cas = *res.cascade_detail;
        for (std::size_t i = 0; i < cas.stages.size(); ++i) {
            const auto& st = cas.stages[i];
            report << "stage " << i + 1 << ": r=" << fmt17(st.radius) << " ";
            switch (st.status) {
                case SublevelResult::Status::interior: report << "interior"; break;
                case SublevelResult::Status::boundary: report << "boundary"; break;
                default: report << "no-convergence"; break;
            }
            report << (st.kept ? " kept" : " dropped");
            if (!st.note.empty()) report << " (" << st.note << ")";
            report << "\n";
        }
        if (!cas.multiplicity_evidence) report << cas.note << "\n";
    }
    for (const auto& w : res.warnings) report << "warning: " << w << "\n";
    if (!res.grid_roundtrip.empty()) {
        double worst = 0.0;
        for (double d : res.grid_roundtrip) worst = std::max(worst, d);
        report << "grid_roundtrip_max: " << fmt17(worst) << "\n";
    }
    write_file(dir / "report.txt", report.str());
    write_file(dir / "spectrum.txt", spectrum_text(res.analysis.spectrum));
    write_file(dir / "solutions.csv", records_csv(res.records));
    write_file(dir / "solutions.txt", records_text(res.records));
    emit_plot_data(res.records, dir);
    if (!res.failures.empty())
        write_file(dir / "nonconvergence.log", nonconvergence_log(res.failures));
    if (cfg.grid_map && !res.records.empty())
        emit_grid_solutions(res.records, *cfg.grid_map, dir);
}

} // namespace varsolve
