#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "varsolve/catalog.hpp"
#include "varsolve/energy.hpp"
#include "varsolve/solver.hpp"
#include "varsolve/spike_train.hpp"

namespace varsolve {

using nlohmann::json;

namespace cfgdetail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

inline const json& need(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) fail(where, "missing field '" + key + "'");
    return *it;
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

inline int positive_int(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<int>() < 1) fail(where, "expected a positive integer");
    return j.get<int>();
}

/// Extended real: a number, or "inf" / "+inf" / "-inf".
inline double extended(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        fail(where, "unrecognized extended-real literal '" + s + "'");
    }
    fail(where, "expected a number or an infinity literal");
}

inline Regime regime_of(const std::string& s, const std::string& where) {
    if (s == "infinity") return Regime::at_infinity;
    if (s == "zero") return Regime::at_zero;
    fail(where, "regime must be 'infinity' or 'zero'");
}

} // namespace cfgdetail

/// A catalog entry: the scalar function plus, when it is a spike train, the
/// witness sequences its construction exposes.
struct CatalogEntry {
    ComponentFunction fn{[](double) { return 0.0; }};
    std::optional<SpikeTrain> spike;
};

inline CatalogEntry make_catalog_entry(const json& j, const std::string& where) {
    using namespace cfgdetail;
    if (!j.is_object()) fail(where, "expected a function object");
    const std::string name = need(j, "name", where).get<std::string>();
    CatalogEntry e;
    if (name == "polynomial") {
        const json& c = need(j, "coefficients", where);
        if (!c.is_array() || c.empty()) fail(where, "coefficients must be a nonempty array");
        std::vector<double> coeffs;
        for (const auto& v : c) coeffs.push_back(number(v, where + ".coefficients"));
        e.fn = polynomial(std::move(coeffs));
    } else if (name == "sine" || name == "cosine") {
        const double a = number(need(j, "amplitude", where), where + ".amplitude");
        const double b = number(need(j, "frequency", where), where + ".frequency");
        e.fn = name == "sine" ? sine(a, b) : cosine(a, b);
    } else if (name == "table") {
        const json& pts = need(j, "points", where);
        if (!pts.is_array()) fail(where, "points must be an array of [x, y] pairs");
        std::vector<std::pair<double, double>> points;
        for (const auto& p : pts) {
            if (!p.is_array() || p.size() != 2) fail(where, "each point must be [x, y]");
            points.emplace_back(number(p[0], where), number(p[1], where));
        }
        e.fn = table_function(std::move(points));
    } else if (name == "spike_train") {
        const int stages = positive_int(need(j, "stages", where), where + ".stages");
        const Regime r = regime_of(need(j, "regime", where).get<std::string>(),
                                   where + ".regime");
        SpikeTrain st = r == Regime::at_infinity ? SpikeTrain::at_infinity(stages)
                                                 : SpikeTrain::at_zero(stages);
        e.fn = st.component();
        e.spike = std::move(st);
    } else if (name == "zero") {
        e.fn = zero_function();
    } else {
        fail(where, "unknown function '" + name + "'");
    }
    return e;
}

inline SpdMatrix matrix_from_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("matrix file '" + path + "' not readable");
    int n = 0;
    if (!(in >> n) || n < 1)
        throw ConfigError("matrix file '" + path + "': leading order must be a positive integer");
    std::vector<double> entries(static_cast<std::size_t>(n) * n);
    for (auto& v : entries)
        if (!(in >> v))
            throw ConfigError("matrix file '" + path + "': expected " + std::to_string(n * n) +
                              " entries");
    return SpdMatrix::dense(n, std::move(entries));
}

/// Fully assembled run: problem, profile, solver settings, output wiring.
struct LoadedConfig {
    ProblemInstance problem;
    std::optional<GridIndexMap> grid_map;
    AsymptoticProfile profile;
    Regime regime = Regime::at_infinity;
    SolveConfig solver;
    bool schedule_from_witness = false;
    std::vector<double> witness_peaks;
    std::vector<double> witness_plateaus;
    std::string output_dir = "out";
};

inline LoadedConfig parse_config(const json& j) {
    using namespace cfgdetail;
    if (!j.is_object()) fail("config", "top level must be an object");

    // matrix
    const json& jm = need(j, "matrix", "config");
    const std::string tag = need(jm, "tag", "matrix").get<std::string>();
    std::optional<SpdMatrix> A;
    std::optional<GridIndexMap> grid_map;
    if (tag == "second_difference") {
        A = second_difference_matrix(positive_int(need(jm, "n", "matrix"), "matrix.n"));
    } else if (tag == "grid") {
        auto [G, map] = grid_laplacian(positive_int(need(jm, "m", "matrix"), "matrix.m"),
                                       positive_int(need(jm, "n", "matrix"), "matrix.n"));
        A = std::move(G);
        grid_map = map;
    } else if (tag == "dense") {
        const json& rows = need(jm, "entries", "matrix");
        if (!rows.is_array() || rows.empty()) fail("matrix.entries", "expected a 2-D array");
        const int n = static_cast<int>(rows.size());
        std::vector<double> entries;
        for (const auto& row : rows) {
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                fail("matrix.entries", "rows must all have length " + std::to_string(n));
            for (const auto& v : row) entries.push_back(number(v, "matrix.entries"));
        }
        A = SpdMatrix::dense(n, std::move(entries));
    } else if (tag == "file") {
        A = matrix_from_text(need(jm, "path", "matrix").get<std::string>());
    } else {
        fail("matrix.tag", "unknown tag '" + tag + "'");
    }
    const int N = A->order();

    // nonlinearity
    const json& jf = need(j, "nonlinearity", "config");
    std::vector<ComponentFunction> fcomps;
    std::vector<double> witness_peaks, witness_plateaus;
    if (jf.contains("shared")) {
        CatalogEntry e = make_catalog_entry(jf["shared"], "nonlinearity.shared");
        if (e.spike) {
            witness_peaks = e.spike->peaks();
            witness_plateaus = e.spike->plateau_ends();
        }
        fcomps.assign(N, e.fn);
    } else if (jf.contains("components")) {
        const json& comps = jf["components"];
        if (!comps.is_array() || static_cast<int>(comps.size()) != N)
            fail("nonlinearity.components", "expected " + std::to_string(N) + " entries");
        for (std::size_t k = 0; k < comps.size(); ++k)
            fcomps.push_back(make_catalog_entry(comps[k], "nonlinearity.components[" +
                                                              std::to_string(k) + "]")
                                 .fn);
    } else {
        fail("nonlinearity", "needs 'shared' or 'components'");
    }

    // perturbation (optional)
    Perturbation h = Perturbation::none(N);
    if (j.contains("perturbation") && !j["perturbation"].is_null()) {
        const json& jh = j["perturbation"];
        std::vector<ComponentFunction> hcomps;
        if (jh.contains("shared")) {
            hcomps.assign(N, make_catalog_entry(jh["shared"], "perturbation.shared").fn);
        } else if (jh.contains("components")) {
            const json& comps = jh["components"];
            if (!comps.is_array() || static_cast<int>(comps.size()) != N)
                fail("perturbation.components", "expected " + std::to_string(N) + " entries");
            for (std::size_t k = 0; k < comps.size(); ++k)
                hcomps.push_back(make_catalog_entry(comps[k], "perturbation.components[" +
                                                                  std::to_string(k) + "]")
                                     .fn);
        } else {
            fail("perturbation", "needs 'shared' or 'components'");
        }
        const json& jl = need(jh, "lipschitz", "perturbation");
        std::vector<double> lips;
        if (jl.is_number()) {
            lips.assign(N, jl.get<double>());
        } else if (jl.is_array()) {
            if (static_cast<int>(jl.size()) != N)
                fail("perturbation.lipschitz", "expected " + std::to_string(N) + " constants");
            for (const auto& v : jl) lips.push_back(number(v, "perturbation.lipschitz"));
        } else {
            fail("perturbation.lipschitz", "expected a number or an array");
        }
        h = Perturbation(std::move(hcomps), std::move(lips));
    }

    const double lambda = number(need(j, "lambda", "config"), "lambda");

    LoadedConfig out{
        ProblemInstance(std::move(*A), Nonlinearity(std::move(fcomps)), std::move(h), lambda)};
    out.grid_map = grid_map;
    out.witness_peaks = std::move(witness_peaks);
    out.witness_plateaus = std::move(witness_plateaus);

    if (j.contains("regime"))
        out.regime = regime_of(j["regime"].get<std::string>(), "regime");

    // profile (optional)
    if (j.contains("profile") && !j["profile"].is_null()) {
        const json& jp = j["profile"];
        if (jp.contains("analytic")) {
            const json& pa = jp["analytic"];
            if (pa.contains("a_inf") || pa.contains("b_sup")) {
                out.profile.set_analytic(
                    Regime::at_infinity,
                    extended(need(pa, "a_inf", "profile.analytic"), "profile.analytic.a_inf"),
                    extended(need(pa, "b_sup", "profile.analytic"), "profile.analytic.b_sup"));
            }
            if (pa.contains("a_zero") || pa.contains("b_zero")) {
                out.profile.set_analytic(
                    Regime::at_zero,
                    extended(need(pa, "a_zero", "profile.analytic"), "profile.analytic.a_zero"),
                    extended(need(pa, "b_zero", "profile.analytic"), "profile.analytic.b_zero"));
            }
        } else if (jp.contains("empirical")) {
            const json& pe = jp["empirical"];
            const Regime r = pe.contains("regime")
                                 ? regime_of(pe["regime"].get<std::string>(),
                                             "profile.empirical.regime")
                                 : out.regime;
            std::vector<double> seq;
            const json& js = need(pe, "sequence", "profile.empirical");
            if (js.is_array()) {
                for (const auto& v : js) seq.push_back(number(v, "profile.empirical.sequence"));
            } else if (js.is_object() && js.contains("geometric")) {
                const json& g = js["geometric"];
                const double start = number(need(g, "start", "profile.empirical.sequence"),
                                            "geometric.start");
                const double ratio = number(need(g, "ratio", "profile.empirical.sequence"),
                                            "geometric.ratio");
                const int count = positive_int(need(g, "count", "profile.empirical.sequence"),
                                               "geometric.count");
                double t = start;
                for (int i = 0; i < count; ++i, t *= ratio) seq.push_back(t);
            } else {
                fail("profile.empirical.sequence", "expected an array or {geometric:{...}}");
            }
            out.profile.estimate(r, out.problem.f, seq);
        } else {
            fail("profile", "needs 'analytic' or 'empirical'");
        }
    }

    // solver (optional)
    if (j.contains("solver") && !j["solver"].is_null()) {
        const json& js = j["solver"];
        SolveConfig& s = out.solver;
        if (js.contains("residual_tol")) s.residual_tol = number(js["residual_tol"], "solver.residual_tol");
        if (js.contains("max_iters")) s.max_iters = positive_int(js["max_iters"], "solver.max_iters");
        if (js.contains("dedupe_radius")) s.dedupe_radius = number(js["dedupe_radius"], "solver.dedupe_radius");
        if (js.contains("seed")) s.seed = js["seed"].get<std::uint64_t>();
        if (js.contains("random_starts")) s.random_starts = js["random_starts"].get<int>();
        if (js.contains("start_box")) s.start_box = number(js["start_box"], "solver.start_box");
        if (js.contains("starts")) {
            const json& st = js["starts"];
            if (!st.is_array()) fail("solver.starts", "expected an array of vectors");
            for (const auto& v : st) {
                if (!v.is_array() || static_cast<int>(v.size()) != N)
                    fail("solver.starts", "each start must have dimension " + std::to_string(N));
                std::vector<double> u;
                for (const auto& x : v) u.push_back(number(x, "solver.starts"));
                s.starts.push_back(std::move(u));
            }
        }
        if (js.contains("radius_schedule")) {
            const json& rs = js["radius_schedule"];
            if (rs.is_array()) {
                for (const auto& v : rs)
                    s.radius_schedule.push_back(number(v, "solver.radius_schedule"));
            } else if (rs.is_string() && rs.get<std::string>() == "from_witness") {
                out.schedule_from_witness = true;
            } else if (rs.is_object() && rs.contains("geometric")) {
                const json& g = rs["geometric"];
                s.radius_schedule = geometric_schedule(
                    number(need(g, "first", "solver.radius_schedule"), "geometric.first"),
                    number(need(g, "ratio", "solver.radius_schedule"), "geometric.ratio"),
                    positive_int(need(g, "count", "solver.radius_schedule"), "geometric.count"));
            } else {
                fail("solver.radius_schedule",
                     "expected an array, {geometric:{...}}, or \"from_witness\"");
            }
        }
    }
    out.solver.regime = out.regime;

    if (j.contains("output") && j["output"].is_object() && j["output"].contains("dir"))
        out.output_dir = j["output"]["dir"].get<std::string>();

    if (out.schedule_from_witness) {
        if (out.witness_plateaus.empty())
            fail("solver.radius_schedule",
                 "\"from_witness\" needs a spike_train nonlinearity with known plateau ends");
        std::vector<double> c = out.witness_plateaus;
        if (out.regime == Regime::at_zero && c.size() > 1 && c[0] < c[1])
            std::reverse(c.begin(), c.end());
        out.solver.radius_schedule = schedule_from_witness(
            out.problem.matrix, out.problem.h.lipschitz_bound(), c);
    }
    return out;
}

inline LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file '" + path + "' not readable");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return parse_config(j);
}

} // namespace varsolve
