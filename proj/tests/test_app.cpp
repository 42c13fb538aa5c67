#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "varsolve/app.hpp"

using namespace varsolve;
namespace fs = std::filesystem;

namespace {

json base_config() {
    return json{{"matrix", {{"tag", "second_difference"}, {"n", 3}}},
                {"nonlinearity", {{"shared", {{"name", "polynomial"}, {"coefficients", {0.0, 1.0}}}}}},
                {"lambda", 1.0}};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("varsolve_test_" + std::to_string(Catch::rngSeed()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

} // namespace

TEST_CASE("config parsing") {
    SECTION("second-difference matrix with shared linear nonlinearity") {
        auto cfg = parse_config(base_config());
        REQUIRE(cfg.problem.dimension() == 3);
        REQUIRE(cfg.problem.matrix.at(0, 0) == 2.0);
        REQUIRE(cfg.problem.lambda == 1.0);
        REQUIRE(cfg.problem.h.lipschitz_bound() == 0.0);
    }
    SECTION("dense matrix body") {
        json j = base_config();
        j["matrix"] = {{"tag", "dense"}, {"entries", {{2.0, -1.0}, {-1.0, 2.0}}}};
        j["nonlinearity"] = {{"shared", {{"name", "zero"}}}};
        auto cfg = parse_config(j);
        REQUIRE(cfg.problem.dimension() == 2);
        REQUIRE(cfg.problem.matrix.at(1, 0) == -1.0);
    }
    SECTION("grid matrix brings the index map") {
        json j = base_config();
        j["matrix"] = {{"tag", "grid"}, {"m", 2}, {"n", 3}};
        j["nonlinearity"] = {{"shared", {{"name", "zero"}}}};
        auto cfg = parse_config(j);
        REQUIRE(cfg.grid_map.has_value());
        REQUIRE(cfg.problem.dimension() == 6);
        REQUIRE(cfg.problem.matrix.at(0, 0) == 4.0);
    }
    SECTION("matrix from whitespace text") {
        TempDir tmp;
        std::ofstream(tmp.path / "m.txt") << "2\n2 -1\n-1 2\n";
        json j = base_config();
        j["matrix"] = {{"tag", "file"}, {"path", (tmp.path / "m.txt").string()}};
        j["nonlinearity"] = {{"shared", {{"name", "zero"}}}};
        auto cfg = parse_config(j);
        REQUIRE(cfg.problem.dimension() == 2);
        REQUIRE(cfg.problem.matrix.at(0, 1) == -1.0);
    }
    SECTION("perturbation with shared scalar and declared constant") {
        json j = base_config();
        j["perturbation"] = {{"shared", {{"name", "sine"}, {"amplitude", 0.1}, {"frequency", 1.0}}},
                             {"lipschitz", 0.1}};
        auto cfg = parse_config(j);
        REQUIRE(cfg.problem.h.lipschitz_bound() == 0.1);
        REQUIRE(cfg.problem.lipschitz_check.pass);
    }
    SECTION("analytic profile with infinity literals") {
        json j = base_config();
        j["profile"] = {{"analytic", {{"a_inf", 0.0}, {"b_sup", "inf"}}}};
        auto cfg = parse_config(j);
        REQUIRE(cfg.profile.a_inf.is_set());
        REQUIRE(cfg.profile.a_inf.value == 0.0);
        REQUIRE(std::isinf(cfg.profile.b_sup.value));
        REQUIRE(cfg.profile.a_inf.provenance == Provenance::analytic);
    }
    SECTION("empirical profile from a geometric sequence") {
        json j = base_config();
        j["profile"] = {{"empirical",
                         {{"regime", "infinity"},
                          {"sequence", {{"geometric", {{"start", 1.0}, {"ratio", 2.0}, {"count", 8}}}}}}}};
        auto cfg = parse_config(j);
        REQUIRE(cfg.profile.a_inf.provenance == Provenance::empirical);
        // linear f: every quotient is 3/2 (n = 3 components of t^2/2 over t^2)
        REQUIRE_THAT(cfg.profile.a_inf.value, Catch::Matchers::WithinRel(1.5, 1e-9));
        REQUIRE(cfg.profile.a_inf.witness.has_value());
    }
    SECTION("spike train nonlinearity exposes witness sequences") {
        json j = base_config();
        j["matrix"] = {{"tag", "second_difference"}, {"n", 4}};
        j["nonlinearity"] = {{"shared", {{"name", "spike_train"}, {"regime", "infinity"}, {"stages", 4}}}};
        j["solver"] = {{"radius_schedule", "from_witness"}};
        auto cfg = parse_config(j);
        REQUIRE(cfg.witness_peaks.size() == 4);
        REQUIRE(cfg.solver.radius_schedule.size() == 4);
        const double gap = cfg.problem.matrix.lambda_min();
        REQUIRE_THAT(cfg.solver.radius_schedule[0],
                     Catch::Matchers::WithinRel(0.5 * gap * 4.0, 1e-12));
    }
    SECTION("error diagnostics carry the field path") {
        json j = base_config();
        j.erase("lambda");
        REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("lambda"));
        j = base_config();
        j["matrix"]["tag"] = "mystery";
        REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("matrix.tag"));
        j = base_config();
        j["nonlinearity"] = {{"shared", {{"name", "polynomial"}}}};
        REQUIRE_THROWS_WITH(parse_config(j),
                            Catch::Matchers::ContainsSubstring("nonlinearity.shared"));
    }
}

TEST_CASE("analysis report") {
    SECTION("grid 4x4 reports the known smallest eigenvalue") {
        json j = base_config();
        j["matrix"] = {{"tag", "grid"}, {"m", 4}, {"n", 4}};
        j["nonlinearity"] = {{"shared", {{"name", "zero"}}}};
        auto cfg = parse_config(j);
        auto rep = analyze(cfg);
        const double pi = std::numbers::pi;
        REQUIRE_THAT(rep.lambda1,
                     Catch::Matchers::WithinAbs(8.0 * std::sin(pi / 10.0) * std::sin(pi / 10.0),
                                                1e-9));
        REQUIRE(rep.grid_T_paper_variant.has_value());
        REQUIRE(rep.ones_form == 16.0);
    }
    SECTION("analysis is pure: byte-identical on repeat") {
        json j = base_config();
        j["profile"] = {{"analytic", {{"a_inf", 0.25}, {"b_sup", 4.0}}}};
        auto cfg = parse_config(j);
        auto a = analyze(cfg).to_text();
        auto b = analyze(parse_config(j)).to_text();
        REQUIRE(a == b);
        REQUIRE_FALSE(a.empty());
    }
    SECTION("linear nonlinearity fails the oscillation condition") {
        json j = base_config();
        j["profile"] = {{"analytic", {{"a_inf", 1.0}, {"b_sup", 1.0}}}};
        auto cfg = parse_config(j);
        auto rep = analyze(cfg);
        REQUIRE(rep.condition_inf.has_value());
        REQUIRE_FALSE(rep.condition_inf->pass);
        auto gate = check_hypotheses(cfg, rep);
        REQUIRE_FALSE(gate.ok);
    }
    SECTION("analysis completes when L >= lambda_1 but the gate blocks") {
        json j = base_config();
        j["perturbation"] = {{"shared", {{"name", "polynomial"}, {"coefficients", {0.0, 2.0}}}},
                             {"lipschitz", 2.0}};
        auto cfg = parse_config(j);
        auto rep = analyze(cfg);
        REQUIRE_FALSE(rep.lip.pass);
        auto gate = check_hypotheses(cfg, rep);
        REQUIRE_FALSE(gate.ok);
        auto res = run_solve(cfg, false);
        REQUIRE(res.exit_code == 2);
        REQUIRE(res.records.empty());
        auto forced = run_solve(cfg, true);
        REQUIRE(forced.exit_code == 0);
        REQUIRE(forced.overridden);
    }
}

TEST_CASE("run_solve end to end") {
    json j = base_config();
    j["matrix"] = {{"tag", "dense"}, {"entries", {{2.0}}}};
    j["nonlinearity"] = {{"shared", {{"name", "polynomial"}, {"coefficients", {0.0, 0.0, 0.0, 1.0}}}}};
    j["solver"] = {{"starts", {{-3.0}, {0.0}, {3.0}}}};
    auto cfg = parse_config(j);
    auto res = run_solve(cfg, false);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.records.size() == 3);

    TempDir tmp;
    write_outputs(cfg, res, tmp.path);
    REQUIRE(fs::exists(tmp.path / "report.txt"));
    REQUIRE(fs::exists(tmp.path / "spectrum.txt"));
    REQUIRE(fs::exists(tmp.path / "solutions.csv"));
    REQUIRE(fs::exists(tmp.path / "series_phi.csv"));

    SECTION("csv carries one row per record") {
        std::ifstream in(tmp.path / "solutions.csv");
        std::string line;
        int rows = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        REQUIRE(rows == 4); // header + 3 records
    }
    SECTION("empty record list still emits headers") {
        TempDir other;
        RunResult empty;
        empty.analysis = res.analysis;
        write_outputs(cfg, empty, other.path);
        std::ifstream in(other.path / "series_phi.csv");
        std::string header;
        std::getline(in, header);
        REQUIRE(header == "m,phi");
    }
}

TEST_CASE("grid round trip") {
    json j;
    j["matrix"] = {{"tag", "grid"}, {"m", 3}, {"n", 4}};
    j["nonlinearity"] = {{"shared", {{"name", "polynomial"}, {"coefficients", {0.0, 0.0, 1.0}}}}};
    j["perturbation"] = {{"shared", {{"name", "sine"}, {"amplitude", 0.05}, {"frequency", 1.0}}},
                         {"lipschitz", 0.05}};
    j["lambda"] = 0.8;
    auto cfg = parse_config(j);

    SECTION("stencil equals algebraic residual on random vectors") {
        Rng rng(4711);
        std::uniform_real_distribution<double> uni(-10.0, 10.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> w(cfg.problem.dimension());
            for (double& v : w) v = uni(rng);
            REQUIRE(grid_residual_roundtrip(cfg.problem, *cfg.grid_map, w) <= 1e-10);
        }
    }
    SECTION("T constant for grids matches 2(m+n) + mn L") {
        for (int m = 1; m <= 10; ++m)
            for (int n = 1; n <= 10; ++n) {
                auto [G, map] = grid_laplacian(m, n);
                REQUIRE(G.ones_form() == 2.0 * (m + n));
                const double L = 0.05;
                REQUIRE_THAT(structural_constant_T(G, L),
                             Catch::Matchers::WithinAbs(2.0 * (m + n) + m * n * L, 1e-12));
            }
    }
}

TEST_CASE("run_grid recovers the constant-grid solutions") {
    // 2x2 grid with f = t^3: constant grids satisfy 2c = c^3. These critical
    // points are degenerate (6 sits in the grid spectrum, so the Jacobian
    // A - 3c^2 I is singular at them), which bounds the attainable accuracy
    // near them by sqrt of the residual tolerance.
    json j;
    j["matrix"] = {{"tag", "grid"}, {"m", 2}, {"n", 2}};
    j["nonlinearity"] = {{"shared", {{"name", "polynomial"}, {"coefficients", {0.0, 0.0, 0.0, 1.0}}}}};
    j["lambda"] = 1.0;
    j["solver"] = {{"random_starts", 24}, {"start_box", 3.0}, {"seed", 17},
                   {"dedupe_radius", 1e-3}};
    auto cfg = parse_config(j);
    auto res = run_grid(cfg, false);
    REQUIRE(res.exit_code == 0);
    const double root = std::sqrt(2.0);
    bool plus = false, minus = false;
    for (const auto& rec : res.records) {
        bool constant = true;
        for (double v : rec.u) constant = constant && std::abs(v - rec.u[0]) < 2e-4;
        double mean = (rec.u[0] + rec.u[1] + rec.u[2] + rec.u[3]) / 4.0;
        if (constant && std::abs(mean - root) < 1e-5) plus = true;
        if (constant && std::abs(mean + root) < 1e-5) minus = true;
    }
    REQUIRE(plus);
    REQUIRE(minus);
    for (double d : res.grid_roundtrip) REQUIRE(d <= 1e-10);

    TempDir tmp;
    write_outputs(cfg, res, tmp.path);
    REQUIRE(fs::exists(tmp.path / "solution_1.csv"));
    // the exported grid carries the zero Dirichlet frame: (m+2) rows
    std::ifstream in(tmp.path / "solution_1.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (rows == 0) {
            REQUIRE(line.substr(0, 2) == "0,");
        }
        ++rows;
    }
    REQUIRE(rows == 4);
}
