// Command-line front end: hypothesis analysis and solution search for the
// parametrized nonlinear algebraic system A u = lambda f(u) + h(u).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varsolve/app.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    bool override_hypotheses = false;
    long long seed = -1;
};

enum ExitCode : int {
    exit_ok = 0,
    exit_hypothesis = 2,
    exit_config = 3,
    exit_numerical = 4,
};

varsolve::LoadedConfig load(const CliOptions& opt) {
    varsolve::LoadedConfig cfg = varsolve::load_config(opt.config_path);
    if (opt.seed >= 0) cfg.solver.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    return cfg;
}

int finish(const varsolve::LoadedConfig& cfg, const varsolve::RunResult& res) {
    varsolve::write_outputs(cfg, res, cfg.output_dir);
    if (res.exit_code == exit_hypothesis) {
        std::cerr << "hypotheses not satisfied:\n";
        for (const auto& f : res.gate.failures) std::cerr << "  " << f << "\n";
        std::cerr << "use --override-hypotheses to proceed without guarantees\n";
        return exit_hypothesis;
    }
    std::cout << res.analysis.to_text();
    std::cout << "records: " << res.records.size() << "\n";
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        std::cout << "  " << i + 1 << ": phi=" << varsolve::fmt17(r.phi)
                  << " residual=" << varsolve::fmt17(r.residual)
                  << " norm_inf=" << varsolve::fmt17(r.norm_inf) << "\n";
    }
    std::cout << "outputs written to " << cfg.output_dir << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational multiplicity toolkit for A u = lambda f(u) + h(u)"};
    app.require_subcommand(1);

    CliOptions opt;
    auto* analyze_cmd = app.add_subcommand("analyze", "verify hypotheses and report intervals");
    auto* solve_cmd = app.add_subcommand("solve", "multistart search for solutions");
    auto* cascade_cmd = app.add_subcommand("cascade", "sublevel cascade along the radius schedule");
    auto* grid_cmd = app.add_subcommand("grid", "solve the grid problem end to end");
    for (auto* cmd : {analyze_cmd, solve_cmd, cascade_cmd, grid_cmd}) {
        cmd->add_option("config", opt.config_path, "JSON problem configuration")->required();
        cmd->add_flag("--override-hypotheses", opt.override_hypotheses,
                      "proceed past failed hypothesis checks (outputs are watermarked)");
        cmd->add_option("--seed", opt.seed, "override the config seed");
        cmd->add_option("--out", opt.out_dir, "output directory (default from config)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        varsolve::LoadedConfig cfg = load(opt);
        if (analyze_cmd->parsed()) {
            varsolve::AnalysisReport rep = varsolve::analyze(cfg);
            std::filesystem::create_directories(cfg.output_dir);
            varsolve::write_file(std::filesystem::path(cfg.output_dir) / "report.txt",
                                 rep.to_text());
            varsolve::write_file(std::filesystem::path(cfg.output_dir) / "spectrum.txt",
                                 varsolve::spectrum_text(rep.spectrum));
            std::cout << rep.to_text();
            return exit_ok;
        }
        if (solve_cmd->parsed()) return finish(cfg, varsolve::run_solve(cfg, opt.override_hypotheses));
        if (cascade_cmd->parsed())
            return finish(cfg, varsolve::run_cascade(cfg, opt.override_hypotheses));
        return finish(cfg, varsolve::run_grid(cfg, opt.override_hypotheses));
    } catch (const varsolve::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const varsolve::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const varsolve::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}
