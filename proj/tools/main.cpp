#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include "ptc/csv.hpp"
#include "ptc/scenario.hpp"
#include "ptc/svg.hpp"
#include "ptc/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitAssumption = 3;

std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void print_matrix(const char* label, const Eigen::MatrixXd& m) {
    std::printf("%s =\n", label);
    for (int i = 0; i < m.rows(); ++i) {
        std::printf("  ");
        for (int j = 0; j < m.cols(); ++j) std::printf("%12.6g", m(i, j));
        std::printf("\n");
    }
}

int cmd_constants(int n, double T, const std::string& config_path, const std::string& csv_path) {
    ptc::UncertaintyBoundTable table = ptc::UncertaintyBoundTable::zero(n);
    if (!config_path.empty()) {
        const ptc::ScenarioConfig cfg = ptc::ScenarioConfig::parse_file(config_path);
        const ptc::ScenarioRuntime rt = ptc::build_runtime(cfg);
        if (rt.system.n != n) {
            throw std::invalid_argument("config chain length differs from --n");
        }
        table = rt.system.uncertainty.bound();
    }

    const ptc::PleBasis basis(n);
    const Eigen::MatrixXd g = ptc::compute_g_table(table, T);
    const double d = ptc::compute_d(g, 1.0 / T, n);
    const double beta_state =
        ptc::beta_state_feedback(n, basis.delta_c(), d, basis.lambda_max(), 0.0, T);
    const double beta_output =
        ptc::beta_output_feedback(n, basis.delta_c(), d, basis.lambda_max(), basis.k3());
    std::vector<double> grid;
    for (int k = 0; k <= 8; ++k) grid.push_back(std::pow(10.0, -1.0 + 0.25 * k));
    const double delta_o = ptc::estimate_delta_o(basis, grid);

    std::printf("chain length n = %d, prescribed time T = %.9g\n", n, T);
    print_matrix("P_n", basis.P());
    print_matrix("Q_n", basis.Q());
    std::printf("lambda_max   = %.12g\n", basis.lambda_max());
    std::printf("delta_c      = %.12g\n", basis.delta_c());
    std::printf("k3           = %.12g\n", basis.k3());
    std::printf("d            = %.12g\n", d);
    std::printf("beta_state   = %.12g\n", beta_state);
    std::printf("beta_output  = %.12g\n", beta_output);
    std::printf("delta_o_est  = %.12g (empirical)\n", delta_o);
    std::printf("self-check: b^T P_n b = %.12g (n = %d), c Q_n c^T = %.12g\n",
                basis.P()(n - 1, n - 1), n, basis.Q()(0, 0));

    if (!csv_path.empty()) {
        std::string csv = "name,value\n";
        char buf[64];
        auto row = [&](const char* name, double v) {
            std::snprintf(buf, sizeof(buf), "%s,%.15g\n", name, v);
            csv += buf;
        };
        row("lambda_max", basis.lambda_max());
        row("delta_c", basis.delta_c());
        row("k3", basis.k3());
        row("d", d);
        row("beta_state", beta_state);
        row("beta_output", beta_output);
        row("delta_o_est", delta_o);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                std::snprintf(buf, sizeof(buf), "P_%d_%d,%.15g\n", i + 1, j + 1, basis.P()(i, j));
                csv += buf;
                std::snprintf(buf, sizeof(buf), "Q_%d_%d,%.15g\n", i + 1, j + 1, basis.Q()(i, j));
                csv += buf;
            }
        }
        ptc::write_text_file(csv_path, csv);
        std::printf("constants written to %s\n", csv_path.c_str());
    }
    return kExitOk;
}

void write_charts(const ptc::Trajectory& traj, const std::string& dir) {
    const std::size_t m = traj.samples.size();
    std::vector<double> t(m);
    for (std::size_t k = 0; k < m; ++k) t[k] = traj.samples[k].t;
    auto series_of = [&](const char* label, auto getter) {
        ptc::SvgSeries s;
        s.label = label;
        s.x = t;
        s.y.resize(m);
        for (std::size_t k = 0; k < m; ++k) s.y[k] = getter(traj.samples[k]);
        return s;
    };

    std::vector<ptc::SvgSeries> states;
    states.push_back(series_of("x0", [](const ptc::TrajectorySample& s) { return s.x0; }));
    for (int i = 0; i < traj.n; ++i) {
        states.push_back(series_of(("x" + std::to_string(i + 1)).c_str(),
                                   [i](const ptc::TrajectorySample& s) { return s.x(i); }));
    }
    for (int i = 0; i < (traj.has_observer ? traj.n : 0); ++i) {
        states.push_back(series_of(("xi" + std::to_string(i + 1)).c_str(),
                                   [i](const ptc::TrajectorySample& s) { return s.xi(i); }));
    }
    ptc::write_text_file(path_join(dir, "states.svg"),
                         ptc::line_chart("State responses", "t [s]", "state", states));

    std::vector<ptc::SvgSeries> controls;
    controls.push_back(series_of("u0", [](const ptc::TrajectorySample& s) { return s.u0; }));
    controls.push_back(series_of("u", [](const ptc::TrajectorySample& s) { return s.u; }));
    ptc::write_text_file(path_join(dir, "controls.svg"),
                         ptc::line_chart("Control signals", "t [s]", "control", controls));
}

int run_simulation(const ptc::ScenarioConfig& cfg, bool force_svg, const std::string& out_dir) {
    ptc::ScenarioConfig run = cfg;
    if (!out_dir.empty()) run.out_dir = out_dir;
    if (force_svg) run.svg = true;

    ptc::Trajectory traj;
    try {
        traj = ptc::run_scenario(run);
    } catch (const ptc::AssumptionViolation& e) {
        std::fprintf(stderr, "assumption violation: %s\n", e.what());
        return kExitAssumption;
    }

    ptc::write_text_file(path_join(run.out_dir, run.csv_name), ptc::trajectory_csv(traj));
    if (!run.native_csv_name.empty()) {
        ptc::write_text_file(path_join(run.out_dir, run.native_csv_name),
                             ptc::trajectory_csv_native(traj));
    }
    if (run.svg) write_charts(traj, run.out_dir);

    std::printf("scenario %s: %zu accepted steps, %zu rejected, t_end = %.9g\n",
                traj.scenario_id.c_str(), traj.steps_accepted, traj.steps_rejected, traj.t_end);
    std::printf("trajectory written to %s\n", path_join(run.out_dir, run.csv_name).c_str());
    if (traj.diverged) {
        std::fprintf(stderr, "simulation diverged at t = %.9g; last finite samples kept\n",
                     traj.t_end);
        return kExitDiverged;
    }
    return kExitOk;
}

int cmd_verify(std::uint64_t seed, bool full, bool negative_controls, const std::string& out_dir) {
    ptc::SuiteOptions opts;
    opts.seed = seed;
    opts.full = full;
    opts.negative_controls = negative_controls;
    const ptc::VerificationReport rep = ptc::run_full_suite(opts);

    std::fputs(rep.to_text().c_str(), stdout);
    const std::string dir = out_dir.empty() ? "out" : out_dir;
    ptc::write_text_file(path_join(dir, "report.txt"), rep.to_text());
    ptc::write_text_file(path_join(dir, "report.csv"), rep.to_csv());
    std::printf("report written to %s and %s\n", path_join(dir, "report.txt").c_str(),
                path_join(dir, "report.csv").c_str());

    if (!rep.negative_controls_behaved()) {
        std::fprintf(stderr, "negative controls unexpectedly passed; the suite lost sensitivity\n");
        return kExitUsage;
    }
    return rep.all_passed() ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prescribed-time controller toolkit for uncertain chained nonholonomic systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir, csv_path;
    bool svg = false, full = false, negative_controls = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int n = 2;
    double T = 1.0;

    auto* constants = app.add_subcommand("constants", "Print the gain constants for one chain");
    constants->add_option("--n", n, "chain length")->required();
    constants->add_option("--T", T, "prescribed time");
    constants->add_option("--config", config_path, "scenario supplying the bound table");
    constants->add_option("--csv", csv_path, "also write constants as CSV");

    auto* simulate = app.add_subcommand("simulate", "Run one configured scenario");
    simulate->add_option("--config", config_path, "scenario file")->required();
    simulate->add_flag("--svg", svg, "write SVG charts");
    simulate->add_option("--out", out_dir, "output directory override");
    simulate->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        seed_given = true;
    });

    auto* verify = app.add_subcommand("verify", "Run the verification battery");
    verify->add_option("--config", config_path, "scenario supplying seed and output directory");
    verify->add_option("--seed", seed, "randomized-check seed")->each([&](const std::string&) {
        seed_given = true;
    });
    verify->add_flag("--full", full, "denser randomized sampling");
    verify->add_flag("--negative-controls", negative_controls,
                     "include expected-to-fail sensitivity probes");
    verify->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("sweep", "Run a batch of scenarios concurrently");
    sweep->add_option("--config", config_path, "scenario file with a [sweep] section")->required();
    sweep->add_option("--out", out_dir, "output directory override");
    sweep->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        seed_given = true;
    });

    auto* example = app.add_subcommand("example", "Run the packaged bilinear demonstration");
    example->add_flag("--svg", svg, "write SVG charts");
    example->add_option("--out", out_dir, "output directory override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (constants->parsed()) {
            return cmd_constants(n, T, config_path, csv_path);
        }
        if (simulate->parsed()) {
            ptc::ScenarioConfig cfg = ptc::ScenarioConfig::parse_file(config_path);
            if (seed_given) cfg.seed = seed;
            return run_simulation(cfg, svg, out_dir);
        }
        if (verify->parsed()) {
            if (!config_path.empty()) {
                const ptc::ScenarioConfig cfg = ptc::ScenarioConfig::parse_file(config_path);
                if (!seed_given) seed = cfg.seed;
                if (out_dir.empty()) out_dir = cfg.out_dir;
            }
            return cmd_verify(seed, full, negative_controls, out_dir);
        }
        if (sweep->parsed()) {
            ptc::ScenarioConfig cfg = ptc::ScenarioConfig::parse_file(config_path);
            if (seed_given) cfg.seed = seed;
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
            const std::string csv = ptc::run_sweep_csv(cfg, static_cast<int>(hw));
            ptc::write_text_file(path_join(cfg.out_dir, "sweep.csv"), csv);
            std::printf("sweep written to %s\n", path_join(cfg.out_dir, "sweep.csv").c_str());
            return kExitOk;
        }
        if (example->parsed()) {
            ptc::ScenarioConfig cfg =
                ptc::ScenarioConfig::parse_string(ptc::example_scenario_text());
            return run_simulation(cfg, svg, out_dir);
        }
    } catch (const ptc::AssumptionViolation& e) {
        std::fprintf(stderr, "assumption violation: %s\n", e.what());
        return kExitAssumption;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
