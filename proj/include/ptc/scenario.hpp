#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptc/control.hpp"
#include "ptc/sim.hpp"

namespace ptc {

enum class FeedbackMode { State, Output };
enum class UncertaintyKind { Zero, Linear, BilinearExample };

struct SweepSpec {
    int count = 0;        // number of random initial conditions
    double radius = 1.0;  // uniform cube half-width for random initials
    std::vector<std::string> betas;  // "formula", "<k>x" or a plain number

    bool empty() const { return count <= 0 && betas.empty(); }
};

// Flat sectioned key/value scenario description. Parsing is strict: unknown
// sections or keys are errors, every value must parse completely.
struct ScenarioConfig {
    // [scenario]
    int n = 2;
    double T = 1.0;
    double c0 = 0.0;
    FeedbackMode feedback = FeedbackMode::State;
    std::optional<double> beta_override;
    bool allow_beta_below_formula = false;
    UncertaintyKind uncertainty = UncertaintyKind::Zero;
    double epsilon = 0.1;                    // bilinear example only
    Eigen::MatrixXd linear_c, linear_a;      // linear tables (c_i_j / a_i_j keys)
    double x0_init = 0.0;
    Eigen::VectorXd x_init;                  // chained coordinates, size n
    Eigen::VectorXd xi_init;                 // observer start, size n
    std::optional<Eigen::Vector2d> bilinear_init;  // (z1, z2) in original coordinates
    std::uint64_t seed = 0;

    // [integrator]
    IntegratorConfig integrator;

    // [output]
    std::string out_dir = "out";
    std::string csv_name = "trajectory.csv";
    std::string native_csv_name;  // optional second file with solver-native rows
    bool svg = false;

    // [sweep]
    std::optional<SweepSpec> sweep;

    static ScenarioConfig parse_string(const std::string& text);
    static ScenarioConfig parse_file(const std::string& path);
    std::string serialize() const;
    void validate() const;  // throws std::invalid_argument
    std::string id() const; // short content hash of the serialized form
};

// Everything needed to run the configured scenario.
struct ScenarioRuntime {
    std::shared_ptr<const PleBasis> basis;
    ChainedSystem system;
    ChainedState init;
    Eigen::VectorXd xi_init;
    DerivedBounds bounds;
    double beta = 0.0;
    std::optional<StateFeedbackLaw> state_law;
    std::optional<ObserverLaw> observer_law;
};

ScenarioRuntime build_runtime(const ScenarioConfig& cfg);
Trajectory run_scenario(const ScenarioConfig& cfg);

// One row per run: terminal and peak magnitudes, fitted envelope constants and
// a convergence flag. Runs execute on a bounded worker pool; per-run failures
// land in the row's status column instead of aborting the sweep.
std::string run_sweep_csv(const ScenarioConfig& cfg, int workers);

// The packaged planar-bilinear demonstration scenario (output feedback,
// beta = 100, T = 2.5 s).
std::string example_scenario_text();

}  // namespace ptc
