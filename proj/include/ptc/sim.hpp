#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptc/control.hpp"
#include "ptc/model.hpp"

namespace ptc {

// Raised when a run observes the uncertainty exceeding its bound table.
class AssumptionViolation : public std::runtime_error {
  public:
    AssumptionViolation(double t, int component, double slack);
    double t() const { return t_; }
    int component() const { return component_; }
    double slack() const { return slack_; }

  private:
    double t_;
    int component_;
    double slack_;
};

enum class StepMethod { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
    StepMethod method = StepMethod::Rk45Adaptive;
    double h0 = 1e-3;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    // Simulate on [0, T (1 - terminal_guard)] so the gain stays finite.
    double terminal_guard = 1e-6;
    // Accepted steps obey h <= step_cap_ratio * (T - t); with gamma = 1/(T-t)
    // this resolves the terminal stiffness in O(log(1/terminal_guard)) steps.
    double step_cap_ratio = 0.1;
    bool assert_assumption = true;

    void validate() const;  // throws std::invalid_argument
};

struct TrajectorySample {
    double t = 0.0;
    double x0 = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd xi;  // empty unless an observer run
    double u0 = 0.0;
    double u = 0.0;
    double gamma = 0.0;
    double V = 0.0;  // gamma z^T P(gamma) z along the run
};

// Samples at every accepted step plus the raw integrator support
// (ts, ys, dys) for dense cubic-Hermite evaluation. A diverged run keeps
// everything up to the last finite sample and sets `diverged`.
struct Trajectory {
    int n = 0;
    bool has_observer = false;
    bool transformed = false;  // run integrated in z coordinates
    double T = 0.0;
    double x0_init = 0.0;
    double beta_used = 0.0;
    std::string scenario_id;
    IntegratorConfig config;

    std::vector<TrajectorySample> samples;
    std::vector<double> ts;
    std::vector<Eigen::VectorXd> ys;
    std::vector<Eigen::VectorXd> dys;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    std::size_t rhs_evals = 0;
    bool diverged = false;
    double t_end = 0.0;

    // Dense state at t (clamped to the simulated window).
    Eigen::VectorXd state_at(double t) const;
    // Dense sample with controls and diagnostics recomputed from the state.
    TrajectorySample sample_at(double t) const;

    std::function<TrajectorySample(double, const Eigen::VectorXd&)> observe;
};

Trajectory simulate_state_feedback(const ChainedSystem& sys, const StateFeedbackLaw& law,
                                   const ChainedState& init, const IntegratorConfig& cfg);

Trajectory simulate_output_feedback(const ChainedSystem& sys, const ObserverLaw& law,
                                    const ChainedState& init, const Eigen::VectorXd& xi_init,
                                    const IntegratorConfig& cfg);

// Integrates the transformed loop z' = gamma E z + (theta(t) + beta) A z +
// varphi + b u directly in z coordinates (state feedback, c0 = 0 only; the
// open-loop theta requires x0(0)).
Trajectory simulate_transformed(const ChainedSystem& sys, const StateFeedbackLaw& law,
                                const Eigen::VectorXd& z_init, double x0_init,
                                const IntegratorConfig& cfg);

}  // namespace ptc
