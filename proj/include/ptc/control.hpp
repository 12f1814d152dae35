#pragma once

#include <memory>
#include <optional>

#include "ptc/model.hpp"
#include "ptc/ple.hpp"

namespace ptc {

// Minimal admissible state-feedback gain
//   beta = ((2n + delta_c)/n + 2 d Lambda) e^{|c0| T};
// the factor reduces to 1 when c0 = 0.
double beta_state_feedback(int n, double delta_c, double d, double lambda, double c0, double T);

// Minimal admissible output-feedback gain beta = max{beta1, beta2} with
//   beta1 = 8 sqrt(2) n d Lambda k3 + 2 (2 + delta_c/n),
//   beta2 = 4 sqrt(2) d Lambda + 2 (2n + 2 - 1/n).
double beta_output_feedback(int n, double delta_c, double d, double lambda, double k3);

// u0(t) = -3/(T-t) x0 - beta/2 e^{c0 t} (T-t); throws std::domain_error for
// t outside [0, T).
double control_u0(double t, double x0, double beta, double T, double c0);

// Closed solution of the x0 loop,
//   x0(t) = (T-t)^2 ((T-t) x0(0)/T^3 - beta t/(2T)) e^{c0 t},
// valid on the closed interval [0, T] (it extends continuously to 0 at T).
double closed_form_x0(double t, double x0_init, double beta, double T, double c0);

// u0 along that solution, factored as (T-t)(theta(t) + beta e^{c0 t}) with
// theta(t) = -3 (T-t) e^{c0 t} (x0(0)/T^3 + beta/(2T)). Agrees with
// control_u0(closed_form_x0(t)) identically.
double open_loop_u0(double t, double x0_init, double beta, double T, double c0);
double open_loop_theta(double t, double x0_init, double beta, double T, double c0);

// Gain admissibility: Strict rejects overrides below the formula value
// (std::invalid_argument, message carries the formula value); Force accepts
// them for reproducing runs that are known to work below the sufficient gain.
enum class BetaPolicy { Strict, Force };

// u0(t) = -3/(T-t) x0 - beta/2 e^{c0 t} (T-t),
// u(t)  = -beta e^{c0 t} b^T P(gamma(t)) L(1/(T-t)) x(t).
class StateFeedbackLaw {
  public:
    StateFeedbackLaw(std::shared_ptr<const PleBasis> basis, GainSchedule schedule, double d,
                     double c0, std::optional<double> beta_override = {},
                     BetaPolicy policy = BetaPolicy::Strict);

    const PleBasis& basis() const { return *basis_; }
    std::shared_ptr<const PleBasis> basis_ptr() const { return basis_; }
    const GainSchedule& schedule() const { return schedule_; }
    double beta() const { return beta_; }
    double beta_min() const { return beta_min_; }
    double c0() const { return c0_; }
    double d() const { return d_; }

    double u0(double t, double x0) const;
    double u(double t, const Eigen::VectorXd& x) const;
    // Same control expressed in z = L(1/(T-t)) x coordinates.
    double u_transformed(double t, const Eigen::VectorXd& z) const;

  private:
    std::shared_ptr<const PleBasis> basis_;
    GainSchedule schedule_;
    double d_;
    double c0_;
    double beta_min_;
    double beta_;
};

// Observer-based output feedback (c0 = 0):
//   xi'(t) = beta A xi + b u + beta Q(gamma) c^T (gamma^{n-1} y2 - xi_1),
//   u(t)   = -beta b^T P(gamma) xi,
// with y = [x0, x1]^T measured; xi estimates the transformed state z. The x0
// channel keeps the state-feedback u0 driven by the measured y1.
class ObserverLaw {
  public:
    ObserverLaw(std::shared_ptr<const PleBasis> basis, GainSchedule schedule, double d,
                std::optional<double> beta_override = {}, BetaPolicy policy = BetaPolicy::Strict);

    const PleBasis& basis() const { return *basis_; }
    std::shared_ptr<const PleBasis> basis_ptr() const { return basis_; }
    const GainSchedule& schedule() const { return schedule_; }
    double beta() const { return beta_; }
    double beta_min() const { return beta_min_; }
    double d() const { return d_; }

    double u0(double t, double x0) const;
    double u(double t, const Eigen::VectorXd& xi) const;
    Eigen::VectorXd xi_derivative(double t, const Eigen::VectorXd& xi, double u,
                                  const Eigen::Vector2d& y) const;

  private:
    std::shared_ptr<const PleBasis> basis_;
    GainSchedule schedule_;
    double d_;
    double beta_min_;
    double beta_;
};

// V(t, z) = gamma z^T P(gamma) z, evaluated as gamma^2 (L z)^T P_n (L z) to
// avoid forming P(gamma) near the terminal time.
double lyapunov_value(const PleBasis& basis, double gamma, const Eigen::VectorXd& z);

}  // namespace ptc
