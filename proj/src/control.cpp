#include "ptc/control.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace ptc {

namespace {

void require_time(double t, double T) {
    if (!(t >= 0.0) || t >= T) {
        std::ostringstream msg;
        msg << "control law evaluated at t = " << t << " outside [0, " << T << ")";
        throw std::domain_error(msg.str());
    }
}

double validated_beta(double beta_min, std::optional<double> beta_override, BetaPolicy policy,
                      const char* kind) {
    if (!beta_override) return beta_min;
    if (policy == BetaPolicy::Strict && *beta_override < beta_min * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << kind << " gain override " << *beta_override
            << " is below the admissible formula value " << beta_min
            << "; pass BetaPolicy::Force to use it anyway";
        throw std::invalid_argument(msg.str());
    }
    if (!(std::isfinite(*beta_override)) || *beta_override <= 0.0) {
        throw std::invalid_argument("gain override must be positive and finite");
    }
    return *beta_override;
}

}  // namespace

double beta_state_feedback(int n, double delta_c, double d, double lambda, double c0, double T) {
    return ((2.0 * n + delta_c) / n + 2.0 * d * lambda) * std::exp(std::abs(c0) * T);
}

double beta_output_feedback(int n, double delta_c, double d, double lambda, double k3) {
    const double s2 = std::sqrt(2.0);
    const double beta1 = 8.0 * s2 * n * d * lambda * k3 + 2.0 * (2.0 + delta_c / n);
    const double beta2 = 4.0 * s2 * d * lambda + 2.0 * (2.0 * n + 2.0 - 1.0 / n);
    return std::max(beta1, beta2);
}

double control_u0(double t, double x0, double beta, double T, double c0) {
    require_time(t, T);
    const double r = T - t;
    return -3.0 / r * x0 - 0.5 * beta * std::exp(c0 * t) * r;
}

double closed_form_x0(double t, double x0_init, double beta, double T, double c0) {
    if (!(t >= 0.0) || t > T) {
        std::ostringstream msg;
        msg << "closed_form_x0 evaluated at t = " << t << " outside [0, " << T << "]";
        throw std::domain_error(msg.str());
    }
    const double r = T - t;
    return r * r * (r * x0_init / (T * T * T) - beta * t / (2.0 * T)) * std::exp(c0 * t);
}

double open_loop_theta(double t, double x0_init, double beta, double T, double c0) {
    const double r = T - t;
    return -3.0 * r * std::exp(c0 * t) * (x0_init / (T * T * T) + beta / (2.0 * T));
}

double open_loop_u0(double t, double x0_init, double beta, double T, double c0) {
    if (!(t >= 0.0) || t > T) {
        std::ostringstream msg;
        msg << "open_loop_u0 evaluated at t = " << t << " outside [0, " << T << "]";
        throw std::domain_error(msg.str());
    }
    const double r = T - t;
    return r * (open_loop_theta(t, x0_init, beta, T, c0) + beta * std::exp(c0 * t));
}

StateFeedbackLaw::StateFeedbackLaw(std::shared_ptr<const PleBasis> basis, GainSchedule schedule,
                                   double d, double c0, std::optional<double> beta_override,
                                   BetaPolicy policy)
    : basis_(std::move(basis)),
      schedule_(schedule),
      d_(d),
      c0_(c0),
      beta_min_(beta_state_feedback(basis_->n(), basis_->delta_c(), d, basis_->lambda_max(), c0,
                                    schedule.T())),
      beta_(validated_beta(beta_min_, beta_override, policy, "state-feedback")) {}

double StateFeedbackLaw::u0(double t, double x0) const {
    return control_u0(t, x0, beta_, schedule_.T(), c0_);
}

double StateFeedbackLaw::u(double t, const Eigen::VectorXd& x) const {
    return u_transformed(t, to_transformed(t, schedule_.T(), x));
}

double StateFeedbackLaw::u_transformed(double t, const Eigen::VectorXd& z) const {
    const double gamma = schedule_.gamma(t);
    const Eigen::RowVectorXd row = feedback_gain_row(*basis_, gamma);
    const double value = -beta_ * std::exp(c0_ * t) * row.dot(z);
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "state feedback became non-finite at t = " << t << " (gamma = " << gamma << ")";
        throw std::overflow_error(msg.str());
    }
    return value;
}

ObserverLaw::ObserverLaw(std::shared_ptr<const PleBasis> basis, GainSchedule schedule, double d,
                         std::optional<double> beta_override, BetaPolicy policy)
    : basis_(std::move(basis)),
      schedule_(schedule),
      d_(d),
      beta_min_(beta_output_feedback(basis_->n(), basis_->delta_c(), d, basis_->lambda_max(),
                                     basis_->k3())),
      beta_(validated_beta(beta_min_, beta_override, policy, "output-feedback")) {}

double ObserverLaw::u0(double t, double x0) const {
    return control_u0(t, x0, beta_, schedule_.T(), 0.0);
}

double ObserverLaw::u(double t, const Eigen::VectorXd& xi) const {
    const double gamma = schedule_.gamma(t);
    const Eigen::RowVectorXd row = feedback_gain_row(*basis_, gamma);
    const double value = -beta_ * row.dot(xi);
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "output feedback became non-finite at t = " << t << " (gamma = " << gamma << ")";
        throw std::overflow_error(msg.str());
    }
    return value;
}

Eigen::VectorXd ObserverLaw::xi_derivative(double t, const Eigen::VectorXd& xi, double u,
                                           const Eigen::Vector2d& y) const {
    const int n = basis_->n();
    const double gamma = schedule_.gamma(t);
    // gamma^{n-1} y2 is the transformed first state z1.
    double z1 = y(1);
    for (int k = 0; k < n - 1; ++k) z1 *= gamma;
    const double innovation = z1 - xi(0);
    const Eigen::VectorXd gain = observer_gain_col(*basis_, gamma);
    Eigen::VectorXd dxi(n);
    for (int i = 0; i + 1 < n; ++i) dxi(i) = beta_ * xi(i + 1);
    dxi(n - 1) = 0.0;
    dxi(n - 1) += u;
    dxi += beta_ * innovation * gain;
    if (!dxi.allFinite()) {
        std::ostringstream msg;
        msg << "observer derivative became non-finite at t = " << t << " (gamma = " << gamma
            << ")";
        throw std::overflow_error(msg.str());
    }
    return dxi;
}

double lyapunov_value(const PleBasis& basis, double gamma, const Eigen::VectorXd& z) {
    const int n = basis.n();
    Eigen::VectorXd w(n);
    double p = 1.0;
    for (int i = n - 1; i >= 0; --i) {
        w(i) = p * z(i);
        p *= gamma;
    }
    return gamma * gamma * w.dot(basis.P() * w);
}

}  // namespace ptc
