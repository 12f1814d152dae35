#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include "ptc/ple.hpp"

namespace ptc {

// Known componentwise bounds |phi_i| <= sum_{j<=i} c_ij |x_j|. Entries above
// the diagonal must be zero, all entries nonnegative.
struct UncertaintyBoundTable {
    Eigen::MatrixXd c;

    int n() const { return static_cast<int>(c.rows()); }
    static UncertaintyBoundTable zero(int n);
    void validate() const;  // throws std::invalid_argument
};

using PhiFn = std::function<Eigen::VectorXd(double t, double u, const Eigen::VectorXd& x)>;

// Couples the uncertainty callable with the bound table it claims to satisfy.
// phi must be pure (same inputs, same outputs); the sticky violation flag is
// the only shared mutable state and is safe to set from concurrent runs.
// Downstream bound computations refuse a spec whose flag is set: every
// guarantee in this library is conditional on the table holding.
class UncertaintySpec {
  public:
    UncertaintySpec(std::string name, UncertaintyBoundTable bound, PhiFn phi);

    const std::string& name() const { return name_; }
    int n() const { return bound_.n(); }
    const UncertaintyBoundTable& bound() const { return bound_; }
    Eigen::VectorXd phi(double t, double u, const Eigen::VectorXd& x) const;
    bool violation_seen() const { return violated_->load(); }
    void note_violation() const { violated_->store(true); }

    static UncertaintySpec zero(int n);
    // phi_i = sum_{j<=i} a_ij x_j; requires |a_ij| <= c_ij so the table holds
    // by construction.
    static UncertaintySpec linear(UncertaintyBoundTable bound, Eigen::MatrixXd a);

  private:
    std::string name_;
    UncertaintyBoundTable bound_;
    PhiFn phi_;
    std::shared_ptr<std::atomic<bool>> violated_;
};

// The plant: dx0 = u0 + c0 x0, dx_i = u0 x_{i+1} + phi_i (i < n),
// dx_n = u + phi_n, measured output y = [x0, x1]^T.
struct ChainedSystem {
    int n;
    double c0 = 0.0;
    UncertaintySpec uncertainty;
};

struct ChainedState {
    double x0 = 0.0;
    Eigen::VectorXd x;
};

// Right-hand side of the plant at (t, state, u0, u). Throws
// std::runtime_error if the uncertainty returns non-finite values.
ChainedState dynamics(const ChainedSystem& sys, double t, const ChainedState& s, double u0,
                      double u);

// Per-component slack sum_{j<=i} c_ij |x_j| - |phi_i(t,u,x)|. All components
// nonnegative iff the bound table holds at this point. Diagnostic only; never
// throws.
Eigen::VectorXd assumption_residual(const UncertaintySpec& spec, double t, double u,
                                    const Eigen::VectorXd& x);

// z_i = (T-t)^{i-n} x_i and its inverse; both require 0 <= t < T.
Eigen::VectorXd to_transformed(double t, double T, const Eigen::VectorXd& x);
Eigen::VectorXd from_transformed(double t, double T, const Eigen::VectorXd& z);

// g_ij = c_ij T^{i+1-j} for j < i, g_ii = c_ii T + n - i.
Eigen::MatrixXd compute_g_table(const UncertaintyBoundTable& bounds, double T);

// d = sqrt(max_{j} sum_{i=j}^{n} g_ij^2 i / gamma0^{2(i-j)}). With this d,
// |L psi|^2 <= d^2 gamma^2 |L z|^2 for every z and t in [0, T).
double compute_d(const Eigen::MatrixXd& g, double gamma0, int n);

// theta0 = 6 (|x0(0)|/T^3 + beta/(2T)) sqrt(3) n: the exponential growth rate
// admitted by the closed-loop decay envelope V(t) <= (T-t) e^{theta0 t} V(0).
double envelope_growth_rate(double x0_init, double T, double beta, int n);

struct DerivedBounds {
    Eigen::MatrixXd g;
    double d = 0.0;
    double theta0 = 0.0;
};

// Throws std::runtime_error if the spec has recorded a bound violation.
DerivedBounds derive_bounds(const UncertaintySpec& spec, double T, double x0_init, double beta);

// psi_i = (T-t)^{i-n} phi_i(t, u, x(z)) + (n-i)/(T-t) z_i, the disturbance of
// the transformed dynamics.
Eigen::VectorXd psi_vector(const UncertaintySpec& spec, double t, double T, double u,
                           const Eigen::VectorXd& z);

// ---------------------------------------------------------------------------
// Planar bilinear example and its chained image.
// ---------------------------------------------------------------------------

// dx0 = (1 - eps^2/2) v, dz1 = z2 v, dz2 = u + z1 (1 + theta1(t)^2), where
// theta1 is an uncertain bounded function of time. (The z1 factor is the
// natural reading of the model's uncertainty term.)
struct BilinearScenario {
    double epsilon = 0.1;
    std::function<double(double)> theta1 = [](double t) { return std::sin(t); };
    double theta1_sq_bound = 1.0;  // sup_t theta1(t)^2
};

// Chained image under u0 = (1 - eps^2/2) v, x1 = z1, x2 = s z2, u1 = s u with
// s = 2/(2 - eps^2). The uncertainty lands in the second component,
// phi_2 = s x1 (1 + theta1^2), so the bound table carries
// c21 = s (1 + sup theta1^2).
class BilinearReduction {
  public:
    explicit BilinearReduction(const BilinearScenario& sc);

    const ChainedSystem& system() const { return system_; }
    double state_scale() const { return state_scale_; }  // s
    double input_coeff() const { return input_coeff_; }  // 1 - eps^2/2

    double u0_from_v(double v) const { return input_coeff_ * v; }
    double v_from_u0(double u0) const { return u0 / input_coeff_; }
    double x2_from_z2(double z2) const { return state_scale_ * z2; }
    double z2_from_x2(double x2) const { return x2 / state_scale_; }
    double u1_from_u(double u) const { return state_scale_ * u; }
    double u_from_u1(double u1) const { return u1 / state_scale_; }

  private:
    double state_scale_;
    double input_coeff_;
    ChainedSystem system_;
};

// Throws std::domain_error unless |eps| < sqrt(2) (the input scaling must be
// invertible).
BilinearReduction bilinear_to_chained(const BilinearScenario& sc);

}  // namespace ptc
