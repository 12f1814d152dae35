#include "ptc/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace ptc {

namespace {

void require_time_in_window(double t, double T) {
    if (!(t >= 0.0) || t >= T) {
        std::ostringstream msg;
        msg << "t = " << t << " outside the transformation window [0, " << T << ")";
        throw std::domain_error(msg.str());
    }
}

}  // namespace

UncertaintyBoundTable UncertaintyBoundTable::zero(int n) {
    UncertaintyBoundTable b;
    b.c = Eigen::MatrixXd::Zero(n, n);
    return b;
}

void UncertaintyBoundTable::validate() const {
    const int nn = n();
    if (nn < 1 || c.cols() != nn) {
        throw std::invalid_argument("bound table must be square and nonempty");
    }
    for (int i = 0; i < nn; ++i) {
        for (int j = 0; j < nn; ++j) {
            if (j > i && c(i, j) != 0.0) {
                throw std::invalid_argument("bound table has a nonzero entry above the diagonal");
            }
            if (!(c(i, j) >= 0.0) || !std::isfinite(c(i, j))) {
                throw std::invalid_argument("bound table entries must be finite and nonnegative");
            }
        }
    }
}

UncertaintySpec::UncertaintySpec(std::string name, UncertaintyBoundTable bound, PhiFn phi)
    : name_(std::move(name)),
      bound_(std::move(bound)),
      phi_(std::move(phi)),
      violated_(std::make_shared<std::atomic<bool>>(false)) {
    bound_.validate();
    if (!phi_) throw std::invalid_argument("uncertainty spec requires a callable");
}

Eigen::VectorXd UncertaintySpec::phi(double t, double u, const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = phi_(t, u, x);
    if (v.size() != n()) {
        throw std::runtime_error("uncertainty callable returned a vector of wrong dimension");
    }
    return v;
}

UncertaintySpec UncertaintySpec::zero(int n) {
    return UncertaintySpec("zero", UncertaintyBoundTable::zero(n),
                           [n](double, double, const Eigen::VectorXd&) {
                               return Eigen::VectorXd::Zero(n).eval();
                           });
}

UncertaintySpec UncertaintySpec::linear(UncertaintyBoundTable bound, Eigen::MatrixXd a) {
    bound.validate();
    const int n = bound.n();
    if (a.rows() != n || a.cols() != n) {
        throw std::invalid_argument("linear coefficient table has wrong dimensions");
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (std::abs(a(i, j)) > bound.c(i, j)) {
                throw std::invalid_argument(
                    "linear coefficients must satisfy |a_ij| <= c_ij so the table holds");
            }
        }
    }
    return UncertaintySpec("linear", std::move(bound),
                           [a = std::move(a)](double, double, const Eigen::VectorXd& x) {
                               return (a * x).eval();
                           });
}

ChainedState dynamics(const ChainedSystem& sys, double t, const ChainedState& s, double u0,
                      double u) {
    const int n = sys.n;
    const Eigen::VectorXd phi = sys.uncertainty.phi(t, u, s.x);
    if (!phi.allFinite()) {
        std::ostringstream msg;
        msg << "uncertainty '" << sys.uncertainty.name() << "' returned non-finite values at t = "
            << t;
        throw std::runtime_error(msg.str());
    }
    ChainedState ds;
    ds.x0 = u0 + sys.c0 * s.x0;
    ds.x = Eigen::VectorXd(n);
    for (int i = 0; i + 1 < n; ++i) ds.x(i) = u0 * s.x(i + 1) + phi(i);
    ds.x(n - 1) = u + phi(n - 1);
    return ds;
}

Eigen::VectorXd assumption_residual(const UncertaintySpec& spec, double t, double u,
                                    const Eigen::VectorXd& x) {
    const int n = spec.n();
    const Eigen::VectorXd phi = spec.phi(t, u, x);
    Eigen::VectorXd slack(n);
    for (int i = 0; i < n; ++i) {
        double bound = 0.0;
        for (int j = 0; j <= i; ++j) bound += spec.bound().c(i, j) * std::abs(x(j));
        slack(i) = bound - std::abs(phi(i));
    }
    return slack;
}

Eigen::VectorXd to_transformed(double t, double T, const Eigen::VectorXd& x) {
    require_time_in_window(t, T);
    const int n = static_cast<int>(x.size());
    const double r = T - t;
    Eigen::VectorXd z(n);
    double scale = 1.0;  // (T-t)^{i-n}, built from the last component upward
    for (int i = n - 1; i >= 0; --i) {
        z(i) = scale * x(i);
        scale /= r;
    }
    return z;
}

Eigen::VectorXd from_transformed(double t, double T, const Eigen::VectorXd& z) {
    require_time_in_window(t, T);
    const int n = static_cast<int>(z.size());
    const double r = T - t;
    Eigen::VectorXd x(n);
    double scale = 1.0;  // (T-t)^{n-i}
    for (int i = n - 1; i >= 0; --i) {
        x(i) = scale * z(i);
        scale *= r;
    }
    return x;
}

Eigen::MatrixXd compute_g_table(const UncertaintyBoundTable& bounds, double T) {
    if (!(T > 0.0)) throw std::domain_error("compute_g_table: T must be positive");
    bounds.validate();
    const int n = bounds.n();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            g(i, j) = bounds.c(i, j) * std::pow(T, i - j + 1);  // 1-indexed exponent i+1-j
        }
        g(i, i) = bounds.c(i, i) * T + static_cast<double>(n - 1 - i);
    }
    return g;
}

double compute_d(const Eigen::MatrixXd& g, double gamma0, int n) {
    if (!(gamma0 > 0.0)) throw std::domain_error("compute_d: gamma0 must be positive");
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        double inv_pow = 1.0;  // gamma0^{-2(i-j)}
        for (int i = j; i < n; ++i) {
            col += g(i, j) * g(i, j) * static_cast<double>(i + 1) * inv_pow;
            inv_pow /= gamma0 * gamma0;
        }
        worst = std::max(worst, col);
    }
    return std::sqrt(worst);
}

double envelope_growth_rate(double x0_init, double T, double beta, int n) {
    return 6.0 * (std::abs(x0_init) / (T * T * T) + beta / (2.0 * T)) * std::sqrt(3.0) * n;
}

DerivedBounds derive_bounds(const UncertaintySpec& spec, double T, double x0_init, double beta) {
    if (spec.violation_seen()) {
        throw std::runtime_error("refusing to derive bounds from uncertainty '" + spec.name() +
                                 "': its bound table has been observed violated");
    }
    DerivedBounds out;
    out.g = compute_g_table(spec.bound(), T);
    out.d = compute_d(out.g, 1.0 / T, spec.n());
    out.theta0 = envelope_growth_rate(x0_init, T, beta, spec.n());
    return out;
}

Eigen::VectorXd psi_vector(const UncertaintySpec& spec, double t, double T, double u,
                           const Eigen::VectorXd& z) {
    require_time_in_window(t, T);
    const int n = static_cast<int>(z.size());
    const double r = T - t;
    const Eigen::VectorXd x = from_transformed(t, T, z);
    const Eigen::VectorXd phi = spec.phi(t, u, x);
    Eigen::VectorXd psi(n);
    double scale = 1.0;  // (T-t)^{i-n}
    for (int i = n - 1; i >= 0; --i) {
        psi(i) = scale * phi(i) + static_cast<double>(n - 1 - i) / r * z(i);
        scale /= r;
    }
    return psi;
}

BilinearReduction::BilinearReduction(const BilinearScenario& sc)
    : state_scale_(2.0 / (2.0 - sc.epsilon * sc.epsilon)),
      input_coeff_(1.0 - sc.epsilon * sc.epsilon / 2.0),
      system_{2, 0.0, UncertaintySpec::zero(2)} {
    if (!(std::abs(sc.epsilon) < std::sqrt(2.0))) {
        throw std::domain_error("bilinear reduction requires |epsilon| < sqrt(2)");
    }
    UncertaintyBoundTable table = UncertaintyBoundTable::zero(2);
    table.c(1, 0) = state_scale_ * (1.0 + sc.theta1_sq_bound);
    const double s = state_scale_;
    auto theta1 = sc.theta1;
    UncertaintySpec spec("bilinear_example", table,
                         [s, theta1](double t, double, const Eigen::VectorXd& x) {
                             const double th = theta1(t);
                             Eigen::VectorXd phi(2);
                             phi(0) = 0.0;
                             phi(1) = s * x(0) * (1.0 + th * th);
                             return phi;
                         });
    system_ = ChainedSystem{2, 0.0, std::move(spec)};
}

BilinearReduction bilinear_to_chained(const BilinearScenario& sc) { return BilinearReduction(sc); }

}  // namespace ptc
