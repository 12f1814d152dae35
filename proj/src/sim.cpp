#include "ptc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ptc {

namespace {

std::string violation_message(double t, int component, double slack) {
    std::ostringstream msg;
    msg << "uncertainty bound violated at t = " << t << ", component " << (component + 1)
        << " (slack " << slack << ")";
    return msg.str();
}

using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using AcceptHook = std::function<void(double, const Eigen::VectorXd&)>;

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84,  0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct IntegrationResult {
    std::vector<double> ts;
    std::vector<Eigen::VectorXd> ys;
    std::vector<Eigen::VectorXd> dys;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    bool diverged = false;
};

// Integrate y' = rhs(t, y) on [0, t_end] with the cap h <= eta (T - t).
// on_accept runs after each accepted step (it may throw to abort the run).
IntegrationResult integrate(const Rhs& rhs, const Eigen::VectorXd& y0, double T, double t_end,
                            const IntegratorConfig& cfg, const AcceptHook& on_accept) {
    IntegrationResult out;
    if (!y0.allFinite()) throw std::invalid_argument("initial state must be finite");

    double t = 0.0;
    Eigen::VectorXd y = y0;
    Eigen::VectorXd k1 = rhs(t, y);
    ++out.rhs_evals;
    if (!k1.allFinite()) throw std::invalid_argument("initial derivative is not finite");

    out.ts.push_back(t);
    out.ys.push_back(y);
    out.dys.push_back(k1);
    on_accept(t, y);

    const double eta = cfg.step_cap_ratio;
    const bool adaptive = cfg.method == StepMethod::Rk45Adaptive;
    double h = std::min(cfg.h0, eta * (T - t));
    const double h_min = 1e-15 * T;
    const int dim = static_cast<int>(y.size());
    std::vector<Eigen::VectorXd> k(7, Eigen::VectorXd(dim));

    while (t < t_end) {
        h = std::min({h, eta * (T - t), t_end - t});
        if (h < h_min) {
            out.diverged = true;  // stalled: cannot advance within floating-point resolution
            break;
        }

        bool finite = true;
        // Gain evaluations raise std::overflow_error when a stage state is
        // far enough out that the feedback is no longer representable; treat
        // that exactly like a non-finite stage.
        auto eval_stage = [&](double ts_, const Eigen::VectorXd& ys_, Eigen::VectorXd& ks_) {
            try {
                ks_ = rhs(ts_, ys_);
            } catch (const std::overflow_error&) {
                ks_.setConstant(dim, std::numeric_limits<double>::quiet_NaN());
            }
            ++out.rhs_evals;
        };
        if (adaptive) {
            k[0] = k1;
            for (int s = 1; s < 7 && finite; ++s) {
                Eigen::VectorXd ys = y;
                for (int j = 0; j < s; ++j) {
                    if (kA[s][j] != 0.0) ys += h * kA[s][j] * k[j];
                }
                eval_stage(t + kC[s] * h, ys, k[s]);
                finite = k[s].allFinite();
            }
            Eigen::VectorXd y5 = y;
            Eigen::VectorXd y4 = y;
            if (finite) {
                for (int s = 0; s < 7; ++s) {
                    if (kB5[s] != 0.0) y5 += h * kB5[s] * k[s];
                    if (kB4[s] != 0.0) y4 += h * kB4[s] * k[s];
                }
                finite = y5.allFinite() && y4.allFinite();
            }
            double err = 0.0;
            if (finite) {
                for (int i = 0; i < dim; ++i) {
                    const double sc =
                        cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
                    const double e = (y5(i) - y4(i)) / sc;
                    err += e * e;
                }
                err = std::sqrt(err / dim);
            }

            if (!finite) {
                ++out.rejected;
                h *= 0.2;
                if (h < h_min) {
                    out.diverged = true;
                    break;
                }
                continue;
            }
            if (err > 1.0) {
                ++out.rejected;
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                continue;
            }

            t += h;
            y = y5;
            k1 = k[6];  // FSAL
            ++out.accepted;
            out.ts.push_back(t);
            out.ys.push_back(y);
            out.dys.push_back(k1);
            on_accept(t, y);
            const double grow = (err == 0.0) ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
            h *= std::max(0.2, grow);
        } else {
            // Classical RK4 with the same terminal cap.
            k[0] = k1;
            eval_stage(t + 0.5 * h, y + 0.5 * h * k[0], k[1]);
            eval_stage(t + 0.5 * h, y + 0.5 * h * k[1], k[2]);
            eval_stage(t + h, y + h * k[2], k[3]);
            Eigen::VectorXd ynew = y + (h / 6.0) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
            if (!ynew.allFinite()) {
                out.diverged = true;
                break;
            }
            t += h;
            y = ynew;
            eval_stage(t, y, k1);
            if (!k1.allFinite()) {
                out.diverged = true;
                break;
            }
            ++out.accepted;
            out.ts.push_back(t);
            out.ys.push_back(y);
            out.dys.push_back(k1);
            on_accept(t, y);
            h = cfg.h0;
        }
    }
    return out;
}

// Shared by the runs; the tolerance scales with the bound magnitude.
void check_assumption(const UncertaintySpec& spec, double t, double u, const Eigen::VectorXd& x) {
    const int n = spec.n();
    const Eigen::VectorXd phi = spec.phi(t, u, x);
    for (int i = 0; i < n; ++i) {
        double bound = 0.0;
        for (int j = 0; j <= i; ++j) bound += spec.bound().c(i, j) * std::abs(x(j));
        const double slack = bound - std::abs(phi(i));
        if (slack < -1e-7 * (1.0 + bound)) {
            spec.note_violation();
            throw AssumptionViolation(t, i, slack);
        }
    }
}

bool sample_finite(const TrajectorySample& s) {
    return std::isfinite(s.x0) && s.x.allFinite() && s.xi.allFinite() && std::isfinite(s.u0) &&
           std::isfinite(s.u) && std::isfinite(s.gamma) && std::isfinite(s.V);
}

Trajectory finish(Trajectory traj, IntegrationResult&& res) {
    traj.ts = std::move(res.ts);
    traj.ys = std::move(res.ys);
    traj.dys = std::move(res.dys);
    traj.steps_accepted = res.accepted;
    traj.steps_rejected = res.rejected;
    traj.rhs_evals = res.rhs_evals;
    traj.diverged = res.diverged;
    traj.samples.reserve(traj.ts.size());
    for (std::size_t i = 0; i < traj.ts.size(); ++i) {
        bool ok = true;
        try {
            traj.samples.push_back(traj.observe(traj.ts[i], traj.ys[i]));
            ok = sample_finite(traj.samples.back());
            if (!ok) traj.samples.pop_back();
        } catch (const std::overflow_error&) {
            ok = false;
        }
        if (!ok) {
            // Derived quantities left the representable range: keep the
            // finite prefix only and flag the run.
            traj.ts.resize(i);
            traj.ys.resize(i);
            traj.dys.resize(i);
            traj.diverged = true;
            break;
        }
    }
    traj.t_end = traj.ts.empty() ? 0.0 : traj.ts.back();
    return traj;
}

}  // namespace

AssumptionViolation::AssumptionViolation(double t, int component, double slack)
    : std::runtime_error(violation_message(t, component, slack)),
      t_(t),
      component_(component),
      slack_(slack) {}

void IntegratorConfig::validate() const {
    if (terminal_guard < 1e-9 || terminal_guard > 1e-2) {
        throw std::invalid_argument("terminal_guard must lie in [1e-9, 1e-2]");
    }
    if (!(step_cap_ratio > 0.0) || step_cap_ratio > 0.5) {
        throw std::invalid_argument("step_cap_ratio must lie in (0, 0.5]");
    }
    if (!(h0 > 0.0) || !(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw std::invalid_argument("h0, rel_tol and abs_tol must be positive");
    }
}

Eigen::VectorXd Trajectory::state_at(double t) const {
    if (ts.empty()) throw std::logic_error("empty trajectory");
    const double tc = std::clamp(t, ts.front(), ts.back());
    const auto it = std::upper_bound(ts.begin(), ts.end(), tc);
    std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    if (hi == 0) hi = 1;
    if (hi >= ts.size()) hi = ts.size() - 1;
    const std::size_t lo = hi - 1;
    const double h = ts[hi] - ts[lo];
    if (h <= 0.0) return ys[lo];
    const double s = (tc - ts[lo]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * ys[lo] + (h10 * h) * dys[lo] + h01 * ys[hi] + (h11 * h) * dys[hi];
}

TrajectorySample Trajectory::sample_at(double t) const {
    const double tc = std::clamp(t, ts.front(), ts.back());
    return observe(tc, state_at(tc));
}

Trajectory simulate_state_feedback(const ChainedSystem& sys, const StateFeedbackLaw& law,
                                   const ChainedState& init, const IntegratorConfig& cfg) {
    cfg.validate();
    const int n = sys.n;
    if (init.x.size() != n) throw std::invalid_argument("initial state has wrong dimension");
    const double T = law.schedule().T();
    const double t_end = T * (1.0 - cfg.terminal_guard);

    Eigen::VectorXd y0(n + 1);
    y0(0) = init.x0;
    y0.tail(n) = init.x;

    auto rhs = [&sys, &law, n](double t, const Eigen::VectorXd& y) {
        ChainedState s{y(0), y.tail(n)};
        const double u0 = law.u0(t, s.x0);
        const double u = law.u(t, s.x);
        const ChainedState ds = dynamics(sys, t, s, u0, u);
        Eigen::VectorXd dy(n + 1);
        dy(0) = ds.x0;
        dy.tail(n) = ds.x;
        return dy;
    };

    Trajectory traj;
    traj.n = n;
    traj.T = T;
    traj.x0_init = init.x0;
    traj.beta_used = law.beta();
    traj.config = cfg;
    traj.observe = [law, n, T](double t, const Eigen::VectorXd& y) {
        TrajectorySample s;
        s.t = t;
        s.x0 = y(0);
        s.x = y.tail(n);
        s.u0 = law.u0(t, s.x0);
        s.u = law.u(t, s.x);
        s.gamma = law.schedule().gamma(t);
        s.V = lyapunov_value(law.basis(), s.gamma, to_transformed(t, T, s.x));
        return s;
    };

    auto on_accept = [&](double t, const Eigen::VectorXd& y) {
        if (!cfg.assert_assumption) return;
        const Eigen::VectorXd x = y.tail(n);
        check_assumption(sys.uncertainty, t, law.u(t, x), x);
    };

    return finish(std::move(traj), integrate(rhs, y0, T, t_end, cfg, on_accept));
}

Trajectory simulate_output_feedback(const ChainedSystem& sys, const ObserverLaw& law,
                                    const ChainedState& init, const Eigen::VectorXd& xi_init,
                                    const IntegratorConfig& cfg) {
    cfg.validate();
    const int n = sys.n;
    if (init.x.size() != n || xi_init.size() != n) {
        throw std::invalid_argument("initial state or observer state has wrong dimension");
    }
    if (sys.c0 != 0.0) {
        throw std::invalid_argument("output feedback covers plants with c0 = 0 only");
    }
    const double T = law.schedule().T();
    const double t_end = T * (1.0 - cfg.terminal_guard);

    // Plant and observer are integrated as one coupled vector [x0; x; xi].
    Eigen::VectorXd y0(2 * n + 1);
    y0(0) = init.x0;
    y0.segment(1, n) = init.x;
    y0.tail(n) = xi_init;

    auto rhs = [&sys, &law, n](double t, const Eigen::VectorXd& y) {
        ChainedState s{y(0), y.segment(1, n)};
        const Eigen::VectorXd xi = y.tail(n);
        const double u = law.u(t, xi);
        const double u0 = law.u0(t, s.x0);
        const ChainedState ds = dynamics(sys, t, s, u0, u);
        const Eigen::VectorXd dxi =
            law.xi_derivative(t, xi, u, Eigen::Vector2d(s.x0, s.x(0)));
        Eigen::VectorXd dy(2 * n + 1);
        dy(0) = ds.x0;
        dy.segment(1, n) = ds.x;
        dy.tail(n) = dxi;
        return dy;
    };

    Trajectory traj;
    traj.n = n;
    traj.has_observer = true;
    traj.T = T;
    traj.x0_init = init.x0;
    traj.beta_used = law.beta();
    traj.config = cfg;
    traj.observe = [law, n, T](double t, const Eigen::VectorXd& y) {
        TrajectorySample s;
        s.t = t;
        s.x0 = y(0);
        s.x = y.segment(1, n);
        s.xi = y.tail(n);
        s.u = law.u(t, s.xi);
        s.u0 = law.u0(t, s.x0);
        s.gamma = law.schedule().gamma(t);
        s.V = lyapunov_value(law.basis(), s.gamma, to_transformed(t, T, s.x));
        return s;
    };

    auto on_accept = [&](double t, const Eigen::VectorXd& y) {
        if (!cfg.assert_assumption) return;
        const Eigen::VectorXd x = y.segment(1, n);
        check_assumption(sys.uncertainty, t, law.u(t, y.tail(n)), x);
    };

    return finish(std::move(traj), integrate(rhs, y0, T, t_end, cfg, on_accept));
}

Trajectory simulate_transformed(const ChainedSystem& sys, const StateFeedbackLaw& law,
                                const Eigen::VectorXd& z_init, double x0_init,
                                const IntegratorConfig& cfg) {
    cfg.validate();
    const int n = sys.n;
    if (z_init.size() != n) throw std::invalid_argument("initial state has wrong dimension");
    if (law.c0() != 0.0) {
        throw std::invalid_argument("the transformed loop is derived for c0 = 0");
    }
    const double T = law.schedule().T();
    const double t_end = T * (1.0 - cfg.terminal_guard);
    const double beta = law.beta();

    auto rhs = [&sys, &law, n, T, x0_init, beta](double t, const Eigen::VectorXd& z) {
        const double gamma = law.schedule().gamma(t);
        const double u = law.u_transformed(t, z);
        const double drive = open_loop_theta(t, x0_init, beta, T, 0.0) + beta;
        const Eigen::VectorXd x = from_transformed(t, T, z);
        const Eigen::VectorXd phi = sys.uncertainty.phi(t, u, x);
        Eigen::VectorXd dz(n);
        double scale = 1.0;  // (T-t)^{i-n}
        for (int i = n - 1; i >= 0; --i) {
            dz(i) = static_cast<double>(n - 1 - i) * gamma * z(i) + scale * phi(i);
            if (i + 1 < n) dz(i) += drive * z(i + 1);
            scale /= T - t;
        }
        dz(n - 1) += u;
        return dz;
    };

    Trajectory traj;
    traj.n = n;
    traj.transformed = true;
    traj.T = T;
    traj.x0_init = x0_init;
    traj.beta_used = beta;
    traj.config = cfg;
    traj.observe = [law, T, x0_init, beta](double t, const Eigen::VectorXd& z) {
        TrajectorySample s;
        s.t = t;
        s.x0 = closed_form_x0(t, x0_init, beta, T, 0.0);
        s.x = z;  // z coordinates
        s.u0 = open_loop_u0(t, x0_init, beta, T, 0.0);
        s.u = law.u_transformed(t, z);
        s.gamma = law.schedule().gamma(t);
        s.V = lyapunov_value(law.basis(), s.gamma, z);
        return s;
    };

    auto on_accept = [&](double t, const Eigen::VectorXd& z) {
        if (!cfg.assert_assumption) return;
        const Eigen::VectorXd x = from_transformed(t, T, z);
        check_assumption(sys.uncertainty, t, law.u_transformed(t, z), x);
    };

    return finish(std::move(traj), integrate(rhs, z_init, T, t_end, cfg, on_accept));
}

}  // namespace ptc
