#include <doctest.h>

#include <cmath>
#include <memory>

#include "ptc/csv.hpp"
#include "ptc/sim.hpp"

using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

std::shared_ptr<const ptc::PleBasis> basis2() {
    static auto b = std::make_shared<const ptc::PleBasis>(2);
    return b;
}

ptc::IntegratorConfig tight_cfg() {
    ptc::IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-300;  // relative control; these loops span many decades
    cfg.terminal_guard = 1e-6;
    return cfg;
}

}  // namespace

TEST_CASE("integrator config validation") {
    ptc::IntegratorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.terminal_guard = 1e-10;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.terminal_guard = 1e-6;
    cfg.step_cap_ratio = 0.7;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.step_cap_ratio = 0.1;
    cfg.rel_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("x0 channel tracks its closed solution") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    const ptc::ChainedState init{1.0, Vector2d(1.0, -1.0)};
    const ptc::Trajectory traj = ptc::simulate_state_feedback(sys, law, init, tight_cfg());
    CHECK_FALSE(traj.diverged);

    double err = 0.0, scale = 0.0;
    for (const auto& s : traj.samples) {
        const double exact = ptc::closed_form_x0(s.t, 1.0, law.beta(), 1.0, 0.0);
        err = std::max(err, std::abs(s.x0 - exact));
        scale = std::max(scale, std::abs(exact));
    }
    CHECK(err <= 1e-6 * scale);
}

TEST_CASE("drifted x0 subsystem follows its closed solution") {
    const double c0 = 0.5;
    const ptc::ChainedSystem sys{2, c0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.5);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, c0);
    // The drift factor enters the admissible gain.
    CHECK(law.beta_min() == doctest::Approx((7.0 + std::sqrt(2.0) + std::sqrt(5.0)) *
                                            std::exp(c0 * 1.5)));
    const ptc::Trajectory traj =
        ptc::simulate_state_feedback(sys, law, {-0.8, Vector2d(0.6, 0.1)}, tight_cfg());
    CHECK_FALSE(traj.diverged);
    double err = 0.0, scale = 0.0;
    for (const auto& s : traj.samples) {
        const double exact = ptc::closed_form_x0(s.t, -0.8, law.beta(), 1.5, c0);
        err = std::max(err, std::abs(s.x0 - exact));
        scale = std::max(scale, std::abs(exact));
    }
    CHECK(err <= 1e-6 * scale);
    // Plant states still vanish at the prescribed time.
    CHECK(traj.samples.back().x.norm() <= 1e-6);
}

TEST_CASE("zero plant state is an exact equilibrium while x0 moves") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(2.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    const ptc::ChainedState init{0.0, Vector2d::Zero()};
    const ptc::Trajectory traj = ptc::simulate_state_feedback(sys, law, init, tight_cfg());

    for (const auto& s : traj.samples) {
        CHECK(s.x.norm() == 0.0);
        CHECK(s.u == 0.0);
        // x0 follows -beta t (T-t)^2 / (2T), not zero.
        const double exact = -law.beta() * s.t * (2.0 - s.t) * (2.0 - s.t) / 4.0;
        CHECK(s.x0 == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("accepted steps obey the terminal cap and the step count stays logarithmic") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    ptc::IntegratorConfig cfg = tight_cfg();
    cfg.step_cap_ratio = 0.1;
    const ptc::Trajectory traj =
        ptc::simulate_state_feedback(sys, law, {0.5, Vector2d(1.0, 2.0)}, cfg);

    for (std::size_t k = 0; k + 1 < traj.ts.size(); ++k) {
        const double h = traj.ts[k + 1] - traj.ts[k];
        CHECK(h <= cfg.step_cap_ratio * (1.0 - traj.ts[k]) * (1.0 + 1e-12));
    }
    // At least ln(1/guard)/ln(1/(1-eta)) steps are forced by the cap alone,
    // and accuracy keeps the total within a small multiple of that.
    const double floor = std::log(1.0 / cfg.terminal_guard) / std::log(1.0 / 0.9);
    CHECK(traj.steps_accepted >= static_cast<std::size_t>(floor));
    CHECK(traj.steps_accepted < 100000);
}

TEST_CASE("tolerance refinement is self-consistent") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    const ptc::ChainedState init{1.0, Vector2d(1.0, -1.0)};

    ptc::IntegratorConfig coarse = tight_cfg();
    coarse.rel_tol = 1e-6;
    ptc::IntegratorConfig fine = coarse;
    fine.rel_tol = 5e-7;

    const auto a = ptc::simulate_state_feedback(sys, law, init, coarse);
    const auto b = ptc::simulate_state_feedback(sys, law, init, fine);
    double peak = 0.0;
    for (const auto& s : a.samples) peak = std::max(peak, s.x.norm());
    const double drift = (a.samples.back().x - b.sample_at(a.t_end).x).norm();
    CHECK(drift <= coarse.rel_tol * peak);
}

TEST_CASE("perfect-start observer keeps a zero error") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.0);
    const ptc::ObserverLaw law(basis2(), sched, 1.0);
    const ptc::ChainedState init{1.0, Vector2d::Zero()};
    const ptc::Trajectory traj =
        ptc::simulate_output_feedback(sys, law, init, Vector2d::Zero(), tight_cfg());
    CHECK_FALSE(traj.diverged);
    CHECK(traj.has_observer);
    for (const auto& s : traj.samples) {
        const VectorXd e = ptc::to_transformed(s.t, 1.0, s.x) - s.xi;
        CHECK(e.norm() <= 1e-6);
    }
}

TEST_CASE("transformed loop rests at the origin") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    const ptc::Trajectory traj =
        ptc::simulate_transformed(sys, law, Vector2d::Zero(), 0.0, tight_cfg());
    for (const auto& s : traj.samples) {
        CHECK(s.x.norm() == 0.0);
        CHECK(s.V == 0.0);
    }
}

TEST_CASE("transformed and plant-coordinate integrations agree") {
    const auto red = ptc::bilinear_to_chained(ptc::BilinearScenario{});
    const ptc::GainSchedule sched(2.5);
    const Eigen::MatrixXd g = ptc::compute_g_table(red.system().uncertainty.bound(), 2.5);
    const double d = ptc::compute_d(g, 0.4, 2);
    const ptc::StateFeedbackLaw law(basis2(), sched, d, 0.0, 100.0, ptc::BetaPolicy::Force);

    ptc::IntegratorConfig cfg = tight_cfg();
    cfg.terminal_guard = 1e-2;  // compare on [0, 0.99 T]
    const ptc::ChainedState init{0.0, Vector2d(-1.0, red.x2_from_z2(1.0))};
    const ptc::Trajectory in_x = ptc::simulate_state_feedback(red.system(), law, init, cfg);
    const VectorXd z0 = ptc::to_transformed(0.0, 2.5, init.x);
    const ptc::Trajectory in_z = ptc::simulate_transformed(red.system(), law, z0, 0.0, cfg);
    CHECK(in_z.transformed);

    double sup_err = 0.0, sup_z = 0.0;
    for (const auto& s : in_z.samples) {
        const VectorXd zx = ptc::to_transformed(s.t, 2.5, in_x.state_at(s.t).tail(2));
        sup_err = std::max(sup_err, (zx - s.x).norm());
        sup_z = std::max(sup_z, s.x.norm());
    }
    CHECK(sup_err <= 1e-4 * sup_z);
}

TEST_CASE("blow-up is reported with the last finite samples kept") {
    // A cubic term outside any declared table escapes in finite time; with
    // the assumption check off the run must end as a flagged divergence, not
    // an exception or NaN samples.
    ptc::UncertaintyBoundTable table = ptc::UncertaintyBoundTable::zero(2);
    const ptc::UncertaintySpec explosive("explosive", table,
                                         [](double, double, const VectorXd& x) {
                                             Vector2d v(0.0, x(1) * x(1) * x(1));
                                             return VectorXd(v);
                                         });
    const ptc::ChainedSystem sys{2, 0.0, explosive};
    const ptc::GainSchedule sched(1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    ptc::IntegratorConfig cfg = tight_cfg();
    cfg.assert_assumption = false;
    const ptc::Trajectory traj =
        ptc::simulate_state_feedback(sys, law, {0.0, Vector2d(0.0, 10.0)}, cfg);
    CHECK(traj.diverged);
    CHECK(!traj.samples.empty());
    CHECK(traj.t_end < 0.5);
    for (const auto& s : traj.samples) {
        CHECK(std::isfinite(s.x0));
        CHECK(s.x.allFinite());
        CHECK(std::isfinite(s.u));
        CHECK(std::isfinite(s.V));
    }

    // A start whose Lyapunov diagnostic overflows at once is also flagged.
    const ptc::ChainedSystem zsys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::Trajectory huge =
        ptc::simulate_state_feedback(zsys, law, {0.0, Vector2d(1e180, -1e180)}, cfg);
    CHECK(huge.diverged);
    for (const auto& s : huge.samples) CHECK(std::isfinite(s.V));
}

TEST_CASE("assumption violations abort the run and poison the spec") {
    ptc::UncertaintyBoundTable bad = ptc::UncertaintyBoundTable::zero(2);
    bad.c(0, 0) = 1.0;
    const ptc::UncertaintySpec violating("violating", bad,
                                         [](double, double, const VectorXd& x) {
                                             Vector2d v(2.0 * x(0), 0.0);
                                             return VectorXd(v);
                                         });
    const ptc::ChainedSystem sys{2, 0.0, violating};
    const ptc::GainSchedule sched(1.0);
    const Eigen::MatrixXd g = ptc::compute_g_table(bad, 1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, ptc::compute_d(g, 1.0, 2), 0.0);
    const ptc::ChainedState init{0.0, Vector2d(1.0, 0.5)};

    ptc::IntegratorConfig cfg = tight_cfg();
    CHECK_THROWS_AS(ptc::simulate_state_feedback(sys, law, init, cfg), ptc::AssumptionViolation);
    CHECK(violating.violation_seen());
    CHECK_THROWS_AS(ptc::derive_bounds(violating, 1.0, 0.0, law.beta()), std::runtime_error);

    // With the check disabled the same loop integrates fine (the term is
    // benign, just outside its declared table).
    cfg.assert_assumption = false;
    const ptc::Trajectory traj = ptc::simulate_state_feedback(sys, law, init, cfg);
    CHECK_FALSE(traj.diverged);
}

TEST_CASE("dense output interpolates the accepted steps") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    const ptc::Trajectory traj =
        ptc::simulate_state_feedback(sys, law, {1.0, Vector2d(1.0, -1.0)}, tight_cfg());

    // Nodes reproduce exactly; midpoints match the closed x0 solution.
    for (std::size_t k = 0; k < traj.ts.size(); k += 7) {
        CHECK((traj.state_at(traj.ts[k]) - traj.ys[k]).norm() == 0.0);
    }
    for (std::size_t k = 0; k + 1 < traj.ts.size(); k += 5) {
        const double tm = 0.5 * (traj.ts[k] + traj.ts[k + 1]);
        const double exact = ptc::closed_form_x0(tm, 1.0, law.beta(), 1.0, 0.0);
        CHECK(traj.sample_at(tm).x0 == doctest::Approx(exact).epsilon(1e-7));
    }
}

TEST_CASE("fixed-step and adaptive runs are deterministic") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};
    const ptc::GainSchedule sched(1.0);
    const ptc::StateFeedbackLaw law(basis2(), sched, 1.0, 0.0);
    const ptc::ChainedState init{1.0, Vector2d(0.5, -0.25)};

    ptc::IntegratorConfig rk4 = tight_cfg();
    rk4.method = ptc::StepMethod::Rk4Fixed;
    rk4.h0 = 0.01;
    rk4.terminal_guard = 1e-3;
    const auto a = ptc::simulate_state_feedback(sys, law, init, rk4);
    const auto b = ptc::simulate_state_feedback(sys, law, init, rk4);
    CHECK(ptc::trajectory_csv_native(a) == ptc::trajectory_csv_native(b));
    CHECK(ptc::trajectory_csv(a) == ptc::trajectory_csv(b));

    const auto c = ptc::simulate_state_feedback(sys, law, init, tight_cfg());
    const auto d = ptc::simulate_state_feedback(sys, law, init, tight_cfg());
    CHECK(ptc::trajectory_csv_native(c) == ptc::trajectory_csv_native(d));
}

TEST_CASE("decay envelope holds in its sharper (T-t)/T form") {
    // The comparison-lemma integral gives exp(-int gamma) = (T-t)/T, a factor
    // 1/T sharper than the displayed cone; equality holds at t = 0.
    const auto red = ptc::bilinear_to_chained(ptc::BilinearScenario{});
    const ptc::GainSchedule sched(2.5);
    const Eigen::MatrixXd g = ptc::compute_g_table(red.system().uncertainty.bound(), 2.5);
    const double d = ptc::compute_d(g, 0.4, 2);
    const ptc::StateFeedbackLaw law(basis2(), sched, d, 0.0, 100.0, ptc::BetaPolicy::Force);
    const ptc::ChainedState init{0.0, Vector2d(-1.0, red.x2_from_z2(1.0))};
    const ptc::Trajectory traj = ptc::simulate_state_feedback(red.system(), law, init, tight_cfg());

    const double theta0 = ptc::envelope_growth_rate(0.0, 2.5, 100.0, 2);
    const double v0 = traj.samples.front().V;
    double worst = -1e300;
    for (const auto& s : traj.samples) {
        if (s.V <= 0.0) continue;
        worst = std::max(worst, std::log(s.V) - std::log((2.5 - s.t) / 2.5) - theta0 * s.t -
                                    std::log(v0));
    }
    CHECK(worst <= 1e-6);
    CHECK(worst >= -1e-6);  // tight at t = 0
}

TEST_CASE("longer chains close the loop as well") {
    // n = 4 with a populated linear uncertainty, formula gain.
    auto basis4 = std::make_shared<const ptc::PleBasis>(4);
    ptc::UncertaintyBoundTable table = ptc::UncertaintyBoundTable::zero(4);
    table.c(1, 0) = 0.2;
    table.c(2, 1) = 0.15;
    table.c(3, 0) = 0.05;
    table.c(3, 3) = 0.1;
    Eigen::MatrixXd a = table.c;
    a(2, 1) = -0.15;
    const ptc::ChainedSystem sys{4, 0.0, ptc::UncertaintySpec::linear(table, a)};
    const double T = 1.5;
    const ptc::GainSchedule sched(T);
    const Eigen::MatrixXd g = ptc::compute_g_table(table, T);
    const double d = ptc::compute_d(g, 1.0 / T, 4);
    const ptc::StateFeedbackLaw law(basis4, sched, d, 0.0);

    ptc::IntegratorConfig cfg = tight_cfg();
    cfg.terminal_guard = 1e-4;
    Eigen::VectorXd x0v(4);
    x0v << 1.0, -0.5, 0.25, 2.0;
    const ptc::Trajectory traj =
        ptc::simulate_state_feedback(sys, law, {0.7, x0v}, cfg);
    CHECK_FALSE(traj.diverged);
    double peak = 0.0;
    for (const auto& s : traj.samples) peak = std::max(peak, s.x.norm());
    CHECK(traj.samples.back().x.norm() <= 1e-3 * peak);
    CHECK(std::abs(traj.samples.back().u) <= 1e-1 * peak);

    // Observer run at a forced moderate gain (the formula value is far more
    // conservative than needed and only slows the fixture down).
    const ptc::ChainedSystem plain{4, 0.0, ptc::UncertaintySpec::zero(4)};
    const ptc::ObserverLaw olaw(basis4, sched, d, 60.0, ptc::BetaPolicy::Force);
    const ptc::Trajectory otraj = ptc::simulate_output_feedback(
        plain, olaw, {0.7, x0v}, Eigen::VectorXd::Zero(4), cfg);
    CHECK_FALSE(otraj.diverged);
    double peak_e = 0.0;
    for (const auto& s : otraj.samples) {
        peak_e = std::max(peak_e, (ptc::to_transformed(s.t, T, s.x) - s.xi).norm());
    }
    const auto last = otraj.samples.back();
    CHECK((ptc::to_transformed(last.t, T, last.x) - last.xi).norm() <= 1e-2 * peak_e);
}
