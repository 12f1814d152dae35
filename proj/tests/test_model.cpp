#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ptc/model.hpp"

using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

}  // namespace

TEST_CASE("bound table validation") {
    auto table = ptc::UncertaintyBoundTable::zero(3);
    CHECK_NOTHROW(table.validate());
    table.c(0, 2) = 0.5;  // above the diagonal
    CHECK_THROWS_AS(table.validate(), std::invalid_argument);
    table.c(0, 2) = 0.0;
    table.c(2, 1) = -1.0;
    CHECK_THROWS_AS(table.validate(), std::invalid_argument);
}

TEST_CASE("dynamics") {
    const ptc::ChainedSystem sys{2, 0.0, ptc::UncertaintySpec::zero(2)};

    const ptc::ChainedState rest{0.0, Vector2d::Zero()};
    const ptc::ChainedState drest = ptc::dynamics(sys, 0.3, rest, 0.0, 0.0);
    CHECK(drest.x0 == 0.0);
    CHECK(drest.x.norm() == 0.0);

    const ptc::ChainedState s{1.0, Vector2d(2.0, 3.0)};
    const ptc::ChainedState ds = ptc::dynamics(sys, 0.0, s, 1.0, 5.0);
    CHECK(ds.x0 == doctest::Approx(1.0));
    CHECK(ds.x(0) == doctest::Approx(3.0));
    CHECK(ds.x(1) == doctest::Approx(5.0));

    // Drifted x0 channel.
    const ptc::ChainedSystem drift{2, 0.7, ptc::UncertaintySpec::zero(2)};
    CHECK(ptc::dynamics(drift, 0.0, s, 1.0, 5.0).x0 == doctest::Approx(1.0 + 0.7));

    // Bilinear image: dx2 = u1 + 2/(2 - eps^2) x1 (1 + sin^2 t).
    const auto red = ptc::bilinear_to_chained(ptc::BilinearScenario{});
    const double t = 0.83;
    const ptc::ChainedState sb{0.0, Vector2d(-0.6, 0.4)};
    const ptc::ChainedState dsb = ptc::dynamics(red.system(), t, sb, 0.2, 1.5);
    const double scale = 2.0 / (2.0 - 0.01);
    const double expected = 1.5 + scale * (-0.6) * (1.0 + std::sin(t) * std::sin(t));
    CHECK(dsb.x(1) == doctest::Approx(expected).epsilon(1e-14));

    // Non-finite uncertainty output is rejected.
    ptc::UncertaintyBoundTable table = ptc::UncertaintyBoundTable::zero(2);
    const ptc::UncertaintySpec nan_spec("broken", table,
                                        [](double, double, const VectorXd&) {
                                            Vector2d v(std::nan(""), 0.0);
                                            return VectorXd(v);
                                        });
    const ptc::ChainedSystem broken{2, 0.0, nan_spec};
    CHECK_THROWS_AS(ptc::dynamics(broken, 0.0, s, 1.0, 5.0), std::runtime_error);
}

TEST_CASE("assumption residual") {
    // phi = 0: slack_i equals the row sum of the table at |x_j| = 1.
    ptc::UncertaintyBoundTable table = ptc::UncertaintyBoundTable::zero(3);
    table.c(0, 0) = 0.5;
    table.c(1, 0) = 0.25;
    table.c(2, 2) = 2.0;
    const ptc::UncertaintySpec zero3("zero3", table, [](double, double, const VectorXd&) {
        return VectorXd(VectorXd::Zero(3));
    });
    const VectorXd ones = VectorXd::Ones(3);
    const VectorXd slack = ptc::assumption_residual(zero3, 0.0, 0.0, ones);
    CHECK(slack(0) == doctest::Approx(0.5));
    CHECK(slack(1) == doctest::Approx(0.25));
    CHECK(slack(2) == doctest::Approx(2.0));

    // Bilinear table covers 1 + sin^2 over a dense grid.
    const auto red = ptc::bilinear_to_chained(ptc::BilinearScenario{});
    for (int k = 0; k <= 200; ++k) {
        const double t = 2.5 * k / 200.0;
        const Vector2d x(-1.3, 0.7);
        const VectorXd s = ptc::assumption_residual(red.system().uncertainty, t, 0.0, x);
        CHECK(s.minCoeff() >= 0.0);
    }

    // Constructed violation: phi_1 = 2 x_1 with c_11 = 1.
    ptc::UncertaintyBoundTable bad = ptc::UncertaintyBoundTable::zero(2);
    bad.c(0, 0) = 1.0;
    const ptc::UncertaintySpec violating("violating", bad,
                                         [](double, double, const VectorXd& x) {
                                             Vector2d v(2.0 * x(0), 0.0);
                                             return VectorXd(v);
                                         });
    const VectorXd vs = ptc::assumption_residual(violating, 0.0, 0.0, VectorXd(Vector2d(1.5, 0)));
    CHECK(vs(0) == doctest::Approx(-1.5));
}

TEST_CASE("time-varying transformation") {
    CHECK(ptc::to_transformed(0.0, 1.0, Vector2d(3.0, 4.0)).isApprox(Vector2d(3.0, 4.0), 1e-15));

    const VectorXd z = ptc::to_transformed(0.0, 2.0, Vector2d(2.0, 5.0));
    CHECK(z(0) == doctest::Approx(1.0));
    CHECK(z(1) == doctest::Approx(5.0));

    std::mt19937_64 rng(7);
    for (int n : {2, 4, 6}) {
        for (int k = 0; k < 200; ++k) {
            const double T = uniform(rng, 0.2, 5.0);
            const double t = uniform(rng, 0.0, 0.99 * T);
            VectorXd x(n);
            for (int i = 0; i < n; ++i) x(i) = uniform(rng, -10.0, 10.0);
            const VectorXd back = ptc::from_transformed(t, T, ptc::to_transformed(t, T, x));
            CHECK((back - x).norm() <= 1e-12 * x.norm());
        }
    }

    CHECK_THROWS_AS(ptc::to_transformed(1.0, 1.0, Vector2d(1, 1)), std::domain_error);
    CHECK_THROWS_AS(ptc::from_transformed(-0.1, 1.0, Vector2d(1, 1)), std::domain_error);
}

TEST_CASE("growth table") {
    // Zero table: g_11 = n - 1, everything else in the 2x2 case vanishes.
    const auto zero = ptc::UncertaintyBoundTable::zero(2);
    const Eigen::MatrixXd g0 = ptc::compute_g_table(zero, 3.7);
    CHECK(g0(0, 0) == 1.0);
    CHECK(g0(1, 0) == 0.0);
    CHECK(g0(1, 1) == 0.0);

    ptc::UncertaintyBoundTable t1 = ptc::UncertaintyBoundTable::zero(2);
    t1.c(0, 0) = 1.0;
    CHECK(ptc::compute_g_table(t1, 2.0)(0, 0) == doctest::Approx(3.0));  // c11 T + (n-1)

    ptc::UncertaintyBoundTable t2 = ptc::UncertaintyBoundTable::zero(2);
    t2.c(1, 0) = 0.5;
    CHECK(ptc::compute_g_table(t2, 2.0)(1, 0) == doctest::Approx(2.0));  // c21 T^2
}

TEST_CASE("disturbance amplitude d") {
    const auto zero = ptc::UncertaintyBoundTable::zero(2);
    CHECK(ptc::compute_d(ptc::compute_g_table(zero, 1.0), 1.0, 2) == doctest::Approx(1.0));

    // A single nonzero g_nn = a contributes a sqrt(n).
    for (int n : {2, 3, 5}) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        g(n - 1, n - 1) = 0.75;
        CHECK(ptc::compute_d(g, 0.5, n) == doctest::Approx(0.75 * std::sqrt(double(n))));
    }

    // Homogeneity: doubling every entry doubles d.
    std::mt19937_64 rng(3);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) g(i, j) = uniform(rng, 0.0, 2.0);
    }
    const double d1 = ptc::compute_d(g, 0.7, 3);
    const double d2 = ptc::compute_d((2.0 * g).eval(), 0.7, 3);
    CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-13));
}

TEST_CASE("derived bounds refuse a violated spec") {
    const auto spec = ptc::UncertaintySpec::zero(2);
    CHECK_NOTHROW(ptc::derive_bounds(spec, 1.0, 0.0, 10.0));
    spec.note_violation();
    CHECK_THROWS_AS(ptc::derive_bounds(spec, 1.0, 0.0, 10.0), std::runtime_error);
}

TEST_CASE("envelope growth rate") {
    // theta0 = 6 (|x0|/T^3 + beta/(2T)) sqrt(3) n at a hand-checked point.
    CHECK(ptc::envelope_growth_rate(0.0, 2.5, 100.0, 2) ==
          doctest::Approx(6.0 * 20.0 * std::sqrt(3.0) * 2.0).epsilon(1e-14));
    CHECK(ptc::envelope_growth_rate(1.0, 1.0, 2.0, 3) ==
          doctest::Approx(6.0 * 2.0 * std::sqrt(3.0) * 3.0).epsilon(1e-14));
}

TEST_CASE("componentwise disturbance bound propagates from the table") {
    // |psi_i| <= gamma sum_j g_ij |z_j| whenever the table holds.
    ptc::UncertaintyBoundTable table = ptc::UncertaintyBoundTable::zero(3);
    table.c << 0.3, 0, 0, 0.2, 0.4, 0, 0.1, 0.25, 0.5;
    Eigen::MatrixXd a(3, 3);
    a << 0.3, 0, 0, -0.2, 0.4, 0, 0.1, -0.25, 0.5;
    const auto spec = ptc::UncertaintySpec::linear(table, a);
    const double T = 2.0;
    const Eigen::MatrixXd g = ptc::compute_g_table(table, T);

    std::mt19937_64 rng(11);
    for (int k = 0; k < 500; ++k) {
        const double t = uniform(rng, 0.0, 0.99 * T);
        const double gamma = 1.0 / (T - t);
        VectorXd z(3);
        for (int i = 0; i < 3; ++i) z(i) = uniform(rng, -10.0, 10.0);
        const VectorXd psi = ptc::psi_vector(spec, t, T, 0.0, z);
        for (int i = 0; i < 3; ++i) {
            double rhs = 0.0;
            for (int j = 0; j <= i; ++j) rhs += g(i, j) * std::abs(z(j));
            CHECK(std::abs(psi(i)) <= gamma * rhs * (1.0 + 1e-12) + 1e-12);
        }
    }
}

TEST_CASE("uncertainty callables are pure") {
    const auto red = ptc::bilinear_to_chained(ptc::BilinearScenario{});
    const Vector2d x(0.3, -0.2);
    const VectorXd a = red.system().uncertainty.phi(1.1, 0.5, x);
    const VectorXd b = red.system().uncertainty.phi(1.1, 0.5, x);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("bilinear reduction maps") {
    ptc::BilinearScenario flat;
    flat.epsilon = 0.0;
    const auto id = ptc::bilinear_to_chained(flat);
    CHECK(id.state_scale() == doctest::Approx(1.0));
    CHECK(id.u0_from_v(0.37) == doctest::Approx(0.37));
    CHECK(id.x2_from_z2(-1.2) == doctest::Approx(-1.2));

    const auto red = ptc::bilinear_to_chained(ptc::BilinearScenario{});
    CHECK(red.x2_from_z2(1.0) == doctest::Approx(2.0 / 1.99).epsilon(1e-15));
    CHECK(red.z2_from_x2(red.x2_from_z2(0.7)) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(red.v_from_u0(red.u0_from_v(-2.3)) == doctest::Approx(-2.3).epsilon(1e-15));
    CHECK(red.u_from_u1(red.u1_from_u(1.9)) == doctest::Approx(1.9).epsilon(1e-15));
    CHECK(red.system().uncertainty.bound().c(1, 0) ==
          doctest::Approx(4.0 / 1.99).epsilon(1e-15));

    ptc::BilinearScenario wide;
    wide.epsilon = std::sqrt(2.0);
    CHECK_THROWS_AS(ptc::bilinear_to_chained(wide), std::domain_error);
}

TEST_CASE("bilinear model and its chained image produce one trajectory") {
    // Integrate the raw planar model with mapped controls and compare the
    // (z1, z2) paths against the chained image under a shared control tape.
    const ptc::BilinearScenario sc;
    const auto red = ptc::bilinear_to_chained(sc);
    const double eps = sc.epsilon;

    // A fixed, smooth open-loop control tape keeps the oracle independent of
    // the controller stack.
    auto u0_of = [](double t) { return -0.8 + 0.3 * std::sin(3.0 * t); };
    auto u1_of = [](double t) { return 1.1 * std::cos(2.0 * t); };

    // Raw model state [x0, z1, z2] with v = u0/(1 - eps^2/2), u = u1/s.
    auto raw_rhs = [&](double t, const VectorXd& y) {
        const double v = red.v_from_u0(u0_of(t));
        const double u = red.u_from_u1(u1_of(t));
        const double th = std::sin(t);
        VectorXd dy(3);
        dy(0) = (1.0 - eps * eps / 2.0) * v;
        dy(1) = y(2) * v;
        dy(2) = u + y(1) * (1.0 + th * th);
        return dy;
    };
    // Chained image state [x0, x1, x2].
    auto chained_rhs = [&](double t, const VectorXd& y) {
        const ptc::ChainedState s{y(0), y.tail(2)};
        const ptc::ChainedState ds = ptc::dynamics(red.system(), t, s, u0_of(t), u1_of(t));
        VectorXd dy(3);
        dy(0) = ds.x0;
        dy.tail(2) = ds.x;
        return dy;
    };

    VectorXd raw0(3), ch0(3);
    raw0 << 0.0, -1.0, 1.0;
    ch0 << 0.0, -1.0, red.x2_from_z2(1.0);
    const VectorXd raw1 = oracles::integrate_vector_rk4(raw_rhs, raw0, 0.0, 1.5, 6000);
    const VectorXd ch1 = oracles::integrate_vector_rk4(chained_rhs, ch0, 0.0, 1.5, 6000);
    CHECK(ch1(0) == doctest::Approx(raw1(0)).epsilon(1e-9));
    CHECK(ch1(1) == doctest::Approx(raw1(1)).epsilon(1e-9));                  // x1 = z1
    CHECK(red.z2_from_x2(ch1(2)) == doctest::Approx(raw1(2)).epsilon(1e-9));  // z2
}
