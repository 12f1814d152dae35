#include "ptc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace ptc {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    // Platform-independent mapping of 53 random bits to [0, 1).
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double min_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
    return es.eigenvalues().minCoeff();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

Eigen::MatrixXd fd_derivative(const PleBasis& basis, double gamma, bool dual) {
    const double h = 1e-6 * gamma;
    if (dual) return (eval_Q(basis, gamma + h) - eval_Q(basis, gamma - h)) / (2.0 * h);
    return (eval_P(basis, gamma + h) - eval_P(basis, gamma - h)) / (2.0 * h);
}

// Per-gamma empirical values n gamma lambda_max(Q^{-1/2} dQ/dgamma Q^{-1/2}).
std::vector<double> delta_o_values(const PleBasis& basis, const std::vector<double>& grid) {
    std::vector<double> vals;
    vals.reserve(grid.size());
    for (double gamma : grid) {
        const Eigen::MatrixXd Q = eval_Q(basis, gamma);
        const Eigen::MatrixXd D = fd_derivative(basis, gamma, true);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(Q));
        const Eigen::MatrixXd inv_half = es.eigenvectors() *
                                         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                         es.eigenvectors().transpose();
        const Eigen::MatrixXd M = inv_half * D * inv_half;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(symmetrized(M));
        vals.push_back(basis.n() * gamma * em.eigenvalues().maxCoeff());
    }
    return vals;
}

struct ExplicitEnvelopeInputs {
    double T = 0.0;
    double beta = 0.0;
    double x0_init = 0.0;
    double c0 = 0.0;
};

// |x0| and |u0| against their explicit closed-loop envelopes.
void add_explicit_envelopes(VerificationReport& rep, const Trajectory& traj,
                            const ExplicitEnvelopeInputs& in) {
    const double T = in.T;
    double worst_x0 = 0.0, worst_u0 = 0.0;
    for (const auto& s : traj.samples) {
        const double r = T - s.t;
        const double ec = std::exp(in.c0 * s.t);
        const double bound_x0 =
            r * r * ec * (r * std::abs(in.x0_init) / (T * T * T) + in.beta * s.t / (2.0 * T));
        if (bound_x0 > 1e-300) {
            worst_x0 = std::max(worst_x0, std::abs(s.x0) / bound_x0);
        }
        const double bound_u0 =
            r * ec *
            (3.0 * r * (std::abs(in.x0_init) / (T * T * T) + in.beta / (2.0 * T)) + in.beta);
        worst_u0 = std::max(worst_u0, std::abs(s.u0) / bound_u0);
    }
    rep.add({"|x0(t)| within its explicit closed-loop envelope", "envelope.x0.explicit", worst_x0,
             1.0 + 1e-6, worst_x0 <= 1.0 + 1e-6, static_cast<long>(traj.samples.size()), false});
    rep.add({"|u0(t)| within its explicit closed-loop envelope", "envelope.u0.explicit", worst_u0,
             1.0 + 1e-6, worst_u0 <= 1.0 + 1e-6, static_cast<long>(traj.samples.size()), false});
}

struct FittedEnvelope {
    double fit = 0.0;       // max normalized ratio on even samples
    double holdout = 0.0;   // max on odd samples
};

FittedEnvelope fit_envelope(const Trajectory& traj, double exponent, double rate,
                            const std::function<double(const TrajectorySample&)>& value) {
    FittedEnvelope out;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        const double denom = std::pow(traj.T - s.t, exponent) * std::exp(rate * s.t);
        if (denom <= 0.0) continue;
        const double r = value(s) / denom;
        if (i % 2 == 0) {
            out.fit = std::max(out.fit, r);
        } else {
            out.holdout = std::max(out.holdout, r);
        }
    }
    return out;
}

void add_fitted_envelopes(VerificationReport& rep, const Trajectory& traj, double theta0) {
    const double rate = 0.5 * theta0;
    const long m = static_cast<long>(traj.samples.size());
    {
        const auto env = fit_envelope(traj, 1.5, rate,
                                      [](const TrajectorySample& s) { return s.x.norm(); });
        const double worst = env.fit > 1e-300 ? env.holdout / env.fit : env.holdout;
        const double thr = env.fit > 1e-300 ? 1.10 : 1e-12;
        rep.add({"||x(t)|| obeys a fitted (T-t)^{3/2} envelope on held-out samples",
                 "envelope.x.fitted", worst, thr, worst <= thr, m, false});
    }
    {
        const auto env = fit_envelope(traj, 0.5, rate,
                                      [](const TrajectorySample& s) { return std::abs(s.u); });
        const double worst = env.fit > 1e-300 ? env.holdout / env.fit : env.holdout;
        const double thr = env.fit > 1e-300 ? 1.10 : 1e-12;
        rep.add({"|u(t)| obeys a fitted (T-t)^{1/2} envelope on held-out samples",
                 "envelope.u.fitted", worst, thr, worst <= thr, m, false});
    }
}

}  // namespace

void VerificationReport::add(CheckEntry e) { entries_.push_back(std::move(e)); }

void VerificationReport::merge(const VerificationReport& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

bool VerificationReport::all_passed() const {
    for (const auto& e : entries_) {
        if (!e.negative_control && !e.pass) return false;
    }
    return true;
}

bool VerificationReport::negative_controls_behaved() const {
    for (const auto& e : entries_) {
        if (e.negative_control && e.pass) return false;
    }
    return true;
}

std::string VerificationReport::to_text() const {
    std::ostringstream out;
    for (const auto& e : entries_) {
        const char* status = e.pass ? "PASS" : (e.negative_control ? "FAIL (expected)" : "FAIL");
        out << status << "  " << e.anchor << "  worst=" << fmt(e.worst)
            << " threshold=" << fmt(e.threshold) << " samples=" << e.samples << "  " << e.name
            << "\n";
    }
    return out.str();
}

std::string VerificationReport::to_csv() const {
    std::ostringstream out;
    out << "check,anchor,residual,threshold,pass\n";
    for (const auto& e : entries_) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), ",%.15g,%.15g,%d\n", e.worst, e.threshold, e.pass ? 1 : 0);
        std::string name = e.name;
        for (auto& chr : name) {
            if (chr == ',') chr = ';';
        }
        out << name << "," << e.anchor << buf;
    }
    return out.str();
}

VerificationReport check_ple_suite(const PleBasis& basis, const std::vector<double>& gamma_grid) {
    if (gamma_grid.empty()) throw std::invalid_argument("gamma grid must be nonempty");
    const int n = basis.n();
    const ChainMatrices& cm = basis.chain();
    VerificationReport rep;

    double worst_res_p = 0, worst_res_q = 0, worst_bpb = 0, worst_cqc = 0;
    double worst_monotone = 0, worst_lo = 0, worst_hi = 0, worst_dual_lo = 0, worst_curv = 0;
    for (double gamma : gamma_grid) {
        if (!(gamma > 0.0)) throw std::invalid_argument("gamma grid must be positive");
        const Eigen::MatrixXd P = eval_P(basis, gamma);
        const Eigen::MatrixXd Q = eval_Q(basis, gamma);
        worst_res_p = std::max(worst_res_p, ple_residual(P, gamma) / P.norm());
        worst_res_q = std::max(worst_res_q, dual_ple_residual(Q, gamma) / Q.norm());
        worst_bpb = std::max(worst_bpb, std::abs(P(n - 1, n - 1) - n * gamma) / (n * gamma));
        worst_cqc = std::max(worst_cqc, std::abs(Q(0, 0) - n * gamma) / (n * gamma));

        const Eigen::MatrixXd D = fd_derivative(basis, gamma, false);
        worst_monotone = std::max(worst_monotone, -min_eig(D));
        const double scale_p = P.norm() / (n * gamma);
        worst_lo = std::max(worst_lo, -min_eig(D - P / (n * gamma)) / scale_p);
        worst_hi = std::max(worst_hi,
                            -min_eig(basis.delta_c() * P / (n * gamma) - D) / scale_p);

        const Eigen::MatrixXd DQ = fd_derivative(basis, gamma, true);
        const double scale_q = Q.norm() / (n * gamma);
        worst_dual_lo = std::max(worst_dual_lo, -min_eig(DQ - Q / (n * gamma)) / scale_q);

        const Eigen::MatrixXd curv =
            3.0 * n * n * gamma * gamma * P - cm.A.transpose() * P * cm.A;
        worst_curv = std::max(worst_curv, -min_eig(curv) / P.norm());
    }
    const long g = static_cast<long>(gamma_grid.size());
    rep.add({"parametric equation residual for P(gamma)", "ple.residual.p", worst_res_p, 1e-8,
             worst_res_p <= 1e-8, g, false});
    rep.add({"parametric equation residual for Q(gamma)", "ple.residual.q", worst_res_q, 1e-8,
             worst_res_q <= 1e-8, g, false});
    rep.add({"b^T P(gamma) b = n gamma", "ple.trace.bpb", worst_bpb, 1e-8, worst_bpb <= 1e-8, g,
             false});
    rep.add({"c Q(gamma) c^T = n gamma", "ple.trace.cqc", worst_cqc, 1e-8, worst_cqc <= 1e-8, g,
             false});
    rep.add({"dP/dgamma is positive definite (finite differences)", "ple.monotone.dp",
             worst_monotone, 1e-6, worst_monotone <= 1e-6, g, false});
    rep.add({"P/(n gamma) <= dP/dgamma", "ple.sandwich.dp.lower", worst_lo, 1e-5,
             worst_lo <= 1e-5, g, false});
    rep.add({"dP/dgamma <= delta_c P/(n gamma)", "ple.sandwich.dp.upper", worst_hi, 1e-5,
             worst_hi <= 1e-5, g, false});
    rep.add({"Q/(n gamma) <= dQ/dgamma", "ple.sandwich.dq.lower", worst_dual_lo, 1e-5,
             worst_dual_lo <= 1e-5, g, false});
    rep.add({"A^T P A <= 3 n^2 gamma^2 P", "ple.curvature.atpa", worst_curv, 1e-8,
             worst_curv <= 1e-8, g, false});

    // Spectrum similarity of P, Q, P^{-1}, Q^{-1} (gamma-independent).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(symmetrized(basis.P()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(symmetrized(basis.Q()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> epi(symmetrized(basis.P().inverse()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eqi(symmetrized(basis.Q().inverse()));
    const Eigen::VectorXd base = ep.eigenvalues();
    double worst_spec = 0.0;
    for (const auto& other : {eq.eigenvalues(), epi.eigenvalues(), eqi.eigenvalues()}) {
        for (int i = 0; i < n; ++i) {
            worst_spec = std::max(worst_spec, std::abs(other(i) - base(i)) / std::abs(base(i)));
        }
    }
    rep.add({"P, Q, P^{-1}, Q^{-1} share one spectrum", "ple.spectrum.similarity", worst_spec,
             1e-8, worst_spec <= 1e-8, 4L * n, false});
    return rep;
}

VerificationReport check_ple_negative_control(int n) {
    const PleBasis basis(n);
    const Eigen::MatrixXd corrupted =
        basis.P() + 0.01 * Eigen::MatrixXd::Identity(n, n);
    const double res = ple_residual(corrupted, 1.0) / corrupted.norm();
    VerificationReport rep;
    rep.add({"corrupted basis must fail the residual check", "negcontrol.ple.residual", res, 1e-8,
             res <= 1e-8, 1, true});
    return rep;
}

VerificationReport check_disturbance_bound(const UncertaintySpec& spec, double T, int samples,
                                           std::uint64_t seed, bool negative_control) {
    const int n = spec.n();
    const Eigen::MatrixXd g = compute_g_table(spec.bound(), T);
    const double d = compute_d(g, 1.0 / T, n);
    std::mt19937_64 rng(seed);

    double worst_assumption = 0.0, worst_component = 0.0, worst_quadratic = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double t = uniform(rng, 0.0, 0.99 * T);
        const double u = uniform(rng, -10.0, 10.0);
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z(i) = uniform(rng, -10.0, 10.0);
        const double gamma = 1.0 / (T - t);
        const Eigen::VectorXd x = from_transformed(t, T, z);

        const Eigen::VectorXd phi = spec.phi(t, u, x);
        for (int i = 0; i < n; ++i) {
            double bound = 0.0;
            for (int j = 0; j <= i; ++j) bound += spec.bound().c(i, j) * std::abs(x(j));
            const double slack = bound - std::abs(phi(i));
            worst_assumption = std::max(worst_assumption, -slack / (1.0 + bound));
        }

        const Eigen::VectorXd psi = psi_vector(spec, t, T, u, z);
        double phi2 = 0.0, z2 = 0.0;
        double pw = 1.0;  // gamma^{n-1-i} accumulated upward from i = n-1
        for (int i = n - 1; i >= 0; --i) {
            const double lp = pw * psi(i);
            const double lz = pw * z(i);
            phi2 += lp * lp;
            z2 += lz * lz;
            pw *= gamma;

            double rhs = 0.0;
            for (int j = 0; j <= i; ++j) rhs += g(i, j) * std::abs(z(j));
            rhs *= gamma;
            worst_component =
                std::max(worst_component, (std::abs(psi(i)) - rhs) / std::max(1.0, rhs));
        }
        const double rhs2 = d * d * gamma * gamma * z2;
        worst_quadratic = std::max(worst_quadratic, (phi2 - rhs2) / std::max(1.0, rhs2));
    }

    VerificationReport rep;
    const std::string tag = " [" + spec.name() + "]";
    rep.add({"uncertainty stays inside its bound table" + tag, "bound.assumption",
             worst_assumption, 1e-9, worst_assumption <= 1e-9, samples, negative_control});
    rep.add({"|psi_i| <= gamma sum_j g_ij |z_j|" + tag, "bound.psi.component", worst_component,
             1e-12, worst_component <= 1e-12, samples, negative_control});
    if (!negative_control) {
        rep.add({"|L psi|^2 <= d^2 gamma^2 |L z|^2" + tag, "bound.psi.quadratic", worst_quadratic,
                 1e-12, worst_quadratic <= 1e-12, samples, false});
    }
    return rep;
}

VerificationReport check_state_feedback_envelopes(const Trajectory& traj,
                                                  const StateFeedbackLaw& law) {
    if (traj.has_observer || traj.transformed) {
        throw std::invalid_argument("expected a plant-coordinate state-feedback trajectory");
    }
    if (std::abs(traj.beta_used - law.beta()) > 1e-12 * law.beta() ||
        traj.T != law.schedule().T()) {
        throw std::invalid_argument("trajectory metadata does not match the law");
    }
    VerificationReport rep;
    add_explicit_envelopes(rep, traj, {traj.T, law.beta(), traj.x0_init, law.c0()});

    // Decay cone V(t) <= (T-t) e^{theta0 t} V(0), compared in log domain since
    // e^{theta0 t} overflows for aggressive gains. For a drifted x0 subsystem
    // the drive theta(t) carries an extra e^{c0 t} <= e^{|c0| T}, which scales
    // the admissible rate the same way it scales the admissible gain.
    const double theta0 =
        envelope_growth_rate(traj.x0_init, traj.T, law.beta(), law.basis().n()) *
        std::exp(std::abs(law.c0()) * traj.T);
    const double v0 = traj.samples.front().V;
    double worst = -std::numeric_limits<double>::infinity();
    if (v0 > 1e-300) {
        for (const auto& s : traj.samples) {
            if (s.V <= 0.0) continue;
            const double margin =
                std::log(s.V) - std::log(traj.T - s.t) - theta0 * s.t - std::log(v0);
            worst = std::max(worst, margin);
        }
        const double thr = std::log1p(1e-6);
        rep.add({"Lyapunov decay cone V <= (T-t) e^{theta0 t} V(0)", "lyapunov.decay", worst, thr,
                 worst <= thr, static_cast<long>(traj.samples.size()), false});
    } else {
        double peak = 0.0;
        for (const auto& s : traj.samples) peak = std::max(peak, s.V);
        rep.add({"Lyapunov value stays at zero for a zero start", "lyapunov.decay", peak, 1e-18,
                 peak <= 1e-18, static_cast<long>(traj.samples.size()), false});
    }

    add_fitted_envelopes(rep, traj, theta0);
    return rep;
}

VerificationReport check_observer_envelopes(const Trajectory& traj, const ObserverLaw& law,
                                            const Eigen::VectorXd& xi_init) {
    if (!traj.has_observer) throw std::invalid_argument("expected an output-feedback trajectory");
    VerificationReport rep;
    add_explicit_envelopes(rep, traj, {traj.T, law.beta(), traj.x0_init, 0.0});

    const double T = traj.T;
    const double init_scale =
        traj.samples.front().x.norm() + xi_init.norm() + 1e-300;
    double peak_rx = 0.0, peak_rxi = 0.0, peak_ru = 0.0, peak_e = 0.0, peak_u = 0.0;
    for (const auto& s : traj.samples) {
        const double r32 = std::pow(T - s.t, 1.5);
        const double r12 = std::sqrt(T - s.t);
        peak_rx = std::max(peak_rx, s.x.norm() / (r32 * init_scale));
        peak_rxi = std::max(peak_rxi, s.xi.norm() / (r32 * init_scale));
        peak_ru = std::max(peak_ru, std::abs(s.u) / (r12 * init_scale));
        const Eigen::VectorXd e = to_transformed(s.t, T, s.x) - s.xi;
        peak_e = std::max(peak_e, e.norm());
        peak_u = std::max(peak_u, std::abs(s.u));
    }
    const long m = static_cast<long>(traj.samples.size());
    const double big = 1e300;
    rep.add({"||x||/(T-t)^{3/2} bounded", "envelope.x.bounded", peak_rx, big,
             std::isfinite(peak_rx), m, false});
    rep.add({"||xi||/(T-t)^{3/2} bounded", "envelope.xi.bounded", peak_rxi, big,
             std::isfinite(peak_rxi), m, false});
    rep.add({"|u|/(T-t)^{1/2} bounded", "envelope.u.bounded", peak_ru, big,
             std::isfinite(peak_ru), m, false});

    // No growth trend across the last decades of T - t.
    const double t1 = std::min(T * (1.0 - 1e-3), traj.t_end);
    const double t2 = traj.t_end;
    const auto s1 = traj.sample_at(t1);
    const auto s2 = traj.sample_at(t2);
    const auto trend = [&](double v1, double v2, const char* what, const char* anchor) {
        const double worst = v2 / (v1 + 1e-12 * std::max(v1, v2) + 1e-300);
        rep.add({std::string("terminal trend of ") + what, anchor, worst, 2.0, worst <= 2.0, 2,
                 false});
    };
    trend(s1.x.norm() / std::pow(T - t1, 1.5), s2.x.norm() / std::pow(T - t2, 1.5),
          "||x||/(T-t)^{3/2}", "envelope.x.trend");
    trend(std::abs(s1.u) / std::sqrt(T - t1), std::abs(s2.u) / std::sqrt(T - t2),
          "|u|/(T-t)^{1/2}", "envelope.u.trend");

    // Observer error terminally small relative to its own peak (or already
    // negligible everywhere for a perfect start).
    const Eigen::VectorXd e1 = to_transformed(t1, T, s1.x) - s1.xi;
    if (peak_e <= 1e-6) {
        rep.add({"observer error negligible along the whole run", "observer.error.terminal",
                 peak_e, 1e-6, true, m, false});
    } else {
        const double worst = e1.norm() / peak_e;
        rep.add({"observer error terminally small", "observer.error.terminal", worst, 1e-2,
                 worst <= 1e-2, m, false});
    }
    {
        const double worst = peak_u > 1e-300 ? std::abs(s1.u) / peak_u : 0.0;
        rep.add({"control terminally small", "observer.u.terminal", worst, 1e-2, worst <= 1e-2, m,
                 false});
    }
    // Recorded limitation: the observer loop's scaled-energy decay rate
    // depends on a free proof parameter with no defensible value, so only the
    // envelope checks above are certified quantitatively.
    rep.add({"observer energy decay is envelope-checked only (no rate constant certified)",
             "observer.lyapunov.note", 0.0, 0.0, true, 0, false});
    return rep;
}

double estimate_delta_o(const PleBasis& basis, const std::vector<double>& gamma_grid) {
    if (gamma_grid.size() < 2) throw std::invalid_argument("gamma grid too small");
    const double lo = *std::min_element(gamma_grid.begin(), gamma_grid.end());
    const double hi = *std::max_element(gamma_grid.begin(), gamma_grid.end());
    if (!(hi / lo >= 100.0)) {
        throw std::invalid_argument("gamma grid must span at least two decades");
    }
    const auto vals = delta_o_values(basis, gamma_grid);
    return *std::max_element(vals.begin(), vals.end());
}

VerificationReport check_delta_o(const PleBasis& basis) {
    std::vector<double> grid;
    for (int k = 0; k <= 8; ++k) grid.push_back(std::pow(10.0, -1.0 + 0.25 * k));
    std::vector<double> dense;
    for (int k = 0; k <= 16; ++k) dense.push_back(std::pow(10.0, -1.0 + 0.125 * k));

    const double est = estimate_delta_o(basis, grid);
    const double est_dense = estimate_delta_o(basis, dense);
    const auto endpoints = delta_o_values(basis, {1.0, 10.0});

    VerificationReport rep;
    rep.add({"empirical dual-sandwich constant >= 1", "ple.delta_o.lower", 1.0 - est, 1e-6,
             1.0 - est <= 1e-6, static_cast<long>(grid.size()), false});
    const double drift = std::abs(est_dense - est) / est;
    rep.add({"estimate stable under grid refinement", "ple.delta_o.stable", drift, 1e-2,
             drift <= 1e-2, static_cast<long>(dense.size()), false});
    const double inv = std::abs(endpoints[1] - endpoints[0]) / endpoints[0];
    rep.add({"estimate gamma-invariant across a decade", "ple.delta_o.invariance", inv, 1e-2,
             inv <= 1e-2, 2, false});
    return rep;
}

VerificationReport run_full_suite(const SuiteOptions& opts) {
    VerificationReport rep;
    const int samples = opts.full ? 4000 : 1000;
    const std::vector<double> grid{0.5, 1.0, 2.0, 10.0};

    for (int n = 2; n <= 6; ++n) {
        const PleBasis basis(n);
        rep.merge(check_ple_suite(basis, grid));
        rep.merge(check_delta_o(basis));
        rep.merge(check_disturbance_bound(UncertaintySpec::zero(n), 1.0, samples,
                                          opts.seed * 1000003u + static_cast<unsigned>(n), false));
    }

    // Linear fixture with a fully populated lower triangle.
    {
        UncertaintyBoundTable table = UncertaintyBoundTable::zero(3);
        table.c << 0.3, 0, 0, 0.2, 0.4, 0, 0.1, 0.25, 0.5;
        Eigen::MatrixXd a(3, 3);
        a << 0.3, 0, 0, -0.2, 0.4, 0, 0.1, -0.25, 0.5;
        rep.merge(check_disturbance_bound(UncertaintySpec::linear(table, a), 2.0, samples,
                                          opts.seed * 1000003u + 101u, false));
    }

    // Bilinear example and its reference runs.
    const BilinearReduction reduction = bilinear_to_chained(BilinearScenario{});
    rep.merge(check_disturbance_bound(reduction.system().uncertainty, 2.5, samples,
                                      opts.seed * 1000003u + 102u, false));

    // Near-pure relative error control: these loops contract through many
    // hundreds of decades, and an absolute floor would read back as noise in
    // the terminal-trend checks.
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-300;
    cfg.terminal_guard = 1e-6;

    {
        // Formula-gain run with nonzero plant and x0 initial conditions.
        auto basis = std::make_shared<const PleBasis>(2);
        const ChainedSystem sys{2, 0.0, UncertaintySpec::zero(2)};
        const GainSchedule sched(1.0);
        const DerivedBounds db = derive_bounds(sys.uncertainty, sched.T(), 1.0, 0.0);
        const StateFeedbackLaw law(basis, sched, db.d, 0.0);
        ChainedState init{1.0, Eigen::Vector2d(1.0, -1.0)};
        const Trajectory traj = simulate_state_feedback(sys, law, init, cfg);
        rep.merge(check_state_feedback_envelopes(traj, law));
    }
    {
        // Bilinear scenario under state feedback with the plotted gain.
        auto basis = std::make_shared<const PleBasis>(2);
        const GainSchedule sched(2.5);
        const ChainedSystem& sys = reduction.system();
        const DerivedBounds db = derive_bounds(sys.uncertainty, sched.T(), 0.0, 100.0);
        const StateFeedbackLaw law(basis, sched, db.d, 0.0, 100.0, BetaPolicy::Force);
        ChainedState init{0.0, Eigen::Vector2d(-1.0, reduction.x2_from_z2(1.0))};
        const Trajectory traj = simulate_state_feedback(sys, law, init, cfg);
        rep.merge(check_state_feedback_envelopes(traj, law));
    }
    {
        // Bilinear scenario under observer-based output feedback.
        auto basis = std::make_shared<const PleBasis>(2);
        const GainSchedule sched(2.5);
        const ChainedSystem& sys = reduction.system();
        const DerivedBounds db = derive_bounds(sys.uncertainty, sched.T(), 0.0, 100.0);
        const ObserverLaw law(basis, sched, db.d, 100.0, BetaPolicy::Force);
        ChainedState init{0.0, Eigen::Vector2d(-1.0, reduction.x2_from_z2(1.0))};
        const Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(2);
        const Trajectory traj = simulate_output_feedback(sys, law, init, xi0, cfg);
        rep.merge(check_observer_envelopes(traj, law, xi0));
    }
    {
        // Perfect-start observer: zero plant state keeps the error at zero.
        auto basis = std::make_shared<const PleBasis>(2);
        const ChainedSystem sys{2, 0.0, UncertaintySpec::zero(2)};
        const GainSchedule sched(1.0);
        const DerivedBounds db = derive_bounds(sys.uncertainty, sched.T(), 1.0, 0.0);
        const ObserverLaw law(basis, sched, db.d);
        ChainedState init{1.0, Eigen::Vector2d::Zero()};
        const Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(2);
        const Trajectory traj = simulate_output_feedback(sys, law, init, xi0, cfg);
        rep.merge(check_observer_envelopes(traj, law, xi0));
    }

    if (opts.negative_controls) {
        rep.merge(check_ple_negative_control(2));
        UncertaintyBoundTable table = UncertaintyBoundTable::zero(2);
        table.c(0, 0) = 1.0;
        UncertaintySpec violating("violating", table,
                                  [](double, double, const Eigen::VectorXd& x) {
                                      Eigen::VectorXd phi(2);
                                      phi(0) = 2.0 * x(0);
                                      phi(1) = 0.0;
                                      return phi;
                                  });
        rep.merge(check_disturbance_bound(violating, 1.0, samples,
                                          opts.seed * 1000003u + 103u, true));
    }
    return rep;
}

}  // namespace ptc
