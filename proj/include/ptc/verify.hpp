#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptc/control.hpp"
#include "ptc/sim.hpp"

namespace ptc {

struct CheckEntry {
    std::string name;    // human-readable description
    std::string anchor;  // stable check id, e.g. "ple.trace.bpb"
    double worst = 0.0;  // worst residual / slack / ratio observed
    double threshold = 0.0;
    bool pass = false;
    long samples = 0;
    bool negative_control = false;  // entry is expected to fail
};

class VerificationReport {
  public:
    void add(CheckEntry e);
    void merge(const VerificationReport& other);
    const std::vector<CheckEntry>& entries() const { return entries_; }
    // Every regular entry passed.
    bool all_passed() const;
    // Every negative-control entry failed, as it must for the suite to be
    // sensitive.
    bool negative_controls_behaved() const;
    std::string to_text() const;
    std::string to_csv() const;  // check,anchor,residual,threshold,pass

  private:
    std::vector<CheckEntry> entries_;
};

// Residuals, trace identities, derivative sandwich, curvature bound and
// spectrum similarity for one basis over a gamma grid.
VerificationReport check_ple_suite(const PleBasis& basis, const std::vector<double>& gamma_grid);

// Corrupted-basis sensitivity probe (entries flagged as negative controls).
VerificationReport check_ple_negative_control(int n);

// Randomized check of the scaled-disturbance envelope
//   |L psi|^2 <= d^2 gamma^2 |L z|^2
// plus the componentwise |psi_i| <= gamma sum_j g_ij |z_j| propagation and the
// table itself. Seeded and reproducible.
VerificationReport check_disturbance_bound(const UncertaintySpec& spec, double T, int samples,
                                           std::uint64_t seed, bool negative_control = false);

// Explicit x0/u0 envelopes, the Lyapunov decay cone (checked in log domain)
// and fitted state/control envelopes along a state-feedback run.
VerificationReport check_state_feedback_envelopes(const Trajectory& traj,
                                                  const StateFeedbackLaw& law);

// Normalized-ratio boundedness, terminal trend and observer-error terminal
// smallness along an output-feedback run.
VerificationReport check_observer_envelopes(const Trajectory& traj, const ObserverLaw& law,
                                            const Eigen::VectorXd& xi_init);

// Empirical estimate of the dual-sandwich upper constant:
//   max over the grid of n gamma lambda_max(Q^{-1/2} (dQ/dgamma) Q^{-1/2}),
// central finite differences. No closed form exists; the estimate is reported,
// never asserted against an external value.
double estimate_delta_o(const PleBasis& basis, const std::vector<double>& gamma_grid);

// Lower-sandwich and grid-stability entries for the estimate above.
VerificationReport check_delta_o(const PleBasis& basis);

struct SuiteOptions {
    std::uint64_t seed = 0;
    bool negative_controls = false;
    // Denser sampling (more randomized draws per spec).
    bool full = false;
};

// The whole battery for n in {2..6}: PLE suites, disturbance bounds for the
// built-in specs, and envelope checks along freshly simulated reference runs.
VerificationReport run_full_suite(const SuiteOptions& opts);

}  // namespace ptc
