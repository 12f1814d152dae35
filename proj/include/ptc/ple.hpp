#pragma once

#include <Eigen/Dense>

namespace ptc {

// Canonical chain-of-integrators triple: A carries ones on the first
// superdiagonal, b = e_n, c = e_1^T. (A, b) is controllable and (A, c)
// observable by construction.
struct ChainMatrices {
    int n = 0;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;

    static ChainMatrices make(int n);
};

// diag(gamma^{n-1}, gamma^{n-2}, ..., gamma, 1).
// Throws std::domain_error for gamma <= 0 or n < 1.
Eigen::MatrixXd dilation_matrix(double gamma, int n);

inline constexpr int kMinChainLength = 2;
// Binomial ratios up to (2n-2)! must stay exactly representable in double
// after simplification; conditioning degrades combinatorially past this.
inline constexpr int kMaxChainLength = 12;

// Unit (gamma = 1) solutions of the parametric pair
//   A^T P + P A - P b b^T P = -P,
//   A Q + Q A^T - Q c^T c Q = -Q.
// Both have exact small-integer entries,
//   P[i][j] = sum_{m=0}^{n-1} binom(m, n-i) binom(m, n-j)   (1-indexed),
// and Q is the index-reversed P. Consequently b^T P b = n and c Q c^T = n
// hold exactly.
Eigen::MatrixXd unit_ple_solution(int n);
Eigen::MatrixXd unit_dual_ple_solution(int n);

// Exact integer inverses of the unit solutions: the shifted-chain Gramians
//   W[i][j] = (-1)^{i+j} (2n-i-j)! / ((n-i)! (n-j)!),
//   V[i][j] = (-1)^{i+j} (i+j-2)! / ((i-1)! (j-1)!)     (1-indexed).
// unit_ple_solution(n) * unit_ple_gramian(n) == I exactly.
Eigen::MatrixXd unit_ple_gramian(int n);
Eigen::MatrixXd unit_dual_ple_gramian(int n);

// Frobenius norm of A^T P + P A - P b b^T P + gamma P (zero for the solution),
// and the dual counterpart.
double ple_residual(const Eigen::MatrixXd& P, double gamma);
double dual_ple_residual(const Eigen::MatrixXd& Q, double gamma);

// delta_c = n (1 + lambda_max(E + P E P^{-1})), evaluated through the similar
// symmetric form P^{-1/2} E P^{1/2} + P^{1/2} E P^{-1/2}. It bounds the
// gamma-derivative: P/(n gamma) <= dP/dgamma <= delta_c P/(n gamma).
double delta_c_constant(const Eigen::MatrixXd& Pn, const Eigen::MatrixXd& En);

// Immutable bundle of the unit solutions and the scalar constants derived
// from them for one chain length. Construction verifies the defining
// identities and throws std::runtime_error with the offending residual if a
// check fails. Safe for concurrent read access.
class PleBasis {
  public:
    explicit PleBasis(int n);

    int n() const { return n_; }
    const ChainMatrices& chain() const { return chain_; }
    const Eigen::MatrixXd& P() const { return P_; }
    const Eigen::MatrixXd& Q() const { return Q_; }
    // E = diag(n-1, n-2, ..., 1, 0).
    const Eigen::MatrixXd& E() const { return E_; }
    // Shared extreme eigenvalue: lambda_max(P) = lambda_max(Q) = 1/lambda_min(P).
    double lambda_max() const { return lambda_max_; }
    double delta_c() const { return delta_c_; }
    // k3 = c Q P Q c^T; enters the output-feedback gain formula.
    double k3() const { return k3_; }

  private:
    int n_;
    ChainMatrices chain_;
    Eigen::MatrixXd P_, Q_, E_;
    double lambda_max_ = 0.0;
    double delta_c_ = 0.0;
    double k3_ = 0.0;
};

// P(gamma) = gamma L(gamma) P L(gamma), elementwise gamma^{2n-i-j+1} P[i][j]
// (1-indexed). Throws std::domain_error for gamma <= 0, or when gamma^{2n-1}
// would exceed 1e300 (the gain singularity would otherwise surface as NaNs
// downstream).
Eigen::MatrixXd eval_P(const PleBasis& basis, double gamma);

// Q(gamma) = gamma^{2n-1} L^{-1}(gamma) Q L^{-1}(gamma), elementwise
// gamma^{i+j-1} Q[i][j]. Same domain contract as eval_P.
Eigen::MatrixXd eval_Q(const PleBasis& basis, double gamma);

// b^T P(gamma): the last row of P(gamma); its last entry equals n gamma.
Eigen::RowVectorXd feedback_gain_row(const PleBasis& basis, double gamma);

// Q(gamma) c^T: the first column of Q(gamma); its first entry equals n gamma.
Eigen::VectorXd observer_gain_col(const PleBasis& basis, double gamma);

// Time-varying gain gamma(t) = 1/(T-t), strictly increasing on [0, T) with
// gamma(0) = 1/T.
class GainSchedule {
  public:
    explicit GainSchedule(double T);
    double T() const { return T_; }
    double gamma0() const { return 1.0 / T_; }
    double gamma(double t) const;      // throws std::domain_error outside [0, T)
    double remaining(double t) const;  // T - t, same domain contract

  private:
    double T_;
};

}  // namespace ptc
