#include "ptc/ple.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ptc {

namespace {

void require_chain_length(int n) {
    if (n < kMinChainLength || n > kMaxChainLength) {
        std::ostringstream msg;
        msg << "chain length n = " << n << " outside supported range ["
            << kMinChainLength << ", " << kMaxChainLength << "]";
        throw std::domain_error(msg.str());
    }
}

unsigned __int128 factorial128(int k) {
    unsigned __int128 f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<unsigned>(i);
    return f;
}

// Exact binomial coefficient; the ratio of 128-bit factorials is an integer
// small enough (<= binom(24,12)) to convert to double without rounding.
double binomial(int m, int k) {
    if (k < 0 || m < 0 || k > m) return 0.0;
    const unsigned __int128 r = factorial128(m) / (factorial128(k) * factorial128(m - k));
    return static_cast<double>(static_cast<unsigned long long>(r));
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Powers gamma^0 .. gamma^p with the overflow guard shared by eval_P/eval_Q.
std::vector<double> guarded_powers(double gamma, int p, int n) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        std::ostringstream msg;
        msg << "gain parameter must be positive and finite, got gamma = " << gamma;
        throw std::domain_error(msg.str());
    }
    std::vector<double> pw(static_cast<size_t>(p) + 1, 1.0);
    for (int k = 1; k <= p; ++k) {
        pw[k] = pw[k - 1] * gamma;
        if (pw[k] > 1e300) {
            std::ostringstream msg;
            msg << "gamma^" << (2 * n - 1) << " overflows for gamma = " << gamma
                << ", n = " << n << "; the schedule is too close to its terminal time";
            throw std::domain_error(msg.str());
        }
    }
    return pw;
}

}  // namespace

ChainMatrices ChainMatrices::make(int n) {
    require_chain_length(n);
    ChainMatrices cm;
    cm.n = n;
    cm.A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) cm.A(i, i + 1) = 1.0;
    cm.b = Eigen::VectorXd::Zero(n);
    cm.b(n - 1) = 1.0;
    cm.c = Eigen::RowVectorXd::Zero(n);
    cm.c(0) = 1.0;
    return cm;
}

Eigen::MatrixXd dilation_matrix(double gamma, int n) {
    if (n < 1) throw std::domain_error("dilation_matrix: n must be >= 1");
    if (!(gamma > 0.0)) throw std::domain_error("dilation_matrix: gamma must be positive");
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    double p = 1.0;
    for (int i = n - 1; i >= 0; --i) {
        L(i, i) = p;
        p *= gamma;
    }
    return L;
}

Eigen::MatrixXd unit_ple_solution(int n) {
    require_chain_length(n);
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += binomial(m, n - 1 - i) * binomial(m, n - 1 - j);
            P(i, j) = s;
        }
    }
    return P;
}

Eigen::MatrixXd unit_dual_ple_solution(int n) {
    require_chain_length(n);
    Eigen::MatrixXd Q(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += binomial(m, i) * binomial(m, j);
            Q(i, j) = s;
        }
    }
    return Q;
}

Eigen::MatrixXd unit_ple_gramian(int n) {
    require_chain_length(n);
    Eigen::MatrixXd W(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            W(i, j) = sign * binomial(2 * n - 2 - i - j, n - 1 - i);
        }
    }
    return W;
}

Eigen::MatrixXd unit_dual_ple_gramian(int n) {
    require_chain_length(n);
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            V(i, j) = sign * binomial(i + j, i);
        }
    }
    return V;
}

double ple_residual(const Eigen::MatrixXd& P, double gamma) {
    const int n = static_cast<int>(P.rows());
    const ChainMatrices cm = ChainMatrices::make(n);
    const Eigen::MatrixXd R =
        cm.A.transpose() * P + P * cm.A - P * cm.b * cm.b.transpose() * P + gamma * P;
    return R.norm();
}

double dual_ple_residual(const Eigen::MatrixXd& Q, double gamma) {
    const int n = static_cast<int>(Q.rows());
    const ChainMatrices cm = ChainMatrices::make(n);
    const Eigen::MatrixXd R =
        cm.A * Q + Q * cm.A.transpose() - Q * cm.c.transpose() * cm.c * Q + gamma * Q;
    return R.norm();
}

double delta_c_constant(const Eigen::MatrixXd& Pn, const Eigen::MatrixXd& En) {
    const int n = static_cast<int>(Pn.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(Pn));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
        throw std::runtime_error("delta_c_constant: matrix is not positive definite");
    }
    const Eigen::VectorXd d = es.eigenvalues();
    const Eigen::MatrixXd U = es.eigenvectors();
    const Eigen::MatrixXd half = U * d.cwiseSqrt().asDiagonal() * U.transpose();
    const Eigen::MatrixXd inv_half = U * d.cwiseSqrt().cwiseInverse().asDiagonal() * U.transpose();
    // E + P E P^{-1} is similar to S + S^T with S = P^{-1/2} E P^{1/2}.
    const Eigen::MatrixXd S = inv_half * En * half;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(symmetrized(S + S.transpose()));
    return n * (1.0 + em.eigenvalues().maxCoeff());
}

PleBasis::PleBasis(int n) : n_(n), chain_(ChainMatrices::make(n)) {
    P_ = unit_ple_solution(n);
    Q_ = unit_dual_ple_solution(n);
    E_ = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) E_(i, i) = static_cast<double>(n - 1 - i);

    const double rp = ple_residual(P_, 1.0);
    if (rp > 1e-9 * P_.norm()) {
        std::ostringstream msg;
        msg << "unit PLE residual " << rp << " exceeds 1e-9 * " << P_.norm() << " for n = " << n;
        throw std::runtime_error(msg.str());
    }
    const double rq = dual_ple_residual(Q_, 1.0);
    if (rq > 1e-9 * Q_.norm()) {
        std::ostringstream msg;
        msg << "unit dual PLE residual " << rq << " exceeds 1e-9 * " << Q_.norm()
            << " for n = " << n;
        throw std::runtime_error(msg.str());
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esp(symmetrized(P_));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esq(symmetrized(Q_));
    const double pmax = esp.eigenvalues().maxCoeff();
    const double qmax = esq.eigenvalues().maxCoeff();
    if (esp.eigenvalues().minCoeff() <= 0.0 || esq.eigenvalues().minCoeff() <= 0.0) {
        throw std::runtime_error("unit PLE solution lost positive definiteness");
    }
    // The four extreme-eigenvalue identities share one constant. 1/lambda_min
    // is taken as lambda_max of the exact integer inverse; the max eigenvalue
    // of a symmetric matrix is perfectly conditioned, while lambda_min itself
    // is not for the larger chains.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esw(symmetrized(unit_ple_gramian(n)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esv(symmetrized(unit_dual_ple_gramian(n)));
    const double wmax = esw.eigenvalues().maxCoeff();
    const double vmax = esv.eigenvalues().maxCoeff();
    const double rel = 1e-8;
    if (std::abs(qmax - pmax) > rel * pmax || std::abs(wmax - pmax) > rel * pmax ||
        std::abs(vmax - pmax) > rel * pmax) {
        std::ostringstream msg;
        msg << "extreme-eigenvalue identity failed for n = " << n << ": lambda_max(P) = " << pmax
            << ", lambda_max(Q) = " << qmax << ", 1/lambda_min(P) = " << wmax
            << ", 1/lambda_min(Q) = " << vmax;
        throw std::runtime_error(msg.str());
    }
    lambda_max_ = pmax;
    delta_c_ = delta_c_constant(P_, E_);
    const Eigen::VectorXd qc = Q_.col(0);  // Q c^T at gamma = 1
    k3_ = qc.dot(P_ * qc);
}

Eigen::MatrixXd eval_P(const PleBasis& basis, double gamma) {
    const int n = basis.n();
    const auto pw = guarded_powers(gamma, 2 * n - 1, n);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        // 1-indexed exponent 2n - i - j + 1.
        for (int j = 0; j < n; ++j) M(i, j) = pw[static_cast<size_t>(2 * n - 1 - i - j)] * basis.P()(i, j);
    }
    return M;
}

Eigen::MatrixXd eval_Q(const PleBasis& basis, double gamma) {
    const int n = basis.n();
    const auto pw = guarded_powers(gamma, 2 * n - 1, n);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        // 1-indexed exponent i + j - 1.
        for (int j = 0; j < n; ++j) M(i, j) = pw[static_cast<size_t>(i + j + 1)] * basis.Q()(i, j);
    }
    return M;
}

Eigen::RowVectorXd feedback_gain_row(const PleBasis& basis, double gamma) {
    const int n = basis.n();
    const auto pw = guarded_powers(gamma, 2 * n - 1, n);
    Eigen::RowVectorXd r(n);
    for (int j = 0; j < n; ++j) r(j) = pw[static_cast<size_t>(n - j)] * basis.P()(n - 1, j);
    return r;
}

Eigen::VectorXd observer_gain_col(const PleBasis& basis, double gamma) {
    const int n = basis.n();
    const auto pw = guarded_powers(gamma, 2 * n - 1, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = pw[static_cast<size_t>(i + 1)] * basis.Q()(i, 0);
    return g;
}

GainSchedule::GainSchedule(double T) : T_(T) {
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw std::domain_error("GainSchedule: prescribed time T must be positive and finite");
    }
}

double GainSchedule::gamma(double t) const {
    if (!(t >= 0.0) || t >= T_) {
        std::ostringstream msg;
        msg << "gain schedule evaluated at t = " << t << " outside [0, " << T_ << ")";
        throw std::domain_error(msg.str());
    }
    return 1.0 / (T_ - t);
}

double GainSchedule::remaining(double t) const {
    if (!(t >= 0.0) || t >= T_) {
        std::ostringstream msg;
        msg << "gain schedule evaluated at t = " << t << " outside [0, " << T_ << ")";
        throw std::domain_error(msg.str());
    }
    return T_ - t;
}

}  // namespace ptc
