#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "umcp/network.hpp"

namespace umcp {

namespace detail {

constexpr double kPdetRelTol = 1e-12;

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                                 const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
    return out;
}

/// log2 of the pseudo-determinant: eigenvalues below 1e-12 * trace are
/// treated as exact zeros and skipped. Empty or all-zero blocks give 0.
inline double log2_pdet(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double thr = kPdetRelTol * std::max(m.trace(), 0.0);
    double acc = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double w = es.eigenvalues()[i];
        if (w > thr) acc += std::log2(w);
    }
    return acc;
}

/// Moore-Penrose inverse of a symmetric PSD matrix via eigendecomposition.
inline Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double thr = kPdetRelTol * std::max(m.trace(), 0.0);
    Eigen::VectorXd inv = es.eigenvalues();
    for (int i = 0; i < inv.size(); ++i) inv[i] = inv[i] > thr ? 1.0 / inv[i] : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// K_{A|C} = K_AA - K_AC K_CC^+ K_CA.
inline Eigen::MatrixXd conditional_covariance(const Eigen::MatrixXd& cov, const std::vector<int>& idx,
                                              const std::vector<int>& cond) {
    Eigen::MatrixXd kaa = detail::submatrix(cov, idx, idx);
    if (cond.empty()) return kaa;
    Eigen::MatrixXd kac = detail::submatrix(cov, idx, cond);
    Eigen::MatrixXd kcc = detail::submatrix(cov, cond, cond);
    return kaa - kac * detail::pinv_psd(kcc) * kac.transpose();
}

/// I(A; B | Cond) in bits for jointly Gaussian variables with the given
/// covariance, via Schur complements and pseudo-determinants. Rejects
/// inputs that are not symmetric positive semidefinite.
inline double gaussian_conditional_mi(const Eigen::MatrixXd& cov, const std::vector<int>& a,
                                      const std::vector<int>& b, const std::vector<int>& cond) {
    if (cov.rows() != cov.cols()) throw std::invalid_argument("gaussian_conditional_mi: square matrix required");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("gaussian_conditional_mi: covariance not symmetric");
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9 * scale)
            throw std::invalid_argument("gaussian_conditional_mi: covariance not positive semidefinite");
    }
    std::vector<int> ab(a);
    ab.insert(ab.end(), b.begin(), b.end());
    double la = detail::log2_pdet(conditional_covariance(cov, a, cond));
    double lb = detail::log2_pdet(conditional_covariance(cov, b, cond));
    double lab = detail::log2_pdet(conditional_covariance(cov, ab, cond));
    return 0.5 * (la + lb - lab);
}

/// Covariance of the stacked vector [X_1..X_L, W_1..W_L] where
/// W_u = sum_i h_iu X_i + Z_u + e_u and Var(e_u) = q_u. q_u = 0 gives the
/// raw receive signal Y_u; q entries must be finite.
inline Eigen::MatrixXd joint_input_output_covariance(const NetworkInstance& net,
                                                     const Eigen::VectorXd& q) {
    net.validate();
    if (q.size() != net.L) throw std::invalid_argument("covariance: q must have length L");
    for (int u = 0; u < net.L; ++u)
        if (!(q[u] >= 0.0) || !std::isfinite(q[u]))
            throw std::invalid_argument("covariance: q entries must be finite and >= 0");
    const int L = net.L;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * L, 2 * L);
    for (int i = 0; i < L; ++i) k(i, i) = net.powers[i];
    for (int i = 0; i < L; ++i)
        for (int u = 0; u < L; ++u) k(i, L + u) = k(L + u, i) = net.gains(i, u) * net.powers[i];
    for (int u = 0; u < L; ++u)
        for (int v = 0; v < L; ++v) {
            double acc = 0.0;
            for (int i = 0; i < L; ++i) acc += net.gains(i, u) * net.gains(i, v) * net.powers[i];
            k(L + u, L + v) = acc + (u == v ? net.noise + q[u] : 0.0);
        }
    return k;
}

}  // namespace umcp
