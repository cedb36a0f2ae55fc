#pragma once

#include <Eigen/Core>

namespace splinefold {

struct SymmetricEigen {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // column i belongs to values[i]
    int sweeps = 0;
};

/// Cyclic Jacobi rotations for a small dense symmetric matrix. Stops when
/// the off-diagonal Frobenius norm drops below 1e-15 of the total.
[[nodiscard]] SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, int max_sweeps = 100);

/// Tangent PCA from the Gram matrix G_jk = <X_j, X_k> of N tangent vectors
/// at a common base point.
///
/// direction m = sum_j coefficients(j, m) X_j, orthonormal;
/// scores(j, m) = <X_j, direction m>; variance m = eigenvalue m / N.
/// Modes whose eigenvalue is below 1e-12 trace are rank deficient: their
/// coefficients and scores are zero.
struct TangentPCA {
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd variances;
    Eigen::MatrixXd coefficients;
    Eigen::MatrixXd scores;
    double total_variance = 0.0;
    int rank = 0;
    bool rank_deficient = false;
};

[[nodiscard]] TangentPCA tangent_pca(const Eigen::MatrixXd& gram, int modes);

}  // namespace splinefold
