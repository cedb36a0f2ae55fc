#include "splinefold/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "splinefold/error.hpp"

namespace splinefold {

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, int max_sweeps) {
    const Eigen::Index n = input.rows();
    if (input.cols() != n) throw Error(ErrorKind::InvalidArgument, "matrix is not square");
    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double total = a.norm();
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * total) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == max_sweeps)
        throw Error(ErrorKind::NoConvergence, "Jacobi eigen solver did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values[i] = a(order[i], order[i]);
        out.vectors.col(i) = v.col(order[i]);
    }
    out.sweeps = sweep;
    return out;
}

TangentPCA tangent_pca(const Eigen::MatrixXd& gram, int modes) {
    const Eigen::Index n = gram.rows();
    if (n < 2) throw Error(ErrorKind::InsufficientData, "PCA needs at least two samples");
    if (modes < 1 || modes > n)
        throw Error(ErrorKind::InvalidArgument, "mode count " + std::to_string(modes) +
                                                    " outside [1, " + std::to_string(n) + "]");
    const SymmetricEigen eig = jacobi_eigen(gram);
    TangentPCA out;
    const double trace = gram.trace();
    out.total_variance = trace / static_cast<double>(n);
    out.eigenvalues = eig.values.head(modes).cwiseMax(0.0);
    out.variances = out.eigenvalues / static_cast<double>(n);
    out.coefficients = Eigen::MatrixXd::Zero(n, modes);
    out.scores = Eigen::MatrixXd::Zero(n, modes);
    for (int m = 0; m < modes; ++m) {
        const double lambda = eig.values[m];
        // Relative cut, plus an absolute floor for round-off spread around a common point.
        if (!(lambda > 1e-12 * trace) || !(lambda > 1e-20 * static_cast<double>(n))) {
            out.rank_deficient = true;
            continue;
        }
        ++out.rank;
        Eigen::VectorXd vec = eig.vectors.col(m);
        Eigen::Index arg = 0;
        vec.cwiseAbs().maxCoeff(&arg);
        if (vec[arg] < 0.0) vec = -vec;
        const double root = std::sqrt(lambda);
        out.coefficients.col(m) = vec / root;
        out.scores.col(m) = root * vec;
    }
    return out;
}

}  // namespace splinefold
