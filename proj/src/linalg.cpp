#include "dtqw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "dtqw/coin_field.hpp"
#include "dtqw/errors.hpp"

namespace dtqw {

EigenDecomposition eigendecompose(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eigendecompose needs a square matrix");
    const lapack_int n = static_cast<lapack_int>(m.rows());
    Eigen::MatrixXcd a = m;  // zgeev overwrites its input
    Eigen::VectorXcd values(n);
    Eigen::MatrixXcd vectors(n, n);
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'V', n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
        reinterpret_cast<lapack_complex_double*>(values.data()), nullptr, 1,
        reinterpret_cast<lapack_complex_double*>(vectors.data()), n);
    if (info != 0)
        throw std::runtime_error("zgeev failed with info = " + std::to_string(info));
    return {std::move(values), std::move(vectors)};
}

double unitarity_error(const Eigen::MatrixXcd& m) {
    const Eigen::MatrixXcd gram = m.adjoint() * m;
    return (gram - Eigen::MatrixXcd::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

WalkEigensystem walk_eigensystem(const Eigen::MatrixXcd& w, double unitarity_tol) {
    EigenDecomposition eig = eigendecompose(w);
    const Eigen::Index n = eig.values.size();

    std::vector<double> eps(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        const double mod = std::abs(eig.values[j]);
        if (std::abs(mod - 1.0) > unitarity_tol)
            throw InvariantViolation("walk operator is not unitary: |lambda| = " +
                                     std::to_string(mod));
        double e = -std::arg(eig.values[j]);
        if (e <= -pi) e += 2.0 * pi;  // put the pi-quasienergy branch at +pi
        eps[static_cast<std::size_t>(j)] = e;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return eps[static_cast<std::size_t>(a)] < eps[static_cast<std::size_t>(b)];
    });

    WalkEigensystem out;
    out.quasienergies.resize(static_cast<std::size_t>(n));
    out.states.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        out.quasienergies[static_cast<std::size_t>(j)] = eps[static_cast<std::size_t>(src)];
        out.states.col(j) = eig.vectors.col(src).normalized();
    }
    return out;
}

}  // namespace dtqw
