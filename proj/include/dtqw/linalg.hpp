#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dtqw/state.hpp"

namespace dtqw {

/// Dense eigendecomposition of a general complex matrix (LAPACK zgeev).
/// `vectors` holds unit-norm right eigenvectors as columns, one per value.
struct EigenDecomposition {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
};

EigenDecomposition eigendecompose(const Eigen::MatrixXcd& m);

/// max_ij |(M^dag M - 1)_ij|
double unitarity_error(const Eigen::MatrixXcd& m);

/// Spectrum of a one-step walk operator W. Eigenvalues of a unitary W are
/// e^{-i eps}; quasienergies eps = -arg(lambda) are reported in (-pi, pi]
/// and sorted ascending, with `states` columns permuted to match. Rejects
/// input whose eigenvalue moduli stray from 1 beyond `unitarity_tol`.
struct WalkEigensystem {
    std::vector<double> quasienergies;
    Eigen::MatrixXcd states;
};

WalkEigensystem walk_eigensystem(const Eigen::MatrixXcd& w, double unitarity_tol = 1e-8);

}  // namespace dtqw
