// SPDX-License-Identifier: MIT
//
// Shared helpers for the test suite: closeness checks, standard single-qubit
// operators, and basis kets.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "caten/linalg.hpp"

namespace testutil {

using caten::cplx;

inline double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline Eigen::MatrixXcd pauli_x() {
    Eigen::MatrixXcd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Eigen::MatrixXcd pauli_y() {
    Eigen::MatrixXcd m(2, 2);
    m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
    return m;
}

inline Eigen::MatrixXcd pauli_z() {
    Eigen::MatrixXcd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline Eigen::MatrixXcd hadamard() {
    Eigen::MatrixXcd m(2, 2);
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

inline Eigen::VectorXcd ket(std::size_t i, std::size_t d) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d));
    v(static_cast<Eigen::Index>(i)) = 1.0;
    return v;
}

// |phi+> = (|00> + |11>)/sqrt(2) on d x d
inline Eigen::VectorXcd bell_vector(std::size_t d) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d * d));
    for (std::size_t i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i * d + i)) = 1.0;
    return v / std::sqrt(static_cast<double>(d));
}

inline caten::SquareOperator make_op(std::vector<caten::Factor> space, Eigen::MatrixXcd m) {
    caten::SquareOperator op;
    op.space = std::move(space);
    op.matrix = std::move(m);
    return op;
}

} // namespace testutil
