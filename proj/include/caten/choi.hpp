// SPDX-License-Identifier: MIT
//
// Choi-matrix representation of linear maps on operators.
//
// A Superoperator stores the Choi matrix of a map E: L(H_in) -> L(H_out) on
// the space in' (x) out, where in' is a primed copy of the input space and the
// maximally entangled state used in the correspondence is normalized:
//
//     choi = (1/d_in) sum_ij |i><j|_in' (x) E(|i><j|)
//
// The inverse action, its restriction to pure Choi vectors, and the CP/TP
// verdicts are provided alongside Kraus conversion helpers.

#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "caten/errors.hpp"
#include "caten/linalg.hpp"

namespace caten {

// Primed copy of a factor id, used for the input slots of a Choi space.
inline std::string primed(const std::string& id) { return id + "'"; }

inline std::vector<Factor> primed_space(const std::vector<Factor>& space) {
    std::vector<Factor> out;
    out.reserve(space.size());
    for (const auto& f : space) out.push_back({primed(f.id), f.dim});
    return out;
}

struct Superoperator {
    std::vector<Factor> in_space;
    std::vector<Factor> out_space;
    SquareOperator choi; // on primed-in (x) out

    std::size_t d_in() const { return space_dim(in_space); }
    std::size_t d_out() const { return space_dim(out_space); }
};

struct NonlinearApply : Error {
    using Error::Error;
};

using MatrixAction = std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)>;

// Direct Choi transform of a linear action, built column-by-column from
// matrix units.  Linearity is spot-checked on random superpositions of the
// spanning set; failures raise "nonlinearity detected".
inline Superoperator cj(const MatrixAction& apply, std::vector<Factor> in_space,
                        std::vector<Factor> out_space) {
    const std::size_t din = space_dim(in_space);
    const std::size_t dout = space_dim(out_space);
    const auto di = static_cast<Eigen::Index>(din);
    const auto do_ = static_cast<Eigen::Index>(dout);

    std::vector<Eigen::MatrixXcd> unit_images(din * din);
    Eigen::MatrixXcd choi = Eigen::MatrixXcd::Zero(di * do_, di * do_);
    for (Eigen::Index i = 0; i < di; ++i) {
        for (Eigen::Index j = 0; j < di; ++j) {
            Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(di, di);
            unit(i, j) = 1.0;
            Eigen::MatrixXcd img = apply(unit);
            if (img.rows() != do_ || img.cols() != do_)
                throw Error("cj: action output has wrong dimension");
            unit_images[static_cast<std::size_t>(i * di + j)] = img;
            choi.block(i * do_, j * do_, do_, do_) = img;
        }
    }
    choi /= static_cast<double>(din);

    // linearity check: the action on two random superpositions must match the
    // matrix-unit reconstruction
    std::mt19937_64 gen(0x5eedu);
    std::normal_distribution<double> normal;
    for (int probe = 0; probe < 2; ++probe) {
        Eigen::MatrixXcd r(di, di), expect = Eigen::MatrixXcd::Zero(do_, do_);
        for (Eigen::Index i = 0; i < di; ++i)
            for (Eigen::Index j = 0; j < di; ++j) r(i, j) = cplx(normal(gen), normal(gen));
        for (Eigen::Index i = 0; i < di; ++i)
            for (Eigen::Index j = 0; j < di; ++j)
                expect += r(i, j) * unit_images[static_cast<std::size_t>(i * di + j)];
        if ((apply(r) - expect).cwiseAbs().maxCoeff() > kHermTol)
            throw NonlinearApply("cj: nonlinearity detected");
    }

    Superoperator s;
    s.choi.space = primed_space(in_space);
    for (const auto& f : out_space) s.choi.space.push_back(f);
    s.choi.matrix = std::move(choi);
    s.in_space = std::move(in_space);
    s.out_space = std::move(out_space);
    return s;
}

// Convenience overload with anonymous single-factor spaces.
inline Superoperator cj(const MatrixAction& apply, std::size_t d_in, std::size_t d_out) {
    return cj(apply, {{"in", d_in}}, {{"out", d_out}});
}

// Inverse Choi action: output = d_in * Tr_in'[ (input^T (x) I) choi ], the
// transpose taken in the computational basis fixed by the factor order.
inline SquareOperator cj_inv_apply(const Superoperator& s, const SquareOperator& input) {
    if (input.space != s.in_space)
        throw Error("cj_inv_apply: input space mismatch");
    const auto di = static_cast<Eigen::Index>(s.d_in());
    const auto do_ = static_cast<Eigen::Index>(s.d_out());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(do_, do_);
    // Tr_in' of (input^T (x) I) choi, written blockwise: choi block (i,j) is
    // E(|i><j|) / d_in, and (S^T (x) I) scales block rows by S-entries.
    for (Eigen::Index i = 0; i < di; ++i)
        for (Eigen::Index j = 0; j < di; ++j)
            out += input.matrix(i, j) * s.choi.matrix.block(i * do_, j * do_, do_, do_);
    SquareOperator result;
    result.space = s.out_space;
    result.matrix = static_cast<double>(di) * out;
    return result;
}

// Pure inverse Choi transform: for a vector psi on in' (x) out, the linear map
// C with C(j,i) = psi(i,j)/sqrt(d_in) (so psi = sqrt(d_in) (I (x) C)|phi+>).
inline Eigen::MatrixXcd cj_inv_pure(const DenseTensor& psi, std::size_t d_in) {
    if (d_in == 0 || psi.size() % d_in != 0)
        throw Error("cj_inv_pure: vector length is not divisible by d_in");
    const std::size_t d_out = psi.size() / d_in;
    Eigen::MatrixXcd c(static_cast<Eigen::Index>(d_out), static_cast<Eigen::Index>(d_in));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (std::size_t i = 0; i < d_in; ++i)
        for (std::size_t j = 0; j < d_out; ++j)
            c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                scale * psi.data[i * d_out + j];
    return c;
}

// Overload for the common two-axis layout (in' axis first).
inline Eigen::MatrixXcd cj_inv_pure(const DenseTensor& psi) {
    if (psi.rank() != 2)
        throw Error("cj_inv_pure: expected a two-axis vector or an explicit d_in");
    return cj_inv_pure(psi, psi.axes[0].dim);
}

struct CptpReport {
    bool cp = false;
    bool tp = false;
    double tp_residual = 0.0;
};

// Largest deviation of the Choi out-marginal from the maximally mixed state
// on the input copy; zero exactly when the map is trace preserving.  Costs a
// partial trace, never an eigensolve.
inline double tp_residual(const Superoperator& s) {
    std::vector<std::string> keep;
    for (const auto& f : s.in_space) keep.push_back(primed(f.id));
    SquareOperator marg = partial_trace(s.choi, keep);
    Eigen::MatrixXcd target =
        Eigen::MatrixXcd::Identity(marg.matrix.rows(), marg.matrix.cols()) /
        static_cast<double>(s.d_in());
    return (marg.matrix - target).cwiseAbs().maxCoeff();
}

// CP iff the Choi matrix is PSD (within 1e-9); TP iff its out-marginal is the
// maximally mixed state on the input copy.
inline CptpReport is_cptp(const Superoperator& s) {
    CptpReport rep;
    if (s.choi.is_hermitian()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.choi.matrix,
                                                           Eigen::EigenvaluesOnly);
        rep.cp = es.eigenvalues().minCoeff() >= -kHermTol;
    } else {
        rep.cp = false;
    }
    rep.tp_residual = tp_residual(s);
    rep.tp = rep.tp_residual <= kHermTol;
    return rep;
}

// ---------------------------------------------------------------------------
// Kraus conversion helpers

// Superoperator of the channel S -> sum_k K_k S K_k^dagger.  The Choi matrix
// is assembled as a sum of rank-one terms over vectorized Kraus operators,
// which matches the matrix-unit definition entrywise:
//     choi((i,o),(j,p)) = (1/d_in) sum_k K_k(o,i) conj(K_k(p,j)).
inline Superoperator superoperator_from_kraus(const std::vector<Eigen::MatrixXcd>& kraus,
                                              std::vector<Factor> in_space,
                                              std::vector<Factor> out_space) {
    if (kraus.empty()) throw Error("superoperator_from_kraus: empty Kraus list");
    const auto di = static_cast<Eigen::Index>(space_dim(in_space));
    const auto do_ = static_cast<Eigen::Index>(space_dim(out_space));
    Eigen::MatrixXcd vecs(di * do_, static_cast<Eigen::Index>(kraus.size()));
    for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
        const auto& kk = kraus[static_cast<std::size_t>(k)];
        if (kk.rows() != do_ || kk.cols() != di)
            throw Error("superoperator_from_kraus: Kraus dimension mismatch");
        for (Eigen::Index i = 0; i < di; ++i)
            for (Eigen::Index o = 0; o < do_; ++o) vecs(i * do_ + o, k) = kk(o, i);
    }
    Eigen::MatrixXcd choi = (vecs * vecs.adjoint()) / static_cast<double>(di);

    Superoperator s;
    s.choi.space = primed_space(in_space);
    for (const auto& f : out_space) s.choi.space.push_back(f);
    s.choi.matrix = std::move(choi);
    s.in_space = std::move(in_space);
    s.out_space = std::move(out_space);
    return s;
}

// Kraus operators recovered from the Choi spectrum: K_k = sqrt(d_in mu_k) C_k
// with C_k the pure inverse of the k-th eigenvector.  Eigenvalues below the
// PSD floor raise NotPSD; near-zero ones are dropped.
inline std::vector<Eigen::MatrixXcd> kraus_from_choi(const Superoperator& s) {
    if (!s.choi.is_hermitian())
        throw Error("kraus_from_choi: Choi matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.choi.matrix);
    const double floor = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    const auto dout = static_cast<Eigen::Index>(s.d_out());
    const auto din = static_cast<Eigen::Index>(s.d_in());
    std::vector<Eigen::MatrixXcd> kraus;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double mu = es.eigenvalues()(k);
        if (mu < kEvalClip) throw NotPSD("kraus_from_choi: negative Choi eigenvalue");
        if (mu <= floor) continue;
        Eigen::VectorXcd v = es.eigenvectors().col(k);
        Eigen::MatrixXcd m(dout, din);
        for (Eigen::Index i = 0; i < din; ++i)
            for (Eigen::Index j = 0; j < dout; ++j) m(j, i) = v(i * dout + j);
        kraus.push_back(std::sqrt(mu * static_cast<double>(din)) * m);
    }
    return kraus;
}

} // namespace caten
