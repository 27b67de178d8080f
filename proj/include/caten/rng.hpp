// SPDX-License-Identifier: MIT
//
// Seeded randomness used by the sampling-based detectors and by tests:
// complex Gaussians, Haar-distributed unitaries, random density/PSD matrices.
// Everything is reproducible from a 64-bit seed; per-sample streams are
// derived with a splitmix-style hash so sample k is independent of how many
// draws earlier samples consumed.

#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace caten {

using cplx = std::complex<double>;

// Deterministically derive an independent stream seed from (base, index).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double gaussian() { return normal_(engine_); }

    cplx cgaussian() { return {normal_(engine_), normal_(engine_)}; }

    double uniform() { return uniform_(engine_); }

    std::uint64_t integer(std::uint64_t bound) {
        std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
        return dist(engine_);
    }

    Eigen::MatrixXcd gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXcd g(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                g(i, j) = cgaussian();
        return g;
    }

    // Haar-distributed unitary: QR of a complex Ginibre matrix with the
    // R-diagonal phases folded back into Q.
    Eigen::MatrixXcd haar_unitary(Eigen::Index d) {
        Eigen::MatrixXcd g = gaussian_matrix(d, d);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
        Eigen::MatrixXcd q = qr.householderQ();
        Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < d; ++i) {
            cplx rii = r(i, i);
            cplx phase = rii == cplx(0.0) ? cplx(1.0) : rii / std::abs(rii);
            q.col(i) *= phase;
        }
        return q;
    }

    // Random PSD matrix G G-dagger with the requested rank (<= d).
    Eigen::MatrixXcd random_psd(Eigen::Index d, Eigen::Index rank) {
        Eigen::MatrixXcd g = gaussian_matrix(d, rank);
        return g * g.adjoint();
    }

    Eigen::VectorXcd random_state(Eigen::Index d) {
        Eigen::VectorXcd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v(i) = cgaussian();
        v.normalize();
        return v;
    }

    Eigen::MatrixXcd random_density(Eigen::Index d) {
        Eigen::MatrixXcd m = random_psd(d, d);
        return m / m.trace().real();
    }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace caten
