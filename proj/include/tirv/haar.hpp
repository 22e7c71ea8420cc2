#pragma once

// Orthonormal Haar basis on K = 2^n bins. Signals with few transitions are
// sparse in this basis, which is what lets an l1 penalty select them from the
// under-determined inverse problem.
//
// Row ordering is fixed so golden tests stay stable: the constant (scaling)
// row first, then wavelets coarse-to-fine, left-to-right within a scale.
// Rows are unit L2 norm, so transpose(H) is the exact inverse transform.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "tirv/piecewise.hpp"

namespace tirv {

/// Orthonormal K x K Haar matrix. Immutable after construction and shareable
/// across threads.
struct HaarBasis {
    Eigen::MatrixXd matrix;  ///< H; rows are the basis functions

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }

    /// D = H * A
    [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& a) const {
        if (a.size() != matrix.rows())
            throw std::invalid_argument("HaarBasis::forward: length mismatch");
        return matrix * a;
    }

    /// A = transpose(H) * D
    [[nodiscard]] Eigen::VectorXd inverse(const Eigen::VectorXd& d) const {
        if (d.size() != matrix.rows())
            throw std::invalid_argument("HaarBasis::inverse: length mismatch");
        return matrix.transpose() * d;
    }
};

/// Build the orthonormal Haar matrix of size K x K (K a power of two).
inline HaarBasis haar_matrix(std::size_t k) {
    if (!detail::is_power_of_two(k))
        throw std::invalid_argument("haar_matrix: K must be a power of two");

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                              static_cast<Eigen::Index>(k));
    const auto kk = static_cast<Eigen::Index>(k);
    h.row(0).setConstant(1.0 / std::sqrt(static_cast<double>(k)));

    Eigen::Index row = 1;
    for (std::size_t block = k; block >= 2; block /= 2) {
        const auto half = static_cast<Eigen::Index>(block / 2);
        const double amp = 1.0 / std::sqrt(static_cast<double>(block));
        for (Eigen::Index start = 0; start < kk; start += static_cast<Eigen::Index>(block)) {
            h.row(row).segment(start, half).setConstant(amp);
            h.row(row).segment(start + half, half).setConstant(-amp);
            ++row;
        }
    }
    return HaarBasis{std::move(h)};
}

}  // namespace tirv
