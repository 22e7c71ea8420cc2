#pragma once

// Construction of the under-determined linear system Y = V * A that links a
// window of temperature samples to the piecewise-constant input that produced
// them. Row j expresses the exact ODE solution at sample t_{j+1}:
//
//   [Y]_j   = y(t_{j+1}) - y(t_0) * exp(-(t_{j+1}-t_0)/tau)
//   [V]_jk  = exp(-(t_{j+1}-t_0)/tau) * (exp(g_max) - exp(g_min))   if g_min < g_max
//   g_min   = max((k/K) * dt/tau, 0)
//   g_max   = min(((k+1)/K) * dt/tau, (t_{j+1}-t_0)/tau)
//
// Entries are evaluated as exp(g_max - s) - exp(g_min - s) with both
// exponents <= 0, so the construction cannot overflow for any tau.

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>

#include "tirv/microbolometer.hpp"
#include "tirv/piecewise.hpp"

namespace tirv {

/// The (Y, V) pair for one measurement window at resolution K. V depends only
/// on the time grid and tau, never on the pixel data, so it can be shared
/// across all pixels of a frame.
struct LinearSystem {
    Eigen::MatrixXd v;   ///< N x K weight matrix, entries in [0, 1]
    Eigen::VectorXd y;   ///< N-vector of decay-corrected measurements (K)
    double t0 = 0.0;     ///< window start (s)
    double dt_total = 0.0;
    double tau = 0.0;

    [[nodiscard]] std::size_t resolution() const { return static_cast<std::size_t>(v.cols()); }
    [[nodiscard]] std::size_t constraint_count() const { return static_cast<std::size_t>(v.rows()); }
};

/// Per-row decay factors exp(-(t_{j+1}-t_0)/tau), j = 0..N-1.
inline Eigen::VectorXd window_decay(std::span<const double> times, double tau) {
    if (times.size() < 2) throw std::invalid_argument("window_decay: need at least 2 times");
    if (!(tau > 0.0)) throw std::invalid_argument("window_decay: tau must be > 0");
    Eigen::VectorXd decay(static_cast<Eigen::Index>(times.size() - 1));
    for (std::size_t j = 0; j + 1 < times.size(); ++j)
        decay[static_cast<Eigen::Index>(j)] = std::exp(-(times[j + 1] - times[0]) / tau);
    return decay;
}

/// The N x K weight matrix V for a sample grid, tau, and resolution K.
inline Eigen::MatrixXd thermal_weight_matrix(std::span<const double> times, double tau,
                                             std::size_t k) {
    if (times.size() < 2)
        throw std::invalid_argument("thermal_weight_matrix: need at least 2 times");
    if (!(tau > 0.0)) throw std::invalid_argument("thermal_weight_matrix: tau must be > 0");
    if (!detail::is_power_of_two(k))
        throw std::invalid_argument("thermal_weight_matrix: K must be a power of two");

    const std::size_t n = times.size() - 1;
    const double t0 = times.front();
    const double dt = times.back() - t0;
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < n; ++j) {
        const double s = (times[j + 1] - t0) / tau;  // scaled sample offset
        for (std::size_t bin = 0; bin < k; ++bin) {
            const double g_min = std::max(static_cast<double>(bin) / static_cast<double>(k) * dt / tau, 0.0);
            const double g_max = std::min(static_cast<double>(bin + 1) / static_cast<double>(k) * dt / tau, s);
            if (g_min < g_max)
                v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(bin)) =
                    std::exp(g_max - s) - std::exp(g_min - s);
        }
    }
    return v;
}

/// Assemble the full system for one window at resolution exponent n (K = 2^n).
inline LinearSystem build_system(const MeasurementWindow& window, unsigned resolution_exp) {
    window.validate();
    const std::size_t k = std::size_t{1} << resolution_exp;
    LinearSystem sys;
    sys.v = thermal_weight_matrix(window.times, window.tau, k);
    sys.t0 = window.times.front();
    sys.dt_total = window.dt_total();
    sys.tau = window.tau;

    const Eigen::VectorXd decay = window_decay(window.times, window.tau);
    sys.y.resize(static_cast<Eigen::Index>(window.constraint_count()));
    for (Eigen::Index j = 0; j < sys.y.size(); ++j)
        sys.y[j] = window.values[static_cast<std::size_t>(j) + 1] - window.values[0] * decay[j];
    return sys;
}

/// V * a - Y, the constraint violation of a candidate coefficient vector.
inline Eigen::VectorXd residual(const LinearSystem& system, const Eigen::VectorXd& a) {
    if (a.size() != system.v.cols())
        throw std::invalid_argument("residual: coefficient length does not match resolution");
    return system.v * a - system.y;
}

}  // namespace tirv
