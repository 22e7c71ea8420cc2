#pragma once

// Piecewise-constant signals on a uniform dyadic grid. These are the
// candidate inputs the rest of the library reconstructs: a signal over the
// right-open window [t0, t0 + dt_total) represented by K = 2^n coefficients,
// one per bin.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tirv {

namespace detail {

inline bool is_power_of_two(std::size_t k) {
    return k > 0 && (k & (k - 1)) == 0;
}

}  // namespace detail

/// A piecewise-constant signal: value coeffs[k] on
/// [t0 + k*dt/K, t0 + (k+1)*dt/K), with K a power of two.
struct PiecewiseSignal {
    double t0 = 0.0;                ///< window start (s)
    double dt_total = 0.0;          ///< window length (s)
    std::vector<double> coeffs;     ///< K bin values (Kelvin, or Watts for power signals)

    [[nodiscard]] std::size_t resolution() const { return coeffs.size(); }
    [[nodiscard]] double bin_width() const {
        return dt_total / static_cast<double>(coeffs.size());
    }

    void validate() const {
        if (!detail::is_power_of_two(coeffs.size()))
            throw std::invalid_argument("PiecewiseSignal: K must be a power of two, K >= 1");
        if (!(dt_total > 0.0) || !std::isfinite(dt_total) || !std::isfinite(t0))
            throw std::invalid_argument("PiecewiseSignal: window must be finite with dt_total > 0");
    }
};

/// Value of the signal at time t. The domain is right-open: a bin breakpoint
/// belongs to the bin it starts.
inline double eval_piecewise(const PiecewiseSignal& signal, double t) {
    signal.validate();
    const std::size_t k = signal.coeffs.size();
    if (!(t >= signal.t0) || !(t < signal.t0 + signal.dt_total))
        throw std::domain_error("eval_piecewise: t outside [t0, t0 + dt_total)");
    auto idx = static_cast<std::size_t>(
        std::floor((t - signal.t0) * static_cast<double>(k) / signal.dt_total));
    if (idx >= k) idx = k - 1;  // rounding guard at the right edge
    return signal.coeffs[idx];
}

/// Project M uniform samples over [t0, t0 + dt_total) onto the K-bin grid by
/// bin averaging. This is the L2-closest piecewise-constant approximation on
/// the target grid; K must divide M.
inline PiecewiseSignal project(std::span<const double> dense, double t0, double dt_total,
                               std::size_t k) {
    if (!detail::is_power_of_two(k))
        throw std::invalid_argument("project: K must be a power of two");
    if (dense.empty() || dense.size() % k != 0)
        throw std::invalid_argument("project: K must divide the dense sample count");
    const std::size_t per_bin = dense.size() / k;
    PiecewiseSignal out{t0, dt_total, std::vector<double>(k, 0.0)};
    for (std::size_t bin = 0; bin < k; ++bin) {
        double sum = 0.0;
        for (std::size_t i = 0; i < per_bin; ++i) sum += dense[bin * per_bin + i];
        out.coeffs[bin] = sum / static_cast<double>(per_bin);
    }
    out.validate();
    return out;
}

/// Double the resolution without changing the signal: each coefficient is
/// duplicated, so eval_piecewise is unchanged at every t.
inline PiecewiseSignal refine(const PiecewiseSignal& signal) {
    signal.validate();
    PiecewiseSignal out{signal.t0, signal.dt_total, {}};
    out.coeffs.reserve(signal.coeffs.size() * 2);
    for (double c : signal.coeffs) {
        out.coeffs.push_back(c);
        out.coeffs.push_back(c);
    }
    return out;
}

}  // namespace tirv
