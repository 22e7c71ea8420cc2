#pragma once

// Forward model of a single microbolometer pixel: the first-order
// thermal-inertia ODE
//
//     tau * dy/dt + y = x(t)
//
// its exact per-interval exponential solution, and the mapping between
// incident power and steady-state membrane temperature. Serves both as the
// blur simulator and as the ground-truth oracle for every recovery test.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tirv/piecewise.hpp"

namespace tirv {

/// Physical constants of one pixel. tau = c_th / g_th is the thermal time
/// constant that causes the temporal blur.
struct MicrobolometerParams {
    double c_th = 0.011;          ///< thermal capacitance (J/K)
    double g_th = 1.0;            ///< thermal conductance (W/K)
    double alpha = 1.0;           ///< absorptivity, 0 < alpha <= 1
    double t_substrate = 300.0;   ///< substrate temperature (K)

    [[nodiscard]] double tau() const { return c_th / g_th; }

    void validate() const {
        if (!(c_th > 0.0) || !(g_th > 0.0))
            throw std::invalid_argument("MicrobolometerParams: c_th and g_th must be > 0");
        if (!(alpha > 0.0) || !(alpha <= 1.0))
            throw std::invalid_argument("MicrobolometerParams: alpha must be in (0, 1]");
        if (!std::isfinite(t_substrate))
            throw std::invalid_argument("MicrobolometerParams: t_substrate must be finite");
    }
};

/// N+1 timestamped temperature samples of one pixel plus the camera's tau.
struct MeasurementWindow {
    std::vector<double> times;    ///< t_0 .. t_N, strictly increasing (s)
    std::vector<double> values;   ///< y(t_0) .. y(t_N) (K)
    double tau = 0.0;             ///< thermal time constant (s)

    [[nodiscard]] std::size_t constraint_count() const { return times.size() - 1; }
    [[nodiscard]] double dt_total() const { return times.back() - times.front(); }

    void validate() const {
        if (times.size() != values.size() || times.size() < 2)
            throw std::invalid_argument("MeasurementWindow: need N+1 >= 2 matching times/values");
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw std::invalid_argument("MeasurementWindow: tau must be > 0");
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            if (!(times[i] < times[i + 1]))
                throw std::invalid_argument("MeasurementWindow: times must be strictly increasing");
        for (double v : values)
            if (!std::isfinite(v))
                throw std::invalid_argument("MeasurementWindow: values must be finite");
    }
};

/// Steady-state membrane temperature under constant incident power phi:
/// t_substrate + (alpha / g_th) * phi. Strictly increasing in phi.
inline double power_to_steady_state(double phi, const MicrobolometerParams& params) {
    params.validate();
    if (!std::isfinite(phi))
        throw std::invalid_argument("power_to_steady_state: phi must be finite");
    return params.t_substrate + (params.alpha / params.g_th) * phi;
}

/// Inverse of power_to_steady_state: the constant power that would hold the
/// membrane at temperature t_ss.
inline double steady_state_to_power(double t_ss, const MicrobolometerParams& params) {
    params.validate();
    if (!std::isfinite(t_ss))
        throw std::invalid_argument("steady_state_to_power: t_ss must be finite");
    return (t_ss - params.t_substrate) * params.g_th / params.alpha;
}

/// Exact response of the pixel to a piecewise-constant input, sampled at the
/// requested times. Within each constant piece the ODE solution is
/// y_ss + (y_prev - y_ss) * exp(-delta/tau), so the only error is rounding.
/// Sample times must lie in [t0, t0 + dt_total]; y0 is the state at t0.
inline std::vector<double> simulate_response(const PiecewiseSignal& input, double y0, double tau,
                                             std::span<const double> sample_times) {
    input.validate();
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("simulate_response: tau must be > 0");
    if (!std::isfinite(y0))
        throw std::invalid_argument("simulate_response: y0 must be finite");
    const double t_end = input.t0 + input.dt_total;
    for (double t : sample_times)
        if (!(t >= input.t0) || !(t <= t_end))
            throw std::domain_error("simulate_response: sample time outside [t0, t0 + dt_total]");

    // March through the samples in time order, stepping the closed-form
    // solution across each bin boundary between consecutive targets.
    std::vector<std::size_t> order(sample_times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sample_times[a] < sample_times[b]; });

    const std::size_t k = input.resolution();
    const double bin = input.dt_total / static_cast<double>(k);
    std::vector<double> out(sample_times.size(), 0.0);

    double cursor = input.t0;
    double y = y0;
    std::size_t bin_idx = 0;
    for (std::size_t oi : order) {
        const double target = sample_times[oi];
        // cross whole bins that end strictly before the target
        while (bin_idx + 1 < k) {
            const double boundary = input.t0 + static_cast<double>(bin_idx + 1) * bin;
            if (!(boundary < target)) break;
            const double x = input.coeffs[bin_idx];
            y = x + (y - x) * std::exp(-(boundary - cursor) / tau);
            cursor = boundary;
            ++bin_idx;
        }
        const double x = input.coeffs[bin_idx];
        y = x + (y - x) * std::exp(-(target - cursor) / tau);
        cursor = target;
        out[oi] = y;
    }
    return out;
}

}  // namespace tirv
