#pragma once

// Synthetic ground truth and evaluation: pixel-level pulse trains and random
// piecewise signals, moving-rectangle scenes rasterized without anti-aliasing
// (so every per-pixel signal is exactly piecewise constant), the two blur
// models, deterministic Gaussian noise, and recovery metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "tirv/lasso.hpp"
#include "tirv/piecewise.hpp"
#include "tirv/video.hpp"

namespace tirv {

/// Axis-aligned rectangle at constant temperature moving at constant velocity.
struct RectObject {
    double temp = 310.0;   ///< K
    double x0 = 0.0;       ///< initial left edge (px)
    double y0 = 0.0;       ///< initial top edge (px)
    double width = 8.0;    ///< px
    double height = 8.0;   ///< px
    double vx = 0.0;       ///< px/s
    double vy = 0.0;       ///< px/s
};

struct SceneSpec {
    std::uint32_t width = 64;
    std::uint32_t height = 32;
    double background_temp = 300.0;  ///< K
    std::vector<RectObject> objects;
    double duration = 0.32;          ///< s
    double sample_period = 0.005;    ///< s

    void validate() const {
        if (width == 0 || height == 0) throw std::invalid_argument("SceneSpec: empty geometry");
        if (!(duration > 0.0) || !(sample_period > 0.0))
            throw std::invalid_argument("SceneSpec: duration and sample_period must be > 0");
        if (!std::isfinite(background_temp))
            throw std::invalid_argument("SceneSpec: background_temp must be finite");
        for (const auto& o : objects)
            if (!std::isfinite(o.temp) || !(o.width > 0.0) || !(o.height > 0.0))
                throw std::invalid_argument("SceneSpec: invalid object");
    }
};

struct NoiseSpec {
    double sigma = 0.0;       ///< K
    std::uint64_t seed = 0;

    void validate() const {
        if (!(sigma >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be >= 0");
    }
};

struct PulseTrainParams {
    double level_high = 300.0;  ///< K, first half of each period
    double level_low = 295.0;   ///< K, second half
    double period = 0.1;        ///< s
};

struct RandomPiecewiseParams {
    int transitions = 4;
    std::size_t min_dwell_bins = 2;   ///< shortest constant segment
    double level_min = 295.0;         ///< K
    double level_max = 310.0;         ///< K
    double min_level_gap = 1.0;       ///< K, smallest jump between segments
    std::uint64_t seed = 0;
};

/// Square wave alternating level_high / level_low every half period; bin
/// values are taken at bin midpoints.
inline PiecewiseSignal generate_pulse_train(const PulseTrainParams& params, double duration,
                                            std::size_t bins) {
    if (!(params.period > 0.0) || !(duration > 0.0))
        throw std::invalid_argument("generate_pulse_train: period and duration must be > 0");
    PiecewiseSignal out{0.0, duration, std::vector<double>(bins, 0.0)};
    out.validate();
    for (std::size_t b = 0; b < bins; ++b) {
        const double t = (static_cast<double>(b) + 0.5) * duration / static_cast<double>(bins);
        const double phase = std::fmod(t, params.period) / params.period;
        out.coeffs[b] = phase < 0.5 ? params.level_high : params.level_low;
    }
    return out;
}

/// Piecewise-constant signal with exactly the requested transition count,
/// every segment at least min_dwell_bins long, and consecutive levels at
/// least min_level_gap apart. Deterministic per seed.
inline PiecewiseSignal generate_random_piecewise(const RandomPiecewiseParams& params,
                                                 double duration, std::size_t bins) {
    if (params.transitions < 0)
        throw std::invalid_argument("generate_random_piecewise: transitions must be >= 0");
    if (params.min_dwell_bins < 1)
        throw std::invalid_argument("generate_random_piecewise: min_dwell_bins must be >= 1");
    if (!(params.level_min < params.level_max))
        throw std::invalid_argument("generate_random_piecewise: need level_min < level_max");
    const auto r = static_cast<std::size_t>(params.transitions);
    if ((r + 1) * params.min_dwell_bins > bins)
        throw std::invalid_argument(
            "generate_random_piecewise: dwell/transition combination does not fit the bins");
    if (!(params.min_level_gap >= 0.0) ||
        params.min_level_gap > (params.level_max - params.level_min))
        throw std::invalid_argument("generate_random_piecewise: min_level_gap out of range");

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> level(params.level_min, params.level_max);

    // transition positions: r distinct interior boundaries with min dwell
    std::vector<std::size_t> cuts;
    if (r > 0) {
        std::uniform_int_distribution<std::size_t> pos(1, bins - 1);
        for (int attempt = 0; attempt < 100000; ++attempt) {
            cuts.clear();
            for (std::size_t i = 0; i < r; ++i) cuts.push_back(pos(rng));
            std::sort(cuts.begin(), cuts.end());
            bool ok = cuts[0] >= params.min_dwell_bins &&
                      bins - cuts.back() >= params.min_dwell_bins;
            for (std::size_t i = 0; ok && i + 1 < cuts.size(); ++i)
                ok = cuts[i + 1] - cuts[i] >= params.min_dwell_bins;
            if (ok) break;
            cuts.clear();
        }
        if (cuts.empty())
            throw std::invalid_argument(
                "generate_random_piecewise: could not place transitions with the given dwell");
    }

    std::vector<double> levels(r + 1);
    levels[0] = level(rng);
    for (std::size_t i = 1; i <= r; ++i) {
        double next = level(rng);
        while (std::abs(next - levels[i - 1]) < params.min_level_gap) next = level(rng);
        levels[i] = next;
    }

    PiecewiseSignal out{0.0, duration, std::vector<double>(bins, 0.0)};
    out.validate();
    std::size_t seg = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        if (seg < cuts.size() && b == cuts[seg]) ++seg;
        out.coeffs[b] = levels[seg];
    }
    return out;
}

/// Ground-truth instantaneous frames: frame f holds the scene's steady-state
/// temperature field at t = f * sample_period. Rasterization is binary (a
/// pixel belongs to an object iff its center is inside), so per-pixel signals
/// are exactly piecewise constant. Objects may leave the frame.
inline ThermalVideo render_scene(const SceneSpec& spec) {
    spec.validate();
    ThermalVideo video;
    video.width = spec.width;
    video.height = spec.height;
    video.sample_period = spec.sample_period;
    const auto frame_count =
        static_cast<std::size_t>(std::floor(spec.duration / spec.sample_period + 1e-9));
    video.frames.reserve(frame_count);

    for (std::size_t f = 0; f < frame_count; ++f) {
        const double t = static_cast<double>(f) * spec.sample_period;
        std::vector<float> frame(video.pixel_count(),
                                 static_cast<float>(spec.background_temp));
        for (const auto& o : spec.objects) {
            const double left = o.x0 + o.vx * t;
            const double top = o.y0 + o.vy * t;
            const auto col_begin = static_cast<long>(std::ceil(left - 0.5));
            const auto col_end = static_cast<long>(std::ceil(left + o.width - 0.5));
            const auto row_begin = static_cast<long>(std::ceil(top - 0.5));
            const auto row_end = static_cast<long>(std::ceil(top + o.height - 0.5));
            for (long row = std::max(0L, row_begin);
                 row < std::min<long>(spec.height, row_end); ++row)
                for (long col = std::max(0L, col_begin);
                     col < std::min<long>(spec.width, col_end); ++col)
                    frame[static_cast<std::size_t>(row) * spec.width +
                          static_cast<std::size_t>(col)] = static_cast<float>(o.temp);
        }
        video.frames.push_back(std::move(frame));
    }
    return video;
}

/// Initial-state rule for the exponential blur. Truth frames hold
/// steady-state temperatures, so both rules start from the first frame value.
enum class BlurInitRule { first_frame, steady_state };

/// Exponential (thermal-inertia) blur: per pixel, frame f is the exact ODE
/// response at t = f*T to the input that holds truth[f] over ((f-1)T, fT].
/// A static scene passes through unchanged.
inline ThermalVideo blur_video_mifm(const ThermalVideo& truth, double tau,
                                    BlurInitRule init = BlurInitRule::steady_state) {
    truth.validate();
    if (truth.frame_count() == 0)
        throw std::invalid_argument("blur_video_mifm: need at least one frame");
    if (!(tau > 0.0)) throw std::invalid_argument("blur_video_mifm: tau must be > 0");
    (void)init;  // both rules coincide for steady-state-valued truth frames

    const double d = std::exp(-truth.sample_period / tau);
    ThermalVideo out = truth;
    std::vector<double> state(truth.pixel_count());
    for (std::size_t p = 0; p < state.size(); ++p)
        state[p] = static_cast<double>(truth.frames[0][p]);
    for (std::size_t f = 1; f < truth.frame_count(); ++f) {
        for (std::size_t p = 0; p < state.size(); ++p) {
            const double x = static_cast<double>(truth.frames[f][p]);
            state[p] = x + (state[p] - x) * d;
            out.frames[f][p] = static_cast<float>(state[p]);
        }
    }
    return out;
}

/// Finite-exposure blur: frame f is the uniform mean of the last
/// exposure_frames truth frames (clamped at the clip start). Contrast model
/// for the symmetric blur of photoelectric sensors.
inline ThermalVideo blur_video_pifm(const ThermalVideo& truth, std::size_t exposure_frames) {
    truth.validate();
    if (exposure_frames < 1)
        throw std::invalid_argument("blur_video_pifm: exposure_frames must be >= 1");
    ThermalVideo out = truth;
    for (std::size_t f = 0; f < truth.frame_count(); ++f) {
        const std::size_t begin = f + 1 >= exposure_frames ? f + 1 - exposure_frames : 0;
        const auto count = static_cast<double>(f - begin + 1);
        for (std::size_t p = 0; p < truth.pixel_count(); ++p) {
            double sum = 0.0;
            for (std::size_t g = begin; g <= f; ++g)
                sum += static_cast<double>(truth.frames[g][p]);
            out.frames[f][p] = static_cast<float>(sum / count);
        }
    }
    return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Standard normal keyed by (seed, counter); the same element always gets the
/// same draw no matter how the work is scheduled.
inline double keyed_gaussian(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t h1 = splitmix64(seed ^ splitmix64(2 * counter));
    const std::uint64_t h2 = splitmix64(seed ^ splitmix64(2 * counter + 1));
    const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// i.i.d. Gaussian perturbation of every sample, deterministic per seed.
inline ThermalVideo add_noise(const ThermalVideo& video, const NoiseSpec& noise) {
    video.validate();
    noise.validate();
    if (noise.sigma == 0.0) return video;
    ThermalVideo out = video;
    std::uint64_t counter = 0;
    for (auto& frame : out.frames)
        for (auto& v : frame)
            v = static_cast<float>(static_cast<double>(v) +
                                   noise.sigma * detail::keyed_gaussian(noise.seed, counter++));
    return out;
}

struct RecoveryMetrics {
    double rmse = 0.0;                  ///< K
    double max_abs_err = 0.0;           ///< K
    std::optional<double> psnr_db;      ///< absent when the truth has zero range
    int transition_count_delta = 0;     ///< rho(estimate) - rho(truth)
};

/// Signal-level metrics; peak for PSNR is the truth's dynamic range.
inline RecoveryMetrics recovery_metrics(std::span<const double> estimate,
                                        std::span<const double> truth,
                                        double transition_tol = 0.0) {
    if (estimate.size() != truth.size() || truth.empty())
        throw std::invalid_argument("recovery_metrics: shapes must match and be nonempty");
    RecoveryMetrics m;
    double sq = 0.0;
    double lo = truth[0], hi = truth[0];
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = estimate[i] - truth[i];
        sq += e * e;
        m.max_abs_err = std::max(m.max_abs_err, std::abs(e));
        lo = std::min(lo, truth[i]);
        hi = std::max(hi, truth[i]);
    }
    m.rmse = std::sqrt(sq / static_cast<double>(truth.size()));
    if (hi > lo && m.rmse > 0.0)
        m.psnr_db = 20.0 * std::log10((hi - lo) / m.rmse);
    else if (hi > lo)
        m.psnr_db = std::numeric_limits<double>::infinity();
    m.transition_count_delta =
        transition_count(estimate, transition_tol) - transition_count(truth, transition_tol);
    return m;
}

/// Video-level metrics over all samples; the transition delta is the mean
/// per-pixel difference of temporal transition counts.
inline RecoveryMetrics recovery_metrics(const ThermalVideo& estimate, const ThermalVideo& truth,
                                        double transition_tol = 0.0) {
    if (estimate.width != truth.width || estimate.height != truth.height ||
        estimate.frame_count() != truth.frame_count() || truth.frame_count() == 0)
        throw std::invalid_argument("recovery_metrics: video shapes must match");
    RecoveryMetrics m;
    double sq = 0.0;
    double lo = truth.frames[0][0], hi = lo;
    std::size_t count = 0;
    for (std::size_t f = 0; f < truth.frame_count(); ++f) {
        for (std::size_t p = 0; p < truth.pixel_count(); ++p) {
            const double e = static_cast<double>(estimate.frames[f][p]) -
                             static_cast<double>(truth.frames[f][p]);
            sq += e * e;
            m.max_abs_err = std::max(m.max_abs_err, std::abs(e));
            lo = std::min(lo, static_cast<double>(truth.frames[f][p]));
            hi = std::max(hi, static_cast<double>(truth.frames[f][p]));
            ++count;
        }
    }
    m.rmse = std::sqrt(sq / static_cast<double>(count));
    if (hi > lo && m.rmse > 0.0)
        m.psnr_db = 20.0 * std::log10((hi - lo) / m.rmse);
    else if (hi > lo)
        m.psnr_db = std::numeric_limits<double>::infinity();

    long delta_sum = 0;
    std::vector<double> est_trace(truth.frame_count()), truth_trace(truth.frame_count());
    for (std::size_t p = 0; p < truth.pixel_count(); ++p) {
        for (std::size_t f = 0; f < truth.frame_count(); ++f) {
            est_trace[f] = static_cast<double>(estimate.frames[f][p]);
            truth_trace[f] = static_cast<double>(truth.frames[f][p]);
        }
        delta_sum += transition_count(est_trace, transition_tol) -
                     transition_count(truth_trace, transition_tol);
    }
    m.transition_count_delta = static_cast<int>(
        std::lround(static_cast<double>(delta_sum) / static_cast<double>(truth.pixel_count())));
    return m;
}

}  // namespace tirv
