#pragma once

// The per-pixel deblurring pipeline, lifted to whole videos: build the
// window system once per time grid, solve a Haar-domain LASSO per pixel, and
// reassemble frames. Per-pixel solves are independent tasks over read-only
// shared operators, so the output is bit-identical for any worker count.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tirv/haar.hpp"
#include "tirv/inverse_system.hpp"
#include "tirv/lasso.hpp"
#include "tirv/microbolometer.hpp"
#include "tirv/piecewise.hpp"
#include "tirv/video.hpp"

namespace tirv {

/// How a single deblurred frame value is read off the recovered signal.
enum class OutputRule {
    last_bin,          ///< final coefficient: the estimate at the window end
    last_sample_mean,  ///< mean of the coefficients in the final sample period
};

/// Default sparsity weight, calibrated on 0.5 K Gaussian measurement noise
/// (the noisy regime). Noiseless data recovers exactly with kLambdaNoiseless
/// and debiasing on.
inline constexpr double kLambdaNoisy = 0.1;
inline constexpr double kLambdaNoiseless = 1e-3;

struct DeblurConfig {
    int n_window = 16;            ///< N; the window holds N+1 samples
    unsigned resolution_exp = 7;  ///< n; the recovered signal has K = 2^n bins
    double lambda = kLambdaNoisy; ///< sparsity weight (Kelvin)
    double tau = 0.011;           ///< thermal time constant (s)
    double sample_period = 0.005; ///< T (s)
    double transition_tol = 0.1;  ///< Kelvin; diagnostics only
    OutputRule output_rule = OutputRule::last_bin;
    bool debias = true;           ///< refit least squares on the selected support
    double solver_tol = 1e-8;
    int solver_max_iters = 10000;

    [[nodiscard]] std::size_t resolution() const { return std::size_t{1} << resolution_exp; }
    [[nodiscard]] double dt_total() const { return n_window * sample_period; }

    [[nodiscard]] SolverConfig solver_config() const {
        return SolverConfig{lambda, solver_max_iters, solver_tol};
    }

    void validate() const {
        if (n_window < 1) throw std::invalid_argument("DeblurConfig: n_window must be >= 1");
        if (resolution_exp > 20)
            throw std::invalid_argument("DeblurConfig: resolution_exp out of range");
        if (!(tau > 0.0)) throw std::invalid_argument("DeblurConfig: tau must be > 0");
        if (!(sample_period > 0.0))
            throw std::invalid_argument("DeblurConfig: sample_period must be > 0");
        if (!(lambda >= 0.0)) throw std::invalid_argument("DeblurConfig: lambda must be >= 0");
        if (!(transition_tol >= 0.0))
            throw std::invalid_argument("DeblurConfig: transition_tol must be >= 0");
        solver_config().validate();
    }

    /// Soft checks; the bin grid should resolve the sample grid comfortably.
    [[nodiscard]] std::vector<std::string> warnings() const {
        std::vector<std::string> out;
        const double bin = dt_total() / static_cast<double>(resolution());
        if (bin > sample_period / 2.0)
            out.push_back("bin width " + std::to_string(bin) +
                          " s exceeds half the sample period; increase resolution_exp");
        return out;
    }
};

/// Everything that depends only on the time grid and tau, built once and
/// shared read-only by every pixel solve.
struct SharedOperators {
    std::vector<double> times;  ///< window sample offsets 0, T, ..., N*T
    Eigen::MatrixXd v;          ///< N x K weight matrix
    Eigen::VectorXd decay;      ///< exp(-(t_{j+1}-t_0)/tau), length N
    HaarBasis haar;
    LassoOperator lasso;        ///< over M = V * transpose(H)
    double dt_total = 0.0;
};

inline SharedOperators precompute_shared(const DeblurConfig& cfg) {
    cfg.validate();
    std::vector<double> times(static_cast<std::size_t>(cfg.n_window) + 1);
    for (std::size_t j = 0; j < times.size(); ++j)
        times[j] = static_cast<double>(j) * cfg.sample_period;

    Eigen::MatrixXd v = thermal_weight_matrix(times, cfg.tau, cfg.resolution());
    HaarBasis haar = haar_matrix(cfg.resolution());
    Eigen::MatrixXd m = v * haar.matrix.transpose();
    Eigen::VectorXd decay = window_decay(times, cfg.tau);
    return SharedOperators{std::move(times), std::move(v), std::move(decay), std::move(haar),
                           LassoOperator(std::move(m)), cfg.dt_total()};
}

struct PixelDeblurResult {
    PiecewiseSignal signal;  ///< recovered input over the window
    double value = 0.0;      ///< deblurred frame value per the output rule
    SolveReport report;
};

namespace detail {

/// Least-squares refit restricted to the nonzero coordinates of d. Keeps the
/// support the l1 step selected, removes its shrinkage bias.
inline void debias_in_place(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                            Eigen::VectorXd& d) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < d.size(); ++j)
        if (d[j] != 0.0) support.push_back(j);
    if (support.empty()) return;

    Eigen::MatrixXd ms(m.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) ms.col(static_cast<Eigen::Index>(i)) = m.col(support[i]);
    Eigen::VectorXd ds = ms.completeOrthogonalDecomposition().solve(b);
    d.setZero();
    for (std::size_t i = 0; i < support.size(); ++i)
        d[support[i]] = ds[static_cast<Eigen::Index>(i)];
}

/// Core solve over window sample values (absolute time handled by callers).
inline PixelDeblurResult deblur_window_values(std::span<const double> values,
                                              const DeblurConfig& cfg,
                                              const SharedOperators& shared,
                                              const Eigen::VectorXd* warm_start) {
    const Eigen::Index n = shared.decay.size();
    Eigen::VectorXd b(n);
    for (Eigen::Index j = 0; j < n; ++j)
        b[j] = values[static_cast<std::size_t>(j) + 1] - values[0] * shared.decay[j];

    PixelDeblurResult out;
    out.report = shared.lasso.solve(b, cfg.solver_config(), warm_start);
    Eigen::VectorXd d = out.report.x;
    if (cfg.debias && out.report.converged) debias_in_place(shared.lasso.matrix(), b, d);

    Eigen::VectorXd a = shared.haar.inverse(d);
    out.signal.t0 = 0.0;
    out.signal.dt_total = shared.dt_total;
    out.signal.coeffs.assign(a.data(), a.data() + a.size());

    const std::size_t k = out.signal.coeffs.size();
    if (cfg.output_rule == OutputRule::last_bin) {
        out.value = out.signal.coeffs[k - 1];
    } else {
        const auto per_sample = static_cast<std::size_t>(std::max(
            1.0, std::floor(static_cast<double>(k) * cfg.sample_period / shared.dt_total + 1e-9)));
        double sum = 0.0;
        for (std::size_t i = k - per_sample; i < k; ++i) sum += out.signal.coeffs[i];
        out.value = sum / static_cast<double>(per_sample);
    }
    return out;
}

}  // namespace detail

/// Deblur one measurement window. The window's relative time grid and tau
/// must match the shared operators.
inline PixelDeblurResult deblur_pixel(const MeasurementWindow& window, const DeblurConfig& cfg,
                                      const SharedOperators& shared,
                                      const Eigen::VectorXd* warm_start = nullptr) {
    window.validate();
    if (window.times.size() != shared.times.size())
        throw std::invalid_argument("deblur_pixel: window length does not match config");
    const double t0 = window.times.front();
    for (std::size_t j = 0; j < window.times.size(); ++j)
        if (std::abs((window.times[j] - t0) - shared.times[j]) > 1e-9 * (1.0 + shared.dt_total))
            throw std::invalid_argument("deblur_pixel: window grid does not match shared operators");
    if (std::abs(window.tau - cfg.tau) > 1e-12 * cfg.tau)
        throw std::invalid_argument("deblur_pixel: window tau does not match config");

    PixelDeblurResult out = detail::deblur_window_values(window.values, cfg, shared, warm_start);
    out.signal.t0 = t0;
    return out;
}

/// Per-run report emitted next to the deblurred video; never mixed into it.
struct DeblurStats {
    std::size_t total_solves = 0;
    std::size_t nonconverged = 0;           ///< pixels that fell back to the raw sample
    std::vector<std::uint32_t> nonconverged_per_frame;
    double mean_iterations = 0.0;
    double mean_transitions = 0.0;          ///< at DeblurConfig::transition_tol
    double mean_solve_seconds = 0.0;
    double wall_seconds = 0.0;
};

struct DeblurOutput {
    ThermalVideo video;
    DeblurStats stats;
};

/// Deblur a whole video with the past-N-frames window. Output frame i holds
/// the recovery for input frame i + N; the first N input frames seed windows
/// only. Bit-identical output for any worker count.
inline DeblurOutput deblur_video(const ThermalVideo& input, const DeblurConfig& cfg,
                                 unsigned workers = std::thread::hardware_concurrency()) {
    cfg.validate();
    input.validate();
    const auto n = static_cast<std::size_t>(cfg.n_window);
    if (input.frame_count() < n + 1)
        throw std::invalid_argument("deblur_video: need at least N+1 frames");
    if (std::abs(input.sample_period - cfg.sample_period) >
        1e-9 * (input.sample_period + cfg.sample_period))
        throw std::invalid_argument("deblur_video: video sample period does not match config");
    if (workers == 0) workers = 1;

    const auto wall_start = std::chrono::steady_clock::now();
    const SharedOperators shared = precompute_shared(cfg);
    const std::size_t out_frames = input.frame_count() - n;
    const std::size_t pixels = input.pixel_count();

    DeblurOutput out;
    out.video.width = input.width;
    out.video.height = input.height;
    out.video.sample_period = input.sample_period;
    out.video.frames.assign(out_frames, std::vector<float>(pixels, 0.0f));

    struct WorkerStats {
        std::size_t solves = 0;
        std::size_t nonconverged = 0;
        std::vector<std::uint32_t> nonconverged_per_frame;
        std::uint64_t iterations = 0;
        std::uint64_t transitions = 0;
        double solve_seconds = 0.0;
    };
    std::vector<WorkerStats> per_worker(workers);
    for (auto& w : per_worker) w.nonconverged_per_frame.assign(out_frames, 0);

    auto run_range = [&](std::size_t begin, std::size_t end, WorkerStats& stats) {
        std::vector<double> values(n + 1);
        Eigen::VectorXd warm;
        for (std::size_t p = begin; p < end; ++p) {
            bool have_warm = false;
            for (std::size_t f = n; f < input.frame_count(); ++f) {
                for (std::size_t j = 0; j <= n; ++j)
                    values[j] = static_cast<double>(input.frames[f - n + j][p]);

                const auto t_begin = std::chrono::steady_clock::now();
                PixelDeblurResult r = detail::deblur_window_values(
                    values, cfg, shared, have_warm ? &warm : nullptr);
                stats.solve_seconds +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
                        .count();

                ++stats.solves;
                stats.iterations += static_cast<std::uint64_t>(r.report.iterations);
                double value = r.value;
                if (!r.report.converged) {
                    value = values[n];  // raw sample fallback; never silent
                    ++stats.nonconverged;
                    ++stats.nonconverged_per_frame[f - n];
                } else {
                    warm = r.report.x;
                    have_warm = true;
                }
                stats.transitions += static_cast<std::uint64_t>(
                    transition_count(r.signal.coeffs, cfg.transition_tol));
                out.video.frames[f - n][p] = static_cast<float>(value);
            }
        }
    };

    if (workers == 1) {
        run_range(0, pixels, per_worker[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (pixels + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(pixels, w * chunk);
            const std::size_t end = std::min(pixels, begin + chunk);
            pool.emplace_back(run_range, begin, end, std::ref(per_worker[w]));
        }
        for (auto& t : pool) t.join();
    }

    DeblurStats& s = out.stats;
    s.nonconverged_per_frame.assign(out_frames, 0);
    std::uint64_t iters = 0, transitions = 0;
    double solve_seconds = 0.0;
    for (const auto& w : per_worker) {
        s.total_solves += w.solves;
        s.nonconverged += w.nonconverged;
        iters += w.iterations;
        transitions += w.transitions;
        solve_seconds += w.solve_seconds;
        for (std::size_t f = 0; f < out_frames; ++f)
            s.nonconverged_per_frame[f] += w.nonconverged_per_frame[f];
    }
    if (s.total_solves > 0) {
        s.mean_iterations = static_cast<double>(iters) / static_cast<double>(s.total_solves);
        s.mean_transitions =
            static_cast<double>(transitions) / static_cast<double>(s.total_solves);
        s.mean_solve_seconds = solve_seconds / static_cast<double>(s.total_solves);
    }
    s.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return out;
}

}  // namespace tirv
