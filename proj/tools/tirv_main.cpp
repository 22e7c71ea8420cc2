// tirv: simulate, deblur, and inspect thermal video affected by
// pixel-level thermal inertia.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tirv/deblur.hpp"
#include "tirv/export.hpp"
#include "tirv/inverse_system.hpp"
#include "tirv/microbolometer.hpp"
#include "tirv/synth.hpp"
#include "tirv/tirv_io.hpp"
#include "tirv/video.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    in >> j;
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

tirv::SceneSpec scene_from_json(const json& j) {
    tirv::SceneSpec spec;
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.background_temp = j.value("background_temp", spec.background_temp);
    spec.duration = j.value("duration", spec.duration);
    spec.sample_period = j.value("sample_period", spec.sample_period);
    if (j.contains("objects")) {
        spec.objects.clear();
        for (const auto& o : j.at("objects")) {
            tirv::RectObject r;
            r.temp = o.value("temp", r.temp);
            r.x0 = o.value("x0", r.x0);
            r.y0 = o.value("y0", r.y0);
            r.width = o.value("width", r.width);
            r.height = o.value("height", r.height);
            r.vx = o.value("vx", r.vx);
            r.vy = o.value("vy", r.vy);
            spec.objects.push_back(r);
        }
    }
    return spec;
}

void apply_deblur_json(tirv::DeblurConfig& cfg, const json& j) {
    cfg.n_window = j.value("n_window", cfg.n_window);
    cfg.resolution_exp = j.value("resolution_exp", cfg.resolution_exp);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.sample_period = j.value("sample_period", cfg.sample_period);
    cfg.transition_tol = j.value("transition_tol", cfg.transition_tol);
    cfg.debias = j.value("debias", cfg.debias);
    cfg.solver_tol = j.value("solver_tol", cfg.solver_tol);
    cfg.solver_max_iters = j.value("solver_max_iters", cfg.solver_max_iters);
    if (j.contains("output_rule")) {
        const std::string rule = j.at("output_rule");
        if (rule == "last-bin")
            cfg.output_rule = tirv::OutputRule::last_bin;
        else if (rule == "last-sample-mean")
            cfg.output_rule = tirv::OutputRule::last_sample_mean;
        else
            throw std::runtime_error("unknown output_rule: " + rule);
    }
}

unsigned worker_count(unsigned flag_value) {
    if (const char* env = std::getenv("TIRV_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    if (flag_value >= 1) return flag_value;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

tirv::MeasurementWindow window_at(const tirv::ThermalVideo& video, double tau,
                                  std::uint32_t x, std::uint32_t y, std::size_t frame,
                                  std::size_t n) {
    tirv::MeasurementWindow w;
    w.tau = tau;
    for (std::size_t j = 0; j <= n; ++j) {
        const std::size_t f = frame - n + j;
        w.times.push_back(static_cast<double>(f) * video.sample_period);
        w.values.push_back(static_cast<double>(video.at(f, x, y)));
    }
    return w;
}

int run_simulate(const tirv::SceneSpec& spec, double tau, double noise_sigma,
                 std::uint64_t noise_seed, const std::string& truth_out,
                 const std::string& blurred_out, const std::string& pifm_out,
                 std::size_t exposure_frames) {
    spec.validate();

    tirv::ThermalVideo truth = tirv::render_scene(spec);
    if (!truth_out.empty()) tirv::write_tirv(truth, tau, truth_out);
    if (!blurred_out.empty()) {
        tirv::ThermalVideo blurred = tirv::blur_video_mifm(truth, tau);
        if (noise_sigma > 0.0)
            blurred = tirv::add_noise(blurred, tirv::NoiseSpec{noise_sigma, noise_seed});
        tirv::write_tirv(blurred, tau, blurred_out);
    }
    if (!pifm_out.empty()) {
        tirv::ThermalVideo averaged = tirv::blur_video_pifm(truth, exposure_frames);
        if (noise_sigma > 0.0)
            averaged = tirv::add_noise(averaged, tirv::NoiseSpec{noise_sigma, noise_seed + 1});
        tirv::write_tirv(averaged, tau, pifm_out);
    }
    std::cout << "simulated " << truth.frame_count() << " frames at " << spec.width << "x"
              << spec.height << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermal video motion deblurring via per-pixel thermal-inertia inversion"};
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "render a scene and its blurred capture");
    std::string scene_path, truth_out, blurred_out, pifm_out;
    tirv::SceneSpec cli_spec;
    double sim_tau = 0.011, noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    std::size_t exposure_frames = 4;
    double rect_temp = 310.0, rect_x = 4.0, rect_y = 12.0, rect_w = 8.0, rect_h = 8.0,
           rect_vx = 200.0, rect_vy = 0.0;
    bool with_rect = false;
    simulate->add_option("--scene", scene_path, "SceneSpec JSON file");
    simulate->add_option("--width", cli_spec.width, "frame width (px)");
    simulate->add_option("--height", cli_spec.height, "frame height (px)");
    simulate->add_option("--background-temp", cli_spec.background_temp, "background (K)");
    simulate->add_option("--duration", cli_spec.duration, "clip length (s)");
    simulate->add_option("--sample-period", cli_spec.sample_period, "frame period (s)");
    simulate->add_flag("--rect", with_rect, "add one moving rectangle");
    simulate->add_option("--rect-temp", rect_temp, "rectangle temperature (K)");
    simulate->add_option("--rect-x", rect_x, "initial left edge (px)");
    simulate->add_option("--rect-y", rect_y, "initial top edge (px)");
    simulate->add_option("--rect-width", rect_w, "rectangle width (px)");
    simulate->add_option("--rect-height", rect_h, "rectangle height (px)");
    simulate->add_option("--rect-vx", rect_vx, "horizontal velocity (px/s)");
    simulate->add_option("--rect-vy", rect_vy, "vertical velocity (px/s)");
    simulate->add_option("--tau", sim_tau, "thermal time constant (s)");
    simulate->add_option("--noise-sigma", noise_sigma, "Gaussian noise std (K)");
    simulate->add_option("--noise-seed", noise_seed, "noise seed");
    simulate->add_option("--truth-out", truth_out, "ground-truth TIRV path");
    simulate->add_option("--blurred-out", blurred_out, "thermal-inertia blurred TIRV path");
    simulate->add_option("--pifm-out", pifm_out, "exposure-averaged TIRV path");
    simulate->add_option("--exposure-frames", exposure_frames, "frames per exposure average");

    // ---- deblur ------------------------------------------------------
    auto* deblur = app.add_subcommand("deblur", "invert thermal inertia per pixel");
    std::string deblur_in, deblur_out, deblur_cfg_path, diagnostics_path;
    tirv::DeblurConfig flag_cfg;
    unsigned workers_flag = 0;
    bool no_debias = false;
    std::string output_rule;
    double lambda_flag = -1.0, tau_flag = -1.0, transition_tol_flag = -1.0,
           solver_tol_flag = -1.0;
    int n_window_flag = -1, resolution_exp_flag = -1, max_iters_flag = -1;
    deblur->add_option("--input", deblur_in, "blurred TIRV")->required();
    deblur->add_option("--output", deblur_out, "deblurred TIRV")->required();
    deblur->add_option("--config", deblur_cfg_path, "DeblurConfig JSON file");
    deblur->add_option("--lambda", lambda_flag, "sparsity weight (K)");
    deblur->add_option("--n-window", n_window_flag, "window constraint count N");
    deblur->add_option("--resolution-exp", resolution_exp_flag, "n with K = 2^n bins");
    deblur->add_option("--tau", tau_flag, "override the container's tau (s)");
    deblur->add_option("--transition-tol", transition_tol_flag, "diagnostics threshold (K)");
    deblur->add_option("--output-rule", output_rule, "last-bin | last-sample-mean");
    deblur->add_flag("--no-debias", no_debias, "skip the support refit");
    deblur->add_option("--solver-tol", solver_tol_flag, "KKT tolerance");
    deblur->add_option("--max-iters", max_iters_flag, "solver sweep cap");
    deblur->add_option("--workers", workers_flag, "worker threads (also env TIRV_WORKERS)");
    deblur->add_option("--diagnostics", diagnostics_path, "write run diagnostics JSON");

    // ---- eval --------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "compare an estimate against ground truth");
    std::string eval_estimate, eval_truth, metrics_path;
    double eval_transition_tol = 0.1;
    eval->add_option("--estimate", eval_estimate, "estimate TIRV")->required();
    eval->add_option("--truth", eval_truth, "ground-truth TIRV")->required();
    eval->add_option("--transition-tol", eval_transition_tol, "transition threshold (K)");
    eval->add_option("--metrics", metrics_path, "write metrics JSON");

    // ---- trace -------------------------------------------------------
    auto* trace = app.add_subcommand("trace", "single-pixel deblur with a CSV dump");
    std::string trace_in, trace_truth, trace_out, trace_cfg_path;
    std::uint32_t trace_x = 0, trace_y = 0;
    long trace_frame = -1;
    double trace_lambda = -1.0, trace_tau = -1.0;
    int trace_n_window = -1, trace_resolution_exp = -1;
    bool trace_no_debias = false;
    trace->add_option("--input", trace_in, "blurred TIRV")->required();
    trace->add_option("--truth", trace_truth, "optional ground-truth TIRV");
    trace->add_option("--x", trace_x, "pixel column")->required();
    trace->add_option("--y", trace_y, "pixel row")->required();
    trace->add_option("--frame", trace_frame, "window end frame (default: last)");
    trace->add_option("--config", trace_cfg_path, "DeblurConfig JSON file");
    trace->add_option("--lambda", trace_lambda, "sparsity weight (K)");
    trace->add_option("--n-window", trace_n_window, "window constraint count N");
    trace->add_option("--resolution-exp", trace_resolution_exp, "n with K = 2^n bins");
    trace->add_option("--tau", trace_tau, "override the container's tau (s)");
    trace->add_flag("--no-debias", trace_no_debias, "skip the support refit");
    trace->add_option("--out", trace_out, "CSV path")->required();

    // ---- export ------------------------------------------------------
    auto* exp = app.add_subcommand("export", "write one frame as 16-bit PGM");
    std::string export_in, export_out;
    std::size_t export_frame = 0;
    double export_min = 0.0, export_max = 0.0;
    exp->add_option("--input", export_in, "TIRV path")->required();
    exp->add_option("--frame", export_frame, "frame index");
    exp->add_option("--min", export_min, "window minimum (K)")->required();
    exp->add_option("--max", export_max, "window maximum (K)")->required();
    exp->add_option("--out", export_out, "PGM path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            tirv::SceneSpec spec = cli_spec;
            if (!scene_path.empty()) {
                spec = scene_from_json(load_json(scene_path));
                // flags override file values
                if (simulate->count("--width")) spec.width = cli_spec.width;
                if (simulate->count("--height")) spec.height = cli_spec.height;
                if (simulate->count("--background-temp"))
                    spec.background_temp = cli_spec.background_temp;
                if (simulate->count("--duration")) spec.duration = cli_spec.duration;
                if (simulate->count("--sample-period"))
                    spec.sample_period = cli_spec.sample_period;
            }
            if (with_rect)
                spec.objects.push_back(tirv::RectObject{rect_temp, rect_x, rect_y, rect_w,
                                                        rect_h, rect_vx, rect_vy});
            if (truth_out.empty() && blurred_out.empty() && pifm_out.empty())
                throw std::runtime_error(
                    "simulate: need --truth-out, --blurred-out, or --pifm-out");
            return run_simulate(spec, sim_tau, noise_sigma, noise_seed, truth_out, blurred_out,
                                pifm_out, exposure_frames);
        }

        if (deblur->parsed()) {
            tirv::TirvFile file = tirv::read_tirv(deblur_in);
            tirv::DeblurConfig cfg;
            cfg.tau = file.tau_s;
            cfg.sample_period = file.video.sample_period;
            if (!deblur_cfg_path.empty()) apply_deblur_json(cfg, load_json(deblur_cfg_path));
            if (lambda_flag >= 0.0) cfg.lambda = lambda_flag;
            if (n_window_flag > 0) cfg.n_window = n_window_flag;
            if (resolution_exp_flag >= 0)
                cfg.resolution_exp = static_cast<unsigned>(resolution_exp_flag);
            if (tau_flag > 0.0) cfg.tau = tau_flag;
            if (transition_tol_flag >= 0.0) cfg.transition_tol = transition_tol_flag;
            if (solver_tol_flag > 0.0) cfg.solver_tol = solver_tol_flag;
            if (max_iters_flag > 0) cfg.solver_max_iters = max_iters_flag;
            if (no_debias) cfg.debias = false;
            if (!output_rule.empty()) {
                json j;
                j["output_rule"] = output_rule;
                apply_deblur_json(cfg, j);
            }
            for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";

            auto out = tirv::deblur_video(file.video, cfg, worker_count(workers_flag));
            tirv::write_tirv(out.video, cfg.tau, deblur_out);

            json diag;
            diag["total_solves"] = out.stats.total_solves;
            diag["nonconverged_pixels"] = out.stats.nonconverged;
            diag["nonconverged_per_frame"] = out.stats.nonconverged_per_frame;
            diag["mean_iterations"] = out.stats.mean_iterations;
            diag["mean_transitions"] = out.stats.mean_transitions;
            diag["mean_solve_seconds"] = out.stats.mean_solve_seconds;
            diag["wall_seconds"] = out.stats.wall_seconds;
            diag["output_frames"] = out.video.frame_count();
            if (!diagnostics_path.empty()) write_json(diag, diagnostics_path);
            std::cout << diag.dump(2) << "\n";
            return 0;
        }

        if (eval->parsed()) {
            tirv::TirvFile est = tirv::read_tirv(eval_estimate);
            tirv::TirvFile truth = tirv::read_tirv(eval_truth);
            if (est.video.width != truth.video.width ||
                est.video.height != truth.video.height)
                throw std::runtime_error("eval: geometry mismatch");
            if (est.video.frame_count() > truth.video.frame_count())
                throw std::runtime_error("eval: estimate has more frames than truth");
            // tail-align: estimate frame i corresponds to truth frame i + offset
            const std::size_t offset = truth.video.frame_count() - est.video.frame_count();
            tirv::ThermalVideo aligned = truth.video;
            aligned.frames.assign(truth.video.frames.begin() +
                                      static_cast<std::ptrdiff_t>(offset),
                                  truth.video.frames.end());
            auto m = tirv::recovery_metrics(est.video, aligned, eval_transition_tol);
            json j;
            j["rmse_kelvin"] = m.rmse;
            j["max_abs_err_kelvin"] = m.max_abs_err;
            if (m.psnr_db && std::isfinite(*m.psnr_db))
                j["psnr_db"] = *m.psnr_db;
            else
                j["psnr_db"] = nullptr;
            j["transition_count_delta"] = m.transition_count_delta;
            j["frames_compared"] = est.video.frame_count();
            j["truth_frame_offset"] = offset;
            if (!metrics_path.empty()) write_json(j, metrics_path);
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (trace->parsed()) {
            tirv::TirvFile file = tirv::read_tirv(trace_in);
            tirv::DeblurConfig cfg;
            cfg.tau = file.tau_s;
            cfg.sample_period = file.video.sample_period;
            cfg.lambda = tirv::kLambdaNoiseless;
            if (!trace_cfg_path.empty()) apply_deblur_json(cfg, load_json(trace_cfg_path));
            if (trace_lambda >= 0.0) cfg.lambda = trace_lambda;
            if (trace_n_window > 0) cfg.n_window = trace_n_window;
            if (trace_resolution_exp >= 0)
                cfg.resolution_exp = static_cast<unsigned>(trace_resolution_exp);
            if (trace_tau > 0.0) cfg.tau = trace_tau;
            if (trace_no_debias) cfg.debias = false;

            const auto n = static_cast<std::size_t>(cfg.n_window);
            const std::size_t end_frame = trace_frame >= 0
                                              ? static_cast<std::size_t>(trace_frame)
                                              : file.video.frame_count() - 1;
            if (end_frame < n || end_frame >= file.video.frame_count())
                throw std::runtime_error("trace: frame must lie in [N, frame_count)");

            auto window = window_at(file.video, cfg.tau, trace_x, trace_y, end_frame, n);
            auto shared = tirv::precompute_shared(cfg);
            auto qp = tirv::deblur_pixel(window, cfg, shared);
            auto sys = tirv::build_system(window, cfg.resolution_exp);
            Eigen::VectorXd ols = tirv::solve_ols(sys.v, sys.y);
            tirv::PiecewiseSignal ols_signal{window.times.front(), window.dt_total(),
                                             {ols.data(), ols.data() + ols.size()}};

            std::optional<tirv::TirvFile> truth;
            if (!trace_truth.empty()) truth = tirv::read_tirv(trace_truth);

            // row times: the union of bin starts and sample instants
            const std::size_t k = cfg.resolution();
            std::vector<double> times;
            for (std::size_t b = 0; b < k; ++b)
                times.push_back(window.times.front() +
                                static_cast<double>(b) * window.dt_total() /
                                    static_cast<double>(k));
            for (double t : window.times) times.push_back(t);
            std::sort(times.begin(), times.end());
            times.erase(std::unique(times.begin(), times.end(),
                                    [&](double a, double b) {
                                        return std::abs(a - b) < 1e-12 * window.dt_total();
                                    }),
                        times.end());

            const double t_end = window.times.back();
            auto eval_step = [&](const tirv::PiecewiseSignal& s, double t) {
                const double clamped =
                    std::min(t, std::nextafter(s.t0 + s.dt_total, s.t0));
                return tirv::eval_piecewise(s, clamped);
            };
            std::vector<tirv::TraceColumn> cols(truth ? 4 : 3);
            cols[0].name = "y";
            cols[1].name = "ols";
            cols[2].name = "qp";
            if (truth) cols[3].name = "truth";
            for (double t : times) {
                std::optional<double> y;
                for (std::size_t j = 0; j < window.times.size(); ++j)
                    if (std::abs(window.times[j] - t) < 1e-12 * window.dt_total())
                        y = window.values[j];
                cols[0].values.push_back(y);
                cols[1].values.push_back(eval_step(ols_signal, std::min(t, t_end)));
                cols[2].values.push_back(eval_step(qp.signal, std::min(t, t_end)));
                if (truth) {
                    const auto f = static_cast<std::size_t>(
                        std::ceil(t / truth->video.sample_period - 1e-9));
                    cols[3].values.push_back(
                        static_cast<double>(truth->video.at(f, trace_x, trace_y)));
                }
            }
            tirv::export_trace_csv(times, cols, trace_out);
            std::cout << "traced pixel (" << trace_x << "," << trace_y << ") window ["
                      << (end_frame - n) << ", " << end_frame << "] -> " << trace_out << "\n";
            return 0;
        }

        if (exp->parsed()) {
            tirv::TirvFile file = tirv::read_tirv(export_in);
            tirv::export_frame_pgm(file.video, export_frame, export_min, export_max,
                                   export_out);
            std::cout << "wrote frame " << export_frame << " -> " << export_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << R"({"error":")" << e.what() << R"("})" << "\n";
        return 1;
    }
    return 0;
}
