#include <catch2/catch.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "tirv/microbolometer.hpp"
#include "tirv/synth.hpp"

using namespace tirv;

TEST_CASE("pulse train generation", "[synth]") {
    PulseTrainParams params{300.0, 295.0, 0.1};

    SECTION("two full pulses over two periods") {
        auto sig = generate_pulse_train(params, 0.2, 8);
        CHECK(sig.coeffs == std::vector<double>{300, 300, 295, 295, 300, 300, 295, 295});
    }

    SECTION("transition count matches the pulse structure") {
        auto sig = generate_pulse_train(params, 0.2, 64);
        CHECK(transition_count(sig.coeffs, 0.0) == 3);  // high->low->high->low
    }

    SECTION("invalid parameters") {
        CHECK_THROWS_AS(generate_pulse_train(PulseTrainParams{300, 295, 0.0}, 0.2, 8),
                        std::invalid_argument);
    }
}

TEST_CASE("random piecewise generation", "[synth]") {
    RandomPiecewiseParams params;
    params.transitions = 4;
    params.min_dwell_bins = 3;
    params.seed = 42;

    SECTION("exact transition count by construction") {
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            params.seed = seed;
            auto sig = generate_random_piecewise(params, 0.085, 64);
            CHECK(transition_count(sig.coeffs, 0.0) == 4);
        }
    }

    SECTION("dwell constraint holds") {
        params.min_dwell_bins = 8;
        auto sig = generate_random_piecewise(params, 0.085, 64);
        std::size_t run = 1;
        std::size_t shortest = sig.coeffs.size();
        for (std::size_t i = 1; i < sig.coeffs.size(); ++i) {
            if (sig.coeffs[i] == sig.coeffs[i - 1]) {
                ++run;
            } else {
                shortest = std::min(shortest, run);
                run = 1;
            }
        }
        shortest = std::min(shortest, run);
        CHECK(shortest >= 8);
    }

    SECTION("levels keep the requested gap") {
        params.min_level_gap = 3.0;
        auto sig = generate_random_piecewise(params, 0.085, 64);
        for (std::size_t i = 1; i < sig.coeffs.size(); ++i)
            if (sig.coeffs[i] != sig.coeffs[i - 1])
                CHECK(std::abs(sig.coeffs[i] - sig.coeffs[i - 1]) >= 3.0);
    }

    SECTION("same seed reproduces the signal") {
        auto a = generate_random_piecewise(params, 0.085, 64);
        auto b = generate_random_piecewise(params, 0.085, 64);
        CHECK(a.coeffs == b.coeffs);
    }

    SECTION("infeasible combinations are rejected") {
        params.transitions = 10;
        params.min_dwell_bins = 7;  // 11 segments * 7 > 64
        CHECK_THROWS_AS(generate_random_piecewise(params, 0.085, 64), std::invalid_argument);
    }
}

TEST_CASE("scene rendering", "[synth]") {
    SECTION("zero velocity object gives identical frames") {
        SceneSpec spec;
        spec.width = 16;
        spec.height = 8;
        spec.duration = 0.05;
        spec.sample_period = 0.005;
        spec.objects.push_back(RectObject{310.0, 4.0, 2.0, 5.0, 3.0, 0.0, 0.0});
        auto video = render_scene(spec);
        REQUIRE(video.frame_count() == 10);
        for (std::size_t f = 1; f < video.frame_count(); ++f)
            CHECK(video.frames[f] == video.frames[0]);
        CHECK(video.at(0, 4, 2) == 310.0f);
        CHECK(video.at(0, 3, 2) == 300.0f);
        CHECK(video.at(0, 8, 4) == 310.0f);
        CHECK(video.at(0, 9, 2) == 300.0f);
    }

    SECTION("a pixel on the path of a moving rectangle sees enter/exit") {
        SceneSpec spec;
        spec.width = 32;
        spec.height = 4;
        spec.duration = 0.1;
        spec.sample_period = 0.005;  // 20 frames
        // 1 px per frame: v = 1 px / 0.005 s = 200 px/s
        spec.objects.push_back(RectObject{312.0, 0.0, 0.0, 4.0, 4.0, 200.0, 0.0});
        auto video = render_scene(spec);
        std::vector<double> trace;
        for (std::size_t f = 0; f < video.frame_count(); ++f)
            trace.push_back(video.at(f, 10, 1));
        CHECK(transition_count(trace, 0.0) == 2);
        CHECK(trace.front() == 300.0);
        CHECK(trace[8] == 312.0);  // covered for f in 7..10: f <= 10.5 < f+4
        CHECK(trace.back() == 300.0);
    }

    SECTION("slow motion dwells many frames") {
        // 10 px/s at 200 fps: 0.05 px/frame, 20 frames per pixel of travel
        SceneSpec spec;
        spec.width = 16;
        spec.height = 2;
        spec.duration = 0.2;
        spec.sample_period = 0.005;
        spec.objects.push_back(RectObject{305.0, 2.0, 0.0, 2.0, 2.0, 10.0, 0.0});
        auto video = render_scene(spec);
        std::vector<double> trace;
        for (std::size_t f = 0; f < video.frame_count(); ++f)
            trace.push_back(video.at(f, 4, 0));
        // the leading edge starts at x=4 and crosses pixel 4's center (4.5)
        // after 0.5 px of travel = 10 frames; the pixel stays hot to the end
        CHECK(trace[0] == 300.0);
        CHECK(trace[11] == 305.0);
        CHECK(trace.back() == 305.0);
        CHECK(transition_count(trace, 0.0) == 1);
    }

    SECTION("objects clip at the frame boundary") {
        SceneSpec spec;
        spec.width = 8;
        spec.height = 4;
        spec.duration = 0.05;
        spec.sample_period = 0.005;
        spec.objects.push_back(RectObject{320.0, 6.0, 1.0, 10.0, 2.0, 0.0, 0.0});
        auto video = render_scene(spec);
        CHECK(video.at(0, 7, 1) == 320.0f);
        CHECK(video.at(0, 7, 3) == 300.0f);
    }
}

TEST_CASE("exponential blur model", "[synth]") {
    SECTION("static scene passes through unchanged") {
        SceneSpec spec;
        spec.width = 8;
        spec.height = 4;
        spec.duration = 0.06;
        spec.sample_period = 0.005;
        spec.objects.push_back(RectObject{307.0, 1.0, 1.0, 3.0, 2.0, 0.0, 0.0});
        auto truth = render_scene(spec);
        auto blurred = blur_video_mifm(truth, 0.011);
        for (std::size_t f = 0; f < truth.frame_count(); ++f)
            CHECK(truth.frames[f] == blurred.frames[f]);
    }

    SECTION("vanishing tau recovers the truth") {
        SceneSpec spec;
        spec.width = 16;
        spec.height = 4;
        spec.duration = 0.1;
        spec.sample_period = 0.005;
        spec.objects.push_back(RectObject{310.0, 0.0, 0.0, 4.0, 4.0, 200.0, 0.0});
        auto truth = render_scene(spec);
        auto blurred = blur_video_mifm(truth, spec.sample_period / 1000.0);
        auto m = recovery_metrics(blurred, truth);
        CHECK(m.max_abs_err <= 1e-3);
    }

    SECTION("blur tail is asymmetric while exposure averaging is symmetric") {
        // single step edge in time at one pixel
        ThermalVideo truth;
        truth.width = 1;
        truth.height = 1;
        truth.sample_period = 0.005;
        truth.frames.assign(21, {300.0f});
        for (std::size_t f = 10; f < 21; ++f) truth.frames[f][0] = 310.0f;

        auto mifm = blur_video_mifm(truth, 0.011);
        auto pifm = blur_video_pifm(truth, 4);

        // P-IFM reaches the new level after exactly its exposure span
        CHECK(pifm.frames[13][0] == 310.0f);
        // M-IFM still lags there: the exponential tail decays forever
        CHECK(mifm.frames[13][0] < 310.0f);
        CHECK(mifm.frames[16][0] < 310.0f);

        // P-IFM's ramp is linear (symmetric weights); M-IFM's increments shrink
        const double p_step1 = pifm.frames[11][0] - pifm.frames[10][0];
        const double p_step2 = pifm.frames[12][0] - pifm.frames[11][0];
        CHECK(p_step1 == Approx(p_step2).margin(1e-4));
        const double m_step1 = mifm.frames[11][0] - mifm.frames[10][0];
        const double m_step2 = mifm.frames[12][0] - mifm.frames[11][0];
        CHECK(m_step2 < m_step1);
    }

    SECTION("exposure of one frame is the identity") {
        ThermalVideo truth;
        truth.width = 2;
        truth.height = 1;
        truth.sample_period = 0.005;
        truth.frames = {{300.0f, 301.0f}, {302.0f, 303.0f}};
        auto out = blur_video_pifm(truth, 1);
        CHECK(out.frames == truth.frames);
    }
}

TEST_CASE("deterministic gaussian noise", "[synth]") {
    ThermalVideo video;
    video.width = 100;
    video.height = 100;
    video.sample_period = 0.005;
    video.frames.assign(100, std::vector<float>(10000, 300.0f));

    SECTION("sigma zero is the identity") {
        auto out = add_noise(video, NoiseSpec{0.0, 7});
        CHECK(out.frames == video.frames);
    }

    SECTION("fixed seed reproduces") {
        auto a = add_noise(video, NoiseSpec{0.5, 7});
        auto b = add_noise(video, NoiseSpec{0.5, 7});
        CHECK(a.frames == b.frames);
        auto c = add_noise(video, NoiseSpec{0.5, 8});
        CHECK(a.frames != c.frames);
    }

    SECTION("sample variance matches sigma^2 over a million draws") {
        const double sigma = 0.5;
        auto noisy = add_noise(video, NoiseSpec{sigma, 123});
        double sum = 0.0, sq = 0.0;
        std::size_t n = 0;
        for (std::size_t f = 0; f < video.frame_count(); ++f)
            for (std::size_t p = 0; p < video.pixel_count(); ++p) {
                const double d = static_cast<double>(noisy.frames[f][p]) - 300.0;
                sum += d;
                sq += d * d;
                ++n;
            }
        const double mean = sum / static_cast<double>(n);
        const double var = sq / static_cast<double>(n) - mean * mean;
        CHECK(var == Approx(sigma * sigma).epsilon(0.02));
    }
}

TEST_CASE("recovery metrics", "[synth]") {
    SECTION("perfect estimate") {
        std::vector<double> truth{300.0, 301.0, 302.0};
        auto m = recovery_metrics(truth, truth);
        CHECK(m.rmse == 0.0);
        CHECK(m.max_abs_err == 0.0);
        REQUIRE(m.psnr_db.has_value());
        CHECK(std::isinf(*m.psnr_db));
        CHECK(m.transition_count_delta == 0);
    }

    SECTION("constant offset") {
        std::vector<double> truth{300.0, 301.0, 302.0};
        std::vector<double> est{301.5, 302.5, 303.5};
        auto m = recovery_metrics(est, truth);
        CHECK(m.rmse == Approx(1.5));
        CHECK(m.max_abs_err == Approx(1.5));
    }

    SECTION("hand-computed two-vector case") {
        std::vector<double> truth{0.0, 4.0};
        std::vector<double> est{3.0, 0.0};
        auto m = recovery_metrics(est, truth, 0.5);
        CHECK(m.rmse == Approx(std::sqrt((9.0 + 16.0) / 2.0)));
        CHECK(m.max_abs_err == Approx(4.0));
        REQUIRE(m.psnr_db.has_value());
        CHECK(*m.psnr_db == Approx(20.0 * std::log10(4.0 / m.rmse)));
        CHECK(m.transition_count_delta == 0);  // both traces have one transition
    }

    SECTION("zero-range truth reports no psnr") {
        std::vector<double> truth{5.0, 5.0};
        std::vector<double> est{5.0, 6.0};
        auto m = recovery_metrics(est, truth);
        CHECK_FALSE(m.psnr_db.has_value());
    }

    SECTION("shape mismatch is rejected") {
        std::vector<double> a{1.0, 2.0}, b{1.0};
        CHECK_THROWS_AS(recovery_metrics(std::span<const double>(a), std::span<const double>(b)),
                        std::invalid_argument);
    }
}
