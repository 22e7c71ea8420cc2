#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tirv/haar.hpp"
#include "tirv/piecewise.hpp"

using namespace tirv;

TEST_CASE("eval_piecewise uses right-open bins", "[basis]") {
    SECTION("constant signal") {
        PiecewiseSignal sig{0.0, 1.0, {5.0}};
        for (double t : {0.0, 0.3, 0.999}) CHECK(eval_piecewise(sig, t) == 5.0);
    }

    SECTION("breakpoint belongs to the right interval") {
        PiecewiseSignal sig{0.0, 2.0, {1.0, 2.0}};
        CHECK(eval_piecewise(sig, 1.0) == 2.0);
        CHECK(eval_piecewise(sig, std::nextafter(1.0, 0.0)) == 1.0);
    }

    SECTION("floor indexing") {
        PiecewiseSignal sig{0.0, 1.0, {1.0, 2.0, 3.0, 4.0}};
        CHECK(eval_piecewise(sig, 0.74) == 3.0);
    }

    SECTION("domain errors") {
        PiecewiseSignal sig{0.0, 1.0, {1.0, 2.0}};
        CHECK_THROWS_AS(eval_piecewise(sig, -0.001), std::domain_error);
        CHECK_THROWS_AS(eval_piecewise(sig, 1.0), std::domain_error);
    }

    SECTION("non-power-of-two resolution is rejected") {
        PiecewiseSignal sig{0.0, 1.0, {1.0, 2.0, 3.0}};
        CHECK_THROWS_AS(eval_piecewise(sig, 0.5), std::invalid_argument);
    }
}

TEST_CASE("project averages into bins", "[basis]") {
    SECTION("constant input") {
        std::vector<double> dense(16, 2.5);
        auto sig = project(dense, 0.0, 1.0, 4);
        for (double c : sig.coeffs) CHECK(c == 2.5);
    }

    SECTION("exactly representable input") {
        std::vector<double> dense{1.0, 1.0, 3.0, 3.0};
        auto sig = project(dense, 0.0, 1.0, 2);
        CHECK(sig.coeffs == std::vector<double>{1.0, 3.0});
    }

    SECTION("ramp bin means") {
        std::vector<double> dense{0, 1, 2, 3, 4, 5, 6, 7};
        auto sig = project(dense, 0.0, 1.0, 2);
        CHECK(sig.coeffs[0] == Approx(1.5));
        CHECK(sig.coeffs[1] == Approx(5.5));
    }

    SECTION("resolution must divide the sample count") {
        std::vector<double> dense(6, 1.0);
        CHECK_THROWS_AS(project(dense, 0.0, 1.0, 4), std::invalid_argument);
    }

    SECTION("L2 error is nonincreasing as K doubles and vanishes at full refinement") {
        // bin means are nested orthogonal projections, so the L2 error can
        // only shrink as the grid refines
        std::vector<double> dense(256);
        for (std::size_t i = 0; i < dense.size(); ++i)
            dense[i] = std::sin(0.13 * static_cast<double>(i)) + 0.002 * static_cast<double>(i);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k <= 256; k *= 2) {
            auto sig = project(dense, 0.0, 1.0, k);
            double err = 0.0;
            const std::size_t per_bin = dense.size() / k;
            for (std::size_t i = 0; i < dense.size(); ++i) {
                const double d = dense[i] - sig.coeffs[i / per_bin];
                err += d * d;
            }
            CHECK(err <= prev + 1e-12);
            prev = err;
        }
        CHECK(prev <= 1e-24);  // K = M represents the samples exactly
    }

    SECTION("bin mean minimizes L2 error over one coefficient") {
        std::vector<double> dense{0.2, 1.7, -0.4, 0.9};
        auto sig = project(dense, 0.0, 1.0, 1);
        auto sq_err = [&](double c) {
            double e = 0.0;
            for (double d : dense) e += (d - c) * (d - c);
            return e;
        };
        const double best = sq_err(sig.coeffs[0]);
        for (double c = -1.0; c <= 2.0; c += 0.001) CHECK(best <= sq_err(c) + 1e-12);
    }
}

TEST_CASE("refine doubles resolution without changing the signal", "[basis]") {
    CHECK(refine(PiecewiseSignal{0, 1, {3.0}}).coeffs == std::vector<double>{3.0, 3.0});
    CHECK(refine(PiecewiseSignal{0, 1, {1.0, 2.0}}).coeffs ==
          std::vector<double>{1.0, 1.0, 2.0, 2.0});

    PiecewiseSignal sig{0.25, 2.0, {4.0, -1.0, 0.5, 9.0}};
    auto fine = refine(sig);
    REQUIRE(fine.resolution() == 8);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.25, std::nextafter(2.25, 0.0));
    for (int i = 0; i < 100; ++i) {
        const double t = dist(rng);
        CHECK(eval_piecewise(fine, t) == eval_piecewise(sig, t));
    }
}

TEST_CASE("haar matrix is orthonormal with the documented layout", "[basis]") {
    SECTION("K = 1") {
        auto h = haar_matrix(1);
        CHECK(h.matrix(0, 0) == 1.0);
    }

    SECTION("K = 2 matches the standard normalized form") {
        auto h = haar_matrix(2);
        const double s = 1.0 / std::sqrt(2.0);
        CHECK(h.matrix(0, 0) == Approx(s));
        CHECK(h.matrix(0, 1) == Approx(s));
        CHECK(h.matrix(1, 0) == Approx(s));
        CHECK(h.matrix(1, 1) == Approx(-s));
    }

    SECTION("orthonormality up to K = 256") {
        for (std::size_t k = 1; k <= 256; k *= 2) {
            auto h = haar_matrix(k);
            const auto kk = static_cast<Eigen::Index>(k);
            const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(kk, kk);
            CHECK((h.matrix * h.matrix.transpose() - eye).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK((h.matrix.transpose() * h.matrix - eye).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }

    SECTION("first row is the constant vector") {
        auto h = haar_matrix(16);
        for (Eigen::Index i = 0; i < 16; ++i) CHECK(h.matrix(0, i) == Approx(0.25));
    }

    SECTION("constant signal concentrates on the scaling coefficient") {
        auto h = haar_matrix(4);
        Eigen::VectorXd a = Eigen::VectorXd::Constant(4, 3.0);
        Eigen::VectorXd d = h.forward(a);
        CHECK(d[0] == Approx(6.0));  // c * sqrt(K)
        for (Eigen::Index i = 1; i < 4; ++i) CHECK(std::abs(d[i]) <= 1e-14);
    }

    SECTION("round trip") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> dist(-10.0, 10.0);
        for (std::size_t k : {2, 8, 64}) {
            auto h = haar_matrix(k);
            Eigen::VectorXd a(static_cast<Eigen::Index>(k));
            for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = dist(rng);
            CHECK((h.inverse(h.forward(a)) - a).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }

    SECTION("K must be a power of two") {
        CHECK_THROWS_AS(haar_matrix(0), std::invalid_argument);
        CHECK_THROWS_AS(haar_matrix(3), std::invalid_argument);
        CHECK_THROWS_AS(haar_matrix(12), std::invalid_argument);
    }
}

namespace {

// Builds a K-vector with steps at the given sorted boundary positions.
Eigen::VectorXd step_signal(std::size_t k, const std::vector<std::size_t>& boundaries) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(k));
    double level = 1.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (next < boundaries.size() && i == boundaries[next]) {
            level += 1.0;
            ++next;
        }
        a[static_cast<Eigen::Index>(i)] = level;
    }
    return a;
}

int haar_nonzeros(const tirv::HaarBasis& h, const Eigen::VectorXd& a) {
    Eigen::VectorXd d = h.forward(a);
    const double thresh = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
    int nz = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (std::abs(d[i]) > thresh) ++nz;
    return nz;
}

}  // namespace

TEST_CASE("few transitions imply few haar coefficients", "[basis]") {
    // bound: r transitions -> at most r*(n+1)+1 nonzero coefficients
    for (std::size_t k : {4, 8, 16, 32, 64}) {
        auto h = haar_matrix(k);
        const int n = static_cast<int>(std::log2(static_cast<double>(k)));

        // exhaustive over transition positions for r = 1, 2
        for (std::size_t b1 = 1; b1 < k; ++b1) {
            CHECK(haar_nonzeros(h, step_signal(k, {b1})) <= 1 * (n + 1) + 1);
            for (std::size_t b2 = b1 + 1; b2 < k; ++b2)
                CHECK(haar_nonzeros(h, step_signal(k, {b1, b2})) <= 2 * (n + 1) + 1);
        }

        // sampled for r = 3, 4
        std::mt19937_64 rng(23 + k);
        for (int trial = 0; trial < 300; ++trial) {
            for (int r : {3, 4}) {
                if (static_cast<std::size_t>(r) >= k) continue;
                std::vector<std::size_t> all(k - 1);
                std::iota(all.begin(), all.end(), std::size_t{1});
                std::shuffle(all.begin(), all.end(), rng);
                std::vector<std::size_t> pick(all.begin(), all.begin() + r);
                std::sort(pick.begin(), pick.end());
                CHECK(haar_nonzeros(h, step_signal(k, pick)) <= r * (n + 1) + 1);
            }
        }
    }
}
