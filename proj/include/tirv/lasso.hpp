#pragma once

// Convex optimization core: the l1-penalized least-squares problem
//
//     minimize (1/2) * ||M x - b||_2^2 + lambda * ||x||_1
//
// solved by cyclic coordinate descent with an explicit KKT optimality
// certificate, plus a minimum-norm ordinary-least-squares baseline and the
// transition-count metric used to judge piecewise-constant recoveries.
//
// Correctness is defined by the certificate, not the method: a solution is
// "converged" iff every coordinate satisfies the stationarity conditions to
// tol * max(lambda, ||M^T b||_inf).

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace tirv {

/// Solver knobs. lambda shares units with b (Kelvin here).
struct SolverConfig {
    double lambda = 0.0;
    int max_iters = 10000;  ///< full coordinate sweeps
    double tol = 1e-8;      ///< relative KKT tolerance

    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("SolverConfig: lambda must be >= 0");
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
    }
};

/// Solution plus the evidence that it is one.
struct SolveReport {
    Eigen::VectorXd x;
    int iterations = 0;
    double objective_value = 0.0;
    double kkt_violation = 0.0;
    bool converged = false;
};

namespace detail {

inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

inline void require_finite(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
    if (!m.allFinite() || !b.allFinite())
        throw std::invalid_argument("solver: inputs must be finite");
    if (m.rows() != b.size())
        throw std::invalid_argument("solver: matrix rows must match b length");
}

}  // namespace detail

/// Reusable factorization-free state for many solves against one matrix.
/// Holds M and its Gram matrix; solve() is const and reentrant, so one
/// operator can serve any number of threads on disjoint right-hand sides.
class LassoOperator {
public:
    explicit LassoOperator(Eigen::MatrixXd m) : m_(std::move(m)) {
        if (!m_.allFinite()) throw std::invalid_argument("LassoOperator: matrix must be finite");
        gram_ = m_.transpose() * m_;
    }

    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }

    /// Cyclic coordinate descent from warm_start (or zero). Deterministic
    /// given inputs and config; each coordinate update exactly minimizes the
    /// 1-D restriction, so the objective never increases.
    [[nodiscard]] SolveReport solve(const Eigen::VectorXd& b, const SolverConfig& cfg,
                                    const Eigen::VectorXd* warm_start = nullptr) const {
        cfg.validate();
        detail::require_finite(m_, b);
        const Eigen::Index k = m_.cols();

        Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
        if (warm_start) {
            if (warm_start->size() != k)
                throw std::invalid_argument("LassoOperator::solve: warm start length mismatch");
            if (!warm_start->allFinite())
                throw std::invalid_argument("LassoOperator::solve: warm start must be finite");
            x = *warm_start;
        }

        const Eigen::VectorXd c = m_.transpose() * b;
        const double scale = std::max(cfg.lambda, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
        const double threshold = cfg.tol * scale;

        Eigen::VectorXd g = gram_ * x - c;  // gradient of the smooth part
        const double diag_floor = 1e-14 * (gram_.diagonal().maxCoeff() + 1.0);

        SolveReport report;
        double violation = kkt_violation(x, g, cfg.lambda);
        bool certified = violation <= threshold;  // g is exact before any sweep
        int sweeps = 0;
        while (!certified && sweeps < cfg.max_iters) {
            for (Eigen::Index j = 0; j < k; ++j) {
                const double d = gram_(j, j);
                if (d <= diag_floor) {
                    // column is numerically zero; the penalty pins x_j at 0
                    if (x[j] != 0.0) {
                        g -= x[j] * gram_.col(j);
                        x[j] = 0.0;
                    }
                    continue;
                }
                const double r = d * x[j] - g[j];
                const double next = detail::soft_threshold(r, cfg.lambda) / d;
                const double delta = next - x[j];
                if (delta != 0.0) {
                    g += delta * gram_.col(j);
                    x[j] = next;
                }
            }
            ++sweeps;
            violation = kkt_violation(x, g, cfg.lambda);
            if (violation <= threshold) {
                // recompute the gradient before certifying: the incremental
                // updates accumulate rounding over many sweeps
                g = gram_ * x - c;
                violation = kkt_violation(x, g, cfg.lambda);
                certified = violation <= threshold;
            }
        }

        report.x = std::move(x);
        report.iterations = sweeps;
        report.kkt_violation = violation;
        report.converged = certified;
        const Eigen::VectorXd res = m_ * report.x - b;
        report.objective_value = 0.5 * res.squaredNorm() + cfg.lambda * report.x.lpNorm<1>();
        return report;
    }

    /// Worst-case stationarity violation of x given g = M^T (M x - b).
    static double kkt_violation(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                double lambda) {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const double v = (x[j] != 0.0) ? std::abs(g[j] + lambda * (x[j] > 0.0 ? 1.0 : -1.0))
                                           : std::max(std::abs(g[j]) - lambda, 0.0);
            worst = std::max(worst, v);
        }
        return worst;
    }

private:
    Eigen::MatrixXd m_;
    Eigen::MatrixXd gram_;
};

/// One-shot LASSO solve.
inline SolveReport solve_lasso(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                               const SolverConfig& cfg) {
    return LassoOperator(m).solve(b, cfg);
}

/// Minimum-norm least-squares solution (pseudo-inverse semantics); the
/// baseline the sparse solve is compared against on under-determined systems.
inline Eigen::VectorXd solve_ols(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
    detail::require_finite(m, b);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    return cod.solve(b);
}

/// Number of indices k >= 1 with |a_k - a_{k-1}| > tol.
inline int transition_count(std::span<const double> a, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("transition_count: tol must be >= 0");
    int count = 0;
    for (std::size_t i = 1; i < a.size(); ++i)
        if (std::abs(a[i] - a[i - 1]) > tol) ++count;
    return count;
}

/// Eigen-vector overload.
inline int transition_count(const Eigen::VectorXd& a, double tol) {
    return transition_count(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                            tol);
}

}  // namespace tirv
