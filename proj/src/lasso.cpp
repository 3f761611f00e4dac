/*
 * Copyright 2026 the scn authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "scn/lasso.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace scn {

namespace {

constexpr double kTiny = 1e-300;

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double mean_sq(const Eigen::Ref<const Vector>& v) {
    return v.size() == 0 ? 0.0 : v.squaredNorm() / static_cast<double>(v.size());
}

// Validation MSE for coefficients supported on `support` only.
double val_mse_on_support(const Vector& w, const std::vector<Index>& support,
                          const Eigen::Ref<const Matrix>& x_val,
                          const Eigen::Ref<const Vector>& y_val) {
    Vector pred = Vector::Zero(y_val.size());
    for (const Index j : support) pred += w(j) * x_val.row(j).transpose();
    return (y_val - pred).squaredNorm() / static_cast<double>(y_val.size());
}

// OLS on the restricted Gram; returns false (and leaves w untouched) when the
// restricted system is rank deficient, in which case the caller scores the
// penalized coefficients instead.
bool try_support_refit(const Eigen::Ref<const Matrix>& gram, const Eigen::Ref<const Vector>& xy,
                       const std::vector<Index>& support, Vector& w_out) {
    const Index s = static_cast<Index>(support.size());
    Matrix gs(s, s);
    Vector bs(s);
    for (Index a = 0; a < s; ++a) {
        bs(a) = xy(support[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < s; ++b) {
            gs(a, b) = gram(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
        }
    }
    Eigen::LDLT<Matrix> ldlt(gs);
    const Vector d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-13 * dmax) return false;
    const Vector ws = ldlt.solve(bs);
    w_out.setZero();
    for (Index a = 0; a < s; ++a) w_out(support[static_cast<std::size_t>(a)]) = ws(a);
    return true;
}

} // namespace

double lasso_lambda_max(const Eigen::Ref<const Vector>& target,
                        const Eigen::Ref<const Matrix>& predictors) {
    if (target.size() != predictors.cols()) {
        throw DimensionMismatch("target length " + std::to_string(target.size()) +
                                " vs predictor columns " + std::to_string(predictors.cols()));
    }
    return 2.0 * (predictors * target).cwiseAbs().maxCoeff();
}

double lasso_objective(const Eigen::Ref<const Vector>& target,
                       const Eigen::Ref<const Matrix>& predictors,
                       const Eigen::Ref<const Vector>& w, double lambda) {
    return (target - predictors.transpose() * w).squaredNorm() + lambda * w.cwiseAbs().sum();
}

SparseVectorSolution solve_lasso(const LassoProblem& problem, const LassoOptions& opts) {
    if (problem.target.size() != problem.predictors.cols()) {
        throw DimensionMismatch("target length does not match predictor columns");
    }
    if (problem.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    const Matrix gram = problem.predictors * problem.predictors.transpose();
    const Vector xy = problem.predictors * problem.target;
    return solve_lasso_gram(gram, xy, problem.target.squaredNorm(), problem.lambda, opts);
}

SparseVectorSolution solve_lasso_gram(const Eigen::Ref<const Matrix>& gram,
                                      const Eigen::Ref<const Vector>& xy, double y_sq_norm,
                                      double lambda, const LassoOptions& opts) {
    const Index p = xy.size();
    if (gram.rows() != p || gram.cols() != p) throw DimensionMismatch("gram shape mismatch");

    SparseVectorSolution sol;
    Vector w;
    if (opts.warm_start.size() > 0) {
        if (opts.warm_start.size() != p) throw DimensionMismatch("warm start length mismatch");
        w = opts.warm_start;
    } else {
        w = Vector::Zero(p);
    }

    Vector q = gram * w; // maintained as G w
    const Vector diag = gram.diagonal();
    const double half_lambda = 0.5 * lambda;
    const double tol_abs = opts.tol_scale * std::sqrt(std::max(y_sq_norm, 0.0));

    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (diag(j) <= 0.0) {
                w(j) = 0.0;
                continue;
            }
            const double rho = xy(j) - q(j) + diag(j) * w(j);
            const double w_new = soft_threshold(rho, half_lambda) / diag(j);
            const double delta = w_new - w(j);
            if (delta != 0.0) {
                q += gram.col(j) * delta;
                w(j) = w_new;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        sol.sweeps = sweep;
        if (opts.track_objective) {
            sol.objective_trace.push_back(y_sq_norm - 2.0 * w.dot(xy) + w.dot(gram * w) +
                                          lambda * w.cwiseAbs().sum());
        }
        if (max_delta <= tol_abs) {
            sol.converged = true;
            break;
        }
    }

    // Certify against a freshly computed gradient; incremental q drifts.
    q.noalias() = gram * w;
    const double lambda_scale = lambda > 0.0
                                    ? lambda
                                    : std::max(2.0 * xy.cwiseAbs().maxCoeff(), kTiny);
    double worst = 0.0;
    for (Index j = 0; j < p; ++j) {
        const double g = 2.0 * (q(j) - xy(j));
        double viol;
        if (w(j) == 0.0) {
            viol = std::max(0.0, std::abs(g) - lambda);
        } else {
            viol = std::abs(g + lambda * (w(j) > 0.0 ? 1.0 : -1.0));
            sol.support.push_back(j);
        }
        worst = std::max(worst, viol / lambda_scale);
    }
    sol.kkt_residual = worst;
    sol.coeffs = std::move(w);
    return sol;
}

LassoPathResult lasso_path_select(const Eigen::Ref<const Vector>& y_train,
                                  const Eigen::Ref<const Matrix>& x_train,
                                  const Eigen::Ref<const Matrix>& x_val,
                                  const Eigen::Ref<const Vector>& y_val, int n_lambdas,
                                  double min_ratio, bool refit, const LassoOptions& opts) {
    const Matrix gram = x_train * x_train.transpose();
    const Vector xy = x_train * y_train;
    return lasso_path_select_gram(gram, xy, y_train.squaredNorm(), x_val, y_val, n_lambdas,
                                  min_ratio, refit, opts);
}

LassoPathResult lasso_path_select_gram(const Eigen::Ref<const Matrix>& gram,
                                       const Eigen::Ref<const Vector>& xy, double y_sq_norm,
                                       const Eigen::Ref<const Matrix>& x_val,
                                       const Eigen::Ref<const Vector>& y_val, int n_lambdas,
                                       double min_ratio, bool refit, const LassoOptions& opts) {
    if (y_val.size() == 0) throw DimensionMismatch("validation slice is empty");
    if (x_val.rows() != xy.size()) throw DimensionMismatch("validation predictor rows mismatch");
    if (n_lambdas < 1) throw ConfigError("need at least one lambda");

    LassoPathResult best;
    best.lambda_max = 2.0 * xy.cwiseAbs().maxCoeff();

    if (best.lambda_max <= 0.0) {
        best.solution.coeffs = Vector::Zero(xy.size());
        best.solution.converged = true;
        best.scoring_coeffs = best.solution.coeffs;
        best.chosen_lambda = 0.0;
        best.val_mse = mean_sq(y_val);
        return best;
    }

    LassoOptions path_opts = opts;
    bool have_best = false;
    for (int k = 0; k < n_lambdas; ++k) {
        const double t = n_lambdas == 1 ? 0.0
                                        : static_cast<double>(k) / static_cast<double>(n_lambdas - 1);
        const double lambda = best.lambda_max * (1.0 + t * (min_ratio - 1.0));
        auto sol = solve_lasso_gram(gram, xy, y_sq_norm, lambda, path_opts);
        path_opts.warm_start = sol.coeffs;

        Vector scoring = sol.coeffs;
        bool refit_ok = true;
        if (refit && !sol.support.empty()) {
            Vector refitted(xy.size());
            if (try_support_refit(gram, xy, sol.support, refitted)) {
                scoring = std::move(refitted);
            } else {
                refit_ok = false;
            }
        }
        const double mse = sol.support.empty() ? mean_sq(y_val)
                                               : val_mse_on_support(scoring, sol.support, x_val, y_val);
        if (!have_best || mse < best.val_mse) {
            have_best = true;
            best.chosen_lambda = lambda;
            best.val_mse = mse;
            best.scoring_coeffs = scoring;
            best.refit_ok = refit_ok;
            best.solution = std::move(sol);
        }
    }
    return best;
}

std::vector<double> make_mu_grid(const Eigen::Ref<const Matrix>& gram,
                                 const std::vector<Index>& support, const RidgeGrid& grid) {
    if (support.empty()) return {};
    double trace = 0.0;
    for (const Index j : support) trace += gram(j, j);
    const double energy = trace / static_cast<double>(support.size());
    std::vector<double> mus(static_cast<std::size_t>(grid.n));
    const double log_lo = std::log10(grid.lo);
    const double log_hi = std::log10(grid.hi);
    for (int i = 0; i < grid.n; ++i) {
        const double t = grid.n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(grid.n - 1);
        mus[static_cast<std::size_t>(i)] = std::pow(10.0, log_lo + t * (log_hi - log_lo)) * energy;
    }
    return mus;
}

RidgeSelection ridge_on_support(const Eigen::Ref<const Vector>& y_train,
                                const Eigen::Ref<const Matrix>& x_train,
                                const std::vector<Index>& support,
                                const std::vector<double>& mu_grid,
                                const Eigen::Ref<const Matrix>& x_val,
                                const Eigen::Ref<const Vector>& y_val) {
    const Matrix gram = x_train * x_train.transpose();
    const Vector xy = x_train * y_train;
    return ridge_on_support_gram(gram, xy, support, mu_grid, x_val, y_val);
}

RidgeSelection ridge_on_support_gram(const Eigen::Ref<const Matrix>& gram,
                                     const Eigen::Ref<const Vector>& xy,
                                     const std::vector<Index>& support,
                                     const std::vector<double>& mu_grid,
                                     const Eigen::Ref<const Matrix>& x_val,
                                     const Eigen::Ref<const Vector>& y_val) {
    RidgeSelection out;
    out.coeffs = Vector::Zero(xy.size());
    if (support.empty()) {
        out.val_mse = mean_sq(y_val);
        return out;
    }
    for (const Index j : support) {
        if (j < 0 || j >= xy.size()) {
            throw DimensionMismatch("support index " + std::to_string(j) + " out of range");
        }
    }
    if (mu_grid.empty()) throw ConfigError("ridge mu grid is empty");

    const Index s = static_cast<Index>(support.size());
    Matrix gs(s, s);
    Vector bs(s);
    for (Index a = 0; a < s; ++a) {
        bs(a) = xy(support[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < s; ++b) {
            gs(a, b) = gram(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
        }
    }

    std::vector<double> mus = mu_grid;
    std::sort(mus.begin(), mus.end(), std::greater<double>()); // ties -> larger mu
    bool have_best = false;
    for (const double mu : mus) {
        if (mu < 0.0) throw ConfigError("ridge mu must be nonnegative");
        Matrix system = gs;
        system.diagonal().array() += mu;
        Eigen::LDLT<Matrix> ldlt(system);
        const Vector d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        if (!(dmax > 0.0) || d.minCoeff() <= 1e-13 * dmax) {
            throw SingularSystem("ridge system singular at mu=" + std::to_string(mu));
        }
        const Vector ws = ldlt.solve(bs);
        Vector w = Vector::Zero(xy.size());
        for (Index a = 0; a < s; ++a) w(support[static_cast<std::size_t>(a)]) = ws(a);
        const double mse = val_mse_on_support(w, support, x_val, y_val);
        if (!have_best || mse < out.val_mse) {
            have_best = true;
            out.coeffs = std::move(w);
            out.chosen_mu = mu;
            out.val_mse = mse;
        }
    }
    return out;
}

} // namespace scn
