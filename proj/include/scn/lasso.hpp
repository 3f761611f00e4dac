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

#ifndef SCN_LASSO_HPP
#define SCN_LASSO_HPP

#include <vector>

#include "scn/data_model.hpp"

namespace scn {

// Per-target sparse regression
//     min_w ||y - X^T w||_2^2 + lambda ||w||_1
// with y length n and X (p x n) holding one predictor per row.
struct LassoProblem {
    Vector target;
    Matrix predictors;
    double lambda = 0.0;
};

struct LassoOptions {
    int max_sweeps = 1000;
    double tol_scale = 1e-9; // stop when max coordinate update < tol_scale * ||y||
    bool track_objective = false;
    Vector warm_start;
};

struct SparseVectorSolution {
    Vector coeffs; // exact zeros off support
    std::vector<Index> support;
    double kkt_residual = 0.0;
    bool converged = false;
    int sweeps = 0;
    std::vector<double> objective_trace; // filled when track_objective
};

// Smallest lambda with the all-zero solution: 2 max_j |<row_j(X), y>|.
double lasso_lambda_max(const Eigen::Ref<const Vector>& target,
                        const Eigen::Ref<const Matrix>& predictors);

double lasso_objective(const Eigen::Ref<const Vector>& target,
                       const Eigen::Ref<const Matrix>& predictors,
                       const Eigen::Ref<const Vector>& w, double lambda);

// Cyclic coordinate descent with exact soft-thresholded zeros. The returned
// kkt_residual is the worst stationarity violation scaled by lambda.
SparseVectorSolution solve_lasso(const LassoProblem& problem, const LassoOptions& opts = {});

// Gram-form entry point: gram = X X^T, xy = X y. The pipeline reuses one Gram
// matrix across every target voxel and every permutation refit.
SparseVectorSolution solve_lasso_gram(const Eigen::Ref<const Matrix>& gram,
                                      const Eigen::Ref<const Vector>& xy, double y_sq_norm,
                                      double lambda, const LassoOptions& opts = {});

struct LassoPathResult {
    SparseVectorSolution solution; // penalized fit at the chosen lambda
    double chosen_lambda = 0.0;
    double lambda_max = 0.0;
    double val_mse = 0.0;
    Vector scoring_coeffs; // coefficients used for validation scoring
    bool refit_ok = true;  // false when the restricted OLS refit was skipped
};

// Fits n_lambdas linearly spaced values from lambda_max down to
// min_ratio * lambda_max (warm-started), scores validation MSE with the
// unshrunk OLS refit on each support, and keeps the minimizer; ties go to the
// larger lambda. refit = false scores the penalized coefficients instead.
LassoPathResult lasso_path_select(const Eigen::Ref<const Vector>& y_train,
                                  const Eigen::Ref<const Matrix>& x_train,
                                  const Eigen::Ref<const Matrix>& x_val,
                                  const Eigen::Ref<const Vector>& y_val, int n_lambdas = 10,
                                  double min_ratio = 1e-3, bool refit = true,
                                  const LassoOptions& opts = {});

LassoPathResult lasso_path_select_gram(const Eigen::Ref<const Matrix>& gram,
                                       const Eigen::Ref<const Vector>& xy, double y_sq_norm,
                                       const Eigen::Ref<const Matrix>& x_val,
                                       const Eigen::Ref<const Vector>& y_val, int n_lambdas = 10,
                                       double min_ratio = 1e-3, bool refit = true,
                                       const LassoOptions& opts = {});

struct RidgeSelection {
    Vector coeffs; // zeros off support
    double chosen_mu = 0.0;
    double val_mse = 0.0;
};

// mu grid factors are multiplied by trace(X_S X_S^T)/|S|.
struct RidgeGrid {
    int n = 8;
    double lo = 1e-6;
    double hi = 1e2;
};
std::vector<double> make_mu_grid(const Eigen::Ref<const Matrix>& gram,
                                 const std::vector<Index>& support, const RidgeGrid& grid = {});

// Support-constrained ridge, mu picked from the grid by validation MSE
// (ties -> larger mu). Empty support returns the zero vector.
RidgeSelection ridge_on_support(const Eigen::Ref<const Vector>& y_train,
                                const Eigen::Ref<const Matrix>& x_train,
                                const std::vector<Index>& support,
                                const std::vector<double>& mu_grid,
                                const Eigen::Ref<const Matrix>& x_val,
                                const Eigen::Ref<const Vector>& y_val);

RidgeSelection ridge_on_support_gram(const Eigen::Ref<const Matrix>& gram,
                                     const Eigen::Ref<const Vector>& xy,
                                     const std::vector<Index>& support,
                                     const std::vector<double>& mu_grid,
                                     const Eigen::Ref<const Matrix>& x_val,
                                     const Eigen::Ref<const Vector>& y_val);

} // namespace scn

#endif
