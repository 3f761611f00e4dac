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

#ifndef SCN_L21_HPP
#define SCN_L21_HPP

#include <vector>

#include "scn/data_model.hpp"

namespace scn {

// Column-group-sparse regression
//     min_W ||Y - W X||_F^2 + lambda * sum_j ||column_j(W)||_2
// with Y (m x n) the targets, X (p x n) the predictors and W (m x p).
// Zero columns of W drop whole predictors.
struct L21Problem {
    Matrix targets;    // m x n
    Matrix predictors; // p x n
    double lambda = 0.0;
};

struct L21Options {
    double epsilon = 1e-10; // reweighting floor for column norms
    int max_iter = 500;
    double tol = 1e-8;      // relative objective change
    double kkt_tol = 1e-6;
    // keep iterating past an objective plateau until the KKT certificate
    // holds (or max_iter); path fits inside the pipeline turn this off and
    // rely on the unshrunk refits for scoring
    bool require_certificate = true;
    Matrix warm_start;      // optional m x p initial iterate
};

struct L21Solution {
    Matrix coeffs; // m x p, sub-threshold columns hard-zeroed
    std::vector<Index> active_columns;
    std::vector<double> objective_trace; // nonincreasing
    int iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0; // scaled stationarity violation, see solve_l21
};

// Smallest lambda with an all-zero solution: 2 * max_j ||Y row_j(X)^T||_2.
double lambda21_max(const Eigen::Ref<const Matrix>& targets,
                    const Eigen::Ref<const Matrix>& predictors);

// Shared precomputation reused across a lambda path: cross = Y X^T (m x p),
// gram = X X^T (p x p).
struct L21Gram {
    Matrix cross;
    Matrix gram;
    double target_sq_norm = 0.0;
};
L21Gram l21_gram(const Eigen::Ref<const Matrix>& targets,
                 const Eigen::Ref<const Matrix>& predictors);
double lambda21_max_gram(const L21Gram& g);
L21Solution solve_l21_gram(const L21Gram& g, double lambda, const L21Options& opts = {});

double l21_norm(const Eigen::Ref<const Matrix>& w);
double l21_objective(const Eigen::Ref<const Matrix>& targets,
                     const Eigen::Ref<const Matrix>& predictors,
                     const Eigen::Ref<const Matrix>& w, double lambda);

// Iteratively reweighted least squares: alternate
//   D_jj = 1 / (2 max(||w_j||, epsilon))  and  W = Y X^T (X X^T + lambda D)^-1.
// The objective trace is nonincreasing; on exit the scaled KKT residual is
// certified (active columns: ||grad_j + lambda w_j/||w_j|| || <= kkt_tol*lambda,
// inactive: ||grad_j|| <= lambda (1 + kkt_tol)). Throws SingularSystem when
// lambda = 0 and X X^T is rank deficient.
L21Solution solve_l21(const L21Problem& problem, const L21Options& opts = {});

// Ordinary least squares on the selected predictor rows, zero elsewhere.
// Empty support returns the zero matrix; a singular restricted Gram matrix
// throws SingularSystem.
Matrix unshrunk_refit(const Eigen::Ref<const Matrix>& targets,
                      const Eigen::Ref<const Matrix>& predictors,
                      const std::vector<Index>& active_columns);

} // namespace scn

#endif
