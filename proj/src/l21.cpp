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

#include "scn/l21.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace scn {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kZeroColumnRel = 1e-8;

void check_problem(const Eigen::Ref<const Matrix>& targets,
                   const Eigen::Ref<const Matrix>& predictors) {
    if (targets.cols() != predictors.cols()) {
        throw DimensionMismatch("targets have " + std::to_string(targets.cols()) +
                                " time points, predictors have " +
                                std::to_string(predictors.cols()));
    }
    if (targets.rows() == 0 || predictors.rows() == 0 || targets.cols() == 0) {
        throw DimensionMismatch("empty matrix in group-sparse problem");
    }
}

double objective_gram(const L21Gram& g, const Matrix& w, double lambda) {
    const Matrix wg = w * g.gram;
    double f = g.target_sq_norm - 2.0 * w.cwiseProduct(g.cross).sum() + wg.cwiseProduct(w).sum();
    f += lambda * l21_norm(w);
    return f;
}

// Coefficient magnitude implied by the data; anchors the hard-zero threshold
// so that an all-tiny IRLS fixed point (lambda >= lambda_max) empties cleanly.
double coefficient_scale(const L21Gram& g) {
    return g.cross.norm() / std::max(g.gram.norm(), kTiny);
}

struct KktReport {
    double residual = 0.0;
    bool satisfied = false;
};

KktReport kkt_check(const L21Gram& g, const Matrix& w, double lambda,
                    const std::vector<bool>& active, double kkt_tol) {
    const Matrix grad = 2.0 * (w * g.gram - g.cross);
    const double lambda_scale = lambda > 0.0 ? lambda : 2.0 * std::max(g.cross.norm(), kTiny);
    double worst = 0.0;
    for (Index j = 0; j < w.cols(); ++j) {
        double viol;
        if (active[static_cast<std::size_t>(j)]) {
            const double norm_j = w.col(j).norm();
            viol = (grad.col(j) + lambda * w.col(j) / std::max(norm_j, kTiny)).norm();
        } else {
            viol = std::max(0.0, grad.col(j).norm() - lambda);
        }
        worst = std::max(worst, viol / lambda_scale);
    }
    return {worst, worst <= kkt_tol};
}

std::vector<bool> classify_active(const Matrix& w, double coeff_scale) {
    const Index p = w.cols();
    double max_norm = 0.0;
    Vector norms(p);
    for (Index j = 0; j < p; ++j) {
        norms(j) = w.col(j).norm();
        max_norm = std::max(max_norm, norms(j));
    }
    const double threshold = kZeroColumnRel * std::max(max_norm, coeff_scale);
    std::vector<bool> active(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) active[static_cast<std::size_t>(j)] = norms(j) >= threshold;
    return active;
}

// Solves W (gram + lambda D) = cross for W given diagonal weights; the system
// is PD for lambda > 0 and may only be singular at lambda = 0.
Matrix reweighted_solve(const L21Gram& g, double lambda, const Vector& d_diag) {
    Matrix system = g.gram;
    if (lambda > 0.0) system.diagonal() += lambda * d_diag;
    Eigen::LDLT<Matrix> ldlt(system);
    const Vector d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-13 * dmax) {
        throw SingularSystem("X X^T + lambda D is numerically singular (lambda=" +
                             std::to_string(lambda) + "); predictors may be rank deficient");
    }
    return ldlt.solve(g.cross.transpose()).transpose();
}

} // namespace

L21Gram l21_gram(const Eigen::Ref<const Matrix>& targets,
                 const Eigen::Ref<const Matrix>& predictors) {
    check_problem(targets, predictors);
    L21Gram g;
    g.cross.noalias() = targets * predictors.transpose();
    g.gram.noalias() = predictors * predictors.transpose();
    g.target_sq_norm = targets.squaredNorm();
    return g;
}

double lambda21_max_gram(const L21Gram& g) {
    double best = 0.0;
    for (Index j = 0; j < g.cross.cols(); ++j) best = std::max(best, g.cross.col(j).norm());
    return 2.0 * best;
}

struct Finalized {
    Matrix w;
    std::vector<bool> active;
    double kkt_residual = 0.0;
    bool certified = false;
};

// Hard-zero sub-threshold columns, then prune boundary columns: near
// lambda_max the reweighted iteration decays a column only harmonically,
// stalling at a small nonzero norm even though the exact solution drops it.
// A tentative-active column is zeroed (weakest first) while its removal
// keeps the zero-subgradient condition satisfied.
Finalized finalize_solution(const L21Gram& g, Matrix w, double lambda, double cscale,
                            double kkt_tol) {
    const Index p = w.cols();
    Finalized fin;
    fin.active = classify_active(w, cscale);
    for (Index j = 0; j < p; ++j) {
        if (!fin.active[static_cast<std::size_t>(j)]) w.col(j).setZero();
    }

    if (lambda > 0.0) {
        bool changed = true;
        while (changed) {
            changed = false;
            const Matrix grad = 2.0 * (w * g.gram - g.cross);
            Index weakest = -1;
            double weakest_norm = 0.0;
            for (Index j = 0; j < p; ++j) {
                if (!fin.active[static_cast<std::size_t>(j)]) continue;
                const double without_j = (grad.col(j) - 2.0 * g.gram(j, j) * w.col(j)).norm();
                if (without_j <= lambda * (1.0 + kkt_tol)) {
                    const double norm_j = w.col(j).norm();
                    if (weakest < 0 || norm_j < weakest_norm) {
                        weakest = j;
                        weakest_norm = norm_j;
                    }
                }
            }
            if (weakest >= 0) {
                w.col(weakest).setZero();
                fin.active[static_cast<std::size_t>(weakest)] = false;
                changed = true;
            }
        }
    }

    const auto kkt = kkt_check(g, w, lambda, fin.active, kkt_tol);
    fin.kkt_residual = kkt.residual;
    fin.certified = kkt.satisfied;
    fin.w = std::move(w);
    return fin;
}

L21Solution solve_l21_gram(const L21Gram& g, double lambda, const L21Options& opts) {
    if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    const Index m = g.cross.rows();
    const Index p = g.cross.cols();

    L21Solution sol;
    Matrix w_full;
    if (opts.warm_start.size() > 0) {
        if (opts.warm_start.rows() != m || opts.warm_start.cols() != p) {
            throw DimensionMismatch("warm start shape mismatch");
        }
        w_full = opts.warm_start;
    } else {
        // Ridge start; at lambda = 0 this is already the least-squares solution.
        w_full = reweighted_solve(g, lambda, Vector::Ones(p));
    }

    const double cscale = coefficient_scale(g);

    // Columns at (near) zero whose gradient exceeds lambda get a descent-step
    // lift before the first trace entry: the reweighted update alone would
    // grow them only geometrically from the epsilon floor.
    {
        Matrix grad = 2.0 * (w_full * g.gram - g.cross);
        const double lift_eps = std::max(opts.epsilon, 1e-9 * cscale);
        for (Index j = 0; j < p; ++j) {
            if (w_full.col(j).norm() >= lift_eps) continue;
            const double gn = grad.col(j).norm();
            const double excess = gn - lambda * (1.0 + opts.kkt_tol);
            if (excess <= 0.0 || g.gram(j, j) <= 0.0 || gn <= 0.0) continue;
            const Vector step = (-excess / (2.0 * g.gram(j, j)) / gn) * grad.col(j);
            grad.noalias() += 2.0 * step * g.gram.row(j);
            w_full.col(j) += step;
        }
    }

    double f = objective_gram(g, w_full, lambda);
    sol.objective_trace.push_back(f);

    // Active-set IRLS: columns whose removal keeps the zero-subgradient
    // condition satisfied are frozen at zero mid-run (the reweighted update
    // only decays them harmonically), and re-admitted if the full KKT check
    // flags them at certification time.
    std::vector<bool> working(static_cast<std::size_t>(p), true);

    L21Gram sub;
    Matrix w_sub;
    std::vector<Index> idx;
    bool rebuild = true;
    auto rebuild_sub = [&]() {
        idx.clear();
        for (Index j = 0; j < p; ++j) {
            if (working[static_cast<std::size_t>(j)]) idx.push_back(j);
        }
        const Index ps = static_cast<Index>(idx.size());
        sub.cross.resize(m, ps);
        sub.gram.resize(ps, ps);
        sub.target_sq_norm = g.target_sq_norm;
        w_sub.resize(m, ps);
        for (Index a = 0; a < ps; ++a) {
            sub.cross.col(a) = g.cross.col(idx[static_cast<std::size_t>(a)]);
            w_sub.col(a) = w_full.col(idx[static_cast<std::size_t>(a)]);
            for (Index b = 0; b < ps; ++b) {
                sub.gram(a, b) = g.gram(idx[static_cast<std::size_t>(a)],
                                        idx[static_cast<std::size_t>(b)]);
            }
        }
        rebuild = false;
    };

    Finalized fin;
    bool have_fin = false;
    int it = 0;
    while (it < opts.max_iter) {
        if (rebuild) rebuild_sub();
        if (idx.empty()) { // everything frozen at zero
            fin = finalize_solution(g, w_full, lambda, cscale, opts.kkt_tol);
            have_fin = true;
            sol.converged = fin.certified;
            break;
        }

        ++it;
        sol.iterations = it;
        const Index ps = static_cast<Index>(idx.size());
        Vector d_diag(ps);
        for (Index a = 0; a < ps; ++a) {
            d_diag(a) = 1.0 / (2.0 * std::max(w_sub.col(a).norm(), opts.epsilon));
        }
        w_sub = reweighted_solve(sub, lambda, d_diag);
        const Matrix wg = w_sub * sub.gram;

        double norm_sum = 0.0;
        for (Index a = 0; a < ps; ++a) norm_sum += w_sub.col(a).norm();
        const double f_new = sub.target_sq_norm - 2.0 * w_sub.cwiseProduct(sub.cross).sum() +
                             wg.cwiseProduct(w_sub).sum() + lambda * norm_sum;
        sol.objective_trace.push_back(f_new);

        for (Index a = 0; a < ps; ++a) w_full.col(idx[static_cast<std::size_t>(a)]) = w_sub.col(a);

        // freeze columns that are admissible at zero given the others
        if (lambda > 0.0) {
            const Matrix grad = 2.0 * (wg - sub.cross);
            for (Index a = 0; a < ps; ++a) {
                const double without =
                    (grad.col(a) - 2.0 * sub.gram(a, a) * w_sub.col(a)).norm();
                if (without <= lambda * (1.0 + opts.kkt_tol)) {
                    const Index j = idx[static_cast<std::size_t>(a)];
                    working[static_cast<std::size_t>(j)] = false;
                    w_full.col(j).setZero();
                    rebuild = true;
                }
            }
        }

        const bool plateau = std::abs(f - f_new) <= opts.tol * std::max(1.0, std::abs(f));
        f = f_new;
        if (!plateau) continue;

        fin = finalize_solution(g, w_full, lambda, cscale, opts.kkt_tol);
        have_fin = true;
        if (fin.certified) {
            sol.converged = true;
            break;
        }
        // Re-admit frozen columns flagged by the full KKT check with a strict
        // descent step (keeps the trace monotone), then keep iterating;
        // otherwise stop at the plateau and report honestly.
        Matrix grad_full = 2.0 * (w_full * g.gram - g.cross);
        bool unfroze = false;
        for (Index j = 0; j < p; ++j) {
            if (working[static_cast<std::size_t>(j)]) continue;
            const double gn = grad_full.col(j).norm();
            const double excess = gn - lambda * (1.0 + opts.kkt_tol);
            if (excess <= 0.0 || g.gram(j, j) <= 0.0) continue;
            const Vector step = (-excess / (2.0 * g.gram(j, j)) / gn) * grad_full.col(j);
            grad_full.noalias() += 2.0 * step * g.gram.row(j);
            w_full.col(j) += step;
            working[static_cast<std::size_t>(j)] = true;
            unfroze = true;
        }
        if (!unfroze && !opts.require_certificate) break;
        rebuild = rebuild || unfroze;
        have_fin = false;
    }

    if (!have_fin) fin = finalize_solution(g, w_full, lambda, cscale, opts.kkt_tol);

    for (Index j = 0; j < p; ++j) {
        if (fin.active[static_cast<std::size_t>(j)]) sol.active_columns.push_back(j);
    }
    sol.coeffs = std::move(fin.w);
    sol.kkt_residual = fin.kkt_residual;
    return sol;
}

double l21_norm(const Eigen::Ref<const Matrix>& w) {
    double s = 0.0;
    for (Index j = 0; j < w.cols(); ++j) s += w.col(j).norm();
    return s;
}

double l21_objective(const Eigen::Ref<const Matrix>& targets,
                     const Eigen::Ref<const Matrix>& predictors,
                     const Eigen::Ref<const Matrix>& w, double lambda) {
    return (targets - w * predictors).squaredNorm() + lambda * l21_norm(w);
}

double lambda21_max(const Eigen::Ref<const Matrix>& targets,
                    const Eigen::Ref<const Matrix>& predictors) {
    check_problem(targets, predictors);
    double best = 0.0;
    for (Index j = 0; j < predictors.rows(); ++j) {
        best = std::max(best, (targets * predictors.row(j).transpose()).norm());
    }
    return 2.0 * best;
}

L21Solution solve_l21(const L21Problem& problem, const L21Options& opts) {
    return solve_l21_gram(l21_gram(problem.targets, problem.predictors), problem.lambda, opts);
}

Matrix unshrunk_refit(const Eigen::Ref<const Matrix>& targets,
                      const Eigen::Ref<const Matrix>& predictors,
                      const std::vector<Index>& active_columns) {
    check_problem(targets, predictors);
    Matrix w = Matrix::Zero(targets.rows(), predictors.rows());
    if (active_columns.empty()) return w;

    Matrix sub(static_cast<Index>(active_columns.size()), predictors.cols());
    for (std::size_t i = 0; i < active_columns.size(); ++i) {
        const Index r = active_columns[i];
        if (r < 0 || r >= predictors.rows()) {
            throw DimensionMismatch("active column " + std::to_string(r) + " out of range");
        }
        sub.row(static_cast<Index>(i)) = predictors.row(r);
    }

    const Matrix gram = sub * sub.transpose();
    Eigen::LDLT<Matrix> ldlt(gram);
    const Vector d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-13 * dmax) {
        throw SingularSystem("restricted Gram matrix is singular for refit on " +
                             std::to_string(active_columns.size()) + " columns");
    }
    const Matrix w_sub = ldlt.solve(sub * targets.transpose()).transpose();
    for (std::size_t i = 0; i < active_columns.size(); ++i) {
        w.col(active_columns[i]) = w_sub.col(static_cast<Index>(i));
    }
    return w;
}

} // namespace scn
