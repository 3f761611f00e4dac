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

#include "scn/pipeline.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

#include "scn/parallel.hpp"
#include "scn/rng.hpp"
#include "scn/textio.hpp"

namespace scn {

namespace {

Matrix gather_rows(const Eigen::Ref<const Matrix>& block, const std::vector<Index>& rows,
                   Index col0, Index ncols) {
    Matrix out(static_cast<Index>(rows.size()), ncols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = block.row(rows[i]).segment(col0, ncols);
    }
    return out;
}

std::vector<Index> complement_of(const std::vector<Index>& rows, Index total) {
    std::vector<bool> in(static_cast<std::size_t>(total), false);
    for (const Index r : rows) in[static_cast<std::size_t>(r)] = true;
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(total) - rows.size());
    for (Index v = 0; v < total; ++v) {
        if (!in[static_cast<std::size_t>(v)]) out.push_back(v);
    }
    return out;
}

std::vector<Index> sorted_union(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double mean_sq_matrix(const Eigen::Ref<const Matrix>& m) {
    return m.size() == 0 ? 0.0 : m.squaredNorm() / static_cast<double>(m.size());
}

// OLS refit restricted to active columns, in Gram form; false when the
// restricted system is rank deficient (caller scores the shrunk fit instead).
bool try_l21_refit_gram(const L21Gram& g, const std::vector<Index>& active, Matrix& w_active) {
    const Index a = static_cast<Index>(active.size());
    Matrix gs(a, a);
    Matrix cs(g.cross.rows(), a);
    for (Index i = 0; i < a; ++i) {
        cs.col(i) = g.cross.col(active[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < a; ++j) {
            gs(i, j) = g.gram(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
        }
    }
    Eigen::LDLT<Matrix> ldlt(gs);
    const Vector d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-13 * dmax) return false;
    w_active = ldlt.solve(cs.transpose()).transpose();
    return true;
}

struct RegionPathOutcome {
    double lambda_max = 0.0;
    double chosen_lambda = 0.0;
    double val_mse = 0.0;
    std::vector<Index> active; // region-local predictor indices
    bool refit_skipped = false;
    bool refit_skipped_any = false;
};

RegionPathOutcome fit_region_path(const L21Gram& g, const Matrix& x_val, const Matrix& y_val,
                                  const PathConfig& cfg) {
    RegionPathOutcome best;
    best.lambda_max = lambda21_max_gram(g);
    if (best.lambda_max <= 0.0) {
        best.val_mse = mean_sq_matrix(y_val);
        return best;
    }

    L21Options opts = cfg.l21;
    opts.require_certificate = false; // scoring rides on the unshrunk refits
    bool have_best = false;
    const int n = std::max(1, cfg.stage1_lambdas);
    for (int k = 0; k < n; ++k) {
        const double t = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
        const double lambda = best.lambda_max * (1.0 + t * (cfg.stage1_min_ratio - 1.0));
        auto sol = solve_l21_gram(g, lambda, opts);
        opts.warm_start = sol.coeffs;

        double mse;
        bool refit_skipped = false;
        if (sol.active_columns.empty()) {
            mse = mean_sq_matrix(y_val);
        } else {
            Matrix w_active;
            if (try_l21_refit_gram(g, sol.active_columns, w_active)) {
                // keep
            } else {
                refit_skipped = true;
                best.refit_skipped_any = true;
                w_active.resize(g.cross.rows(), static_cast<Index>(sol.active_columns.size()));
                for (std::size_t i = 0; i < sol.active_columns.size(); ++i) {
                    w_active.col(static_cast<Index>(i)) = sol.coeffs.col(sol.active_columns[i]);
                }
            }
            Matrix x_val_active(static_cast<Index>(sol.active_columns.size()), x_val.cols());
            for (std::size_t i = 0; i < sol.active_columns.size(); ++i) {
                x_val_active.row(static_cast<Index>(i)) = x_val.row(sol.active_columns[i]);
            }
            mse = (y_val - w_active * x_val_active).squaredNorm() /
                  static_cast<double>(y_val.size());
        }

        if (!have_best || mse < best.val_mse) {
            have_best = true;
            best.chosen_lambda = lambda;
            best.val_mse = mse;
            best.active = sol.active_columns;
            best.refit_skipped = refit_skipped;
        }
    }
    return best;
}

Stage1Result stage1_impl(const Eigen::Ref<const Matrix>& train, const Eigen::Ref<const Matrix>& val,
                         const AtlasPartition& atlas, const PathConfig& cfg) {
    if (train.cols() < 2 || val.cols() < 2) {
        throw InvalidSplit("stage 1 needs >= 2 training and validation time points for lag pairs");
    }
    if (atlas.n_regions() < 2) throw FormatError("stage 1 needs at least two atlas regions");

    const Index v_total = train.rows();
    const Index n_tr = train.cols() - 1;
    const Index n_va = val.cols() - 1;

    Stage1Result result;
    result.regions.resize(atlas.n_regions());

    parallel_for(atlas.n_regions(), cfg.threads, [&](std::size_t ri) {
        const auto region_id = static_cast<std::uint32_t>(ri + 1);
        const auto& rows = atlas.region(region_id);
        const auto targets = complement_of(rows, v_total);

        const Matrix x_tr = gather_rows(train, rows, 0, n_tr);
        const Matrix y_tr = gather_rows(train, targets, 1, n_tr);
        const Matrix x_va = gather_rows(val, rows, 0, n_va);
        const Matrix y_va = gather_rows(val, targets, 1, n_va);

        const auto g = l21_gram(y_tr, x_tr);
        auto outcome = fit_region_path(g, x_va, y_va, cfg);

        RegionFit fit;
        fit.region = region_id;
        fit.lambda_max = outcome.lambda_max;
        fit.chosen_lambda = outcome.chosen_lambda;
        fit.val_mse = outcome.val_mse;
        fit.refit_skipped = outcome.refit_skipped;
        fit.refit_skipped_any = outcome.refit_skipped_any;
        fit.selected.reserve(outcome.active.size());
        for (const Index a : outcome.active) fit.selected.push_back(rows[static_cast<std::size_t>(a)]);
        result.regions[ri] = std::move(fit);
    });

    std::vector<Index> all;
    for (const auto& r : result.regions) all.insert(all.end(), r.selected.begin(), r.selected.end());
    result.selected = sorted_union(std::move(all));
    return result;
}

Stage2Result stage2_impl(const Eigen::Ref<const Matrix>& train, const Eigen::Ref<const Matrix>& val,
                         const std::vector<Index>& stage1_voxels, const PathConfig& cfg) {
    if (stage1_voxels.empty()) throw EmptyStage1("stage 1 selected no voxels");
    if (train.cols() < 2 || val.cols() < 2) {
        throw InvalidSplit("stage 2 needs >= 2 training and validation time points for lag pairs");
    }

    const Index v_total = train.rows();
    const Index n_tr = train.cols() - 1;
    const Index n_va = val.cols() - 1;
    const Index p = static_cast<Index>(stage1_voxels.size());

    Stage2Result result;
    result.stage1_voxels = stage1_voxels;
    result.per_voxel.resize(static_cast<std::size_t>(v_total));
    result.w_final = Matrix::Zero(p, v_total);

    const Matrix x_tr = gather_rows(train, stage1_voxels, 0, n_tr);
    const Matrix x_va = gather_rows(val, stage1_voxels, 0, n_va);
    const Matrix gram = x_tr * x_tr.transpose();

    parallel_for(static_cast<std::size_t>(v_total), cfg.threads, [&](std::size_t vj) {
        const Index j = static_cast<Index>(vj);
        const Vector y_tr = train.row(j).segment(1, n_tr).transpose();
        const Vector y_va = val.row(j).segment(1, n_va).transpose();
        const Vector xy = x_tr * y_tr;

        auto path = lasso_path_select_gram(gram, xy, y_tr.squaredNorm(), x_va, y_va,
                                           cfg.stage2_lambdas, cfg.stage2_min_ratio,
                                           cfg.stage2_refit, cfg.lasso);
        const auto mu_grid = make_mu_grid(gram, path.solution.support, cfg.ridge);
        auto ridge = ridge_on_support_gram(gram, xy, path.solution.support, mu_grid, x_va, y_va);

        VoxelFit fit;
        fit.voxel = j;
        fit.lambda_max = path.lambda_max;
        fit.chosen_lambda = path.chosen_lambda;
        fit.val_mse = path.val_mse;
        fit.support = path.solution.support;
        fit.chosen_mu = ridge.chosen_mu;
        fit.ridge_val_mse = ridge.val_mse;
        result.w_final.col(j) = ridge.coeffs;
        result.per_voxel[vj] = std::move(fit);
    });

    std::vector<Index> all;
    for (const auto& fit : result.per_voxel) {
        for (const Index s : fit.support) all.push_back(stage1_voxels[static_cast<std::size_t>(s)]);
    }
    result.selected = sorted_union(std::move(all));
    return result;
}

Vector test_mse_per_voxel(const Eigen::Ref<const Matrix>& test,
                          const std::vector<Index>& stage1_voxels, const Matrix& w_final) {
    const Index n_te = test.cols() - 1;
    const Matrix x_te = gather_rows(test, stage1_voxels, 0, n_te);
    Vector mse(test.rows());
    for (Index j = 0; j < test.rows(); ++j) {
        const Vector y_te = test.row(j).segment(1, n_te).transpose();
        mse(j) = (y_te - x_te.transpose() * w_final.col(j)).squaredNorm() /
                 static_cast<double>(n_te);
    }
    return mse;
}

} // namespace

Stage1Result run_stage1(const SubjectData& subject, const PathConfig& cfg) {
    return stage1_impl(subject.train(), subject.val(), subject.atlas(), cfg);
}

Stage2Result run_stage2(const SubjectData& subject, const Stage1Result& stage1,
                        const PathConfig& cfg) {
    return stage2_impl(subject.train(), subject.val(), stage1.selected, cfg);
}

SignificanceReport significance_test(const SubjectData& subject, const Stage2Result& stage2,
                                     const PathConfig& cfg, int n_perm, std::uint64_t seed,
                                     bool full_refit) {
    if (n_perm < 1) throw ConfigError("need at least one permutation");
    const auto test = subject.test();
    if (test.cols() < 2) throw InvalidSplit("test slice needs >= 2 time points for lag pairs");

    const Index v_total = subject.voxels();
    SignificanceReport report;
    report.n_perm = n_perm;
    report.seed = seed;
    report.full_refit = full_refit;
    report.observed_mse = test_mse_per_voxel(test, stage2.stage1_voxels, stage2.w_final);
    report.shuffled_mse.resize(v_total, n_perm);

    const auto train = subject.train();
    const auto val = subject.val();
    const Rng base(seed);

    if (!full_refit) {
        // Stage-1 set frozen; only the lag alignment of the training
        // predictors is destroyed. Column permutation leaves X X^T invariant,
        // so the Gram matrix is shared across every permutation.
        const Index n_tr = train.cols() - 1;
        const Index n_va = val.cols() - 1;
        const Matrix x_tr = gather_rows(train, stage2.stage1_voxels, 0, n_tr);
        const Matrix x_va = gather_rows(val, stage2.stage1_voxels, 0, n_va);
        const Matrix gram = x_tr * x_tr.transpose();
        const Index n_te = test.cols() - 1;
        const Matrix x_te = gather_rows(test, stage2.stage1_voxels, 0, n_te);

        Matrix targets_tr(n_tr, v_total); // column j = voxel j's next-step series
        Matrix targets_va(n_va, v_total);
        Matrix targets_te(n_te, v_total);
        for (Index j = 0; j < v_total; ++j) {
            targets_tr.col(j) = train.row(j).segment(1, n_tr).transpose();
            targets_va.col(j) = val.row(j).segment(1, n_va).transpose();
            targets_te.col(j) = test.row(j).segment(1, n_te).transpose();
        }
        const Vector y_sq = targets_tr.colwise().squaredNorm().transpose();

        parallel_for(static_cast<std::size_t>(n_perm), cfg.threads, [&](std::size_t pi) {
            Rng rng = base.child(pi);
            const auto perm = rng.permutation(static_cast<std::size_t>(n_tr));
            // shuffling predictor columns by perm == shuffling targets by its inverse
            Matrix scattered(n_tr, v_total);
            for (Index t = 0; t < n_tr; ++t) {
                scattered.row(static_cast<Index>(perm[static_cast<std::size_t>(t)])) =
                    targets_tr.row(t);
            }
            const Matrix xy_all = x_tr * scattered;

            for (Index j = 0; j < v_total; ++j) {
                auto path = lasso_path_select_gram(gram, xy_all.col(j), y_sq(j), x_va,
                                                   targets_va.col(j), cfg.stage2_lambdas,
                                                   cfg.stage2_min_ratio, cfg.stage2_refit,
                                                   cfg.lasso);
                const auto mu_grid = make_mu_grid(gram, path.solution.support, cfg.ridge);
                auto ridge = ridge_on_support_gram(gram, xy_all.col(j), path.solution.support,
                                                   mu_grid, x_va, targets_va.col(j));
                report.shuffled_mse(j, static_cast<Index>(pi)) =
                    (targets_te.col(j) - x_te.transpose() * ridge.coeffs).squaredNorm() /
                    static_cast<double>(n_te);
            }
        });
    } else {
        PathConfig inner = cfg;
        inner.threads = 1; // permutations already run in parallel
        parallel_for(static_cast<std::size_t>(n_perm), cfg.threads, [&](std::size_t pi) {
            Rng rng = base.child(pi);
            const auto perm = rng.permutation(static_cast<std::size_t>(train.cols()));
            Matrix train_perm(train.rows(), train.cols());
            for (Index t = 0; t < train.cols(); ++t) {
                train_perm.col(t) = train.col(static_cast<Index>(perm[static_cast<std::size_t>(t)]));
            }
            auto s1 = stage1_impl(train_perm, val, subject.atlas(), inner);
            if (s1.selected.empty()) {
                // null model for every voxel
                const Index n_te = test.cols() - 1;
                for (Index j = 0; j < v_total; ++j) {
                    report.shuffled_mse(j, static_cast<Index>(pi)) =
                        test.row(j).segment(1, n_te).squaredNorm() / static_cast<double>(n_te);
                }
                return;
            }
            auto s2 = stage2_impl(train_perm, val, s1.selected, inner);
            report.shuffled_mse.col(static_cast<Index>(pi)) =
                test_mse_per_voxel(test, s2.stage1_voxels, s2.w_final);
        });
    }

    report.p_values.resize(v_total);
    Index n_sig = 0;
    for (Index j = 0; j < v_total; ++j) {
        int count = 0;
        for (int p = 0; p < n_perm; ++p) {
            if (report.shuffled_mse(j, p) <= report.observed_mse(j)) ++count;
        }
        report.p_values(j) = static_cast<double>(1 + count) / static_cast<double>(1 + n_perm);
        if (report.p_values(j) <= 0.05) ++n_sig;
    }
    report.significant_fraction = static_cast<double>(n_sig) / static_cast<double>(v_total);
    return report;
}

namespace {

std::string join_ids(const std::vector<Index>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ids[i]);
    }
    return out.empty() ? "-" : out;
}

} // namespace

void write_stage1_report(const std::filesystem::path& path, const std::string& subject_id,
                         const Stage1Result& r) {
    auto out = open_text_out(path);
    out << "subject = " << subject_id << "\n";
    out << "stage = 1\n";
    out << "n_regions = " << r.regions.size() << "\n";
    out << "v_s1 = " << r.selected.size() << "\n";
    out << "selected = " << join_ids(r.selected) << "\n";
    out << "\n";
    out << "region\tlambda_max\tchosen_lambda\tval_mse\tn_selected\trefit_skipped\t"
           "refit_skipped_any\tselected\n";
    for (const auto& reg : r.regions) {
        out << reg.region << '\t' << fmt_g17(reg.lambda_max) << '\t'
            << fmt_g17(reg.chosen_lambda) << '\t' << fmt_g17(reg.val_mse) << '\t'
            << reg.selected.size() << '\t' << (reg.refit_skipped ? 1 : 0) << '\t'
            << (reg.refit_skipped_any ? 1 : 0) << '\t' << join_ids(reg.selected) << "\n";
    }
}

void write_stage2_report(const std::filesystem::path& path, const std::string& subject_id,
                         const Stage2Result& r) {
    auto out = open_text_out(path);
    out << "subject = " << subject_id << "\n";
    out << "stage = 2\n";
    out << "v_s1 = " << r.stage1_voxels.size() << "\n";
    out << "v_s2 = " << r.selected.size() << "\n";
    out << "stage1_voxels = " << join_ids(r.stage1_voxels) << "\n";
    out << "selected = " << join_ids(r.selected) << "\n";
    out << "\n";
    out << "voxel\tlambda_max\tchosen_lambda\tval_mse\tsupport_size\tchosen_mu\tridge_val_mse\tsupport\n";
    for (const auto& fit : r.per_voxel) {
        std::vector<Index> global;
        global.reserve(fit.support.size());
        for (const Index s : fit.support) {
            global.push_back(r.stage1_voxels[static_cast<std::size_t>(s)]);
        }
        out << fit.voxel << '\t' << fmt_g17(fit.lambda_max) << '\t' << fmt_g17(fit.chosen_lambda)
            << '\t' << fmt_g17(fit.val_mse) << '\t' << fit.support.size() << '\t'
            << fmt_g17(fit.chosen_mu) << '\t' << fmt_g17(fit.ridge_val_mse) << '\t'
            << join_ids(global) << "\n";
    }
}

void write_significance_report(const std::filesystem::path& path, const std::string& subject_id,
                               const SignificanceReport& r) {
    auto out = open_text_out(path);
    out << "subject = " << subject_id << "\n";
    out << "n_perm = " << r.n_perm << "\n";
    out << "seed = " << r.seed << "\n";
    out << "full_refit = " << (r.full_refit ? 1 : 0) << "\n";
    out << "significant_fraction = " << fmt_g17(r.significant_fraction) << "\n";
    out << "\n";
    out << "voxel\tobserved_mse\tp_value\n";
    for (Index j = 0; j < r.observed_mse.size(); ++j) {
        out << j << '\t' << fmt_g17(r.observed_mse(j)) << '\t' << fmt_g17(r.p_values(j)) << "\n";
    }
}

} // namespace scn
