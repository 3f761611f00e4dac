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

#ifndef SCN_PIPELINE_HPP
#define SCN_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "scn/data_model.hpp"
#include "scn/l21.hpp"
#include "scn/lasso.hpp"

namespace scn {

struct PathConfig {
    int stage1_lambdas = 20;
    double stage1_min_ratio = 1e-3;
    int stage2_lambdas = 10;
    double stage2_min_ratio = 1e-3;
    bool stage2_refit = true; // score stage-2 lambdas with the unshrunk refit
    L21Options l21;
    LassoOptions lasso;
    RidgeGrid ridge;
    unsigned threads = 1;
};

// Stage 1: per atlas region, group-sparse selection of the region voxels that
// predict the rest of the cortex one step ahead.
struct RegionFit {
    std::uint32_t region = 0;
    double lambda_max = 0.0;
    double chosen_lambda = 0.0;
    double val_mse = 0.0;
    std::vector<Index> selected; // global voxel ids, ascending
    bool refit_skipped = false;     // OLS refit skipped at the chosen lambda
    bool refit_skipped_any = false; // some path point scored the shrunk fit
};

struct Stage1Result {
    std::vector<RegionFit> regions;
    std::vector<Index> selected; // union over regions, ascending
};

Stage1Result run_stage1(const SubjectData& subject, const PathConfig& cfg);

// Stage 2: per target voxel, LASSO over the stage-1 survivors followed by a
// support-constrained ridge; w_final column j is the final model for voxel j.
struct VoxelFit {
    Index voxel = 0;
    double lambda_max = 0.0;
    double chosen_lambda = 0.0;
    double val_mse = 0.0;
    std::vector<Index> support; // indices into stage1 voxel list
    double chosen_mu = 0.0;
    double ridge_val_mse = 0.0;
};

struct Stage2Result {
    std::vector<Index> stage1_voxels;
    std::vector<VoxelFit> per_voxel; // one per target voxel
    std::vector<Index> selected;     // union of supports, global ids, ascending
    Matrix w_final;                  // V_S1 x V
};

Stage2Result run_stage2(const SubjectData& subject, const Stage1Result& stage1,
                        const PathConfig& cfg);

// Permutation significance: refits the stage-2 models against time-shuffled
// training predictors (stage-1 selection frozen; full_refit = true reruns
// stage 1 on a column-shuffled training slice as well) and compares test MSE.
// p = (1 + #{shuffled <= observed}) / (1 + n_perm).
struct SignificanceReport {
    Vector observed_mse;
    Matrix shuffled_mse; // V x n_perm
    Vector p_values;
    double significant_fraction = 0.0; // p <= 0.05
    int n_perm = 0;
    std::uint64_t seed = 0;
    bool full_refit = false;
};

SignificanceReport significance_test(const SubjectData& subject, const Stage2Result& stage2,
                                     const PathConfig& cfg, int n_perm, std::uint64_t seed,
                                     bool full_refit = false);

// Report files: `key = value` headers, one blank line, then a TSV table.
void write_stage1_report(const std::filesystem::path& path, const std::string& subject_id,
                         const Stage1Result& r);
void write_stage2_report(const std::filesystem::path& path, const std::string& subject_id,
                         const Stage2Result& r);
void write_significance_report(const std::filesystem::path& path, const std::string& subject_id,
                               const SignificanceReport& r);

} // namespace scn

#endif
