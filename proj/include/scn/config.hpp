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

#ifndef SCN_CONFIG_HPP
#define SCN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "scn/ica.hpp"
#include "scn/pipeline.hpp"
#include "scn/similarity.hpp"

namespace scn {

// Flat `key = value` configuration with `#` comments and dotted keys.
// Environment variables override file values: SCN_STAGE1_N_LAMBDAS maps to
// stage1.n_lambdas (prefix dropped, lowercased, first underscore -> dot).
// CLI flags override both.
struct RunConfig {
    // paths
    std::string data_cohort;
    std::string data_group_maps;   // optional externally computed group maps (FMAT)
    std::string data_group_coords; // CTBL matching the group maps
    std::string output_dir = "out";
    // split / standardization
    double split_train_frac = 0.8;
    double split_val_frac = 0.1;
    bool standardize_scale = false;
    // stage 1
    int stage1_n_lambdas = 20;
    double stage1_lambda_min_ratio = 1e-3;
    int stage1_max_iter = 500;
    double stage1_tol = 1e-8;
    double stage1_epsilon = 1e-10;
    double stage1_kkt_tol = 1e-6;
    // stage 2
    int stage2_n_lambdas = 10;
    double stage2_lambda_min_ratio = 1e-3;
    int stage2_max_sweeps = 1000;
    double stage2_tol_scale = 1e-9;
    bool stage2_refit = true;
    // final ridge
    int ridge_n_mus = 8;
    double ridge_mu_lo = 1e-6;
    double ridge_mu_hi = 1e2;
    // significance
    int significance_n_perm = 100;
    bool significance_full_refit = false;
    // ica
    int ica_components = 20;
    int ica_max_iter = 1000;
    double ica_tol = 1e-6;
    // blur + similarity
    double blur_sigma = 3.0;
    int cluster_count = 4;
    std::string cluster_distance = "manhattan"; // or euclidean
    std::string cluster_linkage = "wpgma";      // or upgma | single | complete
    // run
    std::uint64_t run_seed = 1;
    int run_threads = 1;
    // synth
    std::string synth_kind = "var"; // or sources
    int synth_subjects = 5;
    int synth_voxels = 600;
    int synth_timepoints = 300;
    int synth_regions = 10;
    int synth_drivers = 5;
    double synth_snr = 3.0;
    double synth_noise = 1.0;
    int synth_sources = 3;
    double synth_temporal_rho = 0.8;
    double synth_map_density = 1.0;
    double synth_mask_fraction = 1.0;
    double synth_source_noise = 0.02;

    bool operator==(const RunConfig&) const = default;

    static RunConfig from_file(const std::filesystem::path& path);
    void apply_line(const std::string& line);                    // one `key = value`
    void apply_kv(const std::string& key, const std::string& value);
    void apply_env();                                            // SCN_* overrides
    std::string serialize() const;                               // canonical key order
    void validate() const;                                       // value sanity

    PathConfig path_config() const;
    IcaOptions ica_options() const;
    ClusterOptions cluster_options() const;
};

} // namespace scn

#endif
