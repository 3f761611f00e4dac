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

#ifndef SCN_SYNTH_HPP
#define SCN_SYNTH_HPP

#include <filesystem>
#include <vector>

#include "scn/data_model.hpp"

namespace scn {

// Contiguous equal-size region blocks over V voxels.
AtlasPartition block_atlas(Index voxels, std::uint32_t regions);

// Cube layout: voxel v at spacing * (v % n, (v / n) % n, v / n^2) with
// n = ceil(V^(1/3)); spacing > 1 leaves room for a meaningful blur.
CoordinateTable cube_coords(Index voxels, std::int32_t spacing = 1);

// First-order linear dynamics x_t = A x_{t-1} + noise_scale * eps_t with the
// transition matrix supported on a small driver voxel set.
struct PlantedVarSpec {
    Index voxels = 0;
    Index timepoints = 0;
    std::uint32_t regions = 1;
    std::vector<Index> drivers;
    Matrix transition; // V x V, nonzero columns only at driver indices
    double noise_scale = 1.0;
    std::uint64_t seed = 0;
    int burn_in = 200;
};

// Self-coupled AR(1) drivers plus one-driver fan-in for every other voxel,
// with drive strength chosen so the driven-signal-to-noise ratio equals snr.
PlantedVarSpec make_planted_var_spec(Index voxels, Index timepoints, std::uint32_t regions,
                                     int n_drivers, double snr, double noise_scale,
                                     std::uint64_t seed, double self_coupling = 0.0);

// Largest |eigenvalue| of the driver-restricted transition block (equals the
// spectral radius of the full column-sparse matrix).
double planted_spectral_radius(const Matrix& transition, const std::vector<Index>& drivers);

struct VarSubject {
    Matrix data; // V x T, raw (not standardized)
    AtlasPartition atlas;
    CoordinateTable coords;
    std::vector<Index> drivers;
    Matrix transition;
};

VarSubject gen_var_subject(const PlantedVarSpec& spec);

// Shared non-Gaussian spatial maps mixed by per-subject temporal courses:
// data_s = maps^T * mixing_s^T + noise. Maps are the recoverable sources of
// the spatial decomposition; mixing courses are AR(1) so the lag-1 selection
// stages have signal to work with.
struct PlantedSourceSpec {
    Index voxels = 400;
    Index timepoints = 240;
    int n_subjects = 5;
    int k = 3;
    std::uint32_t regions = 8;
    double noise_scale = 0.02;
    double temporal_rho = 0.8;  // AR(1) coefficient of the mixing courses
    double map_density = 1.0;   // fraction of voxels carrying each map
    double mask_fraction = 1.0; // per-subject kept-voxel fraction
    std::int32_t grid_spacing = 1;
    std::uint64_t seed = 0;
};

struct SourceSubject {
    Matrix data; // V_s x T, raw
    AtlasPartition atlas;
    CoordinateTable coords;
    std::vector<Index> kept; // global voxel ids, ascending
    Matrix mixing;           // T x K
};

struct SourceCohort {
    std::vector<SourceSubject> subjects;
    Matrix shared_maps;          // K x V on the full grid voxel set
    CoordinateTable grid_coords; // full common-grid table
};

SourceCohort gen_source_cohort(const PlantedSourceSpec& spec);

// Cohort persistence: per-subject FMAT/ATLS/CTBL files plus cohort.tsv
// (subject, matrix, atlas, coords; paths relative to the manifest) and
// truth.tsv recording the planted structure. Returns the cohort.tsv path.
std::filesystem::path write_var_cohort(const std::filesystem::path& dir,
                                       const std::vector<PlantedVarSpec>& specs);
std::filesystem::path write_source_cohort(const std::filesystem::path& dir,
                                          const SourceCohort& cohort);

} // namespace scn

#endif
