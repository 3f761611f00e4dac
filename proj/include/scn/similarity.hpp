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

#ifndef SCN_SIMILARITY_HPP
#define SCN_SIMILARITY_HPP

#include <array>
#include <filesystem>
#include <vector>

#include "scn/data_model.hpp"

namespace scn {

// Dense scalar volume on the common grid, x fastest.
struct Volume {
    std::array<std::uint32_t, 3> dims{0, 0, 0};
    Vector values;

    static Volume zeros(std::uint32_t nx, std::uint32_t ny, std::uint32_t nz) {
        Volume v;
        v.dims = {nx, ny, nz};
        v.values = Vector::Zero(std::size_t(nx) * ny * nz);
        return v;
    }
    double& at(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
        return values(x + std::size_t(dims[0]) * (y + std::size_t(dims[1]) * z));
    }
    double at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
        return values(x + std::size_t(dims[0]) * (y + std::size_t(dims[1]) * z));
    }
};

// Scatter one per-voxel map onto the grid; untouched cells stay zero.
Volume project_to_grid(const Eigen::Ref<const Vector>& map, const CoordinateTable& coords);

// Separable Gaussian blur, zero-padded, normalized kernel truncated to
// radius = ceil(3 sigma).
Volume blur3d(const Volume& volume, double sigma = 3.0);

// |<a,b>| / (||a|| ||b||), computed as sqrt(dot(a,b)^2 / (dot(a,a) dot(b,b)))
// so identical or sign-flipped inputs give exactly 1. Throws ZeroNorm on an
// all-zero volume.
double cossim_abs(const Volume& a, const Volume& b);

// Max absolute cosine similarity of v against a component set (ties keep the
// smallest index).
double max_abs_cossim(const Volume& v, const std::vector<Volume>& set);

struct SimilarityProfile {
    int subject = 0;   // cohort index of the owning subject
    int component = 0; // IC index within the subject
    Vector is_values;  // one entry per cohort subject; self entry = 1
    double igs = 0.0;
};

// All (subject, component) profiles against the cohort and the group maps.
// group_maps may be empty (IGS = 0 then).
std::vector<SimilarityProfile> similarity_profiles(
    const std::vector<std::vector<Volume>>& subject_maps, const std::vector<Volume>& group_maps,
    unsigned threads = 1);

// Strictly more than half of the non-self IS entries above IGS.
bool dominance_test(const SimilarityProfile& profile);

struct DominanceSummary {
    std::vector<bool> ic_pass;            // aligned with the profile list
    std::vector<double> subject_fraction; // per subject, fraction of passing ICs
    std::vector<bool> subject_pass;       // fraction >= 0.5
};
DominanceSummary dominance_summary(const std::vector<SimilarityProfile>& profiles,
                                   int n_subjects);

enum class ProfileDistance { Manhattan, Euclidean };
enum class Linkage { Wpgma, Upgma, Single, Complete };

// Feature vector is [IS_1..IS_S, IGS]; the IGS coordinate carries weight |S|.
double profile_distance(const SimilarityProfile& a, const SimilarityProfile& b,
                        ProfileDistance distance = ProfileDistance::Manhattan);

struct ClusterOptions {
    int n_clusters = 4;
    ProfileDistance distance = ProfileDistance::Manhattan;
    Linkage linkage = Linkage::Wpgma;
};

struct ClusterMerge {
    int a = 0;
    int b = 0; // cluster ids; leaves are 0..n-1, merges create n, n+1, ...
    double height = 0.0;
};

struct ClusterStats {
    int size = 0;
    double mean_is = 0.0;  // mean over members of the non-self IS average
    double mean_igs = 0.0;
};

struct ClusterResult {
    std::vector<ClusterMerge> merges; // full dendrogram, heights nondecreasing
    std::vector<int> labels;          // flat cut, 0..n_clusters-1
    std::vector<ClusterStats> clusters;
    int flagged = -1; // cluster maximizing mean_is - mean_igs (high IS, low IGS)
};

// Agglomerative clustering with deterministic smallest-pair tie-breaking.
ClusterResult cluster_profiles(const std::vector<SimilarityProfile>& profiles,
                               const ClusterOptions& opts = {});

// TSV / heatmap-matrix emission.
void write_profiles_report(const std::filesystem::path& tsv_path,
                           const std::filesystem::path& fmat_path,
                           const std::vector<SimilarityProfile>& profiles,
                           const std::vector<std::string>& subject_ids);
void write_dominance_report(const std::filesystem::path& path,
                            const std::vector<SimilarityProfile>& profiles,
                            const DominanceSummary& summary,
                            const std::vector<std::string>& subject_ids);
void write_cluster_report(const std::filesystem::path& merges_path,
                          const std::filesystem::path& clusters_path,
                          const std::vector<SimilarityProfile>& profiles,
                          const ClusterResult& result,
                          const std::vector<std::string>& subject_ids);

} // namespace scn

#endif
