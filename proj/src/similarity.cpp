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

#include "scn/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scn/parallel.hpp"
#include "scn/textio.hpp"

namespace scn {

Volume project_to_grid(const Eigen::Ref<const Vector>& map, const CoordinateTable& coords) {
    if (static_cast<std::size_t>(map.size()) != coords.n_voxels()) {
        throw DimensionMismatch("map covers " + std::to_string(map.size()) +
                                " voxels, coordinate table " + std::to_string(coords.n_voxels()));
    }
    auto volume = Volume::zeros(coords.dims().nx, coords.dims().ny, coords.dims().nz);
    std::vector<bool> filled(static_cast<std::size_t>(volume.values.size()), false);
    for (std::size_t v = 0; v < coords.n_voxels(); ++v) {
        const auto cell = coords.linear_index(v);
        if (filled[cell]) {
            throw DuplicateCoordinate("voxel " + std::to_string(v) +
                                      " scatters onto an already-filled grid cell");
        }
        filled[cell] = true;
        volume.values(static_cast<Index>(cell)) = map(static_cast<Index>(v));
    }
    return volume;
}

Volume blur3d(const Volume& volume, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("blur sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    Vector kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
        kernel(i + radius) = w;
        sum += w;
    }
    kernel /= sum;

    const int nx = static_cast<int>(volume.dims[0]);
    const int ny = static_cast<int>(volume.dims[1]);
    const int nz = static_cast<int>(volume.dims[2]);
    auto index = [&](int x, int y, int z) {
        return static_cast<Index>(x + std::size_t(nx) * (y + std::size_t(ny) * z));
    };

    Volume a = volume;
    Volume b = Volume::zeros(volume.dims[0], volume.dims[1], volume.dims[2]);

    // pass along x
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int xs = x - i;
                    if (xs < 0 || xs >= nx) continue;
                    acc += kernel(i + radius) * a.values(index(xs, y, z));
                }
                b.values(index(x, y, z)) = acc;
            }
        }
    }
    // pass along y
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int ys = y - i;
                    if (ys < 0 || ys >= ny) continue;
                    acc += kernel(i + radius) * b.values(index(x, ys, z));
                }
                a.values(index(x, y, z)) = acc;
            }
        }
    }
    // pass along z
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int zs = z - i;
                    if (zs < 0 || zs >= nz) continue;
                    acc += kernel(i + radius) * a.values(index(x, y, zs));
                }
                b.values(index(x, y, z)) = acc;
            }
        }
    }
    return b;
}

double cossim_abs(const Volume& a, const Volume& b) {
    if (a.dims != b.dims) throw DimensionMismatch("volume grids differ");
    double dab = 0.0, daa = 0.0, dbb = 0.0;
    const Index n = a.values.size();
    for (Index i = 0; i < n; ++i) {
        const double x = a.values(i);
        const double y = b.values(i);
        dab += x * y;
        daa += x * x;
        dbb += y * y;
    }
    if (daa == 0.0 || dbb == 0.0) throw ZeroNorm("cosine similarity of an all-zero volume");
    // Ratio form keeps a == +-b exactly at 1 (identical rounding above and below).
    double r = (dab * dab) / (daa * dbb);
    if (r > 1.0) r = 1.0;
    return std::sqrt(r);
}

double max_abs_cossim(const Volume& v, const std::vector<Volume>& set) {
    double best = 0.0;
    for (const auto& candidate : set) best = std::max(best, cossim_abs(v, candidate));
    return best;
}

std::vector<SimilarityProfile> similarity_profiles(
    const std::vector<std::vector<Volume>>& subject_maps, const std::vector<Volume>& group_maps,
    unsigned threads) {
    const int n_subjects = static_cast<int>(subject_maps.size());
    std::vector<std::pair<int, int>> tasks;
    for (int s = 0; s < n_subjects; ++s) {
        for (int k = 0; k < static_cast<int>(subject_maps[static_cast<std::size_t>(s)].size()); ++k) {
            tasks.emplace_back(s, k);
        }
    }

    std::vector<SimilarityProfile> profiles(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t ti) {
        const auto [s, k] = tasks[ti];
        const auto& mine = subject_maps[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
        SimilarityProfile p;
        p.subject = s;
        p.component = k;
        p.is_values.resize(n_subjects);
        for (int other = 0; other < n_subjects; ++other) {
            p.is_values(other) = max_abs_cossim(mine, subject_maps[static_cast<std::size_t>(other)]);
        }
        p.igs = group_maps.empty() ? 0.0 : max_abs_cossim(mine, group_maps);
        profiles[ti] = std::move(p);
    });
    return profiles;
}

bool dominance_test(const SimilarityProfile& profile) {
    const int n = static_cast<int>(profile.is_values.size());
    int above = 0;
    for (int s = 0; s < n; ++s) {
        if (s == profile.subject) continue;
        if (profile.is_values(s) > profile.igs) ++above;
    }
    const int others = n - 1;
    const int needed = (others + 1) / 2;
    return others > 0 && above >= needed;
}

DominanceSummary dominance_summary(const std::vector<SimilarityProfile>& profiles,
                                   int n_subjects) {
    DominanceSummary out;
    out.ic_pass.reserve(profiles.size());
    std::vector<int> total(static_cast<std::size_t>(n_subjects), 0);
    std::vector<int> passed(static_cast<std::size_t>(n_subjects), 0);
    for (const auto& p : profiles) {
        const bool pass = dominance_test(p);
        out.ic_pass.push_back(pass);
        ++total[static_cast<std::size_t>(p.subject)];
        if (pass) ++passed[static_cast<std::size_t>(p.subject)];
    }
    out.subject_fraction.resize(static_cast<std::size_t>(n_subjects), 0.0);
    out.subject_pass.resize(static_cast<std::size_t>(n_subjects), false);
    for (int s = 0; s < n_subjects; ++s) {
        const auto i = static_cast<std::size_t>(s);
        if (total[i] > 0) {
            out.subject_fraction[i] = static_cast<double>(passed[i]) / static_cast<double>(total[i]);
        }
        out.subject_pass[i] = out.subject_fraction[i] >= 0.5;
    }
    return out;
}

double profile_distance(const SimilarityProfile& a, const SimilarityProfile& b,
                        ProfileDistance distance) {
    if (a.is_values.size() != b.is_values.size()) {
        throw DimensionMismatch("profiles cover different cohort sizes");
    }
    const double s = static_cast<double>(a.is_values.size());
    if (distance == ProfileDistance::Manhattan) {
        return (a.is_values - b.is_values).cwiseAbs().sum() + s * std::abs(a.igs - b.igs);
    }
    const double d_igs = a.igs - b.igs;
    return std::sqrt((a.is_values - b.is_values).squaredNorm() + s * d_igs * d_igs);
}

ClusterResult cluster_profiles(const std::vector<SimilarityProfile>& profiles,
                               const ClusterOptions& opts) {
    const int n = static_cast<int>(profiles.size());
    if (opts.n_clusters < 1) throw ConfigError("cluster count must be positive");
    if (n < opts.n_clusters) {
        throw TooFewProfiles("have " + std::to_string(n) + " profiles, need >= " +
                             std::to_string(opts.n_clusters));
    }

    const int max_id = 2 * n - 1;
    std::vector<bool> active(static_cast<std::size_t>(max_id), false);
    std::vector<int> sizes(static_cast<std::size_t>(max_id), 0);
    // full pairwise table over cluster ids (leaves then merges)
    Matrix dist = Matrix::Zero(max_id, max_id);
    for (int i = 0; i < n; ++i) {
        active[static_cast<std::size_t>(i)] = true;
        sizes[static_cast<std::size_t>(i)] = 1;
        for (int j = i + 1; j < n; ++j) {
            const double d = profile_distance(profiles[static_cast<std::size_t>(i)],
                                              profiles[static_cast<std::size_t>(j)], opts.distance);
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    ClusterResult result;
    std::vector<int> parent(static_cast<std::size_t>(max_id));
    for (int i = 0; i < max_id; ++i) parent[static_cast<std::size_t>(i)] = i;

    int next_id = n;
    for (int step = 0; step < n - 1; ++step) {
        int best_a = -1, best_b = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < next_id; ++a) {
            if (!active[static_cast<std::size_t>(a)]) continue;
            for (int b = a + 1; b < next_id; ++b) {
                if (!active[static_cast<std::size_t>(b)]) continue;
                if (dist(a, b) < best_d) { // strict: ties keep the smallest (a, b)
                    best_d = dist(a, b);
                    best_a = a;
                    best_b = b;
                }
            }
        }

        const int id = next_id++;
        result.merges.push_back({best_a, best_b, best_d});
        active[static_cast<std::size_t>(best_a)] = false;
        active[static_cast<std::size_t>(best_b)] = false;
        active[static_cast<std::size_t>(id)] = true;
        sizes[static_cast<std::size_t>(id)] =
            sizes[static_cast<std::size_t>(best_a)] + sizes[static_cast<std::size_t>(best_b)];
        parent[static_cast<std::size_t>(best_a)] = id;
        parent[static_cast<std::size_t>(best_b)] = id;

        for (int c = 0; c < id; ++c) {
            if (!active[static_cast<std::size_t>(c)]) continue;
            const double da = dist(best_a, c);
            const double db = dist(best_b, c);
            double d;
            switch (opts.linkage) {
            case Linkage::Wpgma:
                d = 0.5 * (da + db);
                break;
            case Linkage::Upgma:
                d = (sizes[static_cast<std::size_t>(best_a)] * da +
                     sizes[static_cast<std::size_t>(best_b)] * db) /
                    static_cast<double>(sizes[static_cast<std::size_t>(id)]);
                break;
            case Linkage::Single:
                d = std::min(da, db);
                break;
            case Linkage::Complete:
            default:
                d = std::max(da, db);
                break;
            }
            dist(id, c) = d;
            dist(c, id) = d;
        }
    }

    // flat cut: follow parents through the first n - n_clusters merges
    const int kept_merges = n - opts.n_clusters;
    std::vector<int> root(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int r = i;
        while (parent[static_cast<std::size_t>(r)] != r &&
               parent[static_cast<std::size_t>(r)] < n + kept_merges) {
            r = parent[static_cast<std::size_t>(r)];
        }
        root[static_cast<std::size_t>(i)] = r;
    }
    // label clusters by ascending smallest-member order
    std::vector<int> order;
    std::vector<int> label_of(static_cast<std::size_t>(max_id), -1);
    result.labels.resize(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        const int r = root[static_cast<std::size_t>(i)];
        if (label_of[static_cast<std::size_t>(r)] < 0) {
            label_of[static_cast<std::size_t>(r)] = static_cast<int>(order.size());
            order.push_back(r);
        }
        result.labels[static_cast<std::size_t>(i)] = label_of[static_cast<std::size_t>(r)];
    }

    result.clusters.resize(order.size());
    for (int i = 0; i < n; ++i) {
        const auto& p = profiles[static_cast<std::size_t>(i)];
        auto& c = result.clusters[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(i)])];
        c.size += 1;
        const int others = static_cast<int>(p.is_values.size()) - 1;
        const double non_self =
            others > 0 ? (p.is_values.sum() - p.is_values(p.subject)) / static_cast<double>(others)
                       : 0.0;
        c.mean_is += non_self;
        c.mean_igs += p.igs;
    }
    double best_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < result.clusters.size(); ++c) {
        auto& stats = result.clusters[c];
        stats.mean_is /= stats.size;
        stats.mean_igs /= stats.size;
        const double gap = stats.mean_is - stats.mean_igs;
        if (gap > best_gap) {
            best_gap = gap;
            result.flagged = static_cast<int>(c);
        }
    }
    return result;
}

void write_profiles_report(const std::filesystem::path& tsv_path,
                           const std::filesystem::path& fmat_path,
                           const std::vector<SimilarityProfile>& profiles,
                           const std::vector<std::string>& subject_ids) {
    auto out = open_text_out(tsv_path);
    out << "subject\tcomponent";
    for (const auto& id : subject_ids) out << "\tis_" << id;
    out << "\tigs\n";
    for (const auto& p : profiles) {
        out << subject_ids[static_cast<std::size_t>(p.subject)] << '\t' << p.component;
        for (Index s = 0; s < p.is_values.size(); ++s) out << '\t' << fmt_g17(p.is_values(s));
        out << '\t' << fmt_g17(p.igs) << "\n";
    }

    if (!profiles.empty()) {
        Matrix features(static_cast<Index>(profiles.size()), profiles.front().is_values.size() + 1);
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            features.row(static_cast<Index>(i)).head(profiles[i].is_values.size()) =
                profiles[i].is_values.transpose();
            features(static_cast<Index>(i), features.cols() - 1) = profiles[i].igs;
        }
        write_matrix(fmat_path, features);
    }
}

void write_dominance_report(const std::filesystem::path& path,
                            const std::vector<SimilarityProfile>& profiles,
                            const DominanceSummary& summary,
                            const std::vector<std::string>& subject_ids) {
    auto out = open_text_out(path);
    int n_pass = 0;
    for (const bool b : summary.ic_pass) n_pass += b ? 1 : 0;
    out << "n_profiles = " << profiles.size() << "\n";
    out << "ic_pass_count = " << n_pass << "\n";
    int subj_fail = 0;
    for (const bool b : summary.subject_pass) subj_fail += b ? 0 : 1;
    out << "subjects_failed = " << subj_fail << "\n";
    out << "\n";
    out << "subject\tcomponent\tigs\tpass\n";
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto& p = profiles[i];
        out << subject_ids[static_cast<std::size_t>(p.subject)] << '\t' << p.component << '\t'
            << fmt_g17(p.igs) << '\t' << (summary.ic_pass[i] ? 1 : 0) << "\n";
    }
    out << "\n";
    out << "subject\tfraction_pass\tpass\n";
    for (std::size_t s = 0; s < summary.subject_fraction.size(); ++s) {
        out << subject_ids[s] << '\t' << fmt_g17(summary.subject_fraction[s]) << '\t'
            << (summary.subject_pass[s] ? 1 : 0) << "\n";
    }
}

void write_cluster_report(const std::filesystem::path& merges_path,
                          const std::filesystem::path& clusters_path,
                          const std::vector<SimilarityProfile>& profiles,
                          const ClusterResult& result,
                          const std::vector<std::string>& subject_ids) {
    {
        auto out = open_text_out(merges_path);
        out << "step\ta\tb\theight\n";
        for (std::size_t i = 0; i < result.merges.size(); ++i) {
            const auto& m = result.merges[i];
            out << i << '\t' << m.a << '\t' << m.b << '\t' << fmt_g17(m.height) << "\n";
        }
    }
    auto out = open_text_out(clusters_path);
    out << "n_clusters = " << result.clusters.size() << "\n";
    out << "flagged_cluster = " << result.flagged << "\n";
    out << "\n";
    out << "cluster\tsize\tmean_is\tmean_igs\tflagged\n";
    for (std::size_t c = 0; c < result.clusters.size(); ++c) {
        const auto& stats = result.clusters[c];
        out << c << '\t' << stats.size << '\t' << fmt_g17(stats.mean_is) << '\t'
            << fmt_g17(stats.mean_igs) << '\t' << (static_cast<int>(c) == result.flagged ? 1 : 0)
            << "\n";
    }
    out << "\n";
    out << "subject\tcomponent\tcluster\n";
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto& p = profiles[i];
        out << subject_ids[static_cast<std::size_t>(p.subject)] << '\t' << p.component << '\t'
            << result.labels[i] << "\n";
    }
}

} // namespace scn
