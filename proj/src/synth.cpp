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

#include "scn/synth.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "scn/rng.hpp"

namespace scn {

namespace {

// rng stream indices, so independent draws stay independent when specs evolve
constexpr std::uint64_t kStreamDrivers = 11;
constexpr std::uint64_t kStreamTransition = 12;
constexpr std::uint64_t kStreamSeries = 13;
constexpr std::uint64_t kStreamMaps = 21;
constexpr std::uint64_t kStreamMixing = 22;
constexpr std::uint64_t kStreamNoise = 23;
constexpr std::uint64_t kStreamMask = 24;

std::ofstream open_text(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    return out;
}

} // namespace

AtlasPartition block_atlas(Index voxels, std::uint32_t regions) {
    if (voxels < static_cast<Index>(regions)) {
        throw FormatError("need at least one voxel per region");
    }
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(voxels));
    for (Index v = 0; v < voxels; ++v) {
        auto id = static_cast<std::uint32_t>((v * static_cast<Index>(regions)) / voxels) + 1;
        if (id > regions) id = regions;
        labels[static_cast<std::size_t>(v)] = id;
    }
    return AtlasPartition(std::move(labels), regions);
}

CoordinateTable cube_coords(Index voxels, std::int32_t spacing) {
    if (spacing < 1) throw FormatError("grid spacing must be >= 1");
    const auto side = static_cast<std::int32_t>(std::ceil(std::cbrt(static_cast<double>(voxels))));
    std::vector<std::array<std::int32_t, 3>> coords(static_cast<std::size_t>(voxels));
    for (Index v = 0; v < voxels; ++v) {
        const auto i = static_cast<std::int32_t>(v);
        coords[static_cast<std::size_t>(v)] = {spacing * (i % side), spacing * ((i / side) % side),
                                               spacing * (i / (side * side))};
    }
    const auto cells = static_cast<std::uint32_t>(spacing * (side - 1) + 1);
    CoordinateTable::GridDims dims{cells, cells, cells};
    return CoordinateTable(dims, std::move(coords));
}

double planted_spectral_radius(const Matrix& transition, const std::vector<Index>& drivers) {
    if (drivers.empty()) return 0.0;
    const Index d = static_cast<Index>(drivers.size());
    Matrix block(d, d);
    for (Index a = 0; a < d; ++a) {
        for (Index b = 0; b < d; ++b) {
            block(a, b) = transition(drivers[static_cast<std::size_t>(a)],
                                     drivers[static_cast<std::size_t>(b)]);
        }
    }
    Eigen::EigenSolver<Matrix> es(block, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

PlantedVarSpec make_planted_var_spec(Index voxels, Index timepoints, std::uint32_t regions,
                                     int n_drivers, double snr, double noise_scale,
                                     std::uint64_t seed, double self_coupling) {
    if (n_drivers < 1 || static_cast<Index>(n_drivers) > voxels) {
        throw FormatError("driver count out of range");
    }
    if (!(std::abs(self_coupling) < 1.0)) throw UnstableSpec("|self coupling| must be < 1");

    PlantedVarSpec spec;
    spec.voxels = voxels;
    spec.timepoints = timepoints;
    spec.regions = regions;
    spec.noise_scale = noise_scale;
    spec.seed = seed;

    Rng base(seed);
    Rng pick = base.child(kStreamDrivers);
    std::set<Index> chosen;
    for (int i = 0; i < n_drivers; ++i) {
        // spread drivers across regions round-robin
        const auto r = static_cast<std::uint32_t>(i % static_cast<int>(regions));
        const Index lo = (static_cast<Index>(r) * voxels) / static_cast<Index>(regions);
        const Index hi = ((static_cast<Index>(r) + 1) * voxels) / static_cast<Index>(regions);
        Index v;
        do {
            v = lo + static_cast<Index>(pick.below(static_cast<std::uint64_t>(hi - lo)));
        } while (chosen.count(v));
        chosen.insert(v);
    }
    spec.drivers.assign(chosen.begin(), chosen.end());

    const double drive = std::sqrt(snr * (1.0 - self_coupling * self_coupling));
    Rng assign = base.child(kStreamTransition);
    spec.transition = Matrix::Zero(voxels, voxels);
    for (const Index d : spec.drivers) spec.transition(d, d) = self_coupling;
    for (Index v = 0; v < voxels; ++v) {
        if (chosen.count(v)) continue;
        const Index d = spec.drivers[assign.below(spec.drivers.size())];
        const double sign = assign.uniform01() < 0.5 ? -1.0 : 1.0;
        spec.transition(v, d) = sign * drive;
    }
    return spec;
}

VarSubject gen_var_subject(const PlantedVarSpec& spec) {
    if (spec.voxels < 1 || spec.timepoints < 3) {
        throw FormatError("planted series needs V >= 1 and T >= 3");
    }
    if (spec.transition.rows() != spec.voxels || spec.transition.cols() != spec.voxels) {
        throw DimensionMismatch("transition matrix must be V x V");
    }
    std::set<Index> driver_set(spec.drivers.begin(), spec.drivers.end());
    for (Index j = 0; j < spec.voxels; ++j) {
        if (driver_set.count(j)) continue;
        if (spec.transition.col(j).cwiseAbs().maxCoeff() != 0.0) {
            throw FormatError("transition column " + std::to_string(j) +
                              " is nonzero but not a driver");
        }
    }
    if (planted_spectral_radius(spec.transition, spec.drivers) >= 1.0) {
        throw UnstableSpec("transition spectral radius >= 1");
    }

    // Only driver columns act; multiply through the restricted block.
    const Index nd = static_cast<Index>(spec.drivers.size());
    Matrix driver_cols(spec.voxels, nd);
    for (Index a = 0; a < nd; ++a) {
        driver_cols.col(a) = spec.transition.col(spec.drivers[static_cast<std::size_t>(a)]);
    }

    Rng noise = Rng(spec.seed).child(kStreamSeries);
    Vector x = Vector::Zero(spec.voxels);
    Vector xd = Vector::Zero(nd);
    Matrix data(spec.voxels, spec.timepoints);
    const Index total = static_cast<Index>(spec.burn_in) + spec.timepoints;
    for (Index t = 0; t < total; ++t) {
        for (Index a = 0; a < nd; ++a) xd(a) = x(spec.drivers[static_cast<std::size_t>(a)]);
        Vector next = driver_cols * xd;
        if (spec.noise_scale != 0.0) {
            for (Index v = 0; v < spec.voxels; ++v) next(v) += spec.noise_scale * noise.normal();
        }
        x = std::move(next);
        if (t >= static_cast<Index>(spec.burn_in)) data.col(t - spec.burn_in) = x;
    }

    return {std::move(data), block_atlas(spec.voxels, spec.regions), cube_coords(spec.voxels),
            spec.drivers, spec.transition};
}

SourceCohort gen_source_cohort(const PlantedSourceSpec& spec) {
    if (spec.k < 1 || spec.n_subjects < 1) throw FormatError("need k >= 1 and subjects >= 1");
    if (spec.voxels < static_cast<Index>(spec.regions)) {
        throw FormatError("need at least one voxel per region");
    }
    if (!(spec.mask_fraction > 0.0 && spec.mask_fraction <= 1.0)) {
        throw FormatError("mask_fraction must be in (0, 1]");
    }

    Rng base(spec.seed);
    SourceCohort cohort{{}, Matrix(), cube_coords(spec.voxels, spec.grid_spacing)};

    Rng map_rng = base.child(kStreamMaps);
    cohort.shared_maps = Matrix::Zero(spec.k, spec.voxels);
    for (int k = 0; k < spec.k; ++k) {
        for (Index v = 0; v < spec.voxels; ++v) {
            if (spec.map_density >= 1.0 || map_rng.uniform01() < spec.map_density) {
                cohort.shared_maps(k, v) = map_rng.laplace_unit();
            }
        }
    }

    const auto full_atlas = block_atlas(spec.voxels, spec.regions);
    const auto& full_coords = cohort.grid_coords.coords();

    for (int s = 0; s < spec.n_subjects; ++s) {
        Rng mix_rng = base.child(kStreamMixing).child(static_cast<std::uint64_t>(s));
        Matrix mixing(spec.timepoints, spec.k);
        const double innov = std::sqrt(1.0 - spec.temporal_rho * spec.temporal_rho);
        for (int k = 0; k < spec.k; ++k) {
            double c = mix_rng.normal();
            for (int warm = 0; warm < 50; ++warm) c = spec.temporal_rho * c + innov * mix_rng.normal();
            for (Index t = 0; t < spec.timepoints; ++t) {
                c = spec.temporal_rho * c + innov * mix_rng.normal();
                mixing(t, k) = c;
            }
        }

        // kept voxel subset; every atlas region keeps at least one voxel
        std::vector<Index> kept;
        if (spec.mask_fraction >= 1.0) {
            kept.resize(static_cast<std::size_t>(spec.voxels));
            for (Index v = 0; v < spec.voxels; ++v) kept[static_cast<std::size_t>(v)] = v;
        } else {
            Rng mask_rng = base.child(kStreamMask).child(static_cast<std::uint64_t>(s));
            std::set<Index> keep_set;
            for (Index v = 0; v < spec.voxels; ++v) {
                if (mask_rng.uniform01() < spec.mask_fraction) keep_set.insert(v);
            }
            for (std::uint32_t r = 1; r <= spec.regions; ++r) {
                const auto& region = full_atlas.region(r);
                const bool any = std::any_of(region.begin(), region.end(),
                                             [&](Index v) { return keep_set.count(v) > 0; });
                if (!any) keep_set.insert(region.front());
            }
            kept.assign(keep_set.begin(), keep_set.end());
        }

        Rng noise_rng = base.child(kStreamNoise).child(static_cast<std::uint64_t>(s));
        const Index vs = static_cast<Index>(kept.size());
        Matrix data(vs, spec.timepoints);
        Matrix maps_kept(spec.k, vs);
        for (Index i = 0; i < vs; ++i) maps_kept.col(i) = cohort.shared_maps.col(kept[static_cast<std::size_t>(i)]);
        data.noalias() = maps_kept.transpose() * mixing.transpose();
        if (spec.noise_scale != 0.0) {
            for (Index v = 0; v < vs; ++v) {
                for (Index t = 0; t < spec.timepoints; ++t) {
                    data(v, t) += spec.noise_scale * noise_rng.normal();
                }
            }
        }

        std::vector<std::uint32_t> labels(kept.size());
        std::vector<std::array<std::int32_t, 3>> coords(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            labels[i] = full_atlas.labels()[static_cast<std::size_t>(kept[i])];
            coords[i] = full_coords[static_cast<std::size_t>(kept[i])];
        }

        cohort.subjects.push_back(SourceSubject{
            std::move(data), AtlasPartition(std::move(labels), spec.regions),
            CoordinateTable(cohort.grid_coords.dims(), std::move(coords)), std::move(kept),
            std::move(mixing)});
    }
    return cohort;
}

namespace {

std::string subject_name(int i) {
    std::string n = std::to_string(i + 1);
    while (n.size() < 2) n.insert(n.begin(), '0');
    return "s" + n;
}

} // namespace

std::filesystem::path write_var_cohort(const std::filesystem::path& dir,
                                       const std::vector<PlantedVarSpec>& specs) {
    std::filesystem::create_directories(dir);
    auto cohort_tsv = open_text(dir / "cohort.tsv");
    cohort_tsv << "subject\tmatrix\tatlas\tcoords\n";
    auto truth_tsv = open_text(dir / "truth.tsv");
    truth_tsv << "subject\tdrivers\ttransition\n";

    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto name = subject_name(static_cast<int>(i));
        const auto subject = gen_var_subject(specs[i]);
        write_matrix(dir / (name + ".fmat"), subject.data);
        write_atlas(dir / (name + ".atls"), subject.atlas);
        write_coords(dir / (name + ".ctbl"), subject.coords);
        write_matrix(dir / (name + "_transition.fmat"), subject.transition);
        cohort_tsv << name << '\t' << name << ".fmat\t" << name << ".atls\t" << name << ".ctbl\n";
        truth_tsv << name << '\t';
        for (std::size_t d = 0; d < subject.drivers.size(); ++d) {
            if (d) truth_tsv << ',';
            truth_tsv << subject.drivers[d];
        }
        truth_tsv << '\t' << name << "_transition.fmat\n";
    }
    return dir / "cohort.tsv";
}

std::filesystem::path write_source_cohort(const std::filesystem::path& dir,
                                          const SourceCohort& cohort) {
    std::filesystem::create_directories(dir);
    auto cohort_tsv = open_text(dir / "cohort.tsv");
    cohort_tsv << "subject\tmatrix\tatlas\tcoords\n";
    auto truth_tsv = open_text(dir / "truth.tsv");
    truth_tsv << "key\tvalue\n";
    write_matrix(dir / "shared_maps.fmat", cohort.shared_maps);
    write_coords(dir / "grid.ctbl", cohort.grid_coords);
    truth_tsv << "shared_maps\tshared_maps.fmat\n";
    truth_tsv << "grid_coords\tgrid.ctbl\n";

    for (std::size_t i = 0; i < cohort.subjects.size(); ++i) {
        const auto name = subject_name(static_cast<int>(i));
        const auto& s = cohort.subjects[i];
        write_matrix(dir / (name + ".fmat"), s.data);
        write_atlas(dir / (name + ".atls"), s.atlas);
        write_coords(dir / (name + ".ctbl"), s.coords);
        write_matrix(dir / (name + "_mixing.fmat"), s.mixing);
        cohort_tsv << name << '\t' << name << ".fmat\t" << name << ".atls\t" << name << ".ctbl\n";
        truth_tsv << "mixing." << name << '\t' << name << "_mixing.fmat\n";
    }
    return dir / "cohort.tsv";
}

} // namespace scn
