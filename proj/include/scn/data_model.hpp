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

#ifndef SCN_DATA_MODEL_HPP
#define SCN_DATA_MODEL_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scn/errors.hpp"

namespace scn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// A subject's voxel-by-time series: rows are voxels, columns time points.
// Validated on construction: V >= 1, T >= 3, all values finite.
class TimeSeriesMatrix {
public:
    explicit TimeSeriesMatrix(Matrix values);

    const Matrix& values() const { return values_; }
    Index voxels() const { return values_.rows(); }
    Index timepoints() const { return values_.cols(); }

private:
    Matrix values_;
};

// Column-contiguous train/validation/test boundaries:
// train = [0, train_end), val = [train_end, val_end), test = [val_end, T).
struct TemporalSplit {
    Index train_end = 0;
    Index val_end = 0;

    // floor(0.8 T) / floor(0.1 T) / remainder; 688 points split as 550/68/70.
    static TemporalSplit default_policy(Index t_total);
    static TemporalSplit fraction_policy(Index t_total, double train_frac, double val_frac);

    void validate(Index t_total) const;
    Index train_width() const { return train_end; }
    Index val_width() const { return val_end - train_end; }
    Index test_width(Index t_total) const { return t_total - val_end; }
};

std::array<Matrix, 3> split(const TimeSeriesMatrix& x, const TemporalSplit& policy);

// One region id per voxel, ids 1..n_regions, every region nonempty.
class AtlasPartition {
public:
    AtlasPartition(std::vector<std::uint32_t> labels, std::uint32_t n_regions);

    std::uint32_t n_regions() const { return n_regions_; }
    std::size_t n_voxels() const { return labels_.size(); }
    const std::vector<std::uint32_t>& labels() const { return labels_; }
    // 1-based region id -> ascending voxel indices.
    const std::vector<Index>& region(std::uint32_t id) const;

private:
    std::vector<std::uint32_t> labels_;
    std::uint32_t n_regions_;
    std::vector<std::vector<Index>> regions_;
};

// Integer grid placement for each voxel; stands in for anatomical registration.
class CoordinateTable {
public:
    struct GridDims {
        std::uint32_t nx = 0, ny = 0, nz = 0;
        bool operator==(const GridDims&) const = default;
    };

    CoordinateTable(GridDims dims, std::vector<std::array<std::int32_t, 3>> coords);

    const GridDims& dims() const { return dims_; }
    std::size_t n_voxels() const { return coords_.size(); }
    const std::vector<std::array<std::int32_t, 3>>& coords() const { return coords_; }
    std::size_t cell_count() const {
        return std::size_t(dims_.nx) * dims_.ny * dims_.nz;
    }
    std::size_t linear_index(std::size_t voxel) const {
        const auto& c = coords_[voxel];
        return std::size_t(c[0]) + std::size_t(dims_.nx) * (std::size_t(c[1]) + std::size_t(dims_.ny) * std::size_t(c[2]));
    }

private:
    GridDims dims_;
    std::vector<std::array<std::int32_t, 3>> coords_;
};

// Per-voxel centering (and optional scaling) statistics, fitted on the
// training slice only so that validation and test stay untouched by leakage.
struct StandardizationStats {
    Vector mean;
    Vector stddev; // empty when scaling is off
    bool scaled() const { return stddev.size() > 0; }
};

StandardizationStats fit_stats(const Eigen::Ref<const Matrix>& train, bool with_scale = false);
Matrix standardize(const Eigen::Ref<const Matrix>& x, const StandardizationStats& stats);

// Lag-aligned views of selected rows: lagged = columns 0..T-2, next = 1..T-1.
struct LagPair {
    Matrix lagged;
    Matrix next;
};
LagPair lag_pair(const Eigen::Ref<const Matrix>& x, const std::vector<Index>& rows);

// A fully ingested subject: standardized series plus atlas, coordinates and
// split. Stage fits read train()/val(); test() is only touched by the
// significance scoring.
class SubjectData {
public:
    SubjectData(std::string id, TimeSeriesMatrix series, AtlasPartition atlas,
                CoordinateTable coords, TemporalSplit split, bool scale = false);

    const std::string& id() const { return id_; }
    Index voxels() const { return data_.rows(); }
    Index timepoints() const { return data_.cols(); }

    Eigen::Ref<const Matrix> train() const { return data_.leftCols(split_.train_end); }
    Eigen::Ref<const Matrix> val() const { return data_.middleCols(split_.train_end, split_.val_width()); }
    Eigen::Ref<const Matrix> test() const { return data_.rightCols(data_.cols() - split_.val_end); }
    Eigen::Ref<const Matrix> full() const { return data_; }

    const AtlasPartition& atlas() const { return atlas_; }
    const CoordinateTable& coords() const { return coords_; }
    const TemporalSplit& split_policy() const { return split_; }
    const StandardizationStats& stats() const { return stats_; }

private:
    std::string id_;
    Matrix data_; // standardized
    AtlasPartition atlas_;
    CoordinateTable coords_;
    TemporalSplit split_;
    StandardizationStats stats_;
};

// Binary file formats (all little-endian, bit-exact round trips):
//   FMAT: "FMAT" u32 version=1, u64 rows, u64 cols, rows*cols f64 row-major
//   ATLS: "ATLS" u32 version=1, u64 n_voxels, u32 n_regions, n u32 labels
//   CTBL: "CTBL" u32 version=1, u32 nx ny nz, u64 n_voxels, n i32 triples
Matrix load_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m);
AtlasPartition load_atlas(const std::filesystem::path& path);
void write_atlas(const std::filesystem::path& path, const AtlasPartition& atlas);
CoordinateTable load_coords(const std::filesystem::path& path);
void write_coords(const std::filesystem::path& path, const CoordinateTable& table);

} // namespace scn

#endif
