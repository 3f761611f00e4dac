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

#include "scn/data_model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace scn {

namespace {

std::string where(const std::filesystem::path& path) { return path.string() + ": "; }

// --- little-endian packing -------------------------------------------------

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_i32(std::string& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw TruncatedFile(where(path) + "cannot open file");
    }

    std::uint64_t offset() const { return offset_; }

    void bytes(char* dst, std::size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        const auto got = in_.gcount();
        if (static_cast<std::size_t>(got) != n) {
            throw TruncatedFile(where(path_) + "while reading " + what + " at byte offset " +
                                std::to_string(offset_) + ": wanted " + std::to_string(n) +
                                " bytes, got " + std::to_string(got));
        }
        offset_ += n;
    }

    std::uint32_t u32(const char* what) {
        char b[4];
        bytes(b, 4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b[i])) << (8 * i);
        return v;
    }

    std::uint64_t u64(const char* what) {
        char b[8];
        bytes(b, 8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[i])) << (8 * i);
        return v;
    }

    std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

    void magic(const char expected[4]) {
        char b[4];
        bytes(b, 4, "magic");
        if (std::memcmp(b, expected, 4) != 0) {
            throw BadMagic(where(path_) + "bad magic at offset 0, expected '" +
                           std::string(expected, 4) + "'");
        }
    }

    void version(std::uint32_t expected) {
        const auto at = offset_;
        const auto v = u32("version");
        if (v != expected) {
            throw FormatError(where(path_) + "unsupported version " + std::to_string(v) +
                              " at byte offset " + std::to_string(at));
        }
    }

    void expect_eof() {
        char b;
        in_.read(&b, 1);
        if (in_.gcount() != 0) {
            throw FormatError(where(path_) + "trailing bytes at offset " + std::to_string(offset_));
        }
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t offset_ = 0;
};

void write_file(const std::filesystem::path& path, const std::string& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(where(path) + "cannot open file for writing");
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw FormatError(where(path) + "write failed");
}

} // namespace

// --- TimeSeriesMatrix --------------------------------------------------------

TimeSeriesMatrix::TimeSeriesMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1) throw DimensionMismatch("time series needs at least one voxel");
    if (values_.cols() < 3) {
        throw DimensionMismatch("time series needs at least 3 time points, got " +
                                std::to_string(values_.cols()));
    }
    if (!values_.allFinite()) throw NonFiniteValue("time series contains non-finite values");
}

// --- TemporalSplit -----------------------------------------------------------

TemporalSplit TemporalSplit::default_policy(Index t_total) {
    return fraction_policy(t_total, 0.8, 0.1);
}

TemporalSplit TemporalSplit::fraction_policy(Index t_total, double train_frac, double val_frac) {
    if (!(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0)) {
        throw InvalidSplit("split fractions must be positive with train + val < 1");
    }
    TemporalSplit s;
    s.train_end = static_cast<Index>(std::floor(train_frac * static_cast<double>(t_total)));
    s.val_end = s.train_end + static_cast<Index>(std::floor(val_frac * static_cast<double>(t_total)));
    s.validate(t_total);
    return s;
}

void TemporalSplit::validate(Index t_total) const {
    if (!(0 < train_end && train_end < val_end && val_end < t_total)) {
        throw InvalidSplit("need 0 < train_end < val_end < T, got train_end=" +
                           std::to_string(train_end) + " val_end=" + std::to_string(val_end) +
                           " T=" + std::to_string(t_total));
    }
}

std::array<Matrix, 3> split(const TimeSeriesMatrix& x, const TemporalSplit& policy) {
    policy.validate(x.timepoints());
    const Matrix& m = x.values();
    return {m.leftCols(policy.train_end), m.middleCols(policy.train_end, policy.val_width()),
            m.rightCols(m.cols() - policy.val_end)};
}

// --- AtlasPartition ----------------------------------------------------------

AtlasPartition::AtlasPartition(std::vector<std::uint32_t> labels, std::uint32_t n_regions)
    : labels_(std::move(labels)), n_regions_(n_regions) {
    if (labels_.empty()) throw FormatError("atlas has no voxels");
    if (n_regions_ == 0) throw FormatError("atlas declares zero regions");
    regions_.resize(n_regions_);
    for (std::size_t v = 0; v < labels_.size(); ++v) {
        const auto id = labels_[v];
        if (id < 1 || id > n_regions_) {
            throw FormatError("atlas label " + std::to_string(id) + " at voxel " +
                              std::to_string(v) + " outside 1.." + std::to_string(n_regions_));
        }
        regions_[id - 1].push_back(static_cast<Index>(v));
    }
    for (std::uint32_t r = 0; r < n_regions_; ++r) {
        if (regions_[r].empty()) {
            throw FormatError("atlas region " + std::to_string(r + 1) + " is empty");
        }
    }
}

const std::vector<Index>& AtlasPartition::region(std::uint32_t id) const {
    if (id < 1 || id > n_regions_) {
        throw FormatError("region id " + std::to_string(id) + " outside 1.." +
                          std::to_string(n_regions_));
    }
    return regions_[id - 1];
}

// --- CoordinateTable ---------------------------------------------------------

CoordinateTable::CoordinateTable(GridDims dims, std::vector<std::array<std::int32_t, 3>> coords)
    : dims_(dims), coords_(std::move(coords)) {
    if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) {
        throw FormatError("coordinate grid dimensions must be positive");
    }
    if (coords_.empty()) throw FormatError("coordinate table has no voxels");
    std::vector<bool> seen(cell_count(), false);
    for (std::size_t v = 0; v < coords_.size(); ++v) {
        const auto& c = coords_[v];
        if (c[0] < 0 || c[1] < 0 || c[2] < 0 || std::uint32_t(c[0]) >= dims_.nx ||
            std::uint32_t(c[1]) >= dims_.ny || std::uint32_t(c[2]) >= dims_.nz) {
            throw FormatError("voxel " + std::to_string(v) + " coordinate out of grid bounds");
        }
        const auto idx = linear_index(v);
        if (seen[idx]) {
            throw DuplicateCoordinate("voxel " + std::to_string(v) +
                                      " shares a grid cell with an earlier voxel");
        }
        seen[idx] = true;
    }
}

// --- standardization ---------------------------------------------------------

StandardizationStats fit_stats(const Eigen::Ref<const Matrix>& train, bool with_scale) {
    StandardizationStats stats;
    stats.mean = train.rowwise().mean();
    if (with_scale) {
        const Index n = train.cols();
        stats.stddev.resize(train.rows());
        for (Index v = 0; v < train.rows(); ++v) {
            double ss = 0.0;
            for (Index t = 0; t < n; ++t) {
                const double d = train(v, t) - stats.mean(v);
                ss += d * d;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n > 1 ? n - 1 : 1));
            if (sd <= 1e-12 * std::max(1.0, std::abs(stats.mean(v)))) {
                throw ZeroVariance("voxel " + std::to_string(v) +
                                   " is constant on the training slice");
            }
            stats.stddev(v) = sd;
        }
    }
    return stats;
}

Matrix standardize(const Eigen::Ref<const Matrix>& x, const StandardizationStats& stats) {
    if (x.rows() != stats.mean.size()) {
        throw DimensionMismatch("stats fitted for " + std::to_string(stats.mean.size()) +
                                " voxels, data has " + std::to_string(x.rows()));
    }
    Matrix out = x.colwise() - stats.mean;
    if (stats.scaled()) out.array().colwise() /= stats.stddev.array();
    return out;
}

// --- lag pairs ---------------------------------------------------------------

LagPair lag_pair(const Eigen::Ref<const Matrix>& x, const std::vector<Index>& rows) {
    if (rows.empty()) throw EmptySubset("lag_pair needs a nonempty row subset");
    if (x.cols() < 2) throw DimensionMismatch("lag_pair needs at least 2 time points");
    LagPair out;
    const Index n = x.cols() - 1;
    out.lagged.resize(static_cast<Index>(rows.size()), n);
    out.next.resize(static_cast<Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index r = rows[i];
        if (r < 0 || r >= x.rows()) {
            throw DimensionMismatch("row index " + std::to_string(r) + " out of range");
        }
        out.lagged.row(static_cast<Index>(i)) = x.row(r).head(n);
        out.next.row(static_cast<Index>(i)) = x.row(r).tail(n);
    }
    return out;
}

// --- SubjectData -------------------------------------------------------------

SubjectData::SubjectData(std::string id, TimeSeriesMatrix series, AtlasPartition atlas,
                         CoordinateTable coords, TemporalSplit split, bool scale)
    : id_(std::move(id)), atlas_(std::move(atlas)), coords_(std::move(coords)), split_(split) {
    split_.validate(series.timepoints());
    if (atlas_.n_voxels() != static_cast<std::size_t>(series.voxels())) {
        throw DimensionMismatch("atlas covers " + std::to_string(atlas_.n_voxels()) +
                                " voxels, series has " + std::to_string(series.voxels()));
    }
    if (coords_.n_voxels() != static_cast<std::size_t>(series.voxels())) {
        throw DimensionMismatch("coordinate table covers " + std::to_string(coords_.n_voxels()) +
                                " voxels, series has " + std::to_string(series.voxels()));
    }
    stats_ = fit_stats(series.values().leftCols(split_.train_end), scale);
    data_ = standardize(series.values(), stats_);
}

// --- FMAT --------------------------------------------------------------------

Matrix load_matrix(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("FMAT");
    r.version(1);
    const auto rows = r.u64("row count");
    const auto cols = r.u64("column count");
    if (rows == 0 || cols == 0) throw FormatError(where(path) + "zero-sized matrix");
    if (rows > (1ull << 32) || cols > (1ull << 32) || rows * cols > (1ull << 34)) {
        throw FormatError(where(path) + "implausible matrix shape " + std::to_string(rows) + "x" +
                          std::to_string(cols));
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::uint64_t element = 0;
    for (std::uint64_t i = 0; i < rows; ++i) {
        for (std::uint64_t j = 0; j < cols; ++j, ++element) {
            const auto at = r.offset();
            const double v = r.f64("matrix payload");
            if (!std::isfinite(v)) {
                throw NonFiniteValue(where(path) + "non-finite value at element index " +
                                     std::to_string(element) + " (byte offset " +
                                     std::to_string(at) + ")");
            }
            m(static_cast<Index>(i), static_cast<Index>(j)) = v;
        }
    }
    r.expect_eof();
    return m;
}

void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m) {
    if (m.rows() == 0 || m.cols() == 0) throw FormatError(where(path) + "refusing to write empty matrix");
    std::string out;
    out.reserve(24 + static_cast<std::size_t>(m.size()) * 8);
    out += "FMAT";
    put_u32(out, 1);
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    std::uint64_t element = 0;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j, ++element) {
            const double v = m(i, j);
            if (!std::isfinite(v)) {
                throw NonFiniteValue(where(path) + "non-finite value at element index " +
                                     std::to_string(element));
            }
            put_f64(out, v);
        }
    }
    write_file(path, out);
}

// --- ATLS --------------------------------------------------------------------

AtlasPartition load_atlas(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("ATLS");
    r.version(1);
    const auto n_voxels = r.u64("voxel count");
    const auto n_regions = r.u32("region count");
    if (n_voxels == 0 || n_voxels > (1ull << 32)) {
        throw FormatError(where(path) + "implausible voxel count " + std::to_string(n_voxels));
    }
    std::vector<std::uint32_t> labels(n_voxels);
    for (std::uint64_t v = 0; v < n_voxels; ++v) labels[v] = r.u32("atlas labels");
    r.expect_eof();
    try {
        return AtlasPartition(std::move(labels), n_regions);
    } catch (const Error& e) {
        throw FormatError(where(path) + e.what());
    }
}

void write_atlas(const std::filesystem::path& path, const AtlasPartition& atlas) {
    std::string out;
    out.reserve(20 + atlas.n_voxels() * 4);
    out += "ATLS";
    put_u32(out, 1);
    put_u64(out, static_cast<std::uint64_t>(atlas.n_voxels()));
    put_u32(out, atlas.n_regions());
    for (const auto label : atlas.labels()) put_u32(out, label);
    write_file(path, out);
}

// --- CTBL --------------------------------------------------------------------

CoordinateTable load_coords(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("CTBL");
    r.version(1);
    CoordinateTable::GridDims dims;
    dims.nx = r.u32("grid nx");
    dims.ny = r.u32("grid ny");
    dims.nz = r.u32("grid nz");
    const auto n_voxels = r.u64("voxel count");
    if (n_voxels == 0 || n_voxels > (1ull << 32)) {
        throw FormatError(where(path) + "implausible voxel count " + std::to_string(n_voxels));
    }
    std::vector<std::array<std::int32_t, 3>> coords(n_voxels);
    for (std::uint64_t v = 0; v < n_voxels; ++v) {
        coords[v][0] = r.i32("coordinates");
        coords[v][1] = r.i32("coordinates");
        coords[v][2] = r.i32("coordinates");
    }
    r.expect_eof();
    try {
        return CoordinateTable(dims, std::move(coords));
    } catch (const DuplicateCoordinate&) {
        throw;
    } catch (const Error& e) {
        throw FormatError(where(path) + e.what());
    }
}

void write_coords(const std::filesystem::path& path, const CoordinateTable& table) {
    std::string out;
    out.reserve(28 + table.n_voxels() * 12);
    out += "CTBL";
    put_u32(out, 1);
    put_u32(out, table.dims().nx);
    put_u32(out, table.dims().ny);
    put_u32(out, table.dims().nz);
    put_u64(out, static_cast<std::uint64_t>(table.n_voxels()));
    for (const auto& c : table.coords()) {
        put_i32(out, c[0]);
        put_i32(out, c[1]);
        put_i32(out, c[2]);
    }
    write_file(path, out);
}

} // namespace scn
