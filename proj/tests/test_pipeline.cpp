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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "scn/pipeline.hpp"
#include "scn/rng.hpp"
#include "scn/synth.hpp"

using namespace scn;

namespace {

SubjectData planted_subject(Index v, Index t, std::uint32_t regions, int drivers, double snr,
                            std::uint64_t seed) {
    const auto spec = make_planted_var_spec(v, t, regions, drivers, snr, 1.0, seed);
    auto subject = gen_var_subject(spec);
    return SubjectData("synthetic", TimeSeriesMatrix(std::move(subject.data)),
                       std::move(subject.atlas), std::move(subject.coords),
                       TemporalSplit::default_policy(t));
}

bool contains(const std::vector<Index>& v, Index x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

} // namespace

TEST_CASE("stage 1 finds the driving region and little else") {
    // drivers planted only in region 3 of 4 (voxels 20..29); half the voxels
    // stay pure noise so the targets are not one shared component
    const Index v = 40, t = 400;
    PlantedVarSpec spec = make_planted_var_spec(v, t, 4, 2, 2.0, 1.0, 1001);
    spec.transition.setZero();
    spec.drivers = {21, 26};
    Rng assign(5);
    for (Index vx = 0; vx < v; ++vx) {
        if (vx == 21 || vx == 26 || vx % 2 == 1) continue;
        spec.transition(vx, spec.drivers[assign.below(2)]) = std::sqrt(2.0);
    }
    auto generated = gen_var_subject(spec);
    SubjectData subject("planted", TimeSeriesMatrix(std::move(generated.data)),
                        std::move(generated.atlas), std::move(generated.coords),
                        TemporalSplit::default_policy(t));

    const auto result = run_stage1(subject, {});
    REQUIRE(result.regions.size() == 4);
    const auto& region3 = result.regions[2];
    CHECK(!region3.selected.empty());
    for (const Index s : region3.selected) {
        CHECK((s == 21 || s == 26));
    }
    // driverless regions are (near-)empty: argmin-validation selection lets
    // an occasional noise dip through, but most regions reject everything
    int empty_regions = 0;
    std::size_t spurious = 0;
    for (const auto& reg : result.regions) {
        if (reg.region == 3) continue;
        empty_regions += reg.selected.empty() ? 1 : 0;
        spurious += reg.selected.size();
        CHECK(reg.selected.size() <= 6);
    }
    CHECK(empty_regions >= 2);
    CHECK(spurious <= 8);
    // union invariants
    for (const Index s : result.selected) {
        CHECK(s >= 0);
        CHECK(s < v);
    }
    const auto first_lambda_empty = result.regions[0];
    CHECK(first_lambda_empty.lambda_max > 0.0);
}

TEST_CASE("stage 2 keeps drivers and its outputs satisfy the declared invariants") {
    auto subject = planted_subject(60, 260, 6, 3, 6.0, 2002);
    const auto stage1 = run_stage1(subject, {});
    REQUIRE(!stage1.selected.empty());
    const auto stage2 = run_stage2(subject, stage1, {});

    CHECK(stage2.w_final.rows() == static_cast<Index>(stage1.selected.size()));
    CHECK(stage2.w_final.cols() == 60);

    // column supports of the final ridge matrix lie inside the LASSO supports
    for (Index j = 0; j < 60; ++j) {
        std::set<Index> lasso_support(stage2.per_voxel[static_cast<std::size_t>(j)].support.begin(),
                                      stage2.per_voxel[static_cast<std::size_t>(j)].support.end());
        for (Index r = 0; r < stage2.w_final.rows(); ++r) {
            if (stage2.w_final(r, j) != 0.0) CHECK(lasso_support.count(r) == 1);
        }
    }

    // selected-set nesting
    for (const Index s : stage2.selected) CHECK(contains(stage2.stage1_voxels, s));
    CHECK(stage2.selected.size() <= stage2.stage1_voxels.size());
    CHECK(std::is_sorted(stage2.selected.begin(), stage2.selected.end()));
}

TEST_CASE("a voxel that copies a stage-1 voxel's lag gets that voxel with weight one") {
    auto spec = make_planted_var_spec(30, 300, 3, 2, 6.0, 1.0, 3003);
    auto generated = gen_var_subject(spec);
    const Index driver = spec.drivers[0];
    const Index copycat = [&] {
        for (Index vx = 0; vx < 30; ++vx) {
            if (!contains(spec.drivers, vx)) return vx;
        }
        return Index{0};
    }();
    // overwrite: x_copycat(t) = x_driver(t-1), exactly
    for (Index t = 299; t >= 1; --t) generated.data(copycat, t) = generated.data(driver, t - 1);
    generated.data(copycat, 0) = 0.0;

    SubjectData subject("copycat", TimeSeriesMatrix(std::move(generated.data)),
                        std::move(generated.atlas), std::move(generated.coords),
                        TemporalSplit::default_policy(300));
    const auto stage1 = run_stage1(subject, {});
    REQUIRE(contains(stage1.selected, driver));
    const auto stage2 = run_stage2(subject, stage1, {});

    const auto& fit = stage2.per_voxel[static_cast<std::size_t>(copycat)];
    REQUIRE(fit.support.size() == 1);
    CHECK(stage2.stage1_voxels[static_cast<std::size_t>(fit.support[0])] == driver);
    CHECK(std::abs(stage2.w_final(fit.support[0], copycat) - 1.0) <= 0.05);
}

TEST_CASE("stage 2 with an empty stage-1 set is an error") {
    auto subject = planted_subject(20, 100, 2, 1, 3.0, 4004);
    Stage1Result empty;
    CHECK_THROWS_AS(run_stage2(subject, empty, {}), EmptyStage1);
}

TEST_CASE("duplicate predictor voxels keep the pipeline deterministic") {
    auto spec = make_planted_var_spec(24, 200, 3, 2, 5.0, 1.0, 5005);
    auto generated = gen_var_subject(spec);
    // duplicate the first driver's series onto a neighbor
    const Index d = spec.drivers[0];
    const Index dup = d + 1 < 24 ? d + 1 : d - 1;
    generated.data.row(dup) = generated.data.row(d);

    SubjectData subject("dup", TimeSeriesMatrix(generated.data), generated.atlas,
                        generated.coords, TemporalSplit::default_policy(200));
    const auto first = run_stage1(subject, {});
    const auto second = run_stage1(subject, {});
    CHECK(first.selected == second.selected);
    for (std::size_t r = 0; r < first.regions.size(); ++r) {
        CHECK(first.regions[r].chosen_lambda == second.regions[r].chosen_lambda);
        CHECK(first.regions[r].selected == second.regions[r].selected);
    }
}

TEST_CASE("results are identical across thread counts") {
    auto subject = planted_subject(48, 220, 4, 2, 5.0, 6006);
    PathConfig serial;
    serial.threads = 1;
    PathConfig parallel;
    parallel.threads = 4;

    const auto s1a = run_stage1(subject, serial);
    const auto s1b = run_stage1(subject, parallel);
    CHECK(s1a.selected == s1b.selected);

    const auto s2a = run_stage2(subject, s1a, serial);
    const auto s2b = run_stage2(subject, s1b, parallel);
    CHECK(s2a.w_final == s2b.w_final);
    CHECK(s2a.selected == s2b.selected);

    const auto siga = significance_test(subject, s2a, serial, 20, 99);
    const auto sigb = significance_test(subject, s2b, parallel, 20, 99);
    CHECK(siga.observed_mse == sigb.observed_mse);
    CHECK(siga.shuffled_mse == sigb.shuffled_mse);
    CHECK(siga.p_values == sigb.p_values);
}

TEST_CASE("significance flags planted targets and stays calm on noise") {
    SUBCASE("planted drivers make their targets significant") {
        auto subject = planted_subject(30, 400, 3, 2, 6.0, 7007);
        const auto stage1 = run_stage1(subject, {});
        const auto stage2 = run_stage2(subject, stage1, {});
        const auto report = significance_test(subject, stage2, {}, 100, 11);

        CHECK(report.p_values.size() == 30);
        // p-values live on the add-one permutation grid {k/101}
        for (Index j = 0; j < 30; ++j) {
            const double scaled = report.p_values(j) * 101.0;
            CHECK(std::abs(scaled - std::round(scaled)) <= 1e-9);
            CHECK(report.p_values(j) >= 1.0 / 101.0);
            CHECK(report.p_values(j) <= 1.0);
        }
        CHECK(report.significant_fraction >= 0.9);
    }
    SUBCASE("pure-noise subjects stay near the nominal level") {
        PlantedVarSpec spec;
        spec.voxels = 30;
        spec.timepoints = 400;
        spec.regions = 3;
        spec.transition = Matrix::Zero(30, 30);
        spec.noise_scale = 1.0;
        spec.seed = 8008;
        auto generated = gen_var_subject(spec);
        SubjectData subject("noise", TimeSeriesMatrix(std::move(generated.data)),
                            std::move(generated.atlas), std::move(generated.coords),
                            TemporalSplit::default_policy(400));
        const auto stage1 = run_stage1(subject, {});
        if (stage1.selected.empty()) return; // already a clean rejection
        const auto stage2 = run_stage2(subject, stage1, {});
        const auto report = significance_test(subject, stage2, {}, 100, 12);
        CHECK(report.significant_fraction <= 0.15);
    }
}

TEST_CASE("full-refit permutation mode also runs and calibrates") {
    auto subject = planted_subject(20, 260, 2, 1, 6.0, 9009);
    const auto stage1 = run_stage1(subject, {});
    const auto stage2 = run_stage2(subject, stage1, {});
    // n_perm must make p = 1/(n+1) <= 0.05 attainable
    const auto frozen = significance_test(subject, stage2, {}, 24, 13, false);
    const auto full = significance_test(subject, stage2, {}, 24, 13, true);
    CHECK(frozen.shuffled_mse.cols() == 24);
    CHECK(full.shuffled_mse.cols() == 24);
    // both modes find the planted structure significant
    CHECK(frozen.significant_fraction >= 0.8);
    CHECK(full.significant_fraction >= 0.8);
}

TEST_CASE("oversized supports skip the unshrunk refit instead of failing") {
    // 20 region voxels vs 14 training lag pairs: the small-lambda end of the
    // path activates more columns than the Gram rank, so those refits are
    // impossible and the shrunk fit is scored instead
    Rng rng(1212);
    const Index v = 40, t = 30;
    Matrix data(v, t);
    for (Index i = 0; i < data.size(); ++i) data(i) = rng.normal();
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(v), 1);
    for (Index j = 20; j < v; ++j) labels[static_cast<std::size_t>(j)] = 2;
    SubjectData subject("wide", TimeSeriesMatrix(std::move(data)),
                        AtlasPartition(std::move(labels), 2), cube_coords(v),
                        TemporalSplit::fraction_policy(t, 0.5, 0.2));
    Stage1Result result;
    CHECK_NOTHROW(result = run_stage1(subject, {}));
    REQUIRE(result.regions.size() == 2);
    CHECK(result.regions[0].refit_skipped_any);
}

TEST_CASE("duplicate predictor voxels: one of the pair is selected, deterministically") {
    Rng rng(1313);
    const Index v = 20, t = 120;
    Matrix data(v, t);
    for (Index i = 0; i < data.size(); ++i) data(i) = rng.normal();
    data.row(1) = data.row(0); // exact duplicate inside region 1
    for (Index tt = 1; tt < t; ++tt) {
        for (Index j = 10; j < v; ++j) {
            data(j, tt) = 1.5 * data(0, tt - 1) + 0.05 * data(j, tt);
        }
    }
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(v), 1);
    for (Index j = 10; j < v; ++j) labels[static_cast<std::size_t>(j)] = 2;
    SubjectData subject("dup", TimeSeriesMatrix(data), AtlasPartition(labels, 2), cube_coords(v),
                        TemporalSplit::default_policy(t));
    const auto first = run_stage1(subject, {});
    const int hits = static_cast<int>(
        std::count_if(first.regions[0].selected.begin(), first.regions[0].selected.end(),
                      [](Index s) { return s == 0 || s == 1; }));
    CHECK(hits >= 1); // either duplicate may carry the weight
    const auto second = run_stage1(subject, {});
    CHECK(first.selected == second.selected); // but the choice is reproducible
}

TEST_CASE("report files are written with headers and tables") {
    auto subject = planted_subject(20, 120, 2, 1, 5.0, 1111);
    const auto stage1 = run_stage1(subject, {});
    const auto dir = std::filesystem::temp_directory_path() / "scn_test_pipeline";
    std::filesystem::create_directories(dir);
    write_stage1_report(dir / "stage1.tsv", "s01", stage1);
    CHECK(std::filesystem::file_size(dir / "stage1.tsv") > 0);
}
