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

#include "scn/runner.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "scn/cohort.hpp"
#include "scn/ica.hpp"
#include "scn/manifest.hpp"
#include "scn/parallel.hpp"
#include "scn/pipeline.hpp"
#include "scn/rng.hpp"
#include "scn/similarity.hpp"
#include "scn/synth.hpp"
#include "scn/textio.hpp"

namespace scn {

namespace {

namespace fs = std::filesystem;

// rng stream tags for per-stage seeds
constexpr std::uint64_t kSeedSynth = 101;
constexpr std::uint64_t kSeedSignificance = 102;
constexpr std::uint64_t kSeedIca = 103;
constexpr std::uint64_t kSeedGroup = 104;

void log_line(const std::string& msg) { std::fprintf(stderr, "[scn] %s\n", msg.c_str()); }

struct Ctx {
    const RunConfig& cfg;
    fs::path out;
    RunManifest manifest;
    std::vector<CohortEntry> cohort;

    Ctx(const std::string& command, const RunConfig& config)
        : cfg(config), out(config.output_dir),
          manifest(command, config.serialize(), config.run_seed) {
        fs::create_directories(out);
    }

    void load_cohort() {
        if (!cohort.empty()) return;
        if (cfg.data_cohort.empty()) throw ConfigError("data.cohort is not set");
        if (!fs::exists(cfg.data_cohort)) {
            throw FormatError("cohort manifest not found: " + cfg.data_cohort);
        }
        cohort = load_cohort_manifest(cfg.data_cohort);
        for (const auto& e : cohort) {
            for (const auto& p : {e.matrix, e.atlas, e.coords}) {
                if (!fs::exists(p)) {
                    throw FormatError("subject '" + e.id + "' input missing: " + p.string());
                }
            }
        }
    }

    SubjectData load_subject_data(const CohortEntry& e) const {
        return load_subject(e, cfg.split_train_frac, cfg.split_val_frac, cfg.standardize_scale);
    }

    fs::path subject_dir(const std::string& id) {
        const auto dir = out / "subjects" / id;
        fs::create_directories(dir);
        return dir;
    }

    void note(const fs::path& file) {
        manifest.add_output(file, fs::relative(file, out).generic_string());
    }

    void timed(const std::string& stage, const std::function<void()>& body) {
        const auto start = std::chrono::steady_clock::now();
        body();
        const auto ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        manifest.add_timing(stage, ms);
    }
};

void write_ids(const fs::path& path, const std::vector<Index>& ids) {
    auto out = open_text_out(path);
    out << "voxel\n";
    for (const Index v : ids) out << v << "\n";
}

std::vector<Index> read_ids(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open (run the upstream stage first?)");
    std::vector<Index> ids;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty()) continue;
        if (header) {
            header = false;
            if (t == "voxel") continue;
        }
        ids.push_back(static_cast<Index>(std::stoll(t)));
    }
    return ids;
}

// --- stages ------------------------------------------------------------------

void do_synth(Ctx& ctx) {
    const auto dir = ctx.out / "cohort";
    Rng base(ctx.cfg.run_seed);
    if (ctx.cfg.synth_kind == "var") {
        std::vector<PlantedVarSpec> specs;
        for (int s = 0; s < ctx.cfg.synth_subjects; ++s) {
            specs.push_back(make_planted_var_spec(
                ctx.cfg.synth_voxels, ctx.cfg.synth_timepoints,
                static_cast<std::uint32_t>(ctx.cfg.synth_regions), ctx.cfg.synth_drivers,
                ctx.cfg.synth_snr, ctx.cfg.synth_noise,
                base.child(kSeedSynth).child(static_cast<std::uint64_t>(s)).seed()));
        }
        write_var_cohort(dir, specs);
    } else {
        PlantedSourceSpec spec;
        spec.voxels = ctx.cfg.synth_voxels;
        spec.timepoints = ctx.cfg.synth_timepoints;
        spec.n_subjects = ctx.cfg.synth_subjects;
        spec.k = ctx.cfg.synth_sources;
        spec.regions = static_cast<std::uint32_t>(ctx.cfg.synth_regions);
        spec.noise_scale = ctx.cfg.synth_source_noise;
        spec.temporal_rho = ctx.cfg.synth_temporal_rho;
        spec.map_density = ctx.cfg.synth_map_density;
        spec.mask_fraction = ctx.cfg.synth_mask_fraction;
        spec.seed = base.child(kSeedSynth).seed();
        write_source_cohort(dir, gen_source_cohort(spec));
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) ctx.note(f);
    log_line("synth: wrote cohort to " + dir.string());
}

void do_stage1(Ctx& ctx) {
    ctx.load_cohort();
    const auto path_cfg = ctx.cfg.path_config();
    for (const auto& entry : ctx.cohort) {
        const auto subject = ctx.load_subject_data(entry);
        const auto result = run_stage1(subject, path_cfg);
        const auto dir = ctx.subject_dir(entry.id);
        write_stage1_report(dir / "stage1.tsv", entry.id, result);
        write_ids(dir / "stage1_selected.tsv", result.selected);
        ctx.note(dir / "stage1.tsv");
        ctx.note(dir / "stage1_selected.tsv");
        log_line("stage1: subject " + entry.id + " selected " +
                 std::to_string(result.selected.size()) + " voxels");
    }
}

void do_stage2(Ctx& ctx) {
    ctx.load_cohort();
    const auto path_cfg = ctx.cfg.path_config();
    for (const auto& entry : ctx.cohort) {
        const auto subject = ctx.load_subject_data(entry);
        const auto dir = ctx.subject_dir(entry.id);
        Stage1Result stage1;
        stage1.selected = read_ids(dir / "stage1_selected.tsv");
        const auto result = run_stage2(subject, stage1, path_cfg);
        write_stage2_report(dir / "stage2.tsv", entry.id, result);
        write_ids(dir / "stage2_selected.tsv", result.selected);
        write_matrix(dir / "w_final.fmat", result.w_final);
        ctx.note(dir / "stage2.tsv");
        ctx.note(dir / "stage2_selected.tsv");
        ctx.note(dir / "w_final.fmat");
        log_line("stage2: subject " + entry.id + " kept " +
                 std::to_string(result.selected.size()) + " of " +
                 std::to_string(result.stage1_voxels.size()) + " stage-1 voxels");
    }
}

void do_significance(Ctx& ctx) {
    ctx.load_cohort();
    const auto path_cfg = ctx.cfg.path_config();
    Rng base(ctx.cfg.run_seed);
    for (std::size_t si = 0; si < ctx.cohort.size(); ++si) {
        const auto& entry = ctx.cohort[si];
        const auto subject = ctx.load_subject_data(entry);
        const auto dir = ctx.subject_dir(entry.id);
        Stage2Result stage2;
        stage2.stage1_voxels = read_ids(dir / "stage1_selected.tsv");
        stage2.selected = read_ids(dir / "stage2_selected.tsv");
        stage2.w_final = load_matrix(dir / "w_final.fmat");
        const auto seed = base.child(kSeedSignificance).child(si).seed();
        const auto report = significance_test(subject, stage2, path_cfg,
                                              ctx.cfg.significance_n_perm, seed,
                                              ctx.cfg.significance_full_refit);
        write_significance_report(dir / "significance.tsv", entry.id, report);
        write_matrix(dir / "perm_mse.fmat", report.shuffled_mse);
        ctx.note(dir / "significance.tsv");
        ctx.note(dir / "perm_mse.fmat");
        log_line("significance: subject " + entry.id + " fraction " +
                 fmt_g17(report.significant_fraction));
    }
}

void do_ica(Ctx& ctx) {
    ctx.load_cohort();
    Rng base(ctx.cfg.run_seed);
    for (std::size_t si = 0; si < ctx.cohort.size(); ++si) {
        const auto& entry = ctx.cohort[si];
        const auto subject = ctx.load_subject_data(entry);
        const auto dir = ctx.subject_dir(entry.id);
        const auto stage1_voxels = read_ids(dir / "stage1_selected.tsv");
        const auto selected = read_ids(dir / "stage2_selected.tsv");
        const Matrix w_final = load_matrix(dir / "w_final.fmat");
        if (selected.empty()) throw EmptyStage1("subject " + entry.id + " has no selected voxels");

        const auto train = subject.train();
        Matrix data(train.cols(), static_cast<Index>(selected.size()));
        for (std::size_t i = 0; i < selected.size(); ++i) {
            data.col(static_cast<Index>(i)) = train.row(selected[i]).transpose();
        }
        const auto seed = base.child(kSeedIca).child(si).seed();
        const auto ica = fastica(data, ctx.cfg.ica_components, seed, ctx.cfg.ica_options());
        if (!ica.converged) {
            log_line("ica: subject " + entry.id + " did not converge in " +
                     std::to_string(ica.iterations) + " iterations");
        }

        // embed sources over the stage-1 voxel list (w_final row order)
        std::map<Index, Index> pos;
        for (std::size_t i = 0; i < stage1_voxels.size(); ++i) {
            pos[stage1_voxels[i]] = static_cast<Index>(i);
        }
        Matrix sources_s1 = Matrix::Zero(ica.sources.rows(), static_cast<Index>(stage1_voxels.size()));
        for (std::size_t i = 0; i < selected.size(); ++i) {
            const auto it = pos.find(selected[i]);
            if (it == pos.end()) {
                throw FormatError("selected voxel " + std::to_string(selected[i]) +
                                  " missing from the stage-1 list");
            }
            sources_s1.col(it->second) = ica.sources.col(static_cast<Index>(i));
        }
        const Matrix maps = backproject(w_final, sources_s1);

        write_matrix(dir / "ica_mixing.fmat", ica.mixing);
        write_matrix(dir / "ica_sources.fmat", ica.sources);
        write_matrix(dir / "ica_maps.fmat", maps);
        {
            auto mf = open_text_out(dir / "ica_manifest.txt");
            mf << "subject = " << entry.id << "\n";
            mf << "components = " << ctx.cfg.ica_components << "\n";
            mf << "seed = " << seed << "\n";
            mf << "converged = " << (ica.converged ? 1 : 0) << "\n";
            mf << "iterations = " << ica.iterations << "\n";
        }
        ctx.note(dir / "ica_mixing.fmat");
        ctx.note(dir / "ica_sources.fmat");
        ctx.note(dir / "ica_maps.fmat");
        ctx.note(dir / "ica_manifest.txt");
        log_line("ica: subject " + entry.id + " decomposed " + std::to_string(selected.size()) +
                 " voxels into " + std::to_string(ctx.cfg.ica_components) + " components");
    }
}

void do_group_ica(Ctx& ctx) {
    const auto dir = ctx.out / "group";
    fs::create_directories(dir);
    bool external = !ctx.cfg.data_group_maps.empty();

    if (external) {
        if (ctx.cfg.data_group_coords.empty()) {
            throw ConfigError("data.group_coords must accompany data.group_maps");
        }
        const Matrix maps = load_matrix(ctx.cfg.data_group_maps);
        const auto coords = load_coords(ctx.cfg.data_group_coords);
        if (static_cast<std::size_t>(maps.cols()) != coords.n_voxels()) {
            throw DimensionMismatch("group maps cover " + std::to_string(maps.cols()) +
                                    " voxels, coordinate table " +
                                    std::to_string(coords.n_voxels()));
        }
        write_matrix(dir / "group_maps.fmat", maps);
        write_coords(dir / "group_coords.ctbl", coords);
        log_line("group-ica: ingested externally computed group maps");
    } else {
        ctx.load_cohort();
        std::vector<Matrix> stacked;
        CoordinateTable::GridDims dims{};
        std::vector<std::array<std::int32_t, 3>> ref_coords;
        for (std::size_t si = 0; si < ctx.cohort.size(); ++si) {
            const auto subject = ctx.load_subject_data(ctx.cohort[si]);
            if (si == 0) {
                dims = subject.coords().dims();
                ref_coords = subject.coords().coords();
            } else if (!(subject.coords().dims() == dims) ||
                       subject.coords().coords() != ref_coords) {
                throw MaskMismatch("concatenation baseline needs identical subject masks; "
                                   "subject '" + ctx.cohort[si].id + "' differs");
            }
            stacked.push_back(subject.train().transpose()); // T x V
        }
        const auto seed = Rng(ctx.cfg.run_seed).child(kSeedGroup).seed();
        const Matrix maps = group_ica_baseline(stacked, ctx.cfg.ica_components, seed,
                                               ctx.cfg.ica_options());
        write_matrix(dir / "group_maps.fmat", maps);
        write_coords(dir / "group_coords.ctbl", CoordinateTable(dims, ref_coords));
        {
            auto mf = open_text_out(dir / "group_manifest.txt");
            mf << "subjects = " << ctx.cohort.size() << "\n";
            mf << "components = " << ctx.cfg.ica_components << "\n";
            mf << "seed = " << seed << "\n";
        }
        ctx.note(dir / "group_manifest.txt");
        log_line("group-ica: concatenation baseline over " + std::to_string(ctx.cohort.size()) +
                 " subjects");
    }
    ctx.note(dir / "group_maps.fmat");
    ctx.note(dir / "group_coords.ctbl");
}

void do_similarity(Ctx& ctx) {
    ctx.load_cohort();
    const auto dir = ctx.out / "similarity";
    fs::create_directories(dir);

    const Matrix group_maps = load_matrix(ctx.out / "group" / "group_maps.fmat");
    const auto group_coords = load_coords(ctx.out / "group" / "group_coords.ctbl");

    std::vector<std::vector<Volume>> subject_maps;
    std::vector<std::string> ids;
    for (const auto& entry : ctx.cohort) {
        const auto sdir = ctx.out / "subjects" / entry.id;
        const Matrix maps = load_matrix(sdir / "ica_maps.fmat");
        const auto coords = load_coords(entry.coords);
        if (!(coords.dims() == group_coords.dims())) {
            throw MaskMismatch("subject '" + entry.id + "' grid differs from the group grid");
        }
        std::vector<Volume> blurred(static_cast<std::size_t>(maps.cols()));
        parallel_for(static_cast<std::size_t>(maps.cols()),
                     static_cast<unsigned>(ctx.cfg.run_threads), [&](std::size_t k) {
                         blurred[k] = blur3d(project_to_grid(maps.col(static_cast<Index>(k)), coords),
                                             ctx.cfg.blur_sigma);
                     });
        subject_maps.push_back(std::move(blurred));
        ids.push_back(entry.id);
    }

    std::vector<Volume> group_vols(static_cast<std::size_t>(group_maps.rows()));
    parallel_for(static_cast<std::size_t>(group_maps.rows()),
                 static_cast<unsigned>(ctx.cfg.run_threads), [&](std::size_t k) {
                     group_vols[k] = blur3d(
                         project_to_grid(group_maps.row(static_cast<Index>(k)).transpose(),
                                         group_coords),
                         ctx.cfg.blur_sigma);
                 });

    const auto profiles = similarity_profiles(subject_maps, group_vols,
                                              static_cast<unsigned>(ctx.cfg.run_threads));
    const auto dominance = dominance_summary(profiles, static_cast<int>(ctx.cohort.size()));
    write_profiles_report(dir / "profiles.tsv", dir / "profiles.fmat", profiles, ids);
    write_dominance_report(dir / "dominance.tsv", profiles, dominance, ids);
    ctx.note(dir / "profiles.tsv");
    ctx.note(dir / "profiles.fmat");
    ctx.note(dir / "dominance.tsv");
    log_line("similarity: " + std::to_string(profiles.size()) + " profiles");
}

std::vector<SimilarityProfile> read_profiles(const fs::path& path,
                                             std::vector<std::string>& ids_out) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open (run similarity first?)");
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": empty profiles file");
    const auto header = split_on(trim(line), '\t');
    if (header.size() < 4 || header[0] != "subject" || header[1] != "component" ||
        header.back() != "igs") {
        throw FormatError(path.string() + ": unexpected profiles header");
    }
    const int n_subjects = static_cast<int>(header.size()) - 3;
    ids_out.clear();
    for (int s = 0; s < n_subjects; ++s) {
        const auto& col = header[static_cast<std::size_t>(2 + s)];
        if (col.rfind("is_", 0) != 0) throw FormatError(path.string() + ": bad IS column " + col);
        ids_out.push_back(col.substr(3));
    }

    std::vector<SimilarityProfile> profiles;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto parts = split_on(t, '\t');
        if (parts.size() != header.size()) {
            throw FormatError(path.string() + ": row width mismatch");
        }
        SimilarityProfile p;
        const auto it = std::find(ids_out.begin(), ids_out.end(), parts[0]);
        if (it == ids_out.end()) throw FormatError(path.string() + ": unknown subject " + parts[0]);
        p.subject = static_cast<int>(it - ids_out.begin());
        p.component = static_cast<int>(std::stoll(parts[1]));
        p.is_values.resize(n_subjects);
        for (int s = 0; s < n_subjects; ++s) {
            p.is_values(s) = std::stod(parts[static_cast<std::size_t>(2 + s)]);
        }
        p.igs = std::stod(parts.back());
        profiles.push_back(std::move(p));
    }
    return profiles;
}

void do_cluster(Ctx& ctx) {
    const auto dir = ctx.out / "cluster";
    fs::create_directories(dir);
    std::vector<std::string> ids;
    const auto profiles = read_profiles(ctx.out / "similarity" / "profiles.tsv", ids);
    const auto result = cluster_profiles(profiles, ctx.cfg.cluster_options());
    write_cluster_report(dir / "merges.tsv", dir / "clusters.tsv", profiles, result, ids);
    ctx.note(dir / "merges.tsv");
    ctx.note(dir / "clusters.tsv");
    log_line("cluster: " + std::to_string(result.clusters.size()) + " clusters, flagged " +
             std::to_string(result.flagged));
}

} // namespace

void run_command(const std::string& command, const RunConfig& cfg) {
    cfg.validate();
    Ctx ctx(command, cfg);

    const std::map<std::string, std::function<void(Ctx&)>> stages = {
        {"synth", do_synth},           {"stage1", do_stage1},
        {"stage2", do_stage2},         {"significance", do_significance},
        {"ica", do_ica},               {"group-ica", do_group_ica},
        {"similarity", do_similarity}, {"cluster", do_cluster},
    };

    if (command == "pipeline") {
        for (const char* stage : {"stage1", "stage2", "significance", "ica", "group-ica",
                                  "similarity", "cluster"}) {
            ctx.timed(stage, [&] { stages.at(stage)(ctx); });
        }
    } else {
        const auto it = stages.find(command);
        if (it == stages.end()) throw ConfigError("unknown command '" + command + "'");
        ctx.timed(command, [&] { it->second(ctx); });
    }

    ctx.manifest.write(ctx.out / "manifest.txt");
}

} // namespace scn
