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

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "scn/runner.hpp"
#include "scn/version.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output;
};

void attach_common(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("--config", flags.config_path, "Configuration file (key = value lines)");
    sub->add_option("--seed", flags.seed, "Override run.seed");
    sub->add_option("--threads", flags.threads, "Override run.threads");
    sub->add_option("--output", flags.output, "Override output.dir");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse causal voxel selection and network similarity toolkit"};
    app.set_version_flag("--version", std::string(scn::kVersion));
    app.require_subcommand(1);

    const std::pair<const char*, const char*> commands[] = {
        {"synth", "Generate a synthetic cohort with planted structure"},
        {"stage1", "Per-region group-sparse voxel selection"},
        {"stage2", "Per-voxel LASSO pruning and final ridge models"},
        {"significance", "Permutation test of the final models on the test slice"},
        {"ica", "Per-subject fastICA on the selected voxels"},
        {"group-ica", "Concatenation group baseline (or ingest external group maps)"},
        {"similarity", "Common-space projection, blur, IS/IGS profiles, dominance"},
        {"cluster", "Weighted hierarchical clustering of similarity profiles"},
        {"pipeline", "Run all stages in order on an existing cohort"},
    };

    CommonFlags flags;
    for (const auto& [name, desc] : commands) attach_common(app.add_subcommand(name, desc), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        scn::RunConfig cfg;
        if (!flags.config_path.empty()) cfg = scn::RunConfig::from_file(flags.config_path);
        cfg.apply_env();
        if (flags.seed) cfg.run_seed = *flags.seed;
        if (flags.threads) cfg.run_threads = *flags.threads;
        if (flags.output) cfg.output_dir = *flags.output;

        scn::run_command(app.get_subcommands().front()->get_name(), cfg);
        return 0;
    } catch (const scn::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
