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

#include "scn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <variant>
#include <vector>

#include "scn/textio.hpp"

namespace scn {

namespace {

using FieldRef = std::variant<std::string RunConfig::*, double RunConfig::*, int RunConfig::*,
                              bool RunConfig::*, std::uint64_t RunConfig::*>;

struct KeyEntry {
    const char* key;
    FieldRef field;
};

const std::vector<KeyEntry>& key_table() {
    static const std::vector<KeyEntry> table = {
        {"data.cohort", &RunConfig::data_cohort},
        {"data.group_maps", &RunConfig::data_group_maps},
        {"data.group_coords", &RunConfig::data_group_coords},
        {"output.dir", &RunConfig::output_dir},
        {"split.train_frac", &RunConfig::split_train_frac},
        {"split.val_frac", &RunConfig::split_val_frac},
        {"standardize.scale", &RunConfig::standardize_scale},
        {"stage1.n_lambdas", &RunConfig::stage1_n_lambdas},
        {"stage1.lambda_min_ratio", &RunConfig::stage1_lambda_min_ratio},
        {"stage1.max_iter", &RunConfig::stage1_max_iter},
        {"stage1.tol", &RunConfig::stage1_tol},
        {"stage1.epsilon", &RunConfig::stage1_epsilon},
        {"stage1.kkt_tol", &RunConfig::stage1_kkt_tol},
        {"stage2.n_lambdas", &RunConfig::stage2_n_lambdas},
        {"stage2.lambda_min_ratio", &RunConfig::stage2_lambda_min_ratio},
        {"stage2.max_sweeps", &RunConfig::stage2_max_sweeps},
        {"stage2.tol_scale", &RunConfig::stage2_tol_scale},
        {"stage2.refit", &RunConfig::stage2_refit},
        {"ridge.n_mus", &RunConfig::ridge_n_mus},
        {"ridge.mu_lo", &RunConfig::ridge_mu_lo},
        {"ridge.mu_hi", &RunConfig::ridge_mu_hi},
        {"significance.n_perm", &RunConfig::significance_n_perm},
        {"significance.full_refit", &RunConfig::significance_full_refit},
        {"ica.components", &RunConfig::ica_components},
        {"ica.max_iter", &RunConfig::ica_max_iter},
        {"ica.tol", &RunConfig::ica_tol},
        {"blur.sigma", &RunConfig::blur_sigma},
        {"cluster.count", &RunConfig::cluster_count},
        {"cluster.distance", &RunConfig::cluster_distance},
        {"cluster.linkage", &RunConfig::cluster_linkage},
        {"run.seed", &RunConfig::run_seed},
        {"run.threads", &RunConfig::run_threads},
        {"synth.kind", &RunConfig::synth_kind},
        {"synth.subjects", &RunConfig::synth_subjects},
        {"synth.voxels", &RunConfig::synth_voxels},
        {"synth.timepoints", &RunConfig::synth_timepoints},
        {"synth.regions", &RunConfig::synth_regions},
        {"synth.drivers", &RunConfig::synth_drivers},
        {"synth.snr", &RunConfig::synth_snr},
        {"synth.noise", &RunConfig::synth_noise},
        {"synth.sources", &RunConfig::synth_sources},
        {"synth.temporal_rho", &RunConfig::synth_temporal_rho},
        {"synth.map_density", &RunConfig::synth_map_density},
        {"synth.mask_fraction", &RunConfig::synth_mask_fraction},
        {"synth.source_noise", &RunConfig::synth_source_noise},
    };
    return table;
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
        throw ConfigError(key + ": cannot parse '" + value + "' as a real number");
    }
    return v;
}

long long parse_ll(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size()) {
        throw ConfigError(key + ": cannot parse '" + value + "' as an integer");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

std::string env_name_for(const std::string& key) {
    std::string name = "SCN_";
    for (const char c : key) {
        name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return name;
}

} // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        try {
            cfg.apply_line(line);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

void RunConfig::apply_line(const std::string& raw) {
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'");
    apply_kv(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
}

void RunConfig::apply_kv(const std::string& key, const std::string& value) {
    for (const auto& entry : key_table()) {
        if (key != entry.key) continue;
        std::visit(
            [&](auto member) {
                using T = std::remove_cvref_t<decltype(this->*member)>;
                if constexpr (std::is_same_v<T, std::string>) {
                    this->*member = value;
                } else if constexpr (std::is_same_v<T, double>) {
                    this->*member = parse_double(key, value);
                } else if constexpr (std::is_same_v<T, bool>) {
                    this->*member = parse_bool(key, value);
                } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                    const long long v = parse_ll(key, value);
                    if (v < 0) throw ConfigError(key + ": must be nonnegative");
                    this->*member = static_cast<std::uint64_t>(v);
                } else {
                    const long long v = parse_ll(key, value);
                    this->*member = static_cast<int>(v);
                }
            },
            entry.field);
        return;
    }
    throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::apply_env() {
    for (const auto& entry : key_table()) {
        const auto name = env_name_for(entry.key);
        if (const char* value = std::getenv(name.c_str())) {
            apply_kv(entry.key, trim(value));
        }
    }
}

std::string RunConfig::serialize() const {
    std::string out;
    for (const auto& entry : key_table()) {
        out += entry.key;
        out += " = ";
        std::visit(
            [&](auto member) {
                using T = std::remove_cvref_t<decltype(this->*member)>;
                if constexpr (std::is_same_v<T, std::string>) {
                    out += this->*member;
                } else if constexpr (std::is_same_v<T, double>) {
                    out += fmt_g17(this->*member);
                } else if constexpr (std::is_same_v<T, bool>) {
                    out += (this->*member) ? "true" : "false";
                } else {
                    out += std::to_string(this->*member);
                }
            },
            entry.field);
        out += '\n';
    }
    return out;
}

void RunConfig::validate() const {
    auto positive = [](const char* key, double v) {
        if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
    };
    positive("split.train_frac", split_train_frac);
    positive("split.val_frac", split_val_frac);
    if (split_train_frac + split_val_frac >= 1.0) {
        throw ConfigError("split fractions must leave room for a test slice");
    }
    positive("stage1.n_lambdas", stage1_n_lambdas);
    positive("stage1.lambda_min_ratio", stage1_lambda_min_ratio);
    positive("stage1.max_iter", stage1_max_iter);
    positive("stage1.tol", stage1_tol);
    positive("stage1.epsilon", stage1_epsilon);
    positive("stage1.kkt_tol", stage1_kkt_tol);
    positive("stage2.n_lambdas", stage2_n_lambdas);
    positive("stage2.lambda_min_ratio", stage2_lambda_min_ratio);
    positive("stage2.max_sweeps", stage2_max_sweeps);
    positive("stage2.tol_scale", stage2_tol_scale);
    positive("ridge.n_mus", ridge_n_mus);
    positive("ridge.mu_lo", ridge_mu_lo);
    positive("ridge.mu_hi", ridge_mu_hi);
    positive("significance.n_perm", significance_n_perm);
    positive("ica.components", ica_components);
    positive("ica.max_iter", ica_max_iter);
    positive("ica.tol", ica_tol);
    positive("blur.sigma", blur_sigma);
    positive("cluster.count", cluster_count);
    positive("run.threads", run_threads);
    if (cluster_distance != "manhattan" && cluster_distance != "euclidean") {
        throw ConfigError("cluster.distance must be manhattan or euclidean");
    }
    if (cluster_linkage != "wpgma" && cluster_linkage != "upgma" && cluster_linkage != "single" &&
        cluster_linkage != "complete") {
        throw ConfigError("cluster.linkage must be wpgma, upgma, single or complete");
    }
    if (synth_kind != "var" && synth_kind != "sources") {
        throw ConfigError("synth.kind must be var or sources");
    }
}

PathConfig RunConfig::path_config() const {
    PathConfig cfg;
    cfg.stage1_lambdas = stage1_n_lambdas;
    cfg.stage1_min_ratio = stage1_lambda_min_ratio;
    cfg.stage2_lambdas = stage2_n_lambdas;
    cfg.stage2_min_ratio = stage2_lambda_min_ratio;
    cfg.stage2_refit = stage2_refit;
    cfg.l21.max_iter = stage1_max_iter;
    cfg.l21.tol = stage1_tol;
    cfg.l21.epsilon = stage1_epsilon;
    cfg.l21.kkt_tol = stage1_kkt_tol;
    cfg.lasso.max_sweeps = stage2_max_sweeps;
    cfg.lasso.tol_scale = stage2_tol_scale;
    cfg.ridge.n = ridge_n_mus;
    cfg.ridge.lo = ridge_mu_lo;
    cfg.ridge.hi = ridge_mu_hi;
    cfg.threads = static_cast<unsigned>(run_threads);
    return cfg;
}

IcaOptions RunConfig::ica_options() const {
    IcaOptions opts;
    opts.max_iter = ica_max_iter;
    opts.tol = ica_tol;
    return opts;
}

ClusterOptions RunConfig::cluster_options() const {
    ClusterOptions opts;
    opts.n_clusters = cluster_count;
    opts.distance = cluster_distance == "euclidean" ? ProfileDistance::Euclidean
                                                    : ProfileDistance::Manhattan;
    if (cluster_linkage == "upgma") {
        opts.linkage = Linkage::Upgma;
    } else if (cluster_linkage == "single") {
        opts.linkage = Linkage::Single;
    } else if (cluster_linkage == "complete") {
        opts.linkage = Linkage::Complete;
    } else {
        opts.linkage = Linkage::Wpgma;
    }
    return opts;
}

} // namespace scn
