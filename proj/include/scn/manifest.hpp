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

#ifndef SCN_MANIFEST_HPP
#define SCN_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace scn {

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

// Per-run provenance: config hash, seed, version, output-file hashes, and
// wall times. `time.*` lines are the only run-varying content; determinism
// checks compare everything else.
class RunManifest {
public:
    RunManifest(std::string command, std::string config_serialized, std::uint64_t seed);

    void add_output(const std::filesystem::path& file, const std::string& name);
    void add_timing(const std::string& stage, double milliseconds);
    void write(const std::filesystem::path& path) const;

private:
    std::string command_;
    std::uint64_t config_hash_;
    std::uint64_t seed_;
    std::vector<std::pair<std::string, std::string>> outputs_; // name -> hash hex
    std::vector<std::pair<std::string, double>> timings_;
};

} // namespace scn

#endif
