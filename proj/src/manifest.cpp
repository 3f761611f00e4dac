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

#include "scn/manifest.hpp"

#include <fstream>

#include "scn/errors.hpp"
#include "scn/textio.hpp"
#include "scn/version.hpp"

namespace scn {

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open for hashing");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const auto got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

RunManifest::RunManifest(std::string command, std::string config_serialized, std::uint64_t seed)
    : command_(std::move(command)),
      config_hash_(fnv1a64(config_serialized.data(), config_serialized.size())),
      seed_(seed) {}

void RunManifest::add_output(const std::filesystem::path& file, const std::string& name) {
    outputs_.emplace_back(name, hex64(fnv1a64_file(file)));
}

void RunManifest::add_timing(const std::string& stage, double milliseconds) {
    timings_.emplace_back(stage, milliseconds);
}

void RunManifest::write(const std::filesystem::path& path) const {
    auto out = open_text_out(path);
    out << "command = " << command_ << "\n";
    out << "version = " << kVersion << "\n";
    out << "config.fnv64 = " << hex64(config_hash_) << "\n";
    out << "seed = " << seed_ << "\n";
    for (const auto& [name, hash] : outputs_) {
        out << "output." << name << ".fnv64 = " << hash << "\n";
    }
    for (const auto& [stage, ms] : timings_) {
        out << "time." << stage << "_ms = " << fmt_g17(ms) << "\n";
    }
}

} // namespace scn
