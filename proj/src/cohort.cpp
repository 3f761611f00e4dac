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

#include "scn/cohort.hpp"

#include <fstream>

#include "scn/textio.hpp"

namespace scn {

std::vector<CohortEntry> load_cohort_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open cohort manifest");
    const auto base = path.parent_path();

    std::vector<CohortEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto parts = split_on(trimmed, '\t');
        if (!saw_header) {
            saw_header = true;
            if (parts.size() >= 1 && parts[0] == "subject") continue; // header row
        }
        if (parts.size() != 4) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 4 tab-separated columns, got " +
                              std::to_string(parts.size()));
        }
        CohortEntry e;
        e.id = trim(parts[0]);
        e.matrix = base / trim(parts[1]);
        e.atlas = base / trim(parts[2]);
        e.coords = base / trim(parts[3]);
        if (e.id.empty()) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": empty subject id");
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw FormatError(path.string() + ": cohort manifest lists no subjects");
    return entries;
}

SubjectData load_subject(const CohortEntry& entry, double train_frac, double val_frac,
                         bool scale) {
    TimeSeriesMatrix series(load_matrix(entry.matrix));
    auto atlas = load_atlas(entry.atlas);
    auto coords = load_coords(entry.coords);
    const auto split = TemporalSplit::fraction_policy(series.timepoints(), train_frac, val_frac);
    return SubjectData(entry.id, std::move(series), std::move(atlas), std::move(coords), split,
                       scale);
}

} // namespace scn
