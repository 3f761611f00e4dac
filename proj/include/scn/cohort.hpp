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

#ifndef SCN_COHORT_HPP
#define SCN_COHORT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "scn/data_model.hpp"

namespace scn {

// One row of a cohort manifest (cohort.tsv): subject id plus the three data
// files, with relative paths resolved against the manifest location.
struct CohortEntry {
    std::string id;
    std::filesystem::path matrix;
    std::filesystem::path atlas;
    std::filesystem::path coords;
};

std::vector<CohortEntry> load_cohort_manifest(const std::filesystem::path& path);

SubjectData load_subject(const CohortEntry& entry, double train_frac, double val_frac,
                         bool scale);

} // namespace scn

#endif
