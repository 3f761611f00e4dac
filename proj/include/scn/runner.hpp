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

#ifndef SCN_RUNNER_HPP
#define SCN_RUNNER_HPP

#include <string>

#include "scn/config.hpp"

namespace scn {

// Executes one subcommand (or the whole chain) against the filesystem:
// reads the cohort named by the config, writes per-subject artifacts under
// <output.dir>/subjects/<id>/ and cohort-level artifacts under group/,
// similarity/ and cluster/, then a manifest.txt with output hashes.
//
// Valid commands: synth | stage1 | stage2 | significance | ica | group-ica |
// similarity | cluster | pipeline.
void run_command(const std::string& command, const RunConfig& cfg);

} // namespace scn

#endif
