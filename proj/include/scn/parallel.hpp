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

#ifndef SCN_PARALLEL_HPP
#define SCN_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace scn {

// Runs body(i) for i in [0, n). Tasks must be independent and write only to
// index-addressed slots; results are then identical for any thread count.
// threads <= 1 runs inline on the calling thread.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

} // namespace scn

#endif
