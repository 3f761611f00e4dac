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

#ifndef SCN_ERRORS_HPP
#define SCN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace scn {

// Exit-code categories used by the CLI: 1 usage, 2 data/format, 3 numerical.
enum class ErrorCategory { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& msg)
        : std::runtime_error(msg), category_(category) {}
    ErrorCategory category() const { return category_; }
    int exit_code() const { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

#define SCN_DEFINE_ERROR(NAME, CATEGORY)                                     \
    class NAME : public Error {                                              \
    public:                                                                  \
        explicit NAME(const std::string& msg)                                \
            : Error(ErrorCategory::CATEGORY, std::string(#NAME ": ") + msg) {} \
    }

// File ingestion / formats
SCN_DEFINE_ERROR(BadMagic, Data);
SCN_DEFINE_ERROR(TruncatedFile, Data);
SCN_DEFINE_ERROR(NonFiniteValue, Data);
SCN_DEFINE_ERROR(FormatError, Data);

// Domain-type validation
SCN_DEFINE_ERROR(InvalidSplit, Data);
SCN_DEFINE_ERROR(EmptySubset, Data);
SCN_DEFINE_ERROR(ZeroVariance, Data);
SCN_DEFINE_ERROR(DuplicateCoordinate, Data);
SCN_DEFINE_ERROR(DimensionMismatch, Data);
SCN_DEFINE_ERROR(MaskMismatch, Data);
SCN_DEFINE_ERROR(EmptyStage1, Data);
SCN_DEFINE_ERROR(TooFewProfiles, Data);
SCN_DEFINE_ERROR(UnstableSpec, Data);

// Numerics
SCN_DEFINE_ERROR(SingularSystem, Numeric);
SCN_DEFINE_ERROR(RankDeficient, Numeric);
SCN_DEFINE_ERROR(NotConverged, Numeric);
SCN_DEFINE_ERROR(ZeroNorm, Numeric);

// Configuration / CLI
SCN_DEFINE_ERROR(ConfigError, Usage);

#undef SCN_DEFINE_ERROR

} // namespace scn

#endif
