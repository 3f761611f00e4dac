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

#ifndef SCN_ICA_HPP
#define SCN_ICA_HPP

#include <cstdint>
#include <vector>

#include "scn/data_model.hpp"

namespace scn {

struct IcaOptions {
    int max_iter = 1000;
    double tol = 1e-6;      // max |1 - |<w_new, w_old>|| across components
    double rank_eps = 1e-12; // eigenvalue cutoff relative to the largest
};

// data (T x N) ~= mixing (T x K) * sources (K x N); sources have unit variance
// over the N samples and are mutually decorrelated. mixing * sources equals
// the rank-K PCA reconstruction of the centered data.
struct IcaDecomposition {
    Matrix mixing;    // T x K
    Matrix sources;   // K x N
    Vector means;     // per-row means removed before whitening (length T)
    Matrix whitening; // K x T
    bool converged = false;
    int iterations = 0;
};

// Symmetric fixed-point fastICA with the logcosh contrast (g = tanh, alpha=1).
// The initial unmixing matrix is drawn from seeded standard normals and
// orthonormalized, so results are a deterministic function of (data, k, seed).
// Throws RankDeficient when the covariance has fewer than k usable
// eigenvalues; a non-converged run returns with converged = false.
IcaDecomposition fastica(const Eigen::Ref<const Matrix>& data, int k, std::uint64_t seed,
                         const IcaOptions& opts = {});

// Spatial maps over all voxels: Q = w_final^T * sources_s1^T (V x K), where
// sources_s1 embeds the source matrix over the stage-1 voxel list (rows of
// w_final). Voxels with empty model support get all-zero rows.
Matrix backproject(const Eigen::Ref<const Matrix>& w_final,
                   const Eigen::Ref<const Matrix>& sources_s1);

// Test-support canonical form: components ordered by descending mixing-column
// norm, sign fixed so each source's largest-magnitude entry is positive.
void canonicalize(IcaDecomposition& ica);

// Concatenation group baseline: subjects stacked along time, then one fastICA
// on the pooled matrix; returns the K group maps (K x N). All subjects must
// share the voxel grid (MaskMismatch otherwise).
Matrix group_ica_baseline(const std::vector<Matrix>& common_space, int k, std::uint64_t seed,
                          const IcaOptions& opts = {});

} // namespace scn

#endif
