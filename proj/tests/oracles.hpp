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

// Test-only reference implementations, kept independent of the library code
// paths they check.

#ifndef SCN_TESTS_ORACLES_HPP
#define SCN_TESTS_ORACLES_HPP

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "scn/data_model.hpp"
#include "scn/similarity.hpp"

namespace scn::test {

// Plain proximal-gradient descent on ||Y - W X||_F^2 + lambda ||W||_{2,1}
// with the exact column-wise group shrinkage prox and step 1/L.
inline Matrix prox_grad_l21(const Matrix& targets, const Matrix& predictors, double lambda,
                            int max_iter = 100000) {
    const Matrix gram = predictors * predictors.transpose();
    const Matrix cross = targets * predictors.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    const double lips = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
    const double step = 1.0 / lips;

    Matrix w = Matrix::Zero(targets.rows(), predictors.rows());
    double f_prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        Matrix v = w - step * 2.0 * (w * gram - cross);
        for (Index j = 0; j < v.cols(); ++j) {
            const double n = v.col(j).norm();
            const double shrink = n > 0.0 ? std::max(0.0, 1.0 - step * lambda / n) : 0.0;
            v.col(j) *= shrink;
        }
        w = std::move(v);
        if (it % 200 == 0) {
            double f = (targets - w * predictors).squaredNorm();
            for (Index j = 0; j < w.cols(); ++j) f += lambda * w.col(j).norm();
            if (std::abs(f_prev - f) <= 1e-15 * std::max(1.0, std::abs(f))) break;
            f_prev = f;
        }
    }
    return w;
}

inline double l21_objective_direct(const Matrix& targets, const Matrix& predictors,
                                   const Matrix& w, double lambda) {
    double f = (targets - w * predictors).squaredNorm();
    for (Index j = 0; j < w.cols(); ++j) f += lambda * w.col(j).norm();
    return f;
}

inline double abs_row_corr(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    const Vector ac = a.array() - a.mean();
    const Vector bc = b.array() - b.mean();
    const double denom = ac.norm() * bc.norm();
    return denom > 0.0 ? std::abs(ac.dot(bc)) / denom : 0.0;
}

// Best row assignment (brute force over permutations, K small): the max over
// assignments of the minimum matched |correlation|.
inline double matched_min_abs_corr(const Matrix& truth, const Matrix& estimate) {
    const Index k = truth.rows();
    std::vector<Index> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), Index{0});
    double best = 0.0;
    do {
        double worst = 1.0;
        for (Index i = 0; i < k; ++i) {
            worst = std::min(worst, abs_row_corr(truth.row(i).transpose(),
                                                 estimate.row(perm[static_cast<std::size_t>(i)])
                                                     .transpose()));
        }
        best = std::max(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Direct (non-separable) 3D Gaussian convolution with the product kernel of
// the normalized 1D kernel, zero padding.
inline Volume blur3d_direct(const Volume& volume, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k1(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k1[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k1[static_cast<std::size_t>(i + radius)];
    }
    for (auto& v : k1) v /= sum;

    const int nx = static_cast<int>(volume.dims[0]);
    const int ny = static_cast<int>(volume.dims[1]);
    const int nz = static_cast<int>(volume.dims[2]);
    Volume out = Volume::zeros(volume.dims[0], volume.dims[1], volume.dims[2]);
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                double acc = 0.0;
                for (int dz = -radius; dz <= radius; ++dz) {
                    const int zs = z - dz;
                    if (zs < 0 || zs >= nz) continue;
                    for (int dy = -radius; dy <= radius; ++dy) {
                        const int ys = y - dy;
                        if (ys < 0 || ys >= ny) continue;
                        for (int dx = -radius; dx <= radius; ++dx) {
                            const int xs = x - dx;
                            if (xs < 0 || xs >= nx) continue;
                            acc += k1[static_cast<std::size_t>(dx + radius)] *
                                   k1[static_cast<std::size_t>(dy + radius)] *
                                   k1[static_cast<std::size_t>(dz + radius)] *
                                   volume.at(static_cast<std::uint32_t>(xs),
                                             static_cast<std::uint32_t>(ys),
                                             static_cast<std::uint32_t>(zs));
                        }
                    }
                }
                out.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                       static_cast<std::uint32_t>(z)) = acc;
            }
        }
    }
    return out;
}

} // namespace scn::test

#endif
