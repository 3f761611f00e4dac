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

#include "scn/ica.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scn/rng.hpp"

namespace scn {

namespace {

// B <- (B B^T)^{-1/2} B, the symmetric decorrelation step.
void symmetric_decorrelate(Matrix& b) {
    const Matrix bbt = b * b.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(bbt);
    Vector d = es.eigenvalues();
    for (Index i = 0; i < d.size(); ++i) d(i) = 1.0 / std::sqrt(std::max(d(i), 1e-300));
    b = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose() * b;
}

} // namespace

IcaDecomposition fastica(const Eigen::Ref<const Matrix>& data, int k, std::uint64_t seed,
                         const IcaOptions& opts) {
    const Index t = data.rows();
    const Index n = data.cols();
    if (k < 1) throw ConfigError("component count must be positive");
    if (t < k || n < k) {
        throw DimensionMismatch("need T >= K and N >= K, got T=" + std::to_string(t) +
                                " N=" + std::to_string(n) + " K=" + std::to_string(k));
    }
    if (!data.allFinite()) throw NonFiniteValue("ICA input contains non-finite values");

    IcaDecomposition out;
    out.means = data.rowwise().mean();
    const Matrix centered = data.colwise() - out.means;

    const Matrix cov = centered * centered.transpose() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) throw SingularSystem("covariance eigendecomposition failed");
    const Vector evals = es.eigenvalues(); // ascending
    const double emax = evals(t - 1);
    Index usable = 0;
    for (Index i = 0; i < t; ++i) {
        if (evals(i) > opts.rank_eps * emax) ++usable;
    }
    if (emax <= 0.0 || usable < k) {
        throw RankDeficient("covariance has " + std::to_string(usable) +
                            " usable eigenvalues, need " + std::to_string(k));
    }

    // descending order for the K retained directions
    Matrix u(t, k);
    Vector lam(k);
    for (int i = 0; i < k; ++i) {
        u.col(i) = es.eigenvectors().col(t - 1 - i);
        lam(i) = evals(t - 1 - i);
    }
    const Vector lam_isqrt = lam.cwiseSqrt().cwiseInverse();
    out.whitening = lam_isqrt.asDiagonal() * u.transpose(); // K x T
    const Matrix z = out.whitening * centered;              // K x N, unit covariance

    Rng rng(seed);
    Matrix b(k, k);
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) b(i, j) = rng.normal();
    }
    symmetric_decorrelate(b);

    const double inv_n = 1.0 / static_cast<double>(n);
    for (int it = 1; it <= opts.max_iter; ++it) {
        const Matrix b_old = b;
        const Matrix y = b * z;             // K x N current source estimates
        const Matrix gy = y.array().tanh(); // logcosh contrast derivative
        Vector gprime_mean(k);
        for (Index c = 0; c < k; ++c) {
            gprime_mean(c) = 1.0 - gy.row(c).array().square().mean();
        }
        b = gy * z.transpose() * inv_n - gprime_mean.asDiagonal() * b_old;
        symmetric_decorrelate(b);

        double delta = 0.0;
        for (Index c = 0; c < k; ++c) {
            delta = std::max(delta, std::abs(1.0 - std::abs(b.row(c).dot(b_old.row(c)))));
        }
        out.iterations = it;
        if (delta < opts.tol) {
            out.converged = true;
            break;
        }
    }

    out.sources = b * z;                                              // K x N
    out.mixing = u * lam.cwiseSqrt().asDiagonal() * b.transpose();    // T x K
    return out;
}

Matrix backproject(const Eigen::Ref<const Matrix>& w_final,
                   const Eigen::Ref<const Matrix>& sources_s1) {
    if (w_final.rows() != sources_s1.cols()) {
        throw DimensionMismatch("w_final has " + std::to_string(w_final.rows()) +
                                " stage-1 rows, sources cover " +
                                std::to_string(sources_s1.cols()));
    }
    return w_final.transpose() * sources_s1.transpose(); // V x K
}

void canonicalize(IcaDecomposition& ica) {
    const Index k = ica.sources.rows();
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    Vector norms(k);
    for (Index c = 0; c < k; ++c) norms(c) = ica.mixing.col(c).norm();
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return norms(a) > norms(b); });

    Matrix sources(k, ica.sources.cols());
    Matrix mixing(ica.mixing.rows(), k);
    for (Index c = 0; c < k; ++c) {
        const Index src = order[static_cast<std::size_t>(c)];
        Index arg = 0;
        ica.sources.row(src).cwiseAbs().maxCoeff(&arg);
        const double sign = ica.sources(src, arg) < 0.0 ? -1.0 : 1.0;
        sources.row(c) = sign * ica.sources.row(src);
        mixing.col(c) = sign * ica.mixing.col(src);
    }
    ica.sources = std::move(sources);
    ica.mixing = std::move(mixing);
}

Matrix group_ica_baseline(const std::vector<Matrix>& common_space, int k, std::uint64_t seed,
                          const IcaOptions& opts) {
    if (common_space.empty()) throw DimensionMismatch("group baseline needs at least one subject");
    const Index n = common_space.front().cols();
    Index t_total = 0;
    for (const auto& m : common_space) {
        if (m.cols() != n) {
            throw MaskMismatch("subjects disagree on common-space voxel count: " +
                               std::to_string(m.cols()) + " vs " + std::to_string(n));
        }
        t_total += m.rows();
    }
    Matrix stacked(t_total, n);
    Index at = 0;
    for (const auto& m : common_space) {
        stacked.middleRows(at, m.rows()) = m;
        at += m.rows();
    }
    auto ica = fastica(stacked, k, seed, opts);
    canonicalize(ica);
    return ica.sources;
}

} // namespace scn
