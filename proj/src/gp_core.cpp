/*
 * Copyright 2026 The rgpis Authors
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

#include "rgpis/gp_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rgpis/csv.hpp"
#include "rgpis/error.hpp"
#include "detail/ascent.hpp"

namespace rgpis {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void KernelParams::validate() const {
  require(std::isfinite(length_scale_sq) && length_scale_sq > 0.0, "kernel length scale must be positive");
  require(std::isfinite(signal_variance) && signal_variance > 0.0, "kernel signal variance must be positive");
}

double kernel(std::span<const double> x, std::span<const double> z, const KernelParams& params) {
  require(x.size() == z.size(), "kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    d2 += d * d;
  }
  return params.signal_variance * std::exp(-d2 / (2.0 * params.length_scale_sq));
}

Eigen::MatrixXd cross_covariance(const PointSet& test, const PointSet& train, const KernelParams& params) {
  require(test.dim() == train.dim(), "cross covariance: dimension mismatch");
  params.validate();
  const simd::SoaPoints a(test), b(train);
  RowMajorMatrix out(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(train.size()));
  simd::se_cross_covariance(simd::SoaView::of(a), simd::SoaView::of(b), params.se(),
                            std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Eigen::MatrixXd gram(const PointSet& points, const KernelParams& params) {
  Eigen::MatrixXd k = cross_covariance(points, points, params);
  // Exact symmetry and diagonal regardless of the exp implementation.
  const Eigen::Index n = k.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = params.signal_variance;
    for (Eigen::Index i = j + 1; i < n; ++i) k(j, i) = k(i, j);
  }
  return k;
}

namespace {

[[noreturn]] void factorization_failure(const Eigen::MatrixXd& m) {
  std::ostringstream msg;
  msg << "Cholesky factorisation of K + noise failed (n = " << m.rows() << ")";
  if (m.rows() <= 2000) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    msg << "; eigenvalue range [" << ev.minCoeff() << ", " << ev.maxCoeff() << "]";
    if (ev.minCoeff() > 0.0) msg << ", condition " << ev.maxCoeff() / ev.minCoeff();
  } else {
    msg << "; trace " << m.trace();
  }
  fail(ErrorCode::NumericalFailure, msg.str());
}

}  // namespace

GpisFit::GpisFit(PointSet points, Eigen::VectorXd targets, Eigen::VectorXd noise, KernelParams params)
    : points_(std::move(points)),
      targets_(std::move(targets)),
      noise_(std::move(noise)),
      params_(params),
      soa_(points_) {
  params_.validate();
  const auto n = static_cast<Eigen::Index>(points_.size());
  require(n > 0, "GP fit needs at least one datum");
  require(targets_.size() == n && noise_.size() == n, "GP fit: size mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(std::isfinite(noise_(i)) && noise_(i) > 0.0, "noise variance must be positive");
    require(std::isfinite(targets_(i)), "targets must be finite");
  }
  Eigen::MatrixXd k = gram(points_, params_);
  k.diagonal() += noise_;
  k.diagonal().array() += kRelativeJitter * params_.signal_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) factorization_failure(k);
  factor_ = llt.matrixL();
  weights_ = llt.solve(targets_);
  if (!weights_.allFinite()) factorization_failure(k);
}

GpisFit gp_fit_diagonal(const PointSet& points, const Eigen::VectorXd& targets, const Eigen::VectorXd& noise,
                        const KernelParams& params) {
  return GpisFit(points, targets, noise, params);
}

GpisFit gpis_fit(const Dataset& data, double noise_variance, const KernelParams& params) {
  require(std::isfinite(noise_variance) && noise_variance > 0.0, "noise variance must be positive");
  require(data.size() > 0, "GPIS fit needs a non-empty dataset");
  const auto n = static_cast<Eigen::Index>(data.size());
  return GpisFit(data.positions(), data.targets(), Eigen::VectorXd::Constant(n, noise_variance), params);
}

namespace {

PredictionField predict_impl(const GpisFit& fit, const PointSet& points, bool with_variance) {
  require(points.dim() == fit.dim(), "prediction: test dimension does not match the training data");
  PredictionField field;
  field.points = points;
  const std::size_t m = points.size();
  const std::size_t n = fit.size();
  field.mean.resize(static_cast<Eigen::Index>(m));
  if (with_variance) field.variance.resize(static_cast<Eigen::Index>(m));

  const simd::SoaPoints test(points);
  const simd::SoaView train = simd::SoaView::of(fit.soa());
  const simd::SeKernel se = fit.kernel_params().se();
  const std::span<const double> w(fit.weights().data(), n);

  if (!with_variance) {
    simd::se_weighted_sum(simd::SoaView::of(test), train, se, w,
                          std::span<double>(field.mean.data(), m));
    return field;
  }

  RowMajorMatrix block;
  for (std::size_t start = 0; start < m; start += kPredictionChunk) {
    const std::size_t count = std::min(kPredictionChunk, m - start);
    block.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));
    simd::se_cross_covariance(simd::SoaView::of(test, start, count), train, se,
                              std::span<double>(block.data(), count * n));
    const auto rows = Eigen::seqN(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(count));
    field.mean(rows) = block * fit.weights();
    // v = L^-1 k*, var = k** - |v|^2
    Eigen::MatrixXd v = block.transpose();
    fit.factor().triangularView<Eigen::Lower>().solveInPlace(v);
    field.variance(rows) =
        (fit.kernel_params().signal_variance - v.colwise().squaredNorm().array()).matrix().transpose();
  }
  return field;
}

}  // namespace

PredictionField gpis_predict(const GpisFit& fit, const PointSet& points) {
  return predict_impl(fit, points, true);
}

PredictionField gpis_predict(const GpisFit& fit, const EvalGrid& grid) {
  return predict_impl(fit, grid.points, true);
}

PredictionField gpis_predict_mean(const GpisFit& fit, const PointSet& points) {
  return predict_impl(fit, points, false);
}

void write_field_csv(std::ostream& out, const PredictionField& field) {
  const int dim = field.points.dim();
  out << csv::coordinate_header(dim, {"mu", "var"}) << '\n';
  const bool var = field.has_variance();
  for (std::size_t j = 0; j < field.size(); ++j) {
    const auto p = field.points[j];
    for (int k = 0; k < dim; ++k) out << csv::number(p[k]) << ',';
    out << csv::number(field.mean(static_cast<Eigen::Index>(j))) << ',';
    if (var) out << csv::number(field.variance(static_cast<Eigen::Index>(j)));
    out << '\n';
  }
}

void save_field_csv(const std::string& path, const PredictionField& field) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write prediction field: " + path);
  write_field_csv(out, field);
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

double gpis_log_marginal(const PointSet& points, const Eigen::VectorXd& targets, double noise_variance,
                         const KernelParams& params) {
  require(noise_variance > 0.0, "noise variance must be positive");
  params.validate();
  const Eigen::Index n = targets.size();
  Eigen::MatrixXd k = gram(points, params);
  k.diagonal().array() += noise_variance + kRelativeJitter * params.signal_variance;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "marginal likelihood: Cholesky failed");
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * targets.dot(llt.solve(targets)) - 0.5 * logdet -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

GpisHyperparameters fit_gpis_hyperparameters(const PointSet& points, const Eigen::VectorXd& targets,
                                             const GpisHyperparameters& init, const MarginalFitOptions& opts) {
  require(init.noise_variance >= opts.min_noise_variance, "initial noise variance is below the floor");
  auto f = [&](const std::vector<double>& x) {
    try {
      return gpis_log_marginal(points, targets, std::exp(x[0]), {std::exp(x[1]), std::exp(x[2])});
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const std::vector<double> x0 = {std::log(init.noise_variance), std::log(init.kernel.length_scale_sq),
                                  std::log(init.kernel.signal_variance)};
  const double f0 = f(x0);
  if (!std::isfinite(f0)) fail(ErrorCode::NumericalFailure, "marginal likelihood is not finite at the start point");
  const auto r = detail::gradient_ascent(f, x0, f0, {std::log(opts.min_noise_variance), std::log(1e-6), std::log(1e-6)},
                                         {std::log(1e4), std::log(1e4), std::log(1e4)}, opts.max_iters, opts.fd_step,
                                         opts.rel_tol);
  return {std::exp(r.x[0]), {std::exp(r.x[1]), std::exp(r.x[2])}};
}

}  // namespace rgpis
