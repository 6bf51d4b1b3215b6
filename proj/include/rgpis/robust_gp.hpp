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

#pragma once

// Gaussian-process implicit surface with a Student's t observation model,
// fitted by variational EM. The t likelihood is written as a Gaussian scale
// mixture with per-datum noise sigma_i^2 ~ InvGamma(alpha, beta); the
// posterior is approximated by q(f) q(sigma^2) with
//
//   q(f)         = N(m, A)
//   q(sigma_i^2) = InvGamma(alpha~_i, beta~_i)
//
// and the evidence lower bound (ELBO) is maximised by coordinate ascent in
// the E-step and by gradient ascent over theta = (alpha, beta) and the
// kernel hyperparameters psi in the M-step.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rgpis/dataset.hpp"
#include "rgpis/gp_core.hpp"

namespace rgpis {

/// Inverse-gamma mixing parameters. nu = 2 alpha, lambda = alpha / beta.
struct TLikelihoodParams {
  double alpha = 2.0;
  double beta = 4.0;

  void validate() const;
  double dof() const noexcept { return 2.0 * alpha; }
  double lambda() const noexcept { return alpha / beta; }
  static TLikelihoodParams from_dof_lambda(double nu, double lambda);
};

struct RobustOptions {
  /// Convergence threshold on |delta ELBO| / max(1, |ELBO|).
  double tol = 1e-6;
  int max_iters = 200;
  /// E-step coordinate-ascent sweeps per outer iteration.
  int max_sweeps = 50;
  /// Gradient-ascent iterations per M-step for theta (cheap) and psi.
  int max_likelihood_iters = 200;
  int max_kernel_iters = 5;
  /// Central finite-difference step in log-parameter space.
  double fd_step = 1e-5;
  /// Lower bounds for the likelihood parameters. With noise-free labels the
  /// bound grows without limit as beta -> 0, so beta needs a floor.
  double min_alpha = 1e-3;
  double min_beta = 1e-6;
  bool optimize_likelihood = true;
  bool optimize_kernel = true;
  /// Squared extrapolation of the EM map. A jump is kept only when it ends
  /// above the plain EM state, so the ELBO trace stays monotone. Off by
  /// default: it can settle in a different local optimum than plain EM.
  bool accelerate = false;
  /// If set, theta and psi start at random positive values around the given
  /// initial values (log-uniform within a factor e^0.5).
  std::optional<std::uint64_t> random_init_seed;
};

/// Largest n for which the full posterior covariance A is materialised.
inline constexpr std::size_t kFullCovarianceLimit = 5000;

struct RobustState {
  PointSet points;
  Eigen::VectorXd y;
  KernelParams kernel;
  TLikelihoodParams likelihood;

  Eigen::VectorXd m;
  Eigen::MatrixXd A;        // full covariance; empty above kFullCovarianceLimit
  Eigen::VectorXd diag_A;
  Eigen::VectorXd alpha_tilde;
  Eigen::VectorXd beta_tilde;

  /// Noise precisions that q(f) is the exact optimum for. All zero means
  /// q(f) is the prior (initial state).
  Eigen::VectorXd q_precision;
  /// KL(q(f) || p(f)), cached alongside q(f).
  double kl_f = 0.0;

  double elbo = 0.0;
  int iterations = 0;
  int e_sweeps = 0;
  bool converged = false;
  bool stalled = false;
  /// ELBO after every E-sweep and every M-step, in order.
  std::vector<double> elbo_trace;

  std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
  Eigen::VectorXd uncertainty() const { return beta_tilde.cwiseQuotient(alpha_tilde); }
  void check_invariants() const;
};

/// Algorithm start: m = 0, A = K, alpha~ = beta~ = 1.
RobustState init_robust_state(const Dataset& data, const TLikelihoodParams& theta, const KernelParams& psi);
RobustState init_robust_state(const PointSet& points, const Eigen::VectorXd& y,
                              const TLikelihoodParams& theta, const KernelParams& psi);

/// ELBO of the state's (q(f), q(sigma^2), theta, psi), all constants included.
double evaluate_elbo(const RobustState& state);

/// max over q(f) of the ELBO for the state's q(sigma^2) and the given
/// (theta, psi). Equals evaluate_elbo when q(f) is already optimal.
double collapsed_bound(const RobustState& state, const TLikelihoodParams& theta, const KernelParams& psi);

/// One coordinate-ascent sweep: q(f) given q(sigma^2), then q(sigma^2) given q(f).
RobustState e_sweep(RobustState state);
/// Sweeps until the relative ELBO change drops below opts.tol or
/// opts.max_sweeps is reached. theta and psi are untouched.
RobustState e_step(RobustState state, const RobustOptions& opts = {});
/// Gradient ascent on theta and psi for fixed q(sigma^2). q(f) is refreshed
/// to its optimum under the new psi (see README). Sets `stalled` and
/// returns the input if no ascent step could be found.
RobustState m_step(RobustState state, const RobustOptions& opts = {});

RobustState fit_robust(const Dataset& data, const TLikelihoodParams& init_theta, const KernelParams& init_psi,
                       const RobustOptions& opts = {});

/// Heteroscedastic posterior with Sigma = diag(beta~ / alpha~).
GpisFit robust_posterior(const RobustState& state);
PredictionField robust_predict(const RobustState& state, const EvalGrid& grid);
PredictionField robust_predict(const RobustState& state, const PointSet& points);
PredictionField robust_predict_mean(const RobustState& state, const PointSet& points);

struct UncertaintyReport {
  PointSet positions;
  Eigen::VectorXd y;
  Eigen::VectorXd u;
};

UncertaintyReport data_uncertainty(const RobustState& state);
/// Baseline proxy: GPIS predictive variance at each observed point.
UncertaintyReport gpis_uncertainty(const GpisFit& fit);

/// CSV: x1,x2[,x3],y,u
void write_uncertainty_csv(std::ostream& out, const UncertaintyReport& report);
void save_uncertainty_csv(const std::string& path, const UncertaintyReport& report);

/// JSON checkpoint holding the dataset hash, psi, theta, m, diag(A),
/// alpha~, beta~, the q(f) precisions, the ELBO and the iteration count.
void save_checkpoint(const std::string& path, const RobustState& state, std::uint64_t data_hash);
/// Restores a state for `data`; fails with Parse if the hash differs.
RobustState load_checkpoint(const std::string& path, const Dataset& data);

}  // namespace rgpis
