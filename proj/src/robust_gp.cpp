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

#include "rgpis/robust_gp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "rgpis/csv.hpp"
#include "rgpis/error.hpp"
#include "rgpis/rng.hpp"
#include "detail/ascent.hpp"

namespace rgpis {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double lgam(double x) { return boost::math::lgamma(x); }
double digam(double x) { return boost::math::digamma(x); }

Eigen::MatrixXd jittered_gram(const PointSet& points, const KernelParams& psi) {
  Eigen::MatrixXd k = gram(points, psi);
  k.diagonal().array() += kRelativeJitter * psi.signal_variance;
  return k;
}

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& b, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::NumericalFailure, std::string(what) + ": Cholesky factorisation failed");
  }
  return llt;
}

/// In-place inverse of a lower-triangular matrix by recursive 2x2 blocking,
/// so the bulk of the work is matrix products.
void invert_lower_triangular(Eigen::Ref<Eigen::MatrixXd> l) {
  const Eigen::Index n = l.rows();
  if (n <= 64) {
    Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
    l.triangularView<Eigen::Lower>().solveInPlace(inv);
    l = inv;
    return;
  }
  const Eigen::Index h = n / 2;
  auto a = l.topLeftCorner(h, h);
  auto c = l.bottomLeftCorner(n - h, h);
  auto d = l.bottomRightCorner(n - h, n - h);
  invert_lower_triangular(a);
  invert_lower_triangular(d);
  const Eigen::MatrixXd ca = c * a.triangularView<Eigen::Lower>();
  c.noalias() = -(d.triangularView<Eigen::Lower>() * ca);
  l.topRightCorner(h, n - h).setZero();
}

/// B = I + W^1/2 K W^1/2. Every solve goes through B, whose eigenvalues are
/// >= 1, so K itself is never inverted.
Eigen::MatrixXd make_b(const Eigen::MatrixXd& k, const Eigen::VectorXd& sw) {
  Eigen::MatrixXd b = (sw * sw.transpose()).cwiseProduct(k);
  b.diagonal().array() += 1.0;
  return b;
}

struct QfSolution {
  Eigen::VectorXd m;
  Eigen::VectorXd diag_A;
  Eigen::MatrixXd a;  // only when requested
  double kl = 0.0;
};

/// Optimal q(f) for noise precisions w:
///   A = (K^-1 + W)^-1 = W^-1/2 (I - B^-1) W^-1/2,  m = K (K + W^-1)^-1 y
/// with KL(q(f) || p(f)) = 1/2 [tr(B^-1) + m' K^-1 m - n + ln|B|].
QfSolution solve_qf(const Eigen::MatrixXd& k, const Eigen::VectorXd& w, const Eigen::VectorXd& y, bool full) {
  const Eigen::Index n = k.rows();
  QfSolution q;
  if ((w.array() == 0.0).all()) {
    q.m = Eigen::VectorXd::Zero(n);
    q.diag_A = k.diagonal();
    if (full) q.a = k;
    q.kl = 0.0;
    return q;
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const auto llt = factor_or_throw(make_b(k, sw), "q(f) update");
  Eigen::MatrixXd linv = llt.matrixL();
  invert_lower_triangular(linv);
  const Eigen::VectorXd binv_diag = linv.colwise().squaredNorm().transpose();

  const Eigen::VectorXd alpha_vec = sw.cwiseProduct(llt.solve(sw.cwiseProduct(y)));  // (K + V)^-1 y
  q.m = k * alpha_vec;
  q.diag_A = (1.0 - binv_diag.array()) / w.array();
  if (full) {
    Eigen::MatrixXd binv(n, n);
    binv.setZero();
    binv.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());
    binv = binv.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd isw = sw.cwiseInverse();
    q.a = (Eigen::MatrixXd::Identity(n, n) - binv).cwiseProduct(isw * isw.transpose());
    q.a.diagonal() = q.diag_A;
  }
  const double logdet_b = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  q.kl = 0.5 * (binv_diag.sum() + q.m.dot(alpha_vec) - static_cast<double>(n) + logdet_b);
  return q;
}

/// Per-datum moments of q(sigma_i^2).
struct SigmaMoments {
  Eigen::ArrayXd e_inv;  // E[1 / sigma^2] = alpha~ / beta~
  Eigen::ArrayXd e_log;  // E[ln sigma^2]  = ln beta~ - digamma(alpha~)
  double entropy = 0.0;  // sum of inverse-gamma entropies
};

SigmaMoments sigma_moments(const Eigen::VectorXd& at, const Eigen::VectorXd& bt) {
  const Eigen::Index n = at.size();
  SigmaMoments s;
  s.e_inv = at.array() / bt.array();
  s.e_log.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dg = digam(at(i));
    s.e_log(i) = std::log(bt(i)) - dg;
    s.entropy += at(i) + std::log(bt(i)) + lgam(at(i)) - (1.0 + at(i)) * dg;
  }
  return s;
}

/// sum_i E_q[ln InvGamma(sigma_i^2 | alpha, beta)]
double prior_term(const SigmaMoments& s, double alpha, double beta) {
  const double n = static_cast<double>(s.e_inv.size());
  return n * (alpha * std::log(beta) - lgam(alpha)) - (alpha + 1.0) * s.e_log.sum() - beta * s.e_inv.sum();
}

/// ln N(y | 0, K + W^-1)
double log_marginal(const Eigen::MatrixXd& k, const Eigen::VectorXd& w, const Eigen::VectorXd& y) {
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const auto llt = factor_or_throw(make_b(k, sw), "marginal likelihood");
  const Eigen::VectorXd b = sw.cwiseProduct(y);
  const double quad = b.dot(llt.solve(b));
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum() - w.array().log().sum();
  return -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

void apply_qf(RobustState& s, QfSolution&& q, const Eigen::VectorXd& w) {
  s.m = std::move(q.m);
  s.diag_A = std::move(q.diag_A);
  if (q.a.size() > 0) {
    s.A = std::move(q.a);
  } else {
    s.A.resize(0, 0);
  }
  s.kl_f = q.kl;
  s.q_precision = w;
}

bool want_full(const RobustState& s) { return s.size() <= kFullCovarianceLimit; }

// Coordinate ascent sweep with a precomputed (jittered) Gram matrix.
void sweep_with(RobustState& s, const Eigen::MatrixXd& k, bool full) {
  const Eigen::VectorXd w = s.alpha_tilde.cwiseQuotient(s.beta_tilde);
  const bool current = s.q_precision == w && (!full || s.A.size() > 0);
  if (!current) apply_qf(s, solve_qf(k, w, s.y, full), w);
  const double a = s.likelihood.alpha, b = s.likelihood.beta;
  s.alpha_tilde.setConstant(a + 0.5);
  s.beta_tilde = (b + 0.5 * ((s.y - s.m).array().square() + s.diag_A.array())).matrix();
  s.elbo = evaluate_elbo(s);
  s.elbo_trace.push_back(s.elbo);
  ++s.e_sweeps;
}

bool converged(double before, double after, double tol) {
  return std::abs(after - before) <= tol * std::max(1.0, std::abs(after));
}

}  // namespace

// ---------------------------------------------------------------------------

void TLikelihoodParams::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, "likelihood alpha must be positive");
  require(std::isfinite(beta) && beta > 0.0, "likelihood beta must be positive");
}

TLikelihoodParams TLikelihoodParams::from_dof_lambda(double nu, double lambda) {
  require(nu > 0.0 && lambda > 0.0, "nu and lambda must be positive");
  return {0.5 * nu, 0.5 * nu / lambda};
}

void RobustState::check_invariants() const {
  const Eigen::Index n = y.size();
  require(m.size() == n && diag_A.size() == n && alpha_tilde.size() == n && beta_tilde.size() == n &&
              q_precision.size() == n,
          "robust state: inconsistent sizes");
  require((alpha_tilde.array() > 0.0).all() && (beta_tilde.array() > 0.0).all(),
          "robust state: alpha~ and beta~ must be positive");
  require((diag_A.array() >= 0.0).all(), "robust state: negative posterior variance");
  if (A.size() > 0) {
    require(A.rows() == n && A.cols() == n, "robust state: covariance has wrong shape");
    require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, A.cwiseAbs().maxCoeff()),
            "robust state: covariance is not symmetric");
  }
}

RobustState init_robust_state(const PointSet& points, const Eigen::VectorXd& y, const TLikelihoodParams& theta,
                              const KernelParams& psi) {
  theta.validate();
  psi.validate();
  require(points.size() > 0, "robust fit needs a non-empty dataset");
  require(static_cast<Eigen::Index>(points.size()) == y.size(), "robust fit: size mismatch");
  RobustState s;
  s.points = points;
  s.y = y;
  s.kernel = psi;
  s.likelihood = theta;
  const Eigen::Index n = y.size();
  s.alpha_tilde = Eigen::VectorXd::Ones(n);
  s.beta_tilde = Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd k = jittered_gram(points, psi);
  apply_qf(s, solve_qf(k, Eigen::VectorXd::Zero(n), y, want_full(s)), Eigen::VectorXd::Zero(n));
  s.elbo = evaluate_elbo(s);
  s.elbo_trace.push_back(s.elbo);
  return s;
}

RobustState init_robust_state(const Dataset& data, const TLikelihoodParams& theta, const KernelParams& psi) {
  require(data.size() > 0, "robust fit needs a non-empty dataset");
  return init_robust_state(data.positions(), data.targets(), theta, psi);
}

double evaluate_elbo(const RobustState& s) {
  const SigmaMoments sm = sigma_moments(s.alpha_tilde, s.beta_tilde);
  const Eigen::ArrayXd resid2 = (s.y - s.m).array().square() + s.diag_A.array();
  const double n = static_cast<double>(s.size());
  const double expected_loglik = -0.5 * n * kLog2Pi - 0.5 * sm.e_log.sum() - 0.5 * (sm.e_inv * resid2).sum();
  return expected_loglik + prior_term(sm, s.likelihood.alpha, s.likelihood.beta) + sm.entropy - s.kl_f;
}

double collapsed_bound(const RobustState& s, const TLikelihoodParams& theta, const KernelParams& psi) {
  const SigmaMoments sm = sigma_moments(s.alpha_tilde, s.beta_tilde);
  const Eigen::VectorXd w = sm.e_inv.matrix();
  const double correction = -0.5 * (sm.e_log + w.array().log()).sum();
  return log_marginal(jittered_gram(s.points, psi), w, s.y) + correction +
         prior_term(sm, theta.alpha, theta.beta) + sm.entropy;
}

RobustState e_sweep(RobustState s) {
  const Eigen::MatrixXd k = jittered_gram(s.points, s.kernel);
  sweep_with(s, k, want_full(s));
  return s;
}

namespace {

// Full covariance is only materialised when `full` is set; fit_robust skips
// it inside the loop and adds it once at the end.
RobustState e_step_impl(RobustState s, const RobustOptions& opts, bool full) {
  require(opts.max_sweeps >= 1, "E-step needs at least one sweep");
  const Eigen::MatrixXd k = jittered_gram(s.points, s.kernel);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const double before = s.elbo;
    sweep_with(s, k, false);
    if (converged(before, s.elbo, opts.tol)) break;
  }
  if (full) {
    // Same inputs as the last sweep, so m, diag(A) and the KL are reproduced
    // exactly; this pass only adds the off-diagonal covariance.
    apply_qf(s, solve_qf(k, s.q_precision, s.y, true), Eigen::VectorXd(s.q_precision));
  }
  return s;
}

RobustState m_step_impl(RobustState s, const RobustOptions& opts, bool full) {
  const double h = opts.fd_step;
  const double inner_tol = 1e-12;
  bool moved = false, failed = false;

  if (opts.optimize_likelihood) {
    // Profile q(sigma^2) out: for fixed q(f) the optimal factor is
    // InvGamma(alpha + 1/2, beta + s_i / 2) and the bound in theta becomes
    //   sum_i alpha ln beta - lnG(alpha) + lnG(alpha + 1/2) - (alpha + 1/2) ln(beta + s_i / 2).
    const Eigen::ArrayXd half_s = 0.5 * ((s.y - s.m).array().square() + s.diag_A.array());
    const double n = static_cast<double>(s.size());
    auto f = [&](const std::vector<double>& x) {
      const double a = std::exp(x[0]), b = std::exp(x[1]);
      return n * (a * std::log(b) - lgam(a) + lgam(a + 0.5)) - (a + 0.5) * (b + half_s).log().sum();
    };
    const std::vector<double> x0 = {std::log(s.likelihood.alpha), std::log(s.likelihood.beta)};
    const auto r = detail::gradient_ascent(f, x0, f(x0), {std::log(opts.min_alpha), std::log(opts.min_beta)},
                                   {std::log(1e4), std::log(1e4)}, opts.max_likelihood_iters, h, inner_tol);
    if (r.moved) {
      s.likelihood = {std::exp(r.x[0]), std::exp(r.x[1])};
      s.alpha_tilde.setConstant(s.likelihood.alpha + 0.5);
      s.beta_tilde = (s.likelihood.beta + half_s).matrix();
    }
    moved |= r.moved;
    failed |= r.line_search_failed && !r.moved;
  }

  const Eigen::VectorXd w = s.alpha_tilde.cwiseQuotient(s.beta_tilde);
  if (opts.optimize_kernel) {
    auto f = [&](const std::vector<double>& x) {
      KernelParams p{std::exp(x[0]), std::exp(x[1])};
      try {
        return log_marginal(jittered_gram(s.points, p), w, s.y);
      } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
    const std::vector<double> x0 = {std::log(s.kernel.length_scale_sq), std::log(s.kernel.signal_variance)};
    const auto r = detail::gradient_ascent(f, x0, f(x0), {std::log(1e-6), std::log(1e-6)}, {std::log(1e4), std::log(1e4)},
                                   opts.max_kernel_iters, h, inner_tol);
    if (r.moved) s.kernel = {std::exp(r.x[0]), std::exp(r.x[1])};
    moved |= r.moved;
    failed |= r.line_search_failed && !r.moved;
  }

  if (!moved) {
    s.stalled = failed;
    return s;
  }
  s.stalled = false;
  // q(f) moves to its optimum under the new psi and q(sigma^2).
  apply_qf(s, solve_qf(jittered_gram(s.points, s.kernel), w, s.y, full), w);
  s.elbo = evaluate_elbo(s);
  s.elbo_trace.push_back(s.elbo);
  return s;
}

}  // namespace

RobustState e_step(RobustState s, const RobustOptions& opts) {
  const bool full = want_full(s);
  return e_step_impl(std::move(s), opts, full);
}

RobustState m_step(RobustState s, const RobustOptions& opts) {
  const bool full = want_full(s);
  return m_step_impl(std::move(s), opts, full);
}

namespace {

// EM state in log coordinates: theta, psi, then beta~ (alpha~ = alpha + 1/2).
Eigen::VectorXd em_coordinates(const RobustState& s) {
  const Eigen::Index n = s.beta_tilde.size();
  Eigen::VectorXd x(4 + n);
  x << std::log(s.likelihood.alpha), std::log(s.likelihood.beta), std::log(s.kernel.length_scale_sq),
      std::log(s.kernel.signal_variance), s.beta_tilde.array().log().matrix();
  return x;
}

RobustState state_at(const RobustState& like, const Eigen::VectorXd& x, const RobustOptions& opts) {
  RobustState s = like;
  const auto clamp_exp = [](double v, double lo, double hi) { return std::exp(std::clamp(v, std::log(lo), std::log(hi))); };
  s.likelihood = {clamp_exp(x(0), opts.min_alpha, 1e4), clamp_exp(x(1), opts.min_beta, 1e4)};
  s.kernel = {clamp_exp(x(2), 1e-6, 1e4), clamp_exp(x(3), 1e-6, 1e4)};
  const Eigen::Index n = s.beta_tilde.size();
  s.alpha_tilde.setConstant(s.likelihood.alpha + 0.5);
  for (Eigen::Index i = 0; i < n; ++i) s.beta_tilde(i) = clamp_exp(x(4 + i), 1e-300, 1e300);
  const Eigen::VectorXd w = s.alpha_tilde.cwiseQuotient(s.beta_tilde);
  apply_qf(s, solve_qf(jittered_gram(s.points, s.kernel), w, s.y, false), w);
  s.elbo = evaluate_elbo(s);
  return s;
}

RobustState em_iteration(RobustState s, const RobustOptions& opts) {
  s = e_step_impl(std::move(s), opts, false);
  return m_step_impl(std::move(s), opts, false);
}

}  // namespace

RobustState fit_robust(const Dataset& data, const TLikelihoodParams& init_theta, const KernelParams& init_psi,
                       const RobustOptions& opts) {
  require(opts.tol > 0.0, "robust fit: tol must be positive");
  require(opts.max_iters >= 1, "robust fit: max_iters must be at least 1");
  require(opts.max_sweeps >= 1, "robust fit: max_sweeps must be at least 1");
  TLikelihoodParams theta = init_theta;
  KernelParams psi = init_psi;
  if (opts.random_init_seed) {
    Rng rng(*opts.random_init_seed, StreamTag::RobustInit);
    theta.alpha *= std::exp(rng.uniform(-0.5, 0.5));
    theta.beta *= std::exp(rng.uniform(-0.5, 0.5));
    psi.length_scale_sq *= std::exp(rng.uniform(-0.5, 0.5));
    psi.signal_variance *= std::exp(rng.uniform(-0.5, 0.5));
  }
  RobustState s = init_robust_state(data, theta, psi);
  int it = 0;
  auto step = [&](RobustState st) {
    ++it;
    try {
      st = em_iteration(std::move(st), opts);
    } catch (const Error& e) {
      fail(e.code(), "robust fit iteration " + std::to_string(it) + ": " + e.what());
    }
    st.iterations = it;
    return st;
  };
  while (it < opts.max_iters) {
    const double before = s.elbo;
    const Eigen::VectorXd x0 = em_coordinates(s);
    RobustState s1 = step(std::move(s));
    if (converged(before, s1.elbo, opts.tol)) {
      s = std::move(s1);
      s.converged = true;
      break;
    }
    if (!opts.accelerate || it >= opts.max_iters) {
      s = std::move(s1);
      continue;
    }
    const double mid = s1.elbo;
    const Eigen::VectorXd x1 = em_coordinates(s1);
    s = step(std::move(s1));
    if (converged(mid, s.elbo, opts.tol)) {
      s.converged = true;
      break;
    }
    const Eigen::VectorXd r = x1 - x0;
    const Eigen::VectorXd v = em_coordinates(s) - x1 - r;
    const double vn = v.norm();
    double a = vn > 0.0 ? -r.norm() / vn : -1.0;
    const double base = s.elbo;
    for (int attempt = 0; attempt < 3 && a < -1.0 && it < opts.max_iters; ++attempt, a = 0.5 * (a - 1.0)) {
      RobustState s3;
      try {
        s3 = step(state_at(s, x0 - 2.0 * a * r + a * a * v, opts));
      } catch (const Error&) {
        continue;
      }
      if (!(s3.elbo > base)) continue;
      s3.elbo_trace = std::move(s.elbo_trace);
      s3.elbo_trace.push_back(s3.elbo);
      s = std::move(s3);
      break;
    }
    if (converged(base, s.elbo, opts.tol) && s.elbo != base) {
      s.converged = true;
      break;
    }
  }
  if (want_full(s) && s.A.size() == 0) {
    const Eigen::VectorXd w = s.q_precision;
    apply_qf(s, solve_qf(jittered_gram(s.points, s.kernel), w, s.y, true), w);
  }
  return s;
}

GpisFit robust_posterior(const RobustState& s) {
  return gp_fit_diagonal(s.points, s.y, s.uncertainty(), s.kernel);
}

PredictionField robust_predict(const RobustState& s, const PointSet& points) {
  return gpis_predict(robust_posterior(s), points);
}

PredictionField robust_predict(const RobustState& s, const EvalGrid& grid) {
  return gpis_predict(robust_posterior(s), grid);
}

PredictionField robust_predict_mean(const RobustState& s, const PointSet& points) {
  return gpis_predict_mean(robust_posterior(s), points);
}

UncertaintyReport data_uncertainty(const RobustState& s) {
  return {s.points, s.y, s.uncertainty()};
}

UncertaintyReport gpis_uncertainty(const GpisFit& fit) {
  const PredictionField at_data = gpis_predict(fit, fit.training_points());
  return {fit.training_points(), fit.targets(), at_data.variance};
}

void write_uncertainty_csv(std::ostream& out, const UncertaintyReport& r) {
  const int dim = r.positions.dim();
  out << csv::coordinate_header(dim, {"y", "u"}) << '\n';
  for (std::size_t i = 0; i < r.positions.size(); ++i) {
    const auto p = r.positions[i];
    for (int k = 0; k < dim; ++k) out << csv::number(p[k]) << ',';
    out << static_cast<int>(r.y(static_cast<Eigen::Index>(i))) << ','
        << csv::number(r.u(static_cast<Eigen::Index>(i))) << '\n';
  }
}

void save_uncertainty_csv(const std::string& path, const UncertaintyReport& r) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write uncertainty report: " + path);
  write_uncertainty_csv(out, r);
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const nlohmann::json& j, Eigen::Index n, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != n) {
    fail(ErrorCode::Parse, std::string("checkpoint field '") + key + "' has the wrong length");
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

void save_checkpoint(const std::string& path, const RobustState& s, std::uint64_t data_hash) {
  nlohmann::json j;
  j["format"] = "rgpis-robust-checkpoint";
  j["version"] = 1;
  j["dataset_hash"] = hex64(data_hash);
  j["n"] = s.size();
  j["dim"] = s.points.dim();
  j["kernel"] = {{"length_scale_sq", s.kernel.length_scale_sq}, {"signal_variance", s.kernel.signal_variance}};
  j["likelihood"] = {{"alpha", s.likelihood.alpha}, {"beta", s.likelihood.beta}};
  j["m"] = to_std(s.m);
  j["diag_A"] = to_std(s.diag_A);
  j["alpha_tilde"] = to_std(s.alpha_tilde);
  j["beta_tilde"] = to_std(s.beta_tilde);
  j["q_precision"] = to_std(s.q_precision);
  j["elbo"] = s.elbo;
  j["iterations"] = s.iterations;
  j["converged"] = s.converged;
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write checkpoint: " + path);
  out << j.dump(1) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

RobustState load_checkpoint(const std::string& path, const Dataset& data) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::Parse, "checkpoint is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (j.at("format") != "rgpis-robust-checkpoint") fail(ErrorCode::Parse, "not a robust GP checkpoint");
    if (j.at("dataset_hash").get<std::string>() != hex64(dataset_hash(data))) {
      fail(ErrorCode::Parse, "checkpoint was written for a different dataset");
    }
    const auto n = static_cast<Eigen::Index>(data.size());
    RobustState s;
    s.points = data.positions();
    s.y = data.targets();
    s.kernel = {j.at("kernel").at("length_scale_sq").get<double>(), j.at("kernel").at("signal_variance").get<double>()};
    s.likelihood = {j.at("likelihood").at("alpha").get<double>(), j.at("likelihood").at("beta").get<double>()};
    s.kernel.validate();
    s.likelihood.validate();
    s.alpha_tilde = to_eigen(j, n, "alpha_tilde");
    s.beta_tilde = to_eigen(j, n, "beta_tilde");
    const Eigen::VectorXd w = to_eigen(j, n, "q_precision");
    apply_qf(s, solve_qf(jittered_gram(s.points, s.kernel), w, s.y, want_full(s)), w);
    s.elbo = j.at("elbo").get<double>();
    s.iterations = j.at("iterations").get<int>();
    s.converged = j.value("converged", false);
    s.check_invariants();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace rgpis
