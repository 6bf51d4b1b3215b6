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

// Independent reference implementations used as test oracles. Nothing here
// calls into the library's numerical code.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rgpis/dataset.hpp"
#include "rgpis/geometry.hpp"
#include "rgpis/robust_gp.hpp"

namespace oracle {

inline double se(const double* x, const double* z, int dim, double ell2, double sv) {
  double d2 = 0.0;
  for (int k = 0; k < dim; ++k) d2 += (x[k] - z[k]) * (x[k] - z[k]);
  return sv * std::exp(-d2 / (2.0 * ell2));
}

inline Eigen::MatrixXd cov(const rgpis::PointSet& a, const rgpis::PointSet& b, double ell2, double sv) {
  Eigen::MatrixXd k(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) k(i, j) = se(a[i].data(), b[j].data(), a.dim(), ell2, sv);
  return k;
}

struct Prediction {
  Eigen::VectorXd mean, var;
};

/// Predictive mean and variance with an explicit inverse of K + diag(noise).
inline Prediction gp_predict(const rgpis::PointSet& x, const Eigen::VectorXd& y, const Eigen::VectorXd& noise,
                             double ell2, double sv, const rgpis::PointSet& xs) {
  Eigen::MatrixXd c = cov(x, x, ell2, sv);
  c.diagonal() += noise;
  c.diagonal().array() += 1e-10 * sv;
  const Eigen::MatrixXd ci = c.fullPivLu().inverse();
  const Eigen::MatrixXd ks = cov(xs, x, ell2, sv);
  Prediction p;
  p.mean = ks * ci * y;
  p.var = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(xs.size()), sv) - (ks * ci * ks.transpose()).diagonal();
  return p;
}

/// Mean-field ELBO for q(f) = N(m, A), q(s_i) = InvGamma(at_i, bt_i) with
/// prior f ~ N(0, K), s_i ~ InvGamma(alpha, beta), y_i ~ N(f_i, s_i).
inline double elbo(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, const Eigen::VectorXd& m,
                   const Eigen::MatrixXd& a, const Eigen::VectorXd& at, const Eigen::VectorXd& bt, double alpha,
                   double beta) {
  using boost::math::digamma;
  using boost::math::lgamma;
  const double n = static_cast<double>(y.size());
  const double pi = 3.14159265358979323846;
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e_inv = at(i) / bt(i);
    const double e_log = std::log(bt(i)) - digamma(at(i));
    const double r2 = (y(i) - m(i)) * (y(i) - m(i)) + a(i, i);
    total += -0.5 * std::log(2.0 * pi) - 0.5 * e_log - 0.5 * e_inv * r2;
    total += alpha * std::log(beta) - lgamma(alpha) - (alpha + 1.0) * e_log - beta * e_inv;
    total += at(i) + std::log(bt(i)) + lgamma(at(i)) - (1.0 + at(i)) * digamma(at(i));
  }
  const Eigen::MatrixXd ki = k.inverse();
  const double kl = 0.5 * ((ki * a).trace() + m.dot(ki * m) - n + std::log(k.determinant()) - std::log(a.determinant()));
  return total - kl;
}

/// Quasi-Newton minimisation with central-difference gradients.
inline std::vector<double> bfgs(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                int max_iters = 5000, double h = 1e-6, double gtol = 1e-10) {
  const std::size_t n = x.size();
  auto grad = [&](const std::vector<double>& p) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    std::vector<double> q = p;
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = p[i] + h;
      const double fp = f(q);
      q[i] = p[i] - h;
      const double fm = f(q);
      q[i] = p[i];
      g(static_cast<Eigen::Index>(i)) = (fp - fm) / (2.0 * h);
    }
    return g;
  };
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  double fx = f(x);
  Eigen::VectorXd g = grad(x);
  for (int it = 0; it < max_iters && g.norm() > gtol; ++it) {
    Eigen::VectorXd d = -hinv * g;
    if (d.dot(g) >= 0.0) {
      hinv.setIdentity();
      d = -g;
    }
    double step = 1.0;
    std::vector<double> xn(n);
    double fn = fx;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * d(static_cast<Eigen::Index>(i));
      fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * g.dot(d)) {
        ok = true;
        break;
      }
    }
    if (!ok) break;
    const Eigen::VectorXd gn = grad(xn);
    const Eigen::VectorXd s = step * d, yv = gn - g;
    const double sy = s.dot(yv);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(hinv.rows(), hinv.cols());
      hinv = (id - rho * s * yv.transpose()) * hinv * (id - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    x = xn;
    fx = fn;
    g = gn;
  }
  return x;
}

inline rgpis::PointSet random_points(std::mt19937_64& rng, std::size_t n, int dim, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  rgpis::PointSet p(dim);
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = u(rng);
    p.push_back(x);
  }
  return p;
}

/// Random 2D dataset with labels from a unit circle and a few surface points.
inline rgpis::Dataset random_dataset(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0), ang(0.0, 6.283185307179586);
  rgpis::Dataset d;
  d.region = rgpis::Region({-2.0, -2.0}, {2.0, 2.0});
  for (std::size_t i = 0; i < n; ++i) {
    rgpis::LabeledPoint p;
    if (i % 3 == 0) {
      const double t = ang(rng);
      p.x = {std::cos(t), std::sin(t)};
      p.y = rgpis::Label::Surface;
      p.normal = std::vector<double>{std::cos(t), std::sin(t)};
    } else {
      p.x = {u(rng), u(rng)};
      p.y = std::hypot(p.x[0], p.x[1]) < 1.0 ? rgpis::Label::Inside : rgpis::Label::Outside;
    }
    d.points.push_back(std::move(p));
  }
  return d;
}

/// Minimises the negative mean-field ELBO over (m, chol(A), ln at, ln bt).
struct KlOracle {
  Eigen::VectorXd m, at, bt;
  Eigen::MatrixXd a;
};

inline KlOracle minimise_kl(const rgpis::PointSet& x, const Eigen::VectorXd& y, const rgpis::TLikelihoodParams& th,
                           const rgpis::KernelParams& psi) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd k = cov(x, x, psi.length_scale_sq, psi.signal_variance);
  k.diagonal().array() += rgpis::kRelativeJitter * psi.signal_variance;
  auto unpack = [n](const std::vector<double>& p, KlOracle& o) {
    std::size_t c = 0;
    o.m.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) o.m(i) = p[c++];
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = i == j ? std::exp(p[c++]) : p[c++];
    o.a = l * l.transpose();
    o.at.resize(n);
    o.bt.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) o.at(i) = std::exp(p[c++]);
    for (Eigen::Index i = 0; i < n; ++i) o.bt(i) = std::exp(p[c++]);
  };
  // Start from the prior with unit inverse-gamma factors.
  std::vector<double> p;
  for (Eigen::Index i = 0; i < n; ++i) p.push_back(0.0);
  const Eigen::MatrixXd lk = k.llt().matrixL();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) p.push_back(i == j ? std::log(lk(i, i)) : lk(i, j));
  for (Eigen::Index i = 0; i < 2 * n; ++i) p.push_back(0.0);
  auto f = [&](const std::vector<double>& q) {
    KlOracle o;
    unpack(q, o);
    return -elbo(k, y, o.m, o.a, o.at, o.bt, th.alpha, th.beta);
  };
  p = bfgs(f, p, 20000, 1e-6, 1e-11);
  KlOracle out;
  unpack(p, out);
  return out;
}

}  // namespace oracle
