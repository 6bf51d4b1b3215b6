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

#include "rgpis/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rgpis/error.hpp"

namespace rgpis {

namespace {

constexpr double kPi = std::numbers::pi;

double lgam(double x) { return boost::math::lgamma(x); }

}  // namespace

double student_t_log_pdf(double y, double f, double lambda, double nu) {
  require(lambda > 0.0 && std::isfinite(lambda), "student_t: lambda must be positive");
  require(nu > 0.0 && std::isfinite(nu), "student_t: nu must be positive");
  const double r = y - f;
  return lgam(0.5 * (nu + 1.0)) - lgam(0.5 * nu) + 0.5 * std::log(lambda / (kPi * nu)) -
         0.5 * (nu + 1.0) * std::log1p(lambda * r * r / nu);
}

double student_t_pdf(double y, double f, double lambda, double nu) {
  return std::exp(student_t_log_pdf(y, f, lambda, nu));
}

double inv_gamma_log_pdf(double s2, double alpha, double beta) {
  require(s2 > 0.0, "inv_gamma: argument must be positive");
  require(alpha > 0.0 && beta > 0.0, "inv_gamma: alpha and beta must be positive");
  return alpha * std::log(beta) - lgam(alpha) - (1.0 + alpha) * std::log(s2) - beta / s2;
}

double inv_gamma_pdf(double s2, double alpha, double beta) { return std::exp(inv_gamma_log_pdf(s2, alpha, beta)); }

double inv_gamma_upper_tail(double c, double alpha, double beta) {
  require(c > 0.0 && alpha > 0.0 && beta > 0.0, "inv_gamma tail: arguments must be positive");
  // sigma^2 > c  <=>  1/sigma^2 < 1/c with 1/sigma^2 ~ Gamma(alpha, rate beta).
  return boost::math::gamma_p(alpha, beta / c);
}

namespace {

double beta_continued_fraction(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 10000;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  fail(ErrorCode::NumericalFailure, "incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
  require(a > 0.0 && b > 0.0, "incomplete beta: a and b must be positive");
  require(x >= 0.0 && x <= 1.0, "incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = lgam(a + b) - lgam(a) - lgam(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_tail(double t, double nu) {
  require(nu > 0.0, "student_t tail: nu must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double t2 = t * t;
  if (t2 == 0.0) return 1.0;
  // x = nu / (nu + t^2) computed without cancellation for large t.
  return incomplete_beta(nu / (nu + t2), 0.5 * nu, 0.5);
}

double student_t_abs_tail(double c, double lambda, double nu) {
  require(lambda > 0.0 && nu > 0.0, "student_t tail: lambda and nu must be positive");
  return student_t_two_sided_tail(c * std::sqrt(lambda), nu);
}

ScaleMixtureCheck scale_mixture_check(double y, double f, double alpha, double beta) {
  require(alpha > 0.0 && beta > 0.0, "scale mixture: alpha and beta must be positive");
  ScaleMixtureCheck out;
  out.lhs = student_t_pdf(y, f, alpha / beta, 2.0 * alpha);

  const double r2 = (y - f) * (y - f);
  const double log_norm = alpha * std::log(beta) - lgam(alpha) - 0.5 * std::log(2.0 * kPi);
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double v = log_norm - (alpha + 1.5) * std::log(s) - (beta + 0.5 * r2) / s;
    return std::exp(v);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double l1 = 0.0;
  try {
    out.rhs = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-12,
                                   &out.quadrature_error, &l1);
  } catch (const std::exception& e) {
    fail(ErrorCode::NumericalFailure, std::string("scale mixture quadrature failed: ") + e.what());
  }
  if (!std::isfinite(out.rhs) || out.quadrature_error > 1e-9 * std::max(1.0, l1)) {
    fail(ErrorCode::NumericalFailure, "scale mixture quadrature did not converge");
  }
  return out;
}

}  // namespace rgpis
