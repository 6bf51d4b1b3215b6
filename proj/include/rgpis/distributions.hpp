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

namespace rgpis {

/// Student's t density with location f, precision-like scale lambda and
/// nu degrees of freedom.
double student_t_pdf(double y, double f, double lambda, double nu);
double student_t_log_pdf(double y, double f, double lambda, double nu);

/// Inverse gamma density with shape alpha and scale beta.
double inv_gamma_pdf(double s2, double alpha, double beta);
double inv_gamma_log_pdf(double s2, double alpha, double beta);

/// P(sigma^2 > c) for sigma^2 ~ InvGamma(alpha, beta).
double inv_gamma_upper_tail(double c, double alpha, double beta);

/// Regularised incomplete beta I_x(a, b), continued fraction (modified
/// Lentz) with relative accuracy ~1e-14.
double incomplete_beta(double x, double a, double b);

/// P(|T| > t) for a standard Student's t with nu degrees of freedom.
double student_t_two_sided_tail(double t, double nu);

/// P(|y - f| > c) under student_t_pdf(., f, lambda, nu).
double student_t_abs_tail(double c, double lambda, double nu);

/// Both sides of the Gaussian / inverse-gamma scale-mixture identity for the
/// likelihood parameters (alpha, beta): lhs is the closed-form Student's t
/// with nu = 2 alpha and lambda = alpha / beta, rhs the numerical integral of
/// N(y | f, s) InvGamma(s | alpha, beta) over s in (0, inf).
struct ScaleMixtureCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double quadrature_error = 0.0;
};

ScaleMixtureCheck scale_mixture_check(double y, double f, double alpha, double beta);

}  // namespace rgpis
