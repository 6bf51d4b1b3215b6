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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rgpis/error.hpp"
#include "rgpis/gp_core.hpp"

using namespace rgpis;

namespace {

Dataset single_point(double y) {
  Dataset d;
  d.region = Region({-1.0, -1.0}, {1.0, 1.0});
  LabeledPoint p;
  p.x = {0.0, 0.0};
  p.y = y == 0.0 ? Label::Surface : (y > 0 ? Label::Outside : Label::Inside);
  if (y == 0.0) p.normal = std::vector<double>{1.0, 0.0};
  d.points.push_back(p);
  return d;
}

PointSet one(std::vector<double> x) {
  PointSet p(static_cast<int>(x.size()));
  p.push_back(x);
  return p;
}

}  // namespace

TEST_CASE("kernel closed form") {
  const KernelParams p{0.0625, 1.0};
  const std::vector<double> x = {0.3, -0.2};
  CHECK(kernel(x, x, p) == 1.0);
  const double d = std::sqrt(2.0 * 0.0625 / 2.0);
  const std::vector<double> z = {0.3 + d, -0.2 + d};
  CHECK(kernel(x, z, p) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> a = {u(rng), u(rng), u(rng)}, b = {u(rng), u(rng), u(rng)};
    const double k = kernel(a, b, {0.3, 2.0});
    CHECK(k == kernel(b, a, {0.3, 2.0}));
    CHECK(k > 0.0);
    CHECK(k <= 2.0);
  }
  CHECK_THROWS_AS(kernel(x, std::vector<double>{0.0, 0.0, 0.0}, p), Error);
  CHECK_THROWS_AS((KernelParams{0.0, 1.0}).validate(), Error);
  CHECK_THROWS_AS((KernelParams{1.0, -1.0}).validate(), Error);
}

TEST_CASE("gram matrix properties") {
  const KernelParams p{0.0625, 1.5};
  CHECK(gram(one({0.1, 0.2}), p)(0, 0) == 1.5);
  PointSet dup(2);
  dup.push_back(std::vector<double>{0.5, 0.5});
  dup.push_back(std::vector<double>{0.5, 0.5});
  const auto kd = gram(dup, p);
  CHECK((kd.array() == 1.5).all());
  std::mt19937_64 rng(2);
  const auto pts = oracle::random_points(rng, 20, 2, -1.0, 1.0);
  Eigen::MatrixXd k = gram(pts, p);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k.diagonal().array() == 1.5).all());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * k.trace());
  k.diagonal().array() += 1e-10;
  CHECK(Eigen::LLT<Eigen::MatrixXd>(k).info() == Eigen::Success);
  CHECK((gram(pts, p) - oracle::cov(pts, pts, 0.0625, 1.5)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("single-point fit and prediction") {
  const GpisFit fit = gpis_fit(single_point(1.0), 1.0, {0.0625, 1.0});
  CHECK(fit.weights()(0) == doctest::Approx(0.5).epsilon(1e-9));
  const auto at = gpis_predict(fit, one({0.0, 0.0}));
  CHECK(at.mean(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(at.variance(0) == doctest::Approx(0.5).epsilon(1e-9));
  const auto far = gpis_predict(fit, one({50.0, 50.0}));
  CHECK(std::abs(far.mean(0)) < 1e-12);
  CHECK(far.variance(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(gpis_predict(fit, one({0.0, 0.0, 0.0})), Error);
  CHECK_THROWS_AS(gpis_fit(single_point(1.0), 0.0, {}), Error);
  Dataset empty;
  empty.region = Region({0.0, 0.0}, {1.0, 1.0});
  CHECK_THROWS_AS(gpis_fit(empty, 0.1, {}), Error);
}

TEST_CASE("zero targets give zero weights") {
  std::mt19937_64 rng(3);
  Dataset d = oracle::random_dataset(rng, 30);
  for (auto& p : d.points) {
    p.y = Label::Surface;
    p.normal = std::vector<double>{1.0, 0.0};
  }
  const GpisFit fit = gpis_fit(d, 0.1, {});
  CHECK(fit.weights().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit invariants on random data") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Dataset d = oracle::random_dataset(rng, 25 + 5 * t);
    const double s2 = 0.01 * (t + 1);
    const GpisFit fit = gpis_fit(d, s2, {0.0625, 1.0});
    Eigen::MatrixXd c = oracle::cov(d.positions(), d.positions(), 0.0625, 1.0);
    c.diagonal().array() += s2 + 1e-10;
    const Eigen::MatrixXd l = fit.factor();
    CHECK((l * l.transpose() - c).norm() / c.norm() < 1e-8);
    CHECK((c * fit.weights() - d.targets()).norm() < 1e-8);
  }
}

TEST_CASE("prediction matches the dense-inverse formulas for small n") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const std::size_t n = 3 + static_cast<std::size_t>(t);
    const Dataset d = oracle::random_dataset(rng, n);
    const double s2 = 0.05, ell2 = 0.2 + 0.1 * t, sv = 0.7 + 0.2 * t;
    const GpisFit fit = gpis_fit(d, s2, {ell2, sv});
    const auto test = oracle::random_points(rng, 50, 2, -2.0, 2.0);
    const auto got = gpis_predict(fit, test);
    const auto ref = oracle::gp_predict(d.positions(), d.targets(), Eigen::VectorXd::Constant(n, s2), ell2, sv, test);
    CHECK((got.mean - ref.mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((got.variance - ref.var).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((gpis_predict_mean(fit, test).mean - ref.mean).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("variance bounds, interpolation and permutation invariance") {
  std::mt19937_64 rng(6);
  const Dataset d = oracle::random_dataset(rng, 60);
  const auto grid = make_grid(d.region, 0.05);
  const auto f = gpis_predict(gpis_fit(d, 0.02, {}), grid);
  CHECK(f.has_variance());
  CHECK(f.variance.minCoeff() >= 0.0);
  CHECK(f.variance.maxCoeff() <= 1.0);

  Dataset sparse = oracle::random_dataset(rng, 12);
  const auto interp = gpis_predict(gpis_fit(sparse, 1e-12, {0.0625, 1.0}), sparse.positions());
  CHECK((interp.mean - sparse.targets()).cwiseAbs().maxCoeff() < 1e-4);

  Dataset perm = d;
  std::shuffle(perm.points.begin(), perm.points.end(), rng);
  const auto pts = oracle::random_points(rng, 200, 2, -2.0, 2.0);
  const auto a = gpis_predict(gpis_fit(d, 0.02, {}), pts);
  const auto b = gpis_predict(gpis_fit(perm, 0.02, {}), pts);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.variance - b.variance).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("chunked prediction equals point-by-point prediction") {
  std::mt19937_64 rng(7);
  const Dataset d = oracle::random_dataset(rng, 30);
  const GpisFit fit = gpis_fit(d, 0.05, {});
  const auto pts = oracle::random_points(rng, kPredictionChunk + 37, 2, -2.0, 2.0);
  const auto all = gpis_predict(fit, pts);
  REQUIRE(all.size() == pts.size());
  for (std::size_t i : {std::size_t{0}, kPredictionChunk - 1, kPredictionChunk, pts.size() - 1}) {
    const auto single = gpis_predict(fit, one({pts[i][0], pts[i][1]}));
    CHECK(all.mean(static_cast<Eigen::Index>(i)) == doctest::Approx(single.mean(0)).epsilon(1e-12));
    CHECK(all.variance(static_cast<Eigen::Index>(i)) == doctest::Approx(single.variance(0)).epsilon(1e-12));
  }
}

TEST_CASE("log marginal likelihood matches the dense formula") {
  std::mt19937_64 rng(8);
  const Dataset d = oracle::random_dataset(rng, 15);
  const KernelParams p{0.15, 1.3};
  Eigen::MatrixXd c = oracle::cov(d.positions(), d.positions(), 0.15, 1.3);
  c.diagonal().array() += 0.04 + 1.3e-10;
  const Eigen::VectorXd y = d.targets();
  const double ref = -0.5 * y.dot(c.inverse() * y) - 0.5 * std::log(c.determinant()) -
                     0.5 * 15.0 * std::log(2.0 * 3.14159265358979323846);
  CHECK(gpis_log_marginal(d.positions(), y, 0.04, p) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("type-II maximum likelihood does not decrease the marginal likelihood") {
  std::mt19937_64 rng(9);
  const Dataset d = oracle::random_dataset(rng, 40);
  const GpisHyperparameters init{0.05, {0.0625, 1.0}};
  const auto fitted = fit_gpis_hyperparameters(d.positions(), d.targets(), init);
  CHECK(fitted.noise_variance >= 1e-6);
  CHECK(gpis_log_marginal(d.positions(), d.targets(), fitted.noise_variance, fitted.kernel) >=
        gpis_log_marginal(d.positions(), d.targets(), init.noise_variance, init.kernel));
}

TEST_CASE("field CSV layout") {
  PredictionField f;
  f.points = PointSet(2, {0.0, 1.0, 0.5, -0.25});
  f.mean = Eigen::Vector2d(0.1, -0.2);
  f.variance = Eigen::Vector2d(0.3, 0.4);
  std::ostringstream out;
  write_field_csv(out, f);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1,x2,mu,var");
  std::getline(in, line);
  CHECK(line.rfind("0,1,", 0) == 0);
  f.variance.resize(0);
  std::ostringstream m;
  write_field_csv(m, f);
  CHECK(m.str().find(",\n") != std::string::npos);
}
