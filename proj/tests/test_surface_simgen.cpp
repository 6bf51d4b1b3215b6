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

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rgpis/error.hpp"
#include "rgpis/gp_core.hpp"
#include "rgpis/simgen.hpp"
#include "rgpis/surface.hpp"

using namespace rgpis;

namespace {

PredictionField linear_field(double spacing) {
  PredictionField f;
  f.points = make_grid(Region({-1.0, -1.0}, {1.0, 1.0}), spacing).points;
  f.mean.resize(static_cast<Eigen::Index>(f.points.size()));
  for (std::size_t i = 0; i < f.points.size(); ++i) f.mean(static_cast<Eigen::Index>(i)) = f.points[i][0];
  return f;
}

}  // namespace

TEST_CASE("level set of a constant field is empty") {
  PredictionField f = linear_field(0.1);
  f.mean.setOnes();
  const auto e = extract_level_set(f, 0.01);
  CHECK(e.empty_selection);
  CHECK(e.size() == 0);
  CHECK_THROWS_AS(extract_level_set(f, 0.0), Error);
}

TEST_CASE("level set of mu = x1 is the x1 = 0 grid line") {
  const auto e = extract_level_set(linear_field(0.02), 0.01);
  CHECK_FALSE(e.empty_selection);
  CHECK(e.size() == 101);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(std::abs(e.points[i][0]) < 1e-12);
    CHECK(std::abs(e.mu_values[i]) < 0.01);
  }
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e.points[i][1] > e.points[i - 1][1]);
}

TEST_CASE("band monotonicity") {
  PredictionField f = linear_field(0.05);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.3);
  for (auto& v : f.mean) v = g(rng);
  const auto small = extract_level_set(f, 0.05), large = extract_level_set(f, 0.2);
  std::size_t j = 0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    while (j < large.size() && large.mu_values[j] != small.mu_values[i]) ++j;
    CHECK(j < large.size());
  }
  CHECK(small.size() <= large.size());
}

TEST_CASE("surface CSV round trip") {
  PredictionField f = linear_field(0.1);
  f.mean.array() *= 1.0 / 3.0;
  auto e = extract_level_set(f, 0.05);
  REQUIRE(e.size() > 0);
  std::stringstream ss;
  write_surface_csv(ss, e);
  std::size_t lines = 0;
  for (std::string l; std::getline(ss, l);) ++lines;
  CHECK(lines == e.size() + 1);
  ss.clear();
  ss.seekg(0);
  const auto back = read_surface_csv(ss, 0.05);
  CHECK(back.points.coords() == e.points.coords());
  CHECK(back.mu_values == e.mu_values);

  SurfaceEstimate empty;
  empty.points = PointSet(2);
  std::ostringstream h;
  write_surface_csv(h, empty);
  CHECK(h.str() == "x1,x2,mu\n");
  CHECK_THROWS_AS(export_surface(e, "/nonexistent-dir/x/surface.csv"), Error);
}

TEST_CASE("outlier-free circle reconstruction stays near the truth") {
  ScenarioConfig sc = default_scenario(ShapeKind::Circle);
  sc.outlier_rate = 0.0;
  const Dataset d = generate_scenario(sc);
  const auto grid = make_grid(d.region, 0.02);
  const auto est = extract_level_set(gpis_predict_mean(gpis_fit(d, 0.05, {}), grid.points), 0.01);
  REQUIRE(est.size() > 0);
  for (std::size_t i = 0; i < est.size(); ++i) CHECK(std::abs(sc.shape.signed_distance(est.points[i])) < 0.05);
}

TEST_CASE("scenario sizes and bookkeeping") {
  for (auto kind : {ShapeKind::Square, ShapeKind::Circle, ShapeKind::Cross}) {
    ScenarioConfig sc = default_scenario(kind);
    sc.seed = 17;
    const Dataset d = generate_scenario(sc);
    const LabelCounts c = count_labels(d);
    CHECK(c.total() == d.size());
    CHECK(d.size() >= 550);
    CHECK(d.size() <= 650);
    const std::size_t pairs = c.injected_outliers / 2;
    CHECK(c.injected_outliers % 2 == 0);
    // Replacement identity: every external quota slot is either kept or
    // replaced by a pair.
    CHECK(c.external + pairs == sc.n_external);
    CHECK(c.internal - pairs == sc.n_internal);
    CHECK(c.contact - pairs == surface_samples(sc.shape, sc.surface_spacing).size());
    d.validate();
  }
  CHECK(count_labels(Dataset{}).total() == 0);
  Dataset one;
  one.points = {{{0.0, 0.0}, Label::Surface, std::nullopt, false},
                {{0.0, 0.0}, Label::Outside, std::nullopt, false},
                {{0.0, 0.0}, Label::Inside, std::nullopt, false}};
  const auto c1 = count_labels(one);
  CHECK(c1.contact == 1);
  CHECK(c1.external == 1);
  CHECK(c1.internal == 1);
}

TEST_CASE("circle scenario matches the published size") {
  const Dataset d = generate_scenario(default_scenario(ShapeKind::Circle));
  CHECK(std::abs(static_cast<double>(d.size()) - 590.0) <= 10.0);
}

TEST_CASE("outlier rate is binomial") {
  ScenarioConfig sc = default_scenario(ShapeKind::Circle);
  sc.n_external = 20000;
  sc.seed = 99;
  const auto c = count_labels(generate_scenario(sc));
  const double pairs = static_cast<double>(c.injected_outliers / 2);
  const double mean = 0.02 * 20000.0, sd = std::sqrt(20000.0 * 0.02 * 0.98);
  CHECK(std::abs(pairs - mean) <= 5.0 * sd);
  sc.outlier_rate = 0.0;
  CHECK(count_labels(generate_scenario(sc)).injected_outliers == 0);
}

TEST_CASE("labels and outlier pairs are consistent") {
  for (auto kind : {ShapeKind::Square, ShapeKind::Circle, ShapeKind::Cross, ShapeKind::Box3D}) {
    ScenarioConfig sc = default_scenario(kind);
    sc.outlier_rate = 0.2;
    sc.seed = 4;
    const Dataset d = generate_scenario(sc);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& p = d.points[i];
      CHECK(d.region.contains(p.x));
      if (p.injected_outlier) {
        if (p.y == Label::Surface) {
          REQUIRE(i + 1 < d.size());
          const auto& q = d.points[i + 1];
          CHECK(q.injected_outlier);
          CHECK(q.y == Label::Inside);
          double d2 = 0.0;
          for (std::size_t k = 0; k < p.x.size(); ++k) d2 += (p.x[k] - q.x[k]) * (p.x[k] - q.x[k]);
          CHECK(std::sqrt(d2) <= sc.outlier_pair_distance);
          CHECK(sc.shape.signed_distance(p.x) > 0.0);
        }
        continue;
      }
      const double sd = sc.shape.signed_distance(p.x);
      if (p.y == Label::Surface) {
        CHECK(std::abs(sd) < 1e-12);
      } else if (p.y == Label::Outside) {
        CHECK(sd > 0.0);
      } else {
        CHECK(sd < 0.0);
      }
    }
  }
}

TEST_CASE("3D box scenario size and optional contact paired internal points") {
  ScenarioConfig sc = default_scenario(ShapeKind::Box3D);
  const Dataset d = generate_scenario(sc);
  const auto c = count_labels(d);
  CHECK(d.size() > 2500);
  CHECK(d.size() < 3100);
  CHECK(c.internal >= 20);
  sc.outlier_rate = 0.0;
  sc.contact_internal_offset = 0.1;
  const Dataset paired = generate_scenario(sc);
  const auto cp = count_labels(paired);
  CHECK(cp.internal == cp.contact + sc.n_internal);
  for (std::size_t i = 0; i + 1 < paired.size(); ++i) {
    if (paired.points[i].y != Label::Surface) continue;
    CHECK(paired.points[i + 1].y == Label::Inside);
    const double sd = sc.shape.signed_distance(paired.points[i + 1].x);
    CHECK(sd < 0.0);
    CHECK(sd >= -0.1 - 1e-12);
  }
}

TEST_CASE("generation is deterministic and seed dependent") {
  ScenarioConfig sc = default_scenario(ShapeKind::Square);
  sc.seed = 8;
  std::ostringstream a, b, c;
  write_dataset_csv(a, generate_scenario(sc));
  write_dataset_csv(b, generate_scenario(sc));
  sc.seed = 9;
  write_dataset_csv(c, generate_scenario(sc));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("invalid scenarios are rejected") {
  ScenarioConfig sc = default_scenario(ShapeKind::Circle);
  sc.shape = ShapeModel::circle(5.0);
  CHECK_THROWS_AS(generate_scenario(sc), Error);
  sc = default_scenario(ShapeKind::Circle);
  sc.outlier_rate = 1.5;
  CHECK_THROWS_AS(generate_scenario(sc), Error);
  sc.outlier_rate = 0.02;
  sc.outlier_pair_distance = 0.0;
  CHECK_THROWS_AS(generate_scenario(sc), Error);
}

TEST_CASE("dataset CSV round trip is bit exact") {
  ScenarioConfig sc = default_scenario(ShapeKind::Cross);
  sc.outlier_rate = 0.1;
  const Dataset d = generate_scenario(sc);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const Dataset back = read_dataset_csv(ss, d.region);
  REQUIRE(back.size() == d.size());
  CHECK(dataset_hash(back) == dataset_hash(d));
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.points[i].x == d.points[i].x);
    CHECK(back.points[i].injected_outlier == d.points[i].injected_outlier);
    CHECK(back.points[i].normal == d.points[i].normal);
  }
  std::istringstream bad("x1,x2,y,nx,ny,outlier_flag\n0,0,2,,,0\n");
  try {
    read_dataset_csv(bad, d.region);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
