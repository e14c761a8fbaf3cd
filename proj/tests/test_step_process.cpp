#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "monotest/models.hpp"
#include "monotest/rng.hpp"
#include "monotest/step_process.hpp"
#include "oracles.hpp"

using namespace monotest;

namespace {

CumulativeProcess random_diagram(RngStream& rng, std::size_t points, Interval dom) {
  std::vector<double> bp, vals;
  double t = dom.a;
  double v = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    t += rng.uniform(0.01, (dom.b - t) / static_cast<double>(points - k + 1));
    bp.push_back(t);
    v += rng.uniform(0.0, 0.5);
    vals.push_back(v);
  }
  return CumulativeProcess(dom, std::move(bp), std::move(vals));
}

std::vector<oracle::Point> diagram_points(const CumulativeProcess& p) {
  std::vector<oracle::Point> pts{{p.domain().a, p.base_value()}};
  for (std::size_t k = 0; k < p.breakpoints().size(); ++k) {
    pts.push_back({p.breakpoints()[k], p.values()[k]});
  }
  if (pts.back().x < p.domain().b) pts.push_back({p.domain().b, p.value_at_end()});
  return pts;
}

oracle::StepFn to_step_fn(const MonotoneStepEstimate& f) {
  return {f.jump_locations(), f.levels()};
}

}  // namespace

TEST_CASE("cumulative process evaluation follows the cadlag convention") {
  CumulativeProcess p({0.0, 3.0}, {1.0, 2.0}, {0.4, 1.0}, 0.0);
  CHECK(p(0.0) == 0.0);
  CHECK(p(0.999) == 0.0);
  CHECK(p(1.0) == 0.4);
  CHECK(p(1.5) == 0.4);
  CHECK(p(2.0) == 1.0);
  CHECK(p(3.0) == 1.0);
  CHECK(p.value_at_end() == 1.0);
  CHECK_THROWS_AS(p(3.5), std::out_of_range);
}

TEST_CASE("process constructor validates its invariants") {
  CHECK_THROWS_AS(CumulativeProcess({1.0, 1.0}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(CumulativeProcess({0.0, 1.0}, {0.5, 0.5}, {0.1, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(CumulativeProcess({0.0, 1.0}, {2.0}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(CumulativeProcess({0.0, 1.0}, {0.5}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("lcm of a concave diagram interpolates every point") {
  // Concave cumulative diagram: increments with decreasing rate.
  CumulativeProcess p({0.0, 4.0}, {1.0, 2.0, 3.0, 4.0}, {0.5, 0.8, 0.95, 1.0});
  ConcaveMajorant m = lcm(p);
  for (std::size_t k = 0; k < p.breakpoints().size(); ++k) {
    CHECK(m(p.breakpoints()[k]) == doctest::Approx(p.values()[k]).epsilon(1e-14));
  }
}

TEST_CASE("lcm of a single observation is the chord then a flat top") {
  CumulativeProcess p = empirical_cdf({1.5}, {0.0, 3.0});
  ConcaveMajorant m = lcm(p);
  CHECK(m(0.0) == doctest::Approx(0.0));
  CHECK(m(0.75) == doctest::Approx(0.5));
  CHECK(m(1.5) == doctest::Approx(1.0));
  CHECK(m(2.25) == doctest::Approx(1.0));
  CHECK(m(3.0) == doctest::Approx(1.0));
}

TEST_CASE("lcm throws on a degenerate process") {
  CumulativeProcess p({0.0, 1.0}, {}, {});
  CHECK_THROWS_AS(lcm(p), std::invalid_argument);
}

TEST_CASE("lcm matches the brute-force supporting-line oracle on random diagrams") {
  RngStream rng = RngStream::from_seed(101);
  for (int rep = 0; rep < 200; ++rep) {
    CumulativeProcess p = random_diagram(rng, 6, {0.0, 3.0});
    ConcaveMajorant m = lcm(p);
    const auto pts = diagram_points(p);
    for (int q = 0; q <= 30; ++q) {
      const double t = 3.0 * q / 30.0;
      const double brute = oracle::lcm_value_brute(pts, t);
      CHECK(m(t) == doctest::Approx(brute).epsilon(1e-9));
    }
  }
}

TEST_CASE("majorization and touching on a dense grid") {
  RngStream rng = RngStream::from_seed(7);
  for (int rep = 0; rep < 50; ++rep) {
    CumulativeProcess p = random_diagram(rng, 12, {0.0, 2.0});
    ConcaveMajorant m = lcm(p);
    for (int q = 0; q <= 400; ++q) {
      const double t = 2.0 * q / 400.0;
      CHECK(m(t) >= p(t) - 1e-12);
    }
    for (std::size_t k = 0; k < m.knots.size(); ++k) {
      CHECK(m(m.knots[k]) == doctest::Approx(m.knot_values[k]).epsilon(1e-13));
    }
    // Slopes strictly decreasing across knots.
    for (std::size_t k = 2; k < m.knots.size(); ++k) {
      const double s0 =
          (m.knot_values[k - 1] - m.knot_values[k - 2]) / (m.knots[k - 1] - m.knots[k - 2]);
      const double s1 = (m.knot_values[k] - m.knot_values[k - 1]) / (m.knots[k] - m.knots[k - 1]);
      CHECK(s1 < s0);
    }
  }
}

TEST_CASE("minimality: no concave chord function below the majorant dominates the data") {
  RngStream rng = RngStream::from_seed(21);
  for (int rep = 0; rep < 50; ++rep) {
    CumulativeProcess p = random_diagram(rng, 8, {0.0, 3.0});
    ConcaveMajorant m = lcm(p);
    const auto pts = diagram_points(p);
    // Any concave candidate that majorizes the data must lie above the LCM.
    // Candidates: supporting lines through random point pairs, lifted until
    // they dominate.
    for (int c = 0; c < 20; ++c) {
      const std::size_t i = rng.uniform_index(pts.size());
      std::size_t j = rng.uniform_index(pts.size());
      if (i == j) continue;
      const double dx = pts[j].x - pts[i].x;
      if (dx == 0.0) continue;
      const double slope = (pts[j].y - pts[i].y) / dx;
      double intercept = pts[i].y - slope * pts[i].x;
      double lift = 0.0;
      for (const auto& q : pts) lift = std::max(lift, q.y - (slope * q.x + intercept));
      intercept += lift;
      for (int g = 0; g <= 60; ++g) {
        const double t = 3.0 * g / 60.0;
        CHECK(slope * t + intercept >= m(t) - 1e-10);
      }
    }
  }
}

TEST_CASE("left slopes of the single-chord majorant") {
  CumulativeProcess p = empirical_cdf({1.5}, {0.0, 3.0});
  MonotoneStepEstimate f = left_slopes(lcm(p));
  REQUIRE(f.segment_count() == 2);
  CHECK(f.levels()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(f.levels()[1] == doctest::Approx(0.0));
  CHECK(f.jump_locations()[0] == doctest::Approx(1.5));
  CHECK(f(0.0) == doctest::Approx(2.0 / 3.0));
  CHECK(f(1.5) == doctest::Approx(2.0 / 3.0));
  CHECK(f(1.6) == doctest::Approx(0.0));
}

TEST_CASE("left slopes of an explicit 3-knot majorant") {
  ConcaveMajorant m{{0.0, 2.0}, {0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}};
  MonotoneStepEstimate f = left_slopes(m);
  REQUIRE(f.segment_count() == 2);
  CHECK(f.levels()[0] == doctest::Approx(2.0));
  CHECK(f.levels()[1] == doctest::Approx(1.0));
  CHECK(f.jump_size(0) == doctest::Approx(1.0));
}

TEST_CASE("grenander slopes equal the PAVA solution on empirical diagrams") {
  RngStream rng = RngStream::from_seed(310);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 20 + rng.uniform_index(180);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(0.0, 3.0);
    CumulativeProcess ecdf = empirical_cdf(x, {0.0, 3.0});
    MonotoneStepEstimate f = left_slopes(lcm(ecdf));

    // Equivalent isotonic problem: fit nonincreasing levels to the raw slopes
    // of the cumulative diagram, weighted by the spacings.
    const auto& bp = ecdf.breakpoints();
    const auto& vals = ecdf.values();
    std::vector<double> raw, w, ends;
    double prev_t = 0.0, prev_v = 0.0;
    for (std::size_t k = 0; k < bp.size(); ++k) {
      raw.push_back((vals[k] - prev_v) / (bp[k] - prev_t));
      w.push_back(bp[k] - prev_t);
      ends.push_back(bp[k]);
      prev_t = bp[k];
      prev_v = vals[k];
    }
    if (prev_t < 3.0) {
      raw.push_back(0.0);
      w.push_back(3.0 - prev_t);
      ends.push_back(3.0);
    }
    const std::vector<double> fit = oracle::pava_decreasing(raw, w);

    // Compare fitted values segment by segment (left-continuous evaluation at
    // the right end of each spacing interval).
    for (std::size_t k = 0; k < ends.size(); ++k) {
      CHECK(f(ends[k]) == doctest::Approx(fit[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("generalized inverse conventions") {
  MonotoneStepEstimate c({0.0, 3.0}, {}, {0.5});
  CHECK(c.generalized_inverse(0.5) == doctest::Approx(3.0));

  MonotoneStepEstimate f({0.0, 3.0}, {1.5}, {2.0 / 3.0, 0.0});
  CHECK(f.generalized_inverse(0.5) == doctest::Approx(1.5));
  CHECK(f.generalized_inverse(1.0) == doctest::Approx(0.0));  // empty set -> a
  CHECK(f.generalized_inverse(-1.0) == doctest::Approx(3.0));
  CHECK(generalized_inverse(f, 0.5) == doctest::Approx(1.5));
}

TEST_CASE("switch relation holds for random estimates and query pairs") {
  RngStream rng = RngStream::from_seed(55);
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<double> x(30);
    for (auto& v : x) v = rng.uniform(0.0, 3.0);
    MonotoneStepEstimate f = left_slopes(lcm(empirical_cdf(x, {0.0, 3.0})));
    for (int q = 0; q < 50; ++q) {
      const double t = rng.uniform(0.0, 3.0);
      const double level = rng.uniform(-0.1, 1.2);
      const bool lhs = f(t) >= level;
      const bool rhs = f.generalized_inverse(level) >= t;
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("l1 distance of constant estimates") {
  MonotoneStepEstimate f({0.0, 3.0}, {}, {0.5});
  MonotoneStepEstimate g({0.0, 3.0}, {}, {1.0 / 3.0});
  CHECK(l1_distance(f, g, {0.0, 3.0}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(l1_distance(f, f, {0.0, 3.0}) == doctest::Approx(0.0));
}

TEST_CASE("l1 distance matches the midpoint oracle on random estimates") {
  RngStream rng = RngStream::from_seed(77);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(11), y(11);
    for (auto& v : x) v = rng.uniform(0.0, 3.0);
    for (auto& v : y) v = rng.uniform(0.0, 3.0);
    MonotoneStepEstimate f = left_slopes(lcm(empirical_cdf(x, {0.0, 3.0})));
    MonotoneStepEstimate g = left_slopes(lcm(empirical_cdf(y, {0.0, 3.0})));
    const double exact = oracle::step_l1_exact(to_step_fn(f), to_step_fn(g), 0.0, 3.0);
    CHECK(l1_distance(f, g, {0.0, 3.0}) == doctest::Approx(exact).epsilon(1e-12));
    // Sub-interval integration.
    const double partial = oracle::step_l1_exact(to_step_fn(f), to_step_fn(g), 0.5, 2.5);
    CHECK(l1_distance(f, g, {0.5, 2.5}) == doctest::Approx(partial).epsilon(1e-12));
  }
}

TEST_CASE("slope/inverse duality: level integral equals the time integral") {
  RngStream rng = RngStream::from_seed(99);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(8 + rng.uniform_index(40)), y(8 + rng.uniform_index(40));
    for (auto& v : x) v = rng.uniform(0.0, 3.0);
    for (auto& v : y) v = rng.uniform(0.0, 3.0);
    MonotoneStepEstimate f = left_slopes(lcm(empirical_cdf(x, {0.0, 3.0})));
    MonotoneStepEstimate g = left_slopes(lcm(empirical_cdf(y, {0.0, 3.0})));
    const double direct = l1_distance(f, g, {0.0, 3.0});
    const double dual = inverse_l1_distance(f, g);
    CHECK(direct == doctest::Approx(dual).epsilon(1e-12));
  }
}

TEST_CASE("mass identity: integral of the slopes equals the process increment") {
  RngStream rng = RngStream::from_seed(31);
  for (int rep = 0; rep < 100; ++rep) {
    CumulativeProcess p = random_diagram(rng, 10, {0.0, 3.0});
    MonotoneStepEstimate f = left_slopes(lcm(p));
    MonotoneStepEstimate zero({0.0, 3.0}, {}, {0.0});
    const double mass = l1_distance(f, zero, {0.0, 3.0});
    CHECK(mass == doctest::Approx(p.value_at_end() - p.base_value()).epsilon(1e-12));
  }
}

TEST_CASE("l1 distance rejects mismatched domains") {
  MonotoneStepEstimate f({0.0, 3.0}, {}, {0.5});
  MonotoneStepEstimate g({0.0, 2.0}, {}, {0.5});
  CHECK_THROWS_AS(l1_distance(f, g, {0.0, 3.0}), std::invalid_argument);
}
