#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "monotest/bootstrap.hpp"
#include "monotest/models.hpp"
#include "monotest/rng.hpp"
#include "monotest/simulation.hpp"
#include "monotest/smooth_estimate.hpp"
#include "monotest/statistics.hpp"
#include "oracles.hpp"

using namespace monotest;

namespace {

MonotoneStepEstimate grenander_of(const std::vector<double>& x, Interval dom) {
  return left_slopes(lcm(empirical_cdf(x, dom)));
}

oracle::StepFn to_step_fn(const MonotoneStepEstimate& f) {
  return {f.jump_locations(), f.levels()};
}

CalibratedCurve constant_curve(double level, Interval dom) {
  MonotoneStepEstimate c(dom, {}, {level});
  return make_nonnegative(
      SmoothEstimate::of_monotone(c, dom.length() / 8.0, BoundaryCorrection::boundary_kernel));
}

}  // namespace

TEST_CASE("statistics vanish when all estimates coincide") {
  MonotoneStepEstimate f({0.0, 3.0}, {1.0}, {0.6, 0.2});
  TestStatistics t = compute_statistics({f, f, f}, f, {0.0, 3.0});
  CHECK(t.s1 == doctest::Approx(0.0));
  CHECK(t.s2 == doctest::Approx(0.0));
}

TEST_CASE("two constant estimates give the textbook statistic values") {
  MonotoneStepEstimate f1({0.0, 3.0}, {}, {0.5});
  MonotoneStepEstimate f2({0.0, 3.0}, {}, {1.0 / 3.0});
  MonotoneStepEstimate pooled({0.0, 3.0}, {}, {5.0 / 12.0});
  TestStatistics t = compute_statistics({f1, f2}, pooled, {0.0, 3.0});
  CHECK(t.s1 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(t.s2 == doctest::Approx(0.5).epsilon(1e-14));
  REQUIRE(t.pairwise.size() == 1);
  REQUIRE(t.vs_pooled.size() == 2);
  CHECK(t.pairwise[0] == doctest::Approx(0.5));
  CHECK(t.vs_pooled[0] == doctest::Approx(0.25));
  CHECK(t.vs_pooled[1] == doctest::Approx(0.25));
}

TEST_CASE("statistics match the exact oracle and satisfy s1 <= (J-1) s2") {
  RngStream rng = RngStream::from_seed(401);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> xs(3);
    std::vector<CumulativeProcess> ps;
    std::vector<std::size_t> sizes;
    for (auto& x : xs) {
      x.resize(12 + rng.uniform_index(20));
      for (auto& v : x) v = rng.uniform(0.0, 3.0);
      ps.push_back(empirical_cdf(x, {0.0, 3.0}));
      sizes.push_back(x.size());
    }
    GroupWeights w = GroupWeights::from_sizes(sizes);
    std::vector<MonotoneStepEstimate> fs;
    for (const auto& p : ps) fs.push_back(left_slopes(lcm(p)));
    MonotoneStepEstimate pooled = left_slopes(lcm(pool(ps, w)));
    TestStatistics t = compute_statistics(fs, pooled, {0.0, 3.0});

    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) {
        s1 += oracle::step_l1_exact(to_step_fn(fs[i]), to_step_fn(fs[j]), 0.0, 3.0);
      }
      s2 += oracle::step_l1_exact(to_step_fn(fs[i]), to_step_fn(pooled), 0.0, 3.0);
    }
    CHECK(t.s1 == doctest::Approx(s1).epsilon(1e-10));
    CHECK(t.s2 == doctest::Approx(s2).epsilon(1e-10));
    CHECK(t.s1 <= 2.0 * t.s2 + 1e-12);
  }
}

TEST_CASE("statistics require at least two groups") {
  MonotoneStepEstimate f({0.0, 3.0}, {}, {0.5});
  CHECK_THROWS_AS(compute_statistics({f}, f, {0.0, 3.0}), std::invalid_argument);
}

TEST_CASE("critical value is the ceil-rank order statistic") {
  CHECK(critical_value({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(3.0));
  CHECK(critical_value({4.0, 2.0, 1.0, 3.0}, 0.25) == doctest::Approx(3.0));
  CHECK(critical_value({7.0, 7.0, 7.0}, 0.1) == doctest::Approx(7.0));
  CHECK_THROWS_AS(critical_value({}, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(critical_value({1.0}, 0.0), std::invalid_argument);

  RngStream rng = RngStream::from_seed(17);
  std::vector<double> u(1000);
  for (auto& v : u) v = rng.uniform01();
  const double q = critical_value(u, 0.05);
  CHECK(q >= 0.93);
  CHECK(q <= 0.97);
}

TEST_CASE("decision rule follows the strict-exceedance convention") {
  const std::vector<double> draws{1.0, 2.0, 3.0, 4.0};

  TestReport below = decide(StatKind::s1, 0.5, draws, 0.25);
  CHECK(below.p_value == doctest::Approx(1.0));
  CHECK_FALSE(below.reject);

  TestReport above = decide(StatKind::s1, 9.0, draws, 0.25);
  CHECK(above.p_value == doctest::Approx(0.2));
  CHECK(above.reject);

  TestReport boundary = decide(StatKind::s2, 3.0, draws, 0.25);
  CHECK(boundary.critical_value == doctest::Approx(3.0));
  CHECK_FALSE(boundary.reject);  // equality is not exceedance
  CHECK(boundary.p_value == doctest::Approx(0.6));

  CHECK(above.kind == StatKind::s1);
  CHECK(boundary.kind == StatKind::s2);
  CHECK(above.draws.count == 4);
}

TEST_CASE("smooth reference sampler matches its density in KS distance") {
  RngStream data_rng = RngStream::from_seed(701);
  MonotoneStepEstimate f = grenander_of(truncexp_sample(1.0, 200, data_rng), {0.0, 3.0});
  CalibratedCurve curve =
      make_density(SmoothEstimate::of_monotone(f, 0.5, BoundaryCorrection::boundary_kernel));
  DensityReference ref = make_density_reference(curve, {0.0, 3.0});
  CHECK(ref.acceptance_rate > 0.2);

  // Cumulative table of the reference density for the KS oracle.
  constexpr int kCells = 30000;
  std::vector<double> cum(kCells + 1, 0.0);
  for (int i = 0; i < kCells; ++i) {
    const double mid = 3.0 * (i + 0.5) / kCells;
    cum[i + 1] = cum[i] + curve(mid) * (3.0 / kCells);
  }
  auto cdf = [&](double t) {
    const double pos = std::clamp(t / 3.0, 0.0, 1.0) * kCells;
    const int k = std::min(static_cast<int>(pos), kCells - 1);
    return cum[k] + (pos - k) * (cum[k + 1] - cum[k]);
  };

  RngStream rng = RngStream::from_seed(702);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = sample_density_reference(ref, {0.0, 3.0}, rng);
  CHECK(oracle::ks_distance(std::move(draws), cdf) < 0.01);
}

TEST_CASE("step reference sampler reproduces the grenander estimate") {
  RngStream data_rng = RngStream::from_seed(703);
  MonotoneStepEstimate f = grenander_of(truncexp_sample(1.0, 150, data_rng), {0.0, 3.0});
  DensityReference ref = make_density_reference(f);

  // CDF of the step density: piecewise linear with slopes = levels.
  auto cdf = [&](double t) {
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < f.levels().size(); ++k) {
      const double right = k < f.jump_locations().size() ? f.jump_locations()[k] : 3.0;
      const double hi = std::min(t, right);
      if (hi > prev) acc += f.levels()[k] * (hi - prev);
      prev = right;
      if (right >= t) break;
    }
    return acc;
  };

  RngStream rng = RngStream::from_seed(704);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = sample_density_reference(ref, {0.0, 3.0}, rng);
  CHECK(oracle::ks_distance(std::move(draws), cdf) < 0.01);
}

TEST_CASE("bootstrap statistics shrink at the cube-root rate in n") {
  // Cube-root asymptotics require a strictly decreasing reference; on a flat
  // density the statistic scales like n^{-1/2} instead.
  RngStream data_rng = RngStream::from_seed(180);
  const MonotoneStepEstimate fit =
      grenander_of(truncexp_sample(1.0, 400, data_rng), {0.0, 3.0});
  const CalibratedCurve curve = make_density(
      SmoothEstimate::of_monotone(fit, 0.4, BoundaryCorrection::boundary_kernel));
  DensityReference ref = make_density_reference(curve, {0.0, 3.0});

  BootstrapConfig cfg;
  cfg.replications = 300;
  cfg.seed = 11;

  auto mean_s1 = [&](std::size_t per_group) {
    const auto draws = bootstrap_density({per_group, per_group}, {0.0, 3.0}, ref, cfg);
    double m = 0.0;
    for (const auto& d : draws) m += d.s1;
    return m / static_cast<double>(draws.size());
  };

  const double small_n = mean_s1(1500);
  const double large_n = mean_s1(12000);
  const double ratio = small_n / large_n;  // expect about (24000/3000)^{1/3} = 2
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("bootstrap draws are deterministic and thread-invariant") {
  CalibratedCurve uniform = constant_curve(1.0 / 3.0, {0.0, 3.0});
  DensityReference ref = make_density_reference(uniform, {0.0, 3.0});

  BootstrapConfig cfg;
  cfg.replications = 24;
  cfg.seed = 99;
  cfg.threads = 1;
  const auto serial = bootstrap_density({40, 40}, {0.0, 3.0}, ref, cfg);
  cfg.threads = 4;
  const auto pooled4 = bootstrap_density({40, 40}, {0.0, 3.0}, ref, cfg);
  cfg.threads = 8;
  const auto pooled8 = bootstrap_density({40, 40}, {0.0, 3.0}, ref, cfg);
  REQUIRE(serial.size() == pooled4.size());
  for (std::size_t r = 0; r < serial.size(); ++r) {
    CHECK(serial[r].s1 == pooled4[r].s1);
    CHECK(serial[r].s2 == pooled4[r].s2);
    CHECK(serial[r].s1 == pooled8[r].s1);
  }

  // A single replication with a fixed seed is repeatable.
  cfg.replications = 1;
  const auto once = bootstrap_density({40, 40}, {0.0, 3.0}, ref, cfg);
  const auto again = bootstrap_density({40, 40}, {0.0, 3.0}, ref, cfg);
  CHECK(once[0].s1 == again[0].s1);
  CHECK(once[0].s2 == again[0].s2);
}

TEST_CASE("density test on identical groups never rejects") {
  RngStream rng = RngStream::from_seed(801);
  DensitySample a{"1", truncexp_sample(1.0, 60, rng)};
  DensitySample b{"2", a.x};

  BootstrapConfig cfg;
  cfg.replications = 99;
  cfg.bandwidth = 0.5;
  KSampleResult res = density_test({a, b}, {0.0, 3.0}, cfg);
  CHECK(res.observed.s1 == doctest::Approx(0.0));
  CHECK(res.observed.s2 == doctest::Approx(0.0));
  CHECK(res.s1.p_value == doctest::Approx(1.0));
  CHECK(res.s2.p_value == doctest::Approx(1.0));
  CHECK_FALSE(res.s1.reject);
  CHECK_FALSE(res.s2.reject);
  CHECK(res.s1.theory_supported);
  CHECK(res.s2.theory_supported);
  CHECK(res.reference.bandwidth == doctest::Approx(0.5));
  CHECK_FALSE(res.reference.bandwidth_selected);
}

TEST_CASE("grenander scheme flags the missing consistency guarantee") {
  RngStream rng = RngStream::from_seed(802);
  DensitySample a{"1", truncexp_sample(1.0, 50, rng)};
  DensitySample b{"2", truncexp_sample(1.0, 50, rng)};

  BootstrapConfig cfg;
  cfg.replications = 50;
  cfg.scheme = Scheme::density_grenander;
  KSampleResult res = density_test({a, b}, {0.0, 3.0}, cfg);
  CHECK_FALSE(res.s1.theory_supported);
  CHECK_FALSE(res.s2.theory_supported);
  CHECK(res.s1.note.find("no consistency guarantee") != std::string::npos);
}

TEST_CASE("relabeling the groups leaves the test invariant") {
  RngStream rng = RngStream::from_seed(803);
  DensitySample a{"1", truncexp_sample(1.0, 50, rng)};
  DensitySample b{"2", truncexp_sample(1.3, 50, rng)};

  BootstrapConfig cfg;
  cfg.replications = 60;
  cfg.bandwidth = 0.5;
  KSampleResult ab = density_test({a, b}, {0.0, 3.0}, cfg);
  KSampleResult ba = density_test({b, a}, {0.0, 3.0}, cfg);
  CHECK(ab.observed.s1 == doctest::Approx(ba.observed.s1).epsilon(1e-14));
  CHECK(ab.observed.s2 == doctest::Approx(ba.observed.s2).epsilon(1e-14));
  CHECK(ab.s1.critical_value == doctest::Approx(ba.s1.critical_value).epsilon(1e-14));
}

TEST_CASE("observed statistics are invariant under affine domain rescaling") {
  RngStream rng = RngStream::from_seed(804);
  std::vector<double> x(80), y(70);
  for (auto& v : x) v = rng.uniform(0.0, 3.0);
  for (auto& v : y) v = rng.uniform(0.0, 3.0);

  auto stats_on = [&](double scale) {
    std::vector<double> xs = x, ys = y;
    for (auto& v : xs) v /= scale;
    for (auto& v : ys) v /= scale;
    const Interval dom{0.0, 3.0 / scale};
    std::vector<CumulativeProcess> ps{empirical_cdf(xs, dom), empirical_cdf(ys, dom)};
    GroupWeights w = GroupWeights::from_sizes({80, 70});
    std::vector<MonotoneStepEstimate> fs{left_slopes(lcm(ps[0])), left_slopes(lcm(ps[1]))};
    return compute_statistics(fs, left_slopes(lcm(pool(ps, w))), dom);
  };

  TestStatistics full = stats_on(1.0);
  TestStatistics unit = stats_on(3.0);
  CHECK(full.s1 == doctest::Approx(unit.s1).epsilon(1e-10));
  CHECK(full.s2 == doctest::Approx(unit.s2).epsilon(1e-10));
}

TEST_CASE("zero-noise regression keeps residuals and bootstrap spread tiny") {
  const std::size_t n = 80;
  std::vector<double> y1(n), y2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1) / static_cast<double>(n);
    y1[i] = 2.0 - 0.8 * t;
    y2[i] = 2.0 - 0.8 * t;
  }
  RegressionSample g1{"1", y1}, g2{"2", y2};

  BootstrapConfig cfg;
  cfg.scheme = Scheme::regression_residual;
  cfg.replications = 80;
  cfg.bandwidth = 0.2;
  KSampleResult res = regression_test({g1, g2}, {0.0, 1.0}, cfg);
  CHECK(res.observed.s1 == doctest::Approx(0.0));
  CHECK(res.observed.s2 == doctest::Approx(0.0));
  // Bootstrap statistics are driven purely by the (near-zero) residual pool.
  CHECK(res.s1.draws.mean < 0.02);
  CHECK(res.s2.draws.mean < 0.02);
  CHECK_FALSE(res.s1.reject);
}

TEST_CASE("regression test rejects an obviously different group") {
  RngStream rng = RngStream::from_seed(805);
  const std::size_t n = 100;
  std::vector<double> y1(n), y2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1) / static_cast<double>(n);
    y1[i] = 2.0 - 1.5 * t + 0.05 * rng.normal();
    y2[i] = 3.5 - 3.2 * t + 0.05 * rng.normal();
  }
  RegressionSample g1{"1", y1}, g2{"2", y2};

  BootstrapConfig cfg;
  cfg.scheme = Scheme::regression_residual;
  cfg.replications = 99;
  cfg.bandwidth = 0.2;
  KSampleResult res = regression_test({g1, g2}, {0.0, 1.0}, cfg);
  CHECK(res.s1.reject);
  CHECK(res.s2.reject);
  CHECK(res.s1.p_value == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("constant-rate hazard sampler draws exponential event times") {
  const double c = 1.0;
  const double upper = 15.0;
  CalibratedCurve rate = constant_curve(c, {0.0, upper});
  HazardSampler sampler(rate, upper);
  CHECK(sampler.total() == doctest::Approx(c * upper).epsilon(1e-6));
  CHECK(sampler.cumulative_at(upper / 3.0) == doctest::Approx(c * upper / 3.0).epsilon(1e-6));

  RngStream rng = RngStream::from_seed(901);
  double sum = 0.0;
  std::size_t events = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto [t, event] = sampler.draw(rng);
    if (event) {
      sum += t;
      ++events;
    }
  }
  CHECK(events > 99000);
  const double mean = sum / static_cast<double>(events);
  CHECK(mean == doctest::Approx(1.0 / c).epsilon(0.02));
}

TEST_CASE("hazard sampler censors at the window edge") {
  const double upper = 0.05;  // nearly all exponential draws fall beyond
  CalibratedCurve rate = constant_curve(1.0, {0.0, upper});
  HazardSampler sampler(rate, upper);
  RngStream rng = RngStream::from_seed(902);
  std::size_t censored = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto [t, event] = sampler.draw(rng);
    if (!event) {
      CHECK(t == doctest::Approx(upper));
      ++censored;
    } else {
      CHECK(t <= upper);
    }
  }
  CHECK(censored > 1800);
  CHECK_THROWS_AS(HazardSampler(rate, 0.0), std::invalid_argument);
}

TEST_CASE("hazard test wires the censoring-source theory flags") {
  RngStream rng = RngStream::from_seed(903);
  auto make_group = [&](const char* label, double lam) {
    CensoredSample s;
    s.label = label;
    for (int i = 0; i < 60; ++i) {
      const double t = rng.exponential() / lam;
      const double y = rng.uniform(0.5, 4.0);
      s.x.push_back(std::min(t, y));
      s.delta.push_back(t <= y ? 1 : 0);
    }
    return s;
  };
  CensoredSample g1 = make_group("1", 1.0);
  CensoredSample g2 = make_group("2", 1.0);

  BootstrapConfig cfg;
  cfg.scheme = Scheme::hazard;
  cfg.replications = 40;
  cfg.bandwidth = 0.4;

  cfg.censoring = CensoringSource::groupwise;
  KSampleResult grouped = hazard_test({g1, g2}, 2.0, cfg);
  CHECK(grouped.s1.theory_supported);
  CHECK_FALSE(grouped.s2.theory_supported);
  CHECK(grouped.s2.note.find("group-specific censoring") != std::string::npos);

  cfg.censoring = CensoringSource::pooled;
  KSampleResult pooled = hazard_test({g1, g2}, 2.0, cfg);
  CHECK(pooled.s1.theory_supported);
  CHECK(pooled.s2.theory_supported);

  // Determinism for the hazard scheme as well.
  cfg.threads = 1;
  KSampleResult t1 = hazard_test({g1, g2}, 2.0, cfg);
  cfg.threads = 4;
  KSampleResult t4 = hazard_test({g1, g2}, 2.0, cfg);
  CHECK(t1.s1.critical_value == doctest::Approx(t4.s1.critical_value).epsilon(1e-15));
}

TEST_CASE("scheme and model pairings are validated") {
  RngStream rng = RngStream::from_seed(904);
  DensitySample a{"1", truncexp_sample(1.0, 30, rng)};
  DensitySample b{"2", truncexp_sample(1.0, 30, rng)};
  BootstrapConfig cfg;
  cfg.scheme = Scheme::regression_residual;
  CHECK_THROWS_AS(density_test({a, b}, {0.0, 3.0}, cfg), std::invalid_argument);

  RegressionSample r1{"1", {2.0, 1.0}}, r2{"2", {2.0, 1.0}};
  cfg.scheme = Scheme::density_smooth;
  CHECK_THROWS_AS(regression_test({r1, r2}, {0.0, 1.0}, cfg), std::invalid_argument);

  CHECK_THROWS_AS(density_test({a}, {0.0, 3.0}, BootstrapConfig{}), std::invalid_argument);
}
