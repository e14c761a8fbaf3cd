#include "monotest/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "monotest/parallel.hpp"

namespace monotest {

namespace {

struct GroupEstimates {
  std::vector<CumulativeProcess> processes;
  std::vector<MonotoneStepEstimate> slopes;
  CumulativeProcess pooled;
  MonotoneStepEstimate pooled_slopes;
};

GroupEstimates assemble(std::vector<CumulativeProcess> processes, const GroupWeights& w) {
  std::vector<MonotoneStepEstimate> slopes;
  slopes.reserve(processes.size());
  for (const auto& p : processes) slopes.push_back(left_slopes(lcm(p)));
  CumulativeProcess pooled = pool(processes, w);
  MonotoneStepEstimate pooled_slopes = left_slopes(lcm(pooled));
  return GroupEstimates{std::move(processes), std::move(slopes), std::move(pooled),
                        std::move(pooled_slopes)};
}

GroupEstimates density_estimates(const std::vector<DensitySample>& samples, Interval domain,
                                 const GroupWeights& w) {
  std::vector<CumulativeProcess> processes;
  processes.reserve(samples.size());
  for (const auto& s : samples) processes.push_back(empirical_cdf(s.x, domain));
  return assemble(std::move(processes), w);
}

GroupEstimates regression_estimates(const std::vector<RegressionSample>& samples, Interval domain,
                                    const GroupWeights& w) {
  std::vector<CumulativeProcess> processes;
  processes.reserve(samples.size());
  for (const auto& s : samples) processes.push_back(regression_cumsum(s.y, domain));
  return assemble(std::move(processes), w);
}

GroupEstimates hazard_estimates(const std::vector<CensoredSample>& samples, double upper,
                                const GroupWeights& w) {
  std::vector<CumulativeProcess> processes;
  processes.reserve(samples.size());
  for (const auto& s : samples) processes.push_back(nelson_aalen(s, upper));
  return assemble(std::move(processes), w);
}

std::vector<std::size_t> density_sizes(const std::vector<DensitySample>& samples) {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.x.size());
  return out;
}

BootstrapSummary summarize(const std::vector<double>& draws) {
  BootstrapSummary s;
  s.count = draws.size();
  if (draws.empty()) return s;
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  auto at = [&](double p) {
    const auto k = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(sorted.size())));
    return sorted[std::max<std::size_t>(k, 1) - 1];
  };
  s.q50 = at(0.50);
  s.q90 = at(0.90);
  s.q95 = at(0.95);
  s.q99 = at(0.99);
  return s;
}

}  // namespace

DensityReference make_density_reference(const CalibratedCurve& curve, Interval domain) {
  DensityReference ref;
  ref.curve = curve;
  ref.envelope = 1.01 * curve.max_on_grid(10001);
  ref.acceptance_rate = 1.0 / (ref.envelope * domain.length());
  if (!(ref.acceptance_rate >= 1e-3)) {
    throw std::runtime_error("degenerate envelope: rejection sampler acceptance rate below 1e-3");
  }
  return ref;
}

DensityReference make_density_reference(const MonotoneStepEstimate& step) {
  DensityReference ref;
  const auto& levels = step.levels();
  if (levels.back() < 0.0) {
    throw std::invalid_argument("step reference density must be nonnegative");
  }
  const Interval dom = step.domain();
  ref.edges.reserve(levels.size() + 1);
  ref.edges.push_back(dom.a);
  for (double t : step.jump_locations()) ref.edges.push_back(t);
  ref.edges.push_back(dom.b);
  ref.levels = levels;
  ref.cum.resize(levels.size());
  double running = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    running += levels[k] * (ref.edges[k + 1] - ref.edges[k]);
    ref.cum[k] = running;
  }
  if (!(running > 0.0)) throw std::runtime_error("degenerate step reference: zero total mass");
  ref.step = step;
  return ref;
}

double sample_density_reference(const DensityReference& ref, Interval domain, RngStream& rng) {
  if (ref.curve) {
    for (;;) {
      const double x = rng.uniform(domain.a, domain.b);
      const double u = rng.uniform01();
      if (u * ref.envelope <= (*ref.curve)(x)) return x;
    }
  }
  const double target = rng.uniform01() * ref.cum.back();
  const auto it = std::lower_bound(ref.cum.begin(), ref.cum.end(), target);
  const auto k = static_cast<std::size_t>(it - ref.cum.begin());
  if (k >= ref.levels.size()) return domain.b;
  const double before = k == 0 ? 0.0 : ref.cum[k - 1];
  const double level = ref.levels[k];
  if (!(level > 0.0)) return ref.edges[k + 1];
  return ref.edges[k] + (target - before) / level;
}

double critical_value(std::vector<double> draws, double alpha) {
  if (draws.empty()) throw std::invalid_argument("no bootstrap draws");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  std::sort(draws.begin(), draws.end());
  const double rank = std::ceil(static_cast<double>(draws.size()) * (1.0 - alpha));
  const auto k = std::max<std::size_t>(static_cast<std::size_t>(rank), 1);
  return draws[k - 1];
}

TestReport decide(StatKind kind, double observed, const std::vector<double>& draws, double alpha) {
  TestReport report;
  report.kind = kind;
  report.observed = observed;
  report.alpha = alpha;
  report.critical_value = critical_value(draws, alpha);
  std::size_t at_least = 0;
  for (double d : draws) {
    if (d >= observed) ++at_least;
  }
  report.p_value =
      static_cast<double>(1 + at_least) / static_cast<double>(draws.size() + 1);
  report.reject = observed > report.critical_value;
  report.draws = summarize(draws);
  return report;
}

std::vector<TestStatistics> bootstrap_density(const std::vector<std::size_t>& sizes,
                                              Interval domain, const DensityReference& ref,
                                              const BootstrapConfig& cfg) {
  if (sizes.size() < 2) throw std::invalid_argument("at least two groups are required");
  const GroupWeights w = GroupWeights::from_sizes(sizes);
  std::vector<TestStatistics> results(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(cfg.seed, r);
    std::vector<CumulativeProcess> processes;
    processes.reserve(sizes.size());
    std::vector<double> draws;
    for (std::size_t n : sizes) {
      draws.resize(n);
      for (auto& x : draws) x = sample_density_reference(ref, domain, rng);
      processes.push_back(empirical_cdf(draws, domain));
    }
    GroupEstimates est = assemble(std::move(processes), w);
    results[r] = compute_statistics(est.slopes, est.pooled_slopes, domain);
  });
  return results;
}

std::vector<TestStatistics> bootstrap_regression(const std::vector<RegressionSample>& samples,
                                                 Interval domain, const CalibratedCurve& reference,
                                                 const BootstrapConfig& cfg) {
  if (samples.size() < 2) throw std::invalid_argument("at least two groups are required");
  std::vector<std::size_t> sizes;
  sizes.reserve(samples.size());
  for (const auto& s : samples) sizes.push_back(s.y.size());
  const GroupWeights w = GroupWeights::from_sizes(sizes);

  // Fitted values on each design and centered residual pools.
  std::vector<std::vector<double>> fitted(samples.size()), residuals(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto n = samples[j].y.size();
    fitted[j].resize(n);
    residuals[j].resize(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t =
          domain.a + domain.length() * static_cast<double>(i + 1) / static_cast<double>(n);
      fitted[j][i] = reference(t);
      residuals[j][i] = samples[j].y[i] - fitted[j][i];
      mean += residuals[j][i];
    }
    mean /= static_cast<double>(n);
    for (auto& e : residuals[j]) e -= mean;
  }

  std::vector<TestStatistics> results(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(cfg.seed, r);
    std::vector<CumulativeProcess> processes;
    processes.reserve(samples.size());
    std::vector<double> ystar;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const std::size_t n = fitted[j].size();
      ystar.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        ystar[i] = fitted[j][i] + residuals[j][rng.uniform_index(n)];
      }
      processes.push_back(regression_cumsum(ystar, domain));
    }
    GroupEstimates est = assemble(std::move(processes), w);
    results[r] = compute_statistics(est.slopes, est.pooled_slopes, domain);
  });
  return results;
}

HazardSampler::HazardSampler(const CalibratedCurve& rate, double upper) : upper_(upper) {
  if (!(upper > 0.0)) throw std::invalid_argument("hazard window must have positive length");
  constexpr std::size_t kCells = 1 << 14;
  dt_ = upper / static_cast<double>(kCells);
  cum_.resize(kCells + 1);
  cum_[0] = 0.0;
  double prev = rate(0.0);
  for (std::size_t k = 1; k <= kCells; ++k) {
    const double cur = rate(dt_ * static_cast<double>(k));
    cum_[k] = cum_[k - 1] + 0.5 * dt_ * (prev + cur);
    prev = cur;
  }
}

double HazardSampler::cumulative_at(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= upper_) return cum_.back();
  const double pos = x / dt_;
  const auto k = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(k);
  return cum_[k] + frac * (cum_[k + 1] - cum_[k]);
}

std::pair<double, bool> HazardSampler::draw(RngStream& rng) const {
  const double e = rng.exponential();
  if (e > cum_.back()) return {upper_, false};
  // Smallest t with cumulative_at(t) ~ e, located by bisection.
  double lo = 0.0, hi = upper_;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (cumulative_at(mid) < e) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), true};
}

namespace {

struct CensorSampler {
  std::vector<double> points;
  std::vector<double> cumprob;

  static CensorSampler from_process(const CumulativeProcess& km) {
    CensorSampler s;
    s.points = km.breakpoints();
    s.cumprob = km.values();
    return s;
  }

  double draw(RngStream& rng) const {
    const double u = rng.uniform01();
    const auto it = std::lower_bound(cumprob.begin(), cumprob.end(), u);
    const auto k = static_cast<std::size_t>(it - cumprob.begin());
    return points[std::min(k, points.size() - 1)];
  }
};

}  // namespace

std::vector<TestStatistics> bootstrap_hazard(const std::vector<CensoredSample>& samples,
                                             double upper, const CalibratedCurve& reference,
                                             const BootstrapConfig& cfg) {
  if (samples.size() < 2) throw std::invalid_argument("at least two groups are required");
  std::vector<std::size_t> sizes;
  sizes.reserve(samples.size());
  for (const auto& s : samples) sizes.push_back(s.x.size());
  const GroupWeights w = GroupWeights::from_sizes(sizes);

  const HazardSampler hazard(reference, upper);

  std::vector<CensorSampler> censor;
  if (cfg.censoring == CensoringSource::groupwise) {
    censor.reserve(samples.size());
    for (const auto& s : samples) {
      censor.push_back(CensorSampler::from_process(kaplan_meier(s.x, s.delta, true)));
    }
  } else {
    std::vector<double> x;
    std::vector<int> delta;
    for (const auto& s : samples) {
      x.insert(x.end(), s.x.begin(), s.x.end());
      delta.insert(delta.end(), s.delta.begin(), s.delta.end());
    }
    censor.push_back(CensorSampler::from_process(kaplan_meier(x, delta, true)));
  }

  std::vector<TestStatistics> results(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(cfg.seed, r);
    std::vector<CumulativeProcess> processes;
    processes.reserve(samples.size());
    CensoredSample rebuilt;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const CensorSampler& cs = censor.size() == 1 ? censor[0] : censor[j];
      const std::size_t n = sizes[j];
      rebuilt.x.resize(n);
      rebuilt.delta.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto [t, event] = hazard.draw(rng);
        const double y = cs.draw(rng);
        rebuilt.x[i] = std::min(t, y);
        rebuilt.delta[i] = event && t <= y ? 1 : 0;
      }
      processes.push_back(nelson_aalen(rebuilt, upper));
    }
    GroupEstimates est = assemble(std::move(processes), w);
    results[r] = compute_statistics(est.slopes, est.pooled_slopes, Interval{0.0, upper});
  });
  return results;
}

namespace {

void split_draws(const std::vector<TestStatistics>& draws, KSampleResult& out) {
  out.draws_s1.reserve(draws.size());
  out.draws_s2.reserve(draws.size());
  for (const auto& d : draws) {
    out.draws_s1.push_back(d.s1);
    out.draws_s2.push_back(d.s2);
  }
}

}  // namespace

KSampleResult density_test(const std::vector<DensitySample>& samples, Interval domain,
                           const BootstrapConfig& cfg) {
  if (samples.size() < 2) throw std::invalid_argument("at least two groups are required");
  const auto sizes = density_sizes(samples);
  const GroupWeights w = GroupWeights::from_sizes(sizes);
  GroupEstimates est = density_estimates(samples, domain, w);

  KSampleResult out;
  out.domain = domain;
  out.weights = w;
  out.observed = compute_statistics(est.slopes, est.pooled_slopes, domain);
  out.reference.correction = cfg.correction;

  DensityReference ref = [&] {
    if (cfg.scheme == Scheme::density_grenander) return make_density_reference(est.pooled_slopes);
    if (cfg.scheme != Scheme::density_smooth) {
      throw std::invalid_argument("density data requires a density bootstrap scheme");
    }
    double h = cfg.bandwidth;
    if (!(h > 0.0)) {
      h = select_bandwidth(est.pooled_slopes, cfg.correction, est.pooled, w.total,
                           default_bandwidth_grid(domain));
      out.reference.bandwidth_selected = true;
    }
    out.reference.bandwidth = h;
    CalibratedCurve curve =
        make_density(SmoothEstimate::of_monotone(est.pooled_slopes, h, cfg.correction));
    out.reference.shift = curve.shift;
    out.reference.scale = curve.scale;
    return make_density_reference(curve, domain);
  }();
  out.reference.acceptance_rate = ref.acceptance_rate;

  const auto draws = bootstrap_density(sizes, domain, ref, cfg);
  split_draws(draws, out);
  out.s1 = decide(StatKind::s1, out.observed.s1, out.draws_s1, cfg.alpha);
  out.s2 = decide(StatKind::s2, out.observed.s2, out.draws_s2, cfg.alpha);
  if (cfg.scheme == Scheme::density_grenander) {
    out.s1.theory_supported = false;
    out.s2.theory_supported = false;
    out.s1.note = out.s2.note = "resampling from the unsmoothed step density has no consistency guarantee";
  }
  return out;
}

KSampleResult regression_test(const std::vector<RegressionSample>& samples, Interval domain,
                              const BootstrapConfig& cfg) {
  if (cfg.scheme != Scheme::regression_residual) {
    throw std::invalid_argument("regression data requires the residual bootstrap scheme");
  }
  if (samples.size() < 2) throw std::invalid_argument("at least two groups are required");
  std::vector<std::size_t> sizes;
  for (const auto& s : samples) sizes.push_back(s.y.size());
  const GroupWeights w = GroupWeights::from_sizes(sizes);
  GroupEstimates est = regression_estimates(samples, domain, w);

  KSampleResult out;
  out.domain = domain;
  out.weights = w;
  out.observed = compute_statistics(est.slopes, est.pooled_slopes, domain);
  out.reference.correction = cfg.correction;

  double h = cfg.bandwidth;
  if (!(h > 0.0)) {
    h = select_bandwidth(est.pooled_slopes, cfg.correction, est.pooled, w.total,
                         default_bandwidth_grid(domain));
    out.reference.bandwidth_selected = true;
  }
  out.reference.bandwidth = h;
  const CalibratedCurve reference{
      SmoothEstimate::of_monotone(est.pooled_slopes, h, cfg.correction), 0.0, 1.0};

  const auto draws = bootstrap_regression(samples, domain, reference, cfg);
  split_draws(draws, out);
  out.s1 = decide(StatKind::s1, out.observed.s1, out.draws_s1, cfg.alpha);
  out.s2 = decide(StatKind::s2, out.observed.s2, out.draws_s2, cfg.alpha);
  return out;
}

KSampleResult hazard_test(const std::vector<CensoredSample>& samples, double upper,
                          const BootstrapConfig& cfg) {
  if (cfg.scheme != Scheme::hazard) {
    throw std::invalid_argument("censored data requires the hazard bootstrap scheme");
  }
  if (samples.size() < 2) throw std::invalid_argument("at least two groups are required");
  std::vector<std::size_t> sizes;
  for (const auto& s : samples) sizes.push_back(s.x.size());
  const GroupWeights w = GroupWeights::from_sizes(sizes);
  GroupEstimates est = hazard_estimates(samples, upper, w);
  const Interval domain{0.0, upper};

  KSampleResult out;
  out.domain = domain;
  out.weights = w;
  out.observed = compute_statistics(est.slopes, est.pooled_slopes, domain);
  out.reference.correction = cfg.correction;

  double h = cfg.bandwidth;
  if (!(h > 0.0)) {
    h = select_bandwidth(est.pooled_slopes, cfg.correction, est.pooled, w.total,
                         default_bandwidth_grid(domain));
    out.reference.bandwidth_selected = true;
  }
  out.reference.bandwidth = h;
  CalibratedCurve reference =
      make_nonnegative(SmoothEstimate::of_monotone(est.pooled_slopes, h, cfg.correction));
  out.reference.shift = reference.shift;

  const auto draws = bootstrap_hazard(samples, upper, reference, cfg);
  split_draws(draws, out);
  out.s1 = decide(StatKind::s1, out.observed.s1, out.draws_s1, cfg.alpha);
  out.s2 = decide(StatKind::s2, out.observed.s2, out.draws_s2, cfg.alpha);
  if (cfg.censoring == CensoringSource::groupwise) {
    out.s2.theory_supported = false;
    out.s2.note = "pooled-comparison statistic lacks bootstrap theory under group-specific censoring";
  }
  return out;
}

}  // namespace monotest
