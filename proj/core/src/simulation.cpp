#include "monotest/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "monotest/parallel.hpp"
#include "monotest/statistics.hpp"

namespace monotest {

namespace {

constexpr Interval kTestBed{0.0, 3.0};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double binomial_stderr(double p, std::size_t reps) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

TestStatistics raw_statistics(const std::vector<std::vector<double>>& xs, Interval domain) {
  std::vector<CumulativeProcess> procs;
  std::vector<MonotoneStepEstimate> groups;
  std::vector<std::size_t> sizes;
  procs.reserve(xs.size());
  groups.reserve(xs.size());
  for (const auto& x : xs) {
    procs.push_back(empirical_cdf(x, domain));
    groups.push_back(left_slopes(lcm(procs.back())));
    sizes.push_back(x.size());
  }
  const GroupWeights w = GroupWeights::from_sizes(sizes);
  const MonotoneStepEstimate pooled = left_slopes(lcm(pool(procs, w)));
  return compute_statistics(groups, pooled, domain);
}

void validate_groups(const std::vector<double>& lambdas, const std::vector<std::size_t>& sizes) {
  if (lambdas.size() < 2) throw std::invalid_argument("at least two groups are required");
  if (sizes.size() != lambdas.size()) {
    throw std::invalid_argument("one sample size per lambda is required");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("lambda must be nonnegative");
    }
  }
  for (std::size_t n : sizes) {
    if (n == 0) throw std::invalid_argument("sample sizes must be positive");
  }
}

void validate_sim(const SimConfig& cfg) {
  validate_groups(cfg.lambdas, cfg.sizes);
  if (cfg.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (cfg.bootstrap < 1) throw std::invalid_argument("bootstrap replications must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (cfg.scheme != Scheme::density_smooth && cfg.scheme != Scheme::density_grenander) {
    throw std::invalid_argument("simulation studies use the density schemes");
  }
}

struct RejectCounts {
  std::size_t s1 = 0, s2 = 0;
};

// One repetition: draw the groups at the given lambdas, test, report rejections.
RejectCounts one_repetition(const SimConfig& cfg, const std::vector<double>& lambdas,
                            RngStream& rng) {
  std::vector<DensitySample> samples(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    samples[j].label = std::to_string(j + 1);
    samples[j].x = truncexp_sample(lambdas[j], cfg.sizes[j], rng);
  }
  BootstrapConfig bc;
  bc.scheme = cfg.scheme;
  bc.replications = cfg.bootstrap;
  bc.alpha = cfg.alpha;
  bc.seed = rng.next_u64();
  bc.bandwidth = cfg.bandwidth;
  bc.correction = cfg.correction;
  bc.threads = 1;  // parallelism lives at the repetition level
  const KSampleResult res = density_test(samples, kTestBed, bc);
  return {res.s1.reject ? std::size_t{1} : 0, res.s2.reject ? std::size_t{1} : 0};
}

bool wants(StatChoice choice, StatKind stat) {
  if (choice == StatChoice::both) return true;
  return (choice == StatChoice::s1) == (stat == StatKind::s1);
}

}  // namespace

TruncExp::TruncExp(double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be nonnegative and finite");
  }
  mass_ = lambda > 0.0 ? -std::expm1(-3.0 * lambda) : 1.0;
}

double TruncExp::pdf(double x) const {
  if (x < 0.0 || x > 3.0) return 0.0;
  if (lambda_ == 0.0) return 1.0 / 3.0;
  return lambda_ * std::exp(-lambda_ * x) / mass_;
}

double TruncExp::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 3.0) return 1.0;
  if (lambda_ == 0.0) return x / 3.0;
  return -std::expm1(-lambda_ * x) / mass_;
}

double TruncExp::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile level must lie in [0,1]");
  if (lambda_ == 0.0) return 3.0 * u;
  return -std::log1p(-u * mass_) / lambda_;
}

double TruncExp::pdf_deriv(double x) const { return -lambda_ * pdf(x); }

std::vector<double> truncexp_sample(double lambda, std::size_t n, RngStream& rng) {
  const TruncExp d(lambda);
  std::vector<double> x(n);
  for (auto& v : x) v = d.quantile(rng.uniform01());
  return x;
}

ModelFunctions truncexp_null_model(double lambda, const std::vector<double>& weights) {
  const TruncExp d(lambda);
  ModelFunctions mf;
  mf.domain = kTestBed;
  mf.c = weights;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    mf.L.emplace_back([d](double s) { return d.cdf(s); });
    mf.L_prime.emplace_back([d](double s) { return d.pdf(s); });
  }
  mf.f0_prime = [d](double s) { return d.pdf_deriv(s); };
  return mf;
}

TruncExpMixture::TruncExpMixture(const std::vector<double>& lambdas,
                                 const std::vector<double>& fractions, MixtureWeights mode) {
  if (lambdas.empty() || fractions.size() != lambdas.size()) {
    throw std::invalid_argument("one fraction per lambda is required");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(fractions[j] > 0.0)) throw std::invalid_argument("fractions must be positive");
    comps_.emplace_back(lambdas[j]);
    double w = fractions[j];
    if (mode == MixtureWeights::unit_exponential) {
      // Component written with its native 1 - exp(-lambda) normalizer, then
      // expressed against the unit-mass truncated density.
      const double l = lambdas[j];
      w *= l > 0.0 ? std::expm1(-3.0 * l) / std::expm1(-l) : 3.0;
    }
    weights_.push_back(w);
    total += w;
  }
  cumw_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    weights_[j] /= total;
    acc += weights_[j];
    cumw_[j] = acc;
  }
  cumw_.back() = 1.0;
}

double TruncExpMixture::pdf(double x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < comps_.size(); ++j) v += weights_[j] * comps_[j].pdf(x);
  return v;
}

double TruncExpMixture::sample(RngStream& rng) const {
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cumw_.begin(), cumw_.end(), u);
  const auto k = std::min(static_cast<std::size_t>(it - cumw_.begin()), comps_.size() - 1);
  return comps_[k].quantile(rng.uniform01());
}

std::vector<LevelRow> run_level(const SimConfig& cfg) {
  validate_sim(cfg);
  for (double l : cfg.lambdas) {
    if (l != cfg.lambdas.front()) {
      throw std::invalid_argument("level study requires equal lambdas");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t reps = cfg.repetitions;
  std::vector<RejectCounts> rejects(reps);
  parallel_for(reps, cfg.threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(cfg.seed, r);
    rejects[r] = one_repetition(cfg, cfg.lambdas, rng);
  });
  RejectCounts total;
  for (const auto& rc : rejects) {
    total.s1 += rc.s1;
    total.s2 += rc.s2;
  }
  const double elapsed = seconds_since(t0);
  std::size_t pooled_n = 0;
  for (std::size_t n : cfg.sizes) pooled_n += n;

  std::vector<LevelRow> rows;
  for (StatKind stat : {StatKind::s1, StatKind::s2}) {
    if (!wants(cfg.stats, stat)) continue;
    LevelRow row;
    row.lambda = cfg.lambdas.front();
    row.pooled_n = pooled_n;
    row.scheme = cfg.scheme;
    row.stat = stat;
    row.rejections = stat == StatKind::s1 ? total.s1 : total.s2;
    row.repetitions = reps;
    row.level = static_cast<double>(row.rejections) / static_cast<double>(reps);
    row.stderr_ = binomial_stderr(row.level, reps);
    row.seconds = elapsed;
    rows.push_back(row);
  }
  return rows;
}

std::vector<PowerPoint> run_power(const SimConfig& cfg,
                                  const std::vector<double>& lambda3_values) {
  validate_sim(cfg);
  if (lambda3_values.empty()) throw std::invalid_argument("lambda sweep must be nonempty");
  const std::size_t reps = cfg.repetitions;
  std::vector<PowerPoint> points;
  for (std::size_t p = 0; p < lambda3_values.size(); ++p) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> lambdas = cfg.lambdas;
    lambdas.back() = lambda3_values[p];
    validate_groups(lambdas, cfg.sizes);
    std::vector<RejectCounts> rejects(reps);
    parallel_for(reps, cfg.threads, [&](std::size_t r) {
      RngStream rng = RngStream::substream(cfg.seed, p * reps + r);
      rejects[r] = one_repetition(cfg, lambdas, rng);
    });
    RejectCounts total;
    for (const auto& rc : rejects) {
      total.s1 += rc.s1;
      total.s2 += rc.s2;
    }
    const double elapsed = seconds_since(t0);
    for (StatKind stat : {StatKind::s1, StatKind::s2}) {
      if (!wants(cfg.stats, stat)) continue;
      PowerPoint pt;
      pt.lambda3 = lambda3_values[p];
      pt.scheme = cfg.scheme;
      pt.stat = stat;
      pt.rejections = stat == StatKind::s1 ? total.s1 : total.s2;
      pt.repetitions = reps;
      pt.power = static_cast<double>(pt.rejections) / static_cast<double>(reps);
      pt.stderr_ = binomial_stderr(pt.power, reps);
      pt.seconds = elapsed;
      points.push_back(pt);
    }
  }
  return points;
}

std::vector<TruePowerPoint> true_power_benchmark(const std::vector<double>& lambdas,
                                                 const std::vector<std::size_t>& sizes,
                                                 std::size_t reps, double alpha,
                                                 std::uint64_t seed, MixtureWeights mode,
                                                 int threads) {
  validate_groups(lambdas, sizes);
  if (reps < 100) throw std::invalid_argument("benchmark needs at least 100 repetitions");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  const GroupWeights w = GroupWeights::from_sizes(sizes);
  const TruncExpMixture mix(lambdas, w.c, mode);

  // Phase one: the null critical value, with every group drawn from the
  // pooled mixture of the alternative.
  std::vector<double> null_s1(reps), null_s2(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(seed, r);
    std::vector<std::vector<double>> xs(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      xs[j].resize(sizes[j]);
      for (auto& v : xs[j]) v = mix.sample(rng);
    }
    const TestStatistics st = raw_statistics(xs, kTestBed);
    null_s1[r] = st.s1;
    null_s2[r] = st.s2;
  });
  const double crit1 = critical_value(null_s1, alpha);
  const double crit2 = critical_value(null_s2, alpha);

  // Phase two: exceedance rate under the alternative.
  std::vector<RejectCounts> rejects(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(seed, reps + r);
    std::vector<std::vector<double>> xs(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      xs[j] = truncexp_sample(lambdas[j], sizes[j], rng);
    }
    const TestStatistics st = raw_statistics(xs, kTestBed);
    rejects[r] = {st.s1 > crit1 ? std::size_t{1} : 0, st.s2 > crit2 ? std::size_t{1} : 0};
  });
  RejectCounts total;
  for (const auto& rc : rejects) {
    total.s1 += rc.s1;
    total.s2 += rc.s2;
  }

  std::vector<TruePowerPoint> out;
  for (StatKind stat : {StatKind::s1, StatKind::s2}) {
    TruePowerPoint pt;
    pt.lambdas = lambdas;
    pt.stat = stat;
    pt.critical_value = stat == StatKind::s1 ? crit1 : crit2;
    pt.rejections = stat == StatKind::s1 ? total.s1 : total.s2;
    pt.repetitions = reps;
    pt.power = static_cast<double>(pt.rejections) / static_cast<double>(reps);
    pt.stderr_ = binomial_stderr(pt.power, reps);
    pt.weights_mode = mode;
    out.push_back(pt);
  }
  return out;
}

StatDraws sample_null_statistics(double lambda, const std::vector<std::size_t>& sizes,
                                 std::size_t reps, std::uint64_t seed, int threads) {
  validate_groups(std::vector<double>(sizes.size(), lambda), sizes);
  if (reps < 1) throw std::invalid_argument("repetitions must be at least 1");
  StatDraws draws;
  draws.s1.resize(reps);
  draws.s2.resize(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(seed, r);
    std::vector<std::vector<double>> xs(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      xs[j] = truncexp_sample(lambda, sizes[j], rng);
    }
    const TestStatistics st = raw_statistics(xs, kTestBed);
    draws.s1[r] = st.s1;
    draws.s2[r] = st.s2;
  });
  return draws;
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::density_smooth:
      return "density_smooth";
    case Scheme::density_grenander:
      return "density_grenander";
    case Scheme::regression_residual:
      return "regression_residual";
    case Scheme::hazard:
      return "hazard";
  }
  return "unknown";
}

std::string stat_name(StatKind stat) { return stat == StatKind::s1 ? "s1" : "s2"; }

std::string mixture_weights_name(MixtureWeights mode) {
  return mode == MixtureWeights::normalized ? "normalized" : "unit_exponential";
}

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void write_level_csv(const std::vector<LevelRow>& rows, std::ostream& out) {
  out << "# monotest v1\n";
  out << "lambda,n,scheme,stat,rejections,R,level,stderr\n";
  for (const auto& row : rows) {
    out << fmt(row.lambda) << ',' << row.pooled_n << ',' << scheme_name(row.scheme) << ','
        << stat_name(row.stat) << ',' << row.rejections << ',' << row.repetitions << ','
        << fmt(row.level) << ',' << fmt(row.stderr_) << '\n';
  }
}

void write_power_csv(const std::vector<PowerPoint>& rows, std::ostream& out) {
  out << "# monotest v1\n";
  out << "lambda3,stat,scheme,power,stderr\n";
  for (const auto& row : rows) {
    out << fmt(row.lambda3) << ',' << stat_name(row.stat) << ',' << scheme_name(row.scheme)
        << ',' << fmt(row.power) << ',' << fmt(row.stderr_) << '\n';
  }
}

void write_true_power_csv(const std::vector<TruePowerPoint>& rows, std::ostream& out) {
  out << "# monotest v1\n";
  out << "lambda3,stat,scheme,power,stderr\n";
  for (const auto& row : rows) {
    out << fmt(row.lambdas.back()) << ',' << stat_name(row.stat) << ",true_power_"
        << mixture_weights_name(row.weights_mode) << ',' << fmt(row.power) << ','
        << fmt(row.stderr_) << '\n';
  }
}

void write_constants_csv(const LimitConstants& constants, const LimitConfig& cfg,
                         std::ostream& out) {
  out << "# monotest v1\n";
  out << "m1,m1_stderr,sigma1_sq,sigma1_sq_stderr,m2,m2_stderr,sigma2_sq,sigma2_sq_stderr,"
         "tail_cov,tail_cov_stderr,proportional,replications,quad_points,t_cutoff,t_points,"
         "grid_half_width,grid_step,seed\n";
  out << fmt(constants.m1) << ',' << fmt(constants.m1_stderr) << ',' << fmt(constants.sigma1_sq)
      << ',' << fmt(constants.sigma1_sq_stderr) << ',' << fmt(constants.m2) << ','
      << fmt(constants.m2_stderr) << ',' << fmt(constants.sigma2_sq) << ','
      << fmt(constants.sigma2_sq_stderr) << ',' << fmt(constants.tail_cov) << ','
      << fmt(constants.tail_cov_stderr) << ',' << (constants.proportional ? 1 : 0) << ','
      << cfg.replications << ',' << cfg.quad_points << ',' << fmt(cfg.t_cutoff) << ','
      << cfg.t_points << ',' << fmt(cfg.grid_half_width) << ',' << fmt(cfg.grid_step) << ','
      << cfg.seed << '\n';
}

}  // namespace monotest
