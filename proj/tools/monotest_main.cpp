#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "monotest/bootstrap.hpp"
#include "monotest/csv.hpp"
#include "monotest/limit_theory.hpp"
#include "monotest/simulation.hpp"

using namespace monotest;

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse " + what + " from '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_num(p, what));
  if (out.empty()) throw std::invalid_argument(what + " list is empty");
  return out;
}

// Either an explicit comma list or a start:stop:step range.
std::vector<double> parse_sweep(const std::string& s) {
  if (s.find(':') == std::string::npos) return parse_list(s, "sweep value");
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step");
  const double start = parse_num(parts[0], "range start");
  const double stop = parse_num(parts[1], "range stop");
  const double step = parse_num(parts[2], "range step");
  if (!(step > 0.0) || stop < start) throw std::invalid_argument("range must advance");
  std::vector<double> out;
  for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
  return out;
}

// A single size is broadcast to all groups.
std::vector<std::size_t> parse_sizes(const std::string& s, std::size_t groups) {
  std::vector<std::size_t> out;
  for (const auto& p : split(s, ',')) {
    const double v = parse_num(p, "sample size");
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw std::invalid_argument("sample sizes must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.size() == 1) out.assign(groups, out[0]);
  if (out.size() != groups) throw std::invalid_argument("one sample size per group is required");
  return out;
}

Interval parse_domain(const std::string& s) {
  const auto v = parse_list(s, "domain endpoint");
  if (v.size() != 2 || !(v[0] < v[1])) throw std::invalid_argument("domain must be a,b with a < b");
  return {v[0], v[1]};
}

double parse_bandwidth(const std::string& s) {
  if (s == "auto") return 0.0;
  const double h = parse_num(s, "bandwidth");
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive or 'auto'");
  return h;
}

BoundaryCorrection parse_correction(const std::string& s) {
  if (s == "boundary-kernel") return BoundaryCorrection::boundary_kernel;
  if (s == "local-linear") return BoundaryCorrection::local_linear;
  throw std::invalid_argument("correction must be boundary-kernel or local-linear");
}

StatChoice parse_stats(const std::string& s) {
  if (s == "s1") return StatChoice::s1;
  if (s == "s2") return StatChoice::s2;
  if (s == "both") return StatChoice::both;
  throw std::invalid_argument("stat must be s1, s2 or both");
}

std::string correction_name(BoundaryCorrection c) {
  return c == BoundaryCorrection::boundary_kernel ? "boundary-kernel" : "local-linear";
}

// Writes to --out when given, stdout otherwise.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  fn(out);
}

template <typename Sample, typename Reader>
std::vector<Sample> read_samples(const std::vector<std::string>& files, Reader reader) {
  std::vector<Sample> all;
  for (std::size_t k = 0; k < files.size(); ++k) {
    std::ifstream in(files[k]);
    if (!in) throw std::runtime_error("cannot open input file '" + files[k] + "'");
    std::vector<Sample> part = reader(in);
    for (auto& s : part) {
      if (files.size() > 1) s.label = std::to_string(k + 1) + ":" + s.label;
      all.push_back(std::move(s));
    }
  }
  return all;
}

void write_test_csv(const KSampleResult& res, StatChoice stats, const BootstrapConfig& bc,
                    std::ostream& out) {
  out << "# monotest v1\n";
  out << "stat,observed,critical_value,p_value,reject,alpha,B,scheme,bandwidth,"
         "bandwidth_selected,correction,theory_supported,note\n";
  for (const TestReport* rep : {&res.s1, &res.s2}) {
    if (stats == StatChoice::s1 && rep->kind != StatKind::s1) continue;
    if (stats == StatChoice::s2 && rep->kind != StatKind::s2) continue;
    out << stat_name(rep->kind) << ',' << fmt(rep->observed) << ','
        << fmt(rep->critical_value) << ',' << fmt(rep->p_value) << ','
        << (rep->reject ? 1 : 0) << ',' << fmt(rep->alpha) << ',' << bc.replications << ','
        << scheme_name(bc.scheme) << ',' << fmt(res.reference.bandwidth) << ','
        << (res.reference.bandwidth_selected ? 1 : 0) << ','
        << correction_name(res.reference.correction) << ','
        << (rep->theory_supported ? 1 : 0) << ',' << rep->note << '\n';
  }
}

struct TestOptions {
  std::vector<std::string> files;
  std::string model;
  std::string stats = "both";
  std::string scheme = "auto";
  std::string bandwidth = "auto";
  std::string correction = "boundary-kernel";
  std::string domain;
  std::string direction = "decreasing";
  std::string censoring = "groupwise";
  std::string out;
  double alpha = 0.05;
  double upper = 0.0;  // hazard only; 0 means the 0.9 pooled quantile
  std::size_t replications = 500;
  std::uint64_t seed = 1;
  int threads = 0;
};

int run_test(const TestOptions& opt) {
  const bool increasing = opt.direction == "increasing";
  if (!increasing && opt.direction != "decreasing") {
    throw std::invalid_argument("direction must be decreasing or increasing");
  }
  const StatChoice stats = parse_stats(opt.stats);

  BootstrapConfig bc;
  bc.replications = opt.replications;
  bc.alpha = opt.alpha;
  bc.seed = opt.seed;
  bc.bandwidth = parse_bandwidth(opt.bandwidth);
  bc.correction = parse_correction(opt.correction);
  bc.threads = opt.threads;
  if (opt.censoring == "groupwise") {
    bc.censoring = CensoringSource::groupwise;
  } else if (opt.censoring == "pooled") {
    bc.censoring = CensoringSource::pooled;
  } else {
    throw std::invalid_argument("censoring must be groupwise or pooled");
  }

  KSampleResult res;
  if (opt.model == "density") {
    if (opt.scheme == "auto" || opt.scheme == "smooth" || opt.scheme == "density_smooth") {
      bc.scheme = Scheme::density_smooth;
    } else if (opt.scheme == "grenander" || opt.scheme == "density_grenander") {
      bc.scheme = Scheme::density_grenander;
    } else {
      throw std::invalid_argument("density schemes are smooth and grenander");
    }
    auto samples = read_samples<DensitySample>(opt.files,
                                               [](std::istream& in) { return read_density_csv(in); });
    if (increasing) {
      for (auto& s : samples) {
        for (auto& x : s.x) x = -x;
      }
    }
    Interval dom{0.0, 1.0};
    if (!opt.domain.empty()) {
      const Interval given = parse_domain(opt.domain);
      dom = increasing ? Interval{-given.b, -given.a} : given;
    } else {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& s : samples) {
        for (double x : s.x) {
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
      }
      if (!(lo < hi)) throw std::invalid_argument("data range is degenerate; pass --domain");
      dom = {lo, hi};
    }
    res = density_test(samples, dom, bc);
  } else if (opt.model == "regression") {
    if (opt.scheme != "auto" && opt.scheme != "residual" && opt.scheme != "regression_residual") {
      throw std::invalid_argument("the regression scheme is residual");
    }
    bc.scheme = Scheme::regression_residual;
    auto samples = read_samples<RegressionSample>(
        opt.files, [](std::istream& in) { return read_regression_csv(in); });
    if (increasing) {
      for (auto& s : samples) {
        for (auto& y : s.y) y = -y;
      }
    }
    const Interval dom = opt.domain.empty() ? Interval{0.0, 1.0} : parse_domain(opt.domain);
    res = regression_test(samples, dom, bc);
  } else if (opt.model == "hazard") {
    if (increasing) {
      throw std::invalid_argument("testing increasing hazards is not supported");
    }
    if (opt.scheme != "auto" && opt.scheme != "hazard" && opt.scheme != "hazard_groupwise" &&
        opt.scheme != "hazard_pooled") {
      throw std::invalid_argument("hazard schemes are hazard_groupwise and hazard_pooled");
    }
    if (opt.scheme == "hazard_groupwise") bc.censoring = CensoringSource::groupwise;
    if (opt.scheme == "hazard_pooled") bc.censoring = CensoringSource::pooled;
    bc.scheme = Scheme::hazard;
    auto samples = read_samples<CensoredSample>(
        opt.files, [](std::istream& in) { return read_censored_csv(in); });
    double upper = opt.upper;
    if (!(upper > 0.0)) {
      std::vector<double> pooled;
      for (const auto& s : samples) pooled.insert(pooled.end(), s.x.begin(), s.x.end());
      if (pooled.empty()) throw std::invalid_argument("no observations");
      std::sort(pooled.begin(), pooled.end());
      const auto rank = static_cast<std::size_t>(
          std::ceil(0.9 * static_cast<double>(pooled.size())));
      upper = pooled[std::max<std::size_t>(rank, 1) - 1];
    }
    res = hazard_test(samples, upper, bc);
  } else {
    throw std::invalid_argument("model must be density, regression or hazard");
  }

  with_output(opt.out, [&](std::ostream& os) { write_test_csv(res, stats, bc, os); });
  return 0;
}

struct LevelOptions {
  double lambda = 1.0;
  std::size_t groups = 3;
  std::string sizes = "100";
  std::size_t repetitions = 500;
  std::size_t bootstrap = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string scheme = "smooth";
  std::string stats = "both";
  std::string bandwidth = "auto";
  std::string correction = "boundary-kernel";
  std::string out;
  int threads = 0;
};

std::vector<Scheme> parse_density_schemes(const std::string& s) {
  if (s == "smooth" || s == "density_smooth") return {Scheme::density_smooth};
  if (s == "grenander" || s == "density_grenander") return {Scheme::density_grenander};
  if (s == "both") return {Scheme::density_smooth, Scheme::density_grenander};
  throw std::invalid_argument("scheme must be smooth, grenander or both");
}

int run_simulate_level(const LevelOptions& opt) {
  SimConfig cfg;
  cfg.lambdas.assign(opt.groups, opt.lambda);
  cfg.sizes = parse_sizes(opt.sizes, opt.groups);
  cfg.repetitions = opt.repetitions;
  cfg.bootstrap = opt.bootstrap;
  cfg.alpha = opt.alpha;
  cfg.seed = opt.seed;
  cfg.stats = parse_stats(opt.stats);
  cfg.bandwidth = parse_bandwidth(opt.bandwidth);
  cfg.correction = parse_correction(opt.correction);
  cfg.threads = opt.threads;
  std::vector<LevelRow> rows;
  for (Scheme scheme : parse_density_schemes(opt.scheme)) {
    cfg.scheme = scheme;
    const auto part = run_level(cfg);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  with_output(opt.out, [&](std::ostream& os) { write_level_csv(rows, os); });
  return 0;
}

struct PowerOptions {
  std::string base_lambdas = "1,1";
  std::string sweep = "0:3.5:0.5";
  std::string sizes = "100";
  std::size_t repetitions = 200;
  std::size_t bootstrap = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string scheme = "both";
  std::string stats = "both";
  std::string bandwidth = "auto";
  std::string correction = "boundary-kernel";
  std::string out;
  int threads = 0;
};

int run_simulate_power(const PowerOptions& opt) {
  SimConfig cfg;
  cfg.lambdas = parse_list(opt.base_lambdas, "lambda");
  cfg.lambdas.push_back(0.0);  // replaced by each sweep value
  cfg.sizes = parse_sizes(opt.sizes, cfg.lambdas.size());
  cfg.repetitions = opt.repetitions;
  cfg.bootstrap = opt.bootstrap;
  cfg.alpha = opt.alpha;
  cfg.seed = opt.seed;
  cfg.stats = parse_stats(opt.stats);
  cfg.bandwidth = parse_bandwidth(opt.bandwidth);
  cfg.correction = parse_correction(opt.correction);
  cfg.threads = opt.threads;
  const std::vector<double> sweep = parse_sweep(opt.sweep);
  std::vector<PowerPoint> points;
  for (Scheme scheme : parse_density_schemes(opt.scheme)) {
    cfg.scheme = scheme;
    const auto part = run_power(cfg, sweep);
    points.insert(points.end(), part.begin(), part.end());
  }
  with_output(opt.out, [&](std::ostream& os) { write_power_csv(points, os); });
  return 0;
}

struct TruePowerOptions {
  std::string lambdas = "1,1,3.5";
  std::string sizes = "100";
  std::size_t repetitions = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string mixture = "normalized";
  std::string out;
  int threads = 0;
};

int run_true_power(const TruePowerOptions& opt) {
  const std::vector<double> lambdas = parse_list(opt.lambdas, "lambda");
  const std::vector<std::size_t> sizes = parse_sizes(opt.sizes, lambdas.size());
  MixtureWeights mode;
  if (opt.mixture == "normalized") {
    mode = MixtureWeights::normalized;
  } else if (opt.mixture == "unit-exponential") {
    mode = MixtureWeights::unit_exponential;
  } else {
    throw std::invalid_argument("mixture must be normalized or unit-exponential");
  }
  const auto points = true_power_benchmark(lambdas, sizes, opt.repetitions, opt.alpha, opt.seed,
                                           mode, opt.threads);
  with_output(opt.out, [&](std::ostream& os) { write_true_power_csv(points, os); });
  return 0;
}

struct ConstantsOptions {
  double lambda = 1.0;
  std::string weights;
  std::size_t groups = 2;
  std::size_t n = 3000;
  std::size_t replications = 2000;
  std::size_t quad_points = 24;
  double t_cutoff = 2.5;
  std::size_t t_points = 16;
  double grid_half_width = 5.0;
  double grid_step = 0.005;
  std::size_t batches = 10;
  std::uint64_t seed = 1;
  std::string which = "all";
  std::string out;
  int threads = 0;
};

int run_limit_constants(const ConstantsOptions& opt) {
  std::vector<double> weights;
  if (opt.weights.empty()) {
    if (opt.groups < 2) throw std::invalid_argument("at least two groups are required");
    weights.assign(opt.groups, 1.0 / static_cast<double>(opt.groups));
  } else {
    weights = parse_list(opt.weights, "weight");
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
      total += w;
    }
    for (double& w : weights) w /= total;
  }
  const ModelFunctions mf = truncexp_null_model(opt.lambda, weights);
  LimitConfig cfg;
  cfg.replications = opt.replications;
  cfg.quad_points = opt.quad_points;
  cfg.t_cutoff = opt.t_cutoff;
  cfg.t_points = opt.t_points;
  cfg.grid_half_width = opt.grid_half_width;
  cfg.grid_step = opt.grid_step;
  cfg.batches = opt.batches;
  cfg.seed = opt.seed;
  cfg.threads = opt.threads;

  const bool all = opt.which == "all";
  if (!all && opt.which != "m1" && opt.which != "sigma1" && opt.which != "m2") {
    throw std::invalid_argument("which must be m1, sigma1, m2 or all");
  }
  LimitConstants merged;
  bool have_tail = false;
  if (all || opt.which == "m1") {
    const LimitConstants r = estimate_m1(mf, cfg);
    merged.m1 = r.m1;
    merged.m1_stderr = r.m1_stderr;
  }
  if (all || opt.which == "sigma1") {
    const LimitConstants r = estimate_sigma1(mf, cfg);
    merged.sigma1_sq = r.sigma1_sq;
    merged.sigma1_sq_stderr = r.sigma1_sq_stderr;
    merged.tail_cov = r.tail_cov;
    merged.tail_cov_stderr = r.tail_cov_stderr;
    have_tail = true;
  }
  if (all || opt.which == "m2") {
    const LimitConstants r = estimate_m2_sigma2(mf, opt.n, cfg);
    merged.m2 = r.m2;
    merged.m2_stderr = r.m2_stderr;
    merged.sigma2_sq = r.sigma2_sq;
    merged.sigma2_sq_stderr = r.sigma2_sq_stderr;
    merged.proportional = r.proportional;
    if (!have_tail) {
      merged.tail_cov = r.tail_cov;
      merged.tail_cov_stderr = r.tail_cov_stderr;
    }
  }
  with_output(opt.out, [&](std::ostream& os) { write_constants_csv(merged, cfg, os); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-sample equality tests for monotone densities, regressions and hazards"};
  app.require_subcommand(1);

  TestOptions test_opt;
  CLI::App* test = app.add_subcommand("test", "run a k-sample test on CSV data");
  test->add_option("files", test_opt.files, "input CSV files")->required()
      ->check(CLI::ExistingFile);
  test->add_option("--model", test_opt.model, "density, regression or hazard")->required();
  test->add_option("--stat", test_opt.stats, "s1, s2 or both");
  test->add_option("--scheme", test_opt.scheme, "bootstrap scheme");
  test->add_option("--alpha", test_opt.alpha, "test level");
  test->add_option("--B", test_opt.replications, "bootstrap replications");
  test->add_option("--bandwidth", test_opt.bandwidth, "auto or a positive number");
  test->add_option("--correction", test_opt.correction, "boundary-kernel or local-linear");
  test->add_option("--seed", test_opt.seed, "random seed");
  test->add_option("--domain", test_opt.domain, "a,b support of the curves");
  test->add_option("--upper", test_opt.upper, "hazard comparison endpoint");
  test->add_option("--censoring", test_opt.censoring, "groupwise or pooled (hazard)");
  test->add_option("--direction", test_opt.direction, "decreasing or increasing");
  test->add_option("--threads", test_opt.threads, "worker threads (0 = automatic)");
  test->add_option("--out", test_opt.out, "output CSV path (default stdout)");

  LevelOptions level_opt;
  CLI::App* level = app.add_subcommand("simulate-level", "null-hypothesis level study");
  level->add_option("--lambda", level_opt.lambda, "common truncated-exponential rate");
  level->add_option("--groups", level_opt.groups, "number of groups");
  level->add_option("--n", level_opt.sizes, "group sizes (single value or comma list)");
  level->add_option("--R", level_opt.repetitions, "repetitions");
  level->add_option("--B", level_opt.bootstrap, "bootstrap replications");
  level->add_option("--alpha", level_opt.alpha, "test level");
  level->add_option("--seed", level_opt.seed, "random seed");
  level->add_option("--scheme", level_opt.scheme, "smooth, grenander or both");
  level->add_option("--stat", level_opt.stats, "s1, s2 or both");
  level->add_option("--bandwidth", level_opt.bandwidth, "auto or a positive number");
  level->add_option("--correction", level_opt.correction, "boundary-kernel or local-linear");
  level->add_option("--threads", level_opt.threads, "worker threads (0 = automatic)");
  level->add_option("--out", level_opt.out, "output CSV path (default stdout)");

  PowerOptions power_opt;
  CLI::App* power = app.add_subcommand("simulate-power", "alternative sweep power study");
  power->add_option("--base-lambdas", power_opt.base_lambdas, "rates of the fixed groups");
  power->add_option("--lambda3", power_opt.sweep, "sweep values (list or start:stop:step)");
  power->add_option("--n", power_opt.sizes, "group sizes (single value or comma list)");
  power->add_option("--R", power_opt.repetitions, "repetitions per sweep point");
  power->add_option("--B", power_opt.bootstrap, "bootstrap replications");
  power->add_option("--alpha", power_opt.alpha, "test level");
  power->add_option("--seed", power_opt.seed, "random seed");
  power->add_option("--scheme", power_opt.scheme, "smooth, grenander or both");
  power->add_option("--stat", power_opt.stats, "s1, s2 or both");
  power->add_option("--bandwidth", power_opt.bandwidth, "auto or a positive number");
  power->add_option("--correction", power_opt.correction, "boundary-kernel or local-linear");
  power->add_option("--threads", power_opt.threads, "worker threads (0 = automatic)");
  power->add_option("--out", power_opt.out, "output CSV path (default stdout)");

  TruePowerOptions true_opt;
  CLI::App* truep = app.add_subcommand("true-power", "benchmark power without bootstrap");
  truep->add_option("--lambdas", true_opt.lambdas, "alternative rates, one per group");
  truep->add_option("--n", true_opt.sizes, "group sizes (single value or comma list)");
  truep->add_option("--reps", true_opt.repetitions, "repetitions per phase");
  truep->add_option("--alpha", true_opt.alpha, "test level");
  truep->add_option("--seed", true_opt.seed, "random seed");
  truep->add_option("--mixture", true_opt.mixture,
                    "null mixture weighting: normalized or unit-exponential");
  truep->add_option("--threads", true_opt.threads, "worker threads (0 = automatic)");
  truep->add_option("--out", true_opt.out, "output CSV path (default stdout)");

  ConstantsOptions const_opt;
  CLI::App* consts = app.add_subcommand("limit-constants",
                                        "Monte Carlo limit constants for the null model");
  consts->add_option("--lambda", const_opt.lambda, "truncated-exponential rate of the null");
  consts->add_option("--weights", const_opt.weights, "group fractions (comma list)");
  consts->add_option("--groups", const_opt.groups, "number of equal-weight groups");
  consts->add_option("--n", const_opt.n, "sample size entering the pooled-mean constant");
  consts->add_option("--reps", const_opt.replications, "Monte Carlo replications");
  consts->add_option("--quad-points", const_opt.quad_points, "domain quadrature nodes");
  consts->add_option("--t-cutoff", const_opt.t_cutoff, "covariance truncation point");
  consts->add_option("--t-points", const_opt.t_points, "covariance quadrature nodes");
  consts->add_option("--grid-half-width", const_opt.grid_half_width, "path grid half width");
  consts->add_option("--grid-step", const_opt.grid_step, "path grid step");
  consts->add_option("--batches", const_opt.batches, "batches for standard errors");
  consts->add_option("--seed", const_opt.seed, "random seed");
  consts->add_option("--which", const_opt.which, "m1, sigma1, m2 or all");
  consts->add_option("--threads", const_opt.threads, "worker threads (0 = automatic)");
  consts->add_option("--out", const_opt.out, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (test->parsed()) return run_test(test_opt);
    if (level->parsed()) return run_simulate_level(level_opt);
    if (power->parsed()) return run_simulate_power(power_opt);
    if (truep->parsed()) return run_true_power(true_opt);
    if (consts->parsed()) return run_limit_constants(const_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
