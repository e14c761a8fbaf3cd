#include "monotest/limit_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "monotest/parallel.hpp"
#include "quadrature.hpp"

namespace monotest {

BrownianGrid BrownianGrid::sample(double half_width, double step, RngStream& rng) {
  if (!(step > 0.0) || !(half_width > step)) {
    throw std::invalid_argument("grid requires 0 < step < half_width");
  }
  const auto cells = static_cast<std::size_t>(std::ceil(half_width / step - 1e-9));
  BrownianGrid g;
  g.step = step;
  g.half_width = step * static_cast<double>(cells);
  g.values.assign(2 * cells + 1, 0.0);
  const double sd = std::sqrt(step);
  for (std::size_t k = cells + 1; k < g.values.size(); ++k) {
    g.values[k] = g.values[k - 1] + sd * rng.normal();
  }
  for (std::size_t k = cells; k-- > 0;) {
    g.values[k] = g.values[k + 1] + sd * rng.normal();
  }
  return g;
}

double BrownianGrid::at(double u) const {
  const double pos = (u + half_width) / step;
  if (pos < -1e-9 || pos > static_cast<double>(values.size() - 1) + 1e-9) {
    throw std::runtime_error("grid too narrow: evaluation outside the simulated range");
  }
  const double clamped = std::clamp(pos, 0.0, static_cast<double>(values.size() - 1));
  auto k = static_cast<std::size_t>(clamped);
  if (k >= values.size() - 1) k = values.size() - 2;
  const double frac = clamped - static_cast<double>(k);
  return values[k] + frac * (values[k + 1] - values[k]);
}

double simulate_zeta(const BrownianGrid& path, double c) {
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    const double d = path.position(k) - c;
    const double obj = path.values[k] - d * d;
    if (obj >= best_val) {  // rightmost maximizer on ties
      best_val = obj;
      best = k;
    }
  }
  if (best == 0 || best + 1 == path.values.size()) {
    throw std::runtime_error("grid too narrow: maximizer on the grid edge");
  }
  return path.position(best) - c;
}

ZetaSolver::ZetaSolver(const BrownianGrid& path) {
  std::vector<double> pos(path.values.size());
  for (std::size_t k = 0; k < pos.size(); ++k) pos[k] = path.position(k);
  *this = ZetaSolver(std::move(pos), path.values);
}

ZetaSolver::ZetaSolver(std::vector<double> positions, const std::vector<double>& path_values) {
  if (positions.size() != path_values.size() || positions.size() < 3) {
    throw std::invalid_argument("solver needs matching positions and values");
  }
  std::vector<double> g(positions.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = path_values[k] - positions[k] * positions[k];
  std::vector<double> hull_y;
  detail::upper_hull(positions, g, vx_, hull_y);
  slopes_.resize(vx_.size() - 1);
  for (std::size_t k = 1; k < vx_.size(); ++k) {
    slopes_[k - 1] = (hull_y[k] - hull_y[k - 1]) / (vx_[k] - vx_[k - 1]);
  }
}

double ZetaSolver::zeta(double c) const {
  const double target = -2.0 * c;
  // First segment whose slope drops below the target; the hull vertex there
  // is the rightmost grid maximizer of g(v) + 2cv.
  const auto it = std::lower_bound(slopes_.begin(), slopes_.end(), target,
                                   [](double s, double t) { return s >= t; });
  const auto idx = static_cast<std::size_t>(it - slopes_.begin());
  if (idx == 0 || idx == slopes_.size()) {
    throw std::runtime_error("grid too narrow: maximizer on the grid edge");
  }
  return vx_[idx] - c;
}

double y_sj(double t, double s, std::size_t j, const ModelFunctions& mf,
            const std::function<double(double)>& zeta) {
  if (j >= mf.group_count()) throw std::invalid_argument("group index out of range");
  const double lp = mf.L_prime[j](s);
  if (!(lp > 0.0)) throw std::invalid_argument("L_j must be strictly increasing");
  const double scale = std::cbrt(lp / mf.c[j]);
  return scale * zeta(t / scale);
}

namespace {

void validate_model(const ModelFunctions& mf) {
  const std::size_t j = mf.group_count();
  if (j < 2) throw std::invalid_argument("at least two groups are required");
  if (mf.L.size() != j || mf.L_prime.size() != j) {
    throw std::invalid_argument("model must provide L and L' per group");
  }
  if (!mf.f0_prime) throw std::invalid_argument("model must provide the curve slope");
  double total = 0.0;
  for (double cj : mf.c) {
    if (!(cj > 0.0)) throw std::invalid_argument("group fractions must be positive");
    total += cj;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("group fractions must sum to one");
  }
}

struct Nodes {
  std::vector<double> x, w;
};

Nodes gl_nodes(std::size_t k, double lo, double hi) {
  Nodes n;
  for (const auto& [x, w] : quad::legendre(k, lo, hi)) {
    n.x.push_back(x);
    n.w.push_back(w);
  }
  return n;
}

struct BatchStats {
  double mean = 0.0, stderr_ = 0.0;
};

// Mean and standard error of per-batch estimates.
BatchStats batch_summary(const std::vector<double>& batch_values) {
  BatchStats s;
  const auto nb = static_cast<double>(batch_values.size());
  for (double v : batch_values) s.mean += v;
  s.mean /= nb;
  double ss = 0.0;
  for (double v : batch_values) ss += (v - s.mean) * (v - s.mean);
  s.stderr_ = std::sqrt(ss / (nb - 1.0) / nb);
  return s;
}

std::pair<std::size_t, std::size_t> batch_range(std::size_t reps, std::size_t batches,
                                                std::size_t b) {
  const std::size_t lo = reps * b / batches;
  const std::size_t hi = reps * (b + 1) / batches;
  return {lo, hi};
}

}  // namespace

LimitConstants estimate_m1(const ModelFunctions& mf, const LimitConfig& cfg) {
  validate_model(mf);
  const std::size_t j_count = mf.group_count();
  const Nodes sq = gl_nodes(cfg.quad_points, mf.domain.a, mf.domain.b);

  std::vector<std::vector<double>> alpha(j_count, std::vector<double>(sq.x.size()));
  for (std::size_t j = 0; j < j_count; ++j) {
    for (std::size_t q = 0; q < sq.x.size(); ++q) {
      const double lp = mf.L_prime[j](sq.x[q]);
      if (!(lp > 0.0)) throw std::invalid_argument("L_j must be strictly increasing");
      alpha[j][q] = std::cbrt(lp / mf.c[j]);
    }
  }
  std::vector<double> outer(sq.x.size());
  for (std::size_t q = 0; q < sq.x.size(); ++q) {
    outer[q] = sq.w[q] * std::cbrt(std::abs(4.0 * mf.f0_prime(sq.x[q])));
  }

  std::vector<double> integral(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(cfg.seed, r);
    std::vector<double> zeta0(j_count);
    for (std::size_t j = 0; j < j_count; ++j) {
      const BrownianGrid path = BrownianGrid::sample(cfg.grid_half_width, cfg.grid_step, rng);
      zeta0[j] = simulate_zeta(path, 0.0);
    }
    double acc = 0.0;
    for (std::size_t q = 0; q < sq.x.size(); ++q) {
      double pairs = 0.0;
      for (std::size_t i = 0; i < j_count; ++i) {
        for (std::size_t j = i + 1; j < j_count; ++j) {
          pairs += std::abs(alpha[i][q] * zeta0[i] - alpha[j][q] * zeta0[j]);
        }
      }
      acc += outer[q] * pairs;
    }
    integral[r] = acc;
  });

  LimitConstants out;
  double mean = 0.0;
  for (double v : integral) mean += v;
  mean /= static_cast<double>(integral.size());
  double ss = 0.0;
  for (double v : integral) ss += (v - mean) * (v - mean);
  out.m1 = mean;
  out.m1_stderr = std::sqrt(ss / (static_cast<double>(integral.size()) - 1.0) /
                            static_cast<double>(integral.size()));
  return out;
}

LimitConstants estimate_sigma1(const ModelFunctions& mf, const LimitConfig& cfg) {
  validate_model(mf);
  if (cfg.batches < 2 || cfg.replications < 2 * cfg.batches) {
    throw std::invalid_argument("need at least two replications per batch");
  }
  const std::size_t j_count = mf.group_count();
  const Nodes sq = gl_nodes(cfg.quad_points, mf.domain.a, mf.domain.b);
  Nodes tq = gl_nodes(cfg.t_points, 0.0, cfg.t_cutoff);
  tq.x.push_back(cfg.t_cutoff);  // extra node for the truncation check
  tq.w.push_back(0.0);

  std::vector<std::vector<double>> alpha(j_count, std::vector<double>(sq.x.size()));
  double min_alpha = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < j_count; ++j) {
    for (std::size_t q = 0; q < sq.x.size(); ++q) {
      const double lp = mf.L_prime[j](sq.x[q]);
      if (!(lp > 0.0)) throw std::invalid_argument("L_j must be strictly increasing");
      alpha[j][q] = std::cbrt(lp / mf.c[j]);
      min_alpha = std::min(min_alpha, alpha[j][q]);
    }
  }
  const double half_width = std::max(cfg.grid_half_width, cfg.t_cutoff / min_alpha + 4.0);

  const std::size_t Q = sq.x.size();
  const std::size_t T = tq.x.size();
  const std::size_t R = cfg.replications;
  std::vector<double> a_vals(R * Q * T);
  std::vector<double> b_vals(R * Q);

  parallel_for(R, cfg.threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(cfg.seed, r);
    std::vector<ZetaSolver> solvers;
    solvers.reserve(j_count);
    for (std::size_t j = 0; j < j_count; ++j) {
      solvers.emplace_back(BrownianGrid::sample(half_width, cfg.grid_step, rng));
    }
    std::vector<double> zeta0(j_count);
    for (std::size_t j = 0; j < j_count; ++j) zeta0[j] = solvers[j].zeta(0.0);

    for (std::size_t q = 0; q < Q; ++q) {
      double b = 0.0;
      for (std::size_t i = 0; i < j_count; ++i) {
        for (std::size_t j = i + 1; j < j_count; ++j) {
          b += std::abs(alpha[i][q] * zeta0[i] - alpha[j][q] * zeta0[j]);
        }
      }
      b_vals[r * Q + q] = b;
      for (std::size_t t = 0; t < T; ++t) {
        double a = 0.0;
        for (std::size_t i = 0; i < j_count; ++i) {
          const double yi = alpha[i][q] * solvers[i].zeta(tq.x[t] / alpha[i][q]);
          for (std::size_t j = i + 1; j < j_count; ++j) {
            const double yj = alpha[j][q] * solvers[j].zeta(tq.x[t] / alpha[j][q]);
            a += std::abs(yi - yj);
          }
        }
        a_vals[(r * Q + q) * T + t] = a;
      }
    }
  });

  // Per-batch covariance integrals.
  std::vector<double> batch_sigma(cfg.batches), batch_tail(cfg.batches);
  for (std::size_t b = 0; b < cfg.batches; ++b) {
    const auto [lo, hi] = batch_range(R, cfg.batches, b);
    const double nb = static_cast<double>(hi - lo);
    double sigma = 0.0, tail = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      double sum_b = 0.0;
      for (std::size_t r = lo; r < hi; ++r) sum_b += b_vals[r * Q + q];
      for (std::size_t t = 0; t < T; ++t) {
        double sum_a = 0.0, sum_ab = 0.0;
        for (std::size_t r = lo; r < hi; ++r) {
          const double a = a_vals[(r * Q + q) * T + t];
          sum_a += a;
          sum_ab += a * b_vals[r * Q + q];
        }
        const double cov = (sum_ab - sum_a * sum_b / nb) / (nb - 1.0);
        if (t + 1 == T) {
          tail += sq.w[q] * cov;
        } else {
          sigma += sq.w[q] * tq.w[t] * cov;
        }
      }
    }
    batch_sigma[b] = 8.0 * sigma;
    batch_tail[b] = tail;
  }

  LimitConstants out;
  const BatchStats s = batch_summary(batch_sigma);
  const BatchStats tl = batch_summary(batch_tail);
  out.sigma1_sq = s.mean;
  out.sigma1_sq_stderr = s.stderr_;
  out.tail_cov = tl.mean;
  out.tail_cov_stderr = tl.stderr_;
  return out;
}

LimitConstants estimate_m2_sigma2(const ModelFunctions& mf, std::size_t n,
                                  const LimitConfig& cfg) {
  validate_model(mf);
  if (cfg.batches < 2 || cfg.replications < 2 * cfg.batches) {
    throw std::invalid_argument("need at least two replications per batch");
  }
  const std::size_t j_count = mf.group_count();
  const Nodes sq = gl_nodes(cfg.quad_points, mf.domain.a, mf.domain.b);
  Nodes tq = gl_nodes(cfg.t_points, 0.0, cfg.t_cutoff);
  tq.x.push_back(cfg.t_cutoff);
  tq.w.push_back(0.0);

  const std::size_t Q = sq.x.size();
  const std::size_t T = tq.x.size();
  const std::size_t R = cfg.replications;

  auto l0_prime = [&](double s) {
    double v = 0.0;
    for (std::size_t j = 0; j < j_count; ++j) v += mf.c[j] * mf.L_prime[j](s);
    return v;
  };
  auto l0 = [&](double s) {
    double v = 0.0;
    for (std::size_t j = 0; j < j_count; ++j) v += mf.c[j] * mf.L[j](s);
    return v;
  };

  std::vector<std::vector<double>> alpha(j_count, std::vector<double>(Q));
  std::vector<std::vector<double>> omega(j_count, std::vector<double>(Q));
  std::vector<double> beta0(Q), outer(Q);
  double min_alpha = std::numeric_limits<double>::infinity();
  double min_beta = std::numeric_limits<double>::infinity();
  bool proportional = true;
  for (std::size_t q = 0; q < Q; ++q) {
    const double lp0 = l0_prime(sq.x[q]);
    if (!(lp0 > 0.0)) throw std::invalid_argument("pooled curve must be strictly increasing");
    beta0[q] = std::cbrt(lp0);
    min_beta = std::min(min_beta, beta0[q]);
    outer[q] = sq.w[q] * std::cbrt(std::abs(4.0 * mf.f0_prime(sq.x[q])));
    for (std::size_t j = 0; j < j_count; ++j) {
      const double lp = mf.L_prime[j](sq.x[q]);
      if (!(lp > 0.0)) throw std::invalid_argument("L_j must be strictly increasing");
      alpha[j][q] = std::cbrt(lp / mf.c[j]);
      min_alpha = std::min(min_alpha, alpha[j][q]);
      omega[j][q] = std::sqrt(mf.c[j] * lp / lp0);
      const double rho = lp / lp0;
      const double rho0 = mf.L_prime[j](sq.x[0]) / l0_prime(sq.x[0]);
      if (std::abs(rho - rho0) > 1e-9 * (1.0 + std::abs(rho0))) proportional = false;
    }
  }

  double half_width =
      std::max(cfg.grid_half_width, cfg.t_cutoff / std::min(min_alpha, min_beta) + 4.0);

  // For the n-dependent pooled maximizer, the master paths must cover the
  // warped arguments of every group at each search position.
  const double n13 = std::cbrt(static_cast<double>(n));
  struct Inverter {
    std::vector<double> grid_x, grid_y;
    const std::function<double(double)>* f = nullptr;
    double invert(double target) const {
      auto it = std::lower_bound(grid_y.begin(), grid_y.end(), target);
      std::size_t k = static_cast<std::size_t>(it - grid_y.begin());
      double lo = k == 0 ? grid_x.front() : grid_x[k - 1];
      double hi = k >= grid_x.size() ? grid_x.back() : grid_x[k];
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if ((*f)(mid) < target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
  };
  std::function<double(double)> l0_fn = l0;
  Inverter l0_inv;
  std::vector<double> search_grid;
  std::vector<std::vector<std::vector<double>>> warped;  // [q][j][u-index]
  if (!proportional) {
    constexpr std::size_t kInvGrid = 8193;
    l0_inv.f = &l0_fn;
    l0_inv.grid_x.resize(kInvGrid);
    l0_inv.grid_y.resize(kInvGrid);
    for (std::size_t k = 0; k < kInvGrid; ++k) {
      const double x =
          mf.domain.a + mf.domain.length() * static_cast<double>(k) / (kInvGrid - 1);
      l0_inv.grid_x[k] = x;
      l0_inv.grid_y[k] = l0(x);
    }
    const double search_hw = cfg.grid_half_width;
    const auto cells = static_cast<std::size_t>(std::ceil(search_hw / cfg.grid_step));
    search_grid.resize(2 * cells + 1);
    for (std::size_t k = 0; k < search_grid.size(); ++k) {
      search_grid[k] = (static_cast<double>(k) - static_cast<double>(cells)) * cfg.grid_step;
    }
    warped.assign(Q, std::vector<std::vector<double>>(j_count,
                                                      std::vector<double>(search_grid.size())));
    double needed = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      const double l0_at = l0(sq.x[q]);
      for (std::size_t k = 0; k < search_grid.size(); ++k) {
        const double target = l0_at + search_grid[k] / n13;
        const double lo_y = l0_inv.grid_y.front(), hi_y = l0_inv.grid_y.back();
        const double c = std::clamp(target, lo_y, hi_y);
        const double x = l0_inv.invert(c);
        for (std::size_t j = 0; j < j_count; ++j) {
          const double g = n13 * (mf.L[j](x) - mf.L[j](sq.x[q]));
          warped[q][j][k] = g;
          needed = std::max(needed, std::abs(g));
        }
      }
    }
    half_width = std::max(half_width, needed + cfg.grid_step);
  }

  std::vector<double> a_vals(R * Q * T);
  std::vector<double> b_vals(R * Q);
  std::vector<double> m2_vals(R);

  parallel_for(R, cfg.threads, [&](std::size_t r) {
    RngStream rng = RngStream::substream(cfg.seed, r);
    std::vector<BrownianGrid> paths;
    paths.reserve(j_count);
    for (std::size_t j = 0; j < j_count; ++j) {
      paths.push_back(BrownianGrid::sample(half_width, cfg.grid_step, rng));
    }
    std::vector<ZetaSolver> solvers;
    solvers.reserve(j_count);
    for (const auto& p : paths) solvers.emplace_back(p);
    std::vector<double> zeta0(j_count);
    for (std::size_t j = 0; j < j_count; ++j) zeta0[j] = solvers[j].zeta(0.0);

    std::vector<double> positions(paths[0].values.size());
    for (std::size_t k = 0; k < positions.size(); ++k) positions[k] = paths[0].position(k);
    std::vector<double> combined(positions.size());

    double m2_acc = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t k = 0; k < combined.size(); ++k) {
        double v = 0.0;
        for (std::size_t j = 0; j < j_count; ++j) v += omega[j][q] * paths[j].values[k];
        combined[k] = v;
      }
      const ZetaSolver pooled_solver(positions, combined);

      const double y0_zero = beta0[q] * pooled_solver.zeta(0.0);
      double b = 0.0;
      for (std::size_t j = 0; j < j_count; ++j) {
        b += std::abs(alpha[j][q] * zeta0[j] - y0_zero);
      }
      b_vals[r * Q + q] = b;
      for (std::size_t t = 0; t < T; ++t) {
        const double y0 = beta0[q] * pooled_solver.zeta(tq.x[t] / beta0[q]);
        double a = 0.0;
        for (std::size_t j = 0; j < j_count; ++j) {
          a += std::abs(alpha[j][q] * solvers[j].zeta(tq.x[t] / alpha[j][q]) - y0);
        }
        a_vals[(r * Q + q) * T + t] = a;
      }

      // Pooled maximizer for the mean: combined-path shortcut when the
      // curves are proportional, warped interpolation otherwise.
      double zeta_hat;
      if (proportional) {
        zeta_hat = pooled_solver.zeta(0.0);
      } else {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < search_grid.size(); ++k) {
          double w = 0.0;
          for (std::size_t j = 0; j < j_count; ++j) {
            w += std::sqrt(mf.c[j]) * paths[j].at(warped[q][j][k]);
          }
          const double obj = w - search_grid[k] * search_grid[k];
          if (obj >= best) {
            best = obj;
            best_k = k;
          }
        }
        if (best_k == 0 || best_k + 1 == search_grid.size()) {
          throw std::runtime_error("grid too narrow: maximizer on the grid edge");
        }
        zeta_hat = search_grid[best_k];
      }
      double terms = 0.0;
      for (std::size_t j = 0; j < j_count; ++j) {
        terms += std::abs(beta0[q] * zeta_hat - alpha[j][q] * zeta0[j]);
      }
      m2_acc += outer[q] * terms;
    }
    m2_vals[r] = m2_acc;
  });

  std::vector<double> batch_sigma(cfg.batches), batch_tail(cfg.batches), batch_m2(cfg.batches);
  for (std::size_t b = 0; b < cfg.batches; ++b) {
    const auto [lo, hi] = batch_range(R, cfg.batches, b);
    const double nb = static_cast<double>(hi - lo);
    double sigma = 0.0, tail = 0.0, m2 = 0.0;
    for (std::size_t r = lo; r < hi; ++r) m2 += m2_vals[r];
    batch_m2[b] = m2 / nb;
    for (std::size_t q = 0; q < Q; ++q) {
      double sum_b = 0.0;
      for (std::size_t r = lo; r < hi; ++r) sum_b += b_vals[r * Q + q];
      for (std::size_t t = 0; t < T; ++t) {
        double sum_a = 0.0, sum_ab = 0.0;
        for (std::size_t r = lo; r < hi; ++r) {
          const double a = a_vals[(r * Q + q) * T + t];
          sum_a += a;
          sum_ab += a * b_vals[r * Q + q];
        }
        const double cov = (sum_ab - sum_a * sum_b / nb) / (nb - 1.0);
        if (t + 1 == T) {
          tail += sq.w[q] * cov;
        } else {
          sigma += sq.w[q] * tq.w[t] * cov;
        }
      }
    }
    batch_sigma[b] = 8.0 * sigma;
    batch_tail[b] = tail;
  }

  LimitConstants out;
  out.proportional = proportional;
  const BatchStats sg = batch_summary(batch_sigma);
  const BatchStats tl = batch_summary(batch_tail);
  const BatchStats m2s = batch_summary(batch_m2);
  out.sigma2_sq = sg.mean;
  out.sigma2_sq_stderr = sg.stderr_;
  out.tail_cov = tl.mean;
  out.tail_cov_stderr = tl.stderr_;
  out.m2 = m2s.mean;
  out.m2_stderr = m2s.stderr_;
  return out;
}

}  // namespace monotest
