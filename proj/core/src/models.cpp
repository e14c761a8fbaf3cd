#include "monotest/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace monotest {

GroupWeights GroupWeights::from_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw std::invalid_argument("at least one group is required");
  GroupWeights w;
  w.sizes = sizes;
  w.total = 0;
  for (std::size_t n : sizes) {
    if (n == 0) throw std::invalid_argument("group sizes must be positive");
    w.total += n;
  }
  w.c.reserve(sizes.size());
  for (std::size_t n : sizes) w.c.push_back(static_cast<double>(n) / static_cast<double>(w.total));
  return w;
}

CumulativeProcess empirical_cdf(const std::vector<double>& x, Interval domain) {
  if (x.empty()) throw std::invalid_argument("empirical cdf of an empty sample");
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < domain.a || sorted.back() > domain.b) {
    throw std::invalid_argument("observation outside the sample domain");
  }
  const double n = static_cast<double>(sorted.size());
  std::vector<double> bp, val;
  bp.reserve(sorted.size());
  val.reserve(sorted.size());
  std::size_t seen = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    seen += j - i;
    bp.push_back(sorted[i]);
    val.push_back(static_cast<double>(seen) / n);
    i = j;
  }
  return CumulativeProcess(domain, std::move(bp), std::move(val));
}

CumulativeProcess regression_cumsum(const std::vector<double>& y, Interval domain) {
  if (y.empty()) throw std::invalid_argument("cumulative sum diagram of an empty sample");
  const double n = static_cast<double>(y.size());
  std::vector<double> bp(y.size()), val(y.size());
  double running = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    bp[i] = domain.a + domain.length() * static_cast<double>(i + 1) / n;
    running += y[i] / n;
    val[i] = running;
  }
  bp.back() = domain.b;  // avoid rounding drift at the last design point
  return CumulativeProcess(domain, std::move(bp), std::move(val));
}

namespace {

// Indices sorted by time; at ties, entries with event indicator 1 first.
std::vector<std::size_t> order_by_time(const std::vector<double>& x, const std::vector<int>& ev) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    if (x[i] != x[j]) return x[i] < x[j];
    return ev[i] > ev[j];
  });
  return idx;
}

void validate_censored(const std::vector<double>& x, const std::vector<int>& delta) {
  if (x.empty()) throw std::invalid_argument("empty censored sample");
  if (x.size() != delta.size()) throw std::invalid_argument("x and delta must have equal length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0) || !std::isfinite(x[i])) {
      throw std::invalid_argument("censored observations must be finite and nonnegative");
    }
    if (delta[i] != 0 && delta[i] != 1) throw std::invalid_argument("delta entries must be 0 or 1");
  }
}

}  // namespace

CumulativeProcess nelson_aalen(const CensoredSample& sample, double upper) {
  validate_censored(sample.x, sample.delta);
  if (!(upper > 0.0)) throw std::invalid_argument("upper limit must be positive");
  const auto idx = order_by_time(sample.x, sample.delta);

  std::vector<double> bp, val;
  double hazard = 0.0;
  double risk = static_cast<double>(sample.x.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    const std::size_t i = idx[pos];
    if (sample.delta[i] == 1) {
      hazard += 1.0 / risk;
      if (sample.x[i] <= upper) {
        if (!bp.empty() && bp.back() == sample.x[i]) {
          val.back() = hazard;
        } else {
          bp.push_back(sample.x[i]);
          val.push_back(hazard);
        }
      }
    }
    risk -= 1.0;
  }
  if (bp.empty()) throw std::invalid_argument("no events: no uncensored time at or below upper");
  return CumulativeProcess(Interval{0.0, upper}, std::move(bp), std::move(val));
}

CumulativeProcess kaplan_meier(const std::vector<double>& x, const std::vector<int>& delta,
                               bool of_censoring) {
  validate_censored(x, delta);
  std::vector<int> ev(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) ev[i] = of_censoring ? 1 - delta[i] : delta[i];
  const auto idx = order_by_time(x, ev);

  const double xmax = *std::max_element(x.begin(), x.end());
  if (!(xmax > 0.0)) throw std::invalid_argument("degenerate censored sample: all times zero");

  std::vector<double> bp, val;
  double survival = 1.0;
  double risk = static_cast<double>(x.size());
  std::size_t pos = 0;
  while (pos < idx.size()) {
    const double t = x[idx[pos]];
    std::size_t events = 0, total = 0;
    while (pos + total < idx.size() && x[idx[pos + total]] == t) {
      if (ev[idx[pos + total]] == 1) ++events;
      ++total;
    }
    if (events > 0) {
      survival *= 1.0 - static_cast<double>(events) / risk;
      const double dist = 1.0 - survival;
      if (t > 0.0) {
        bp.push_back(t);
        val.push_back(dist);
      }
    }
    risk -= static_cast<double>(total);
    pos += total;
  }
  // Leftover mass goes to the largest observation so the estimate is proper.
  if (survival > 0.0) {
    if (!bp.empty() && bp.back() == xmax) {
      val.back() = 1.0;
    } else {
      bp.push_back(xmax);
      val.push_back(1.0);
    }
  }
  return CumulativeProcess(Interval{0.0, xmax}, std::move(bp), std::move(val));
}

CumulativeProcess pool(const std::vector<CumulativeProcess>& processes, const GroupWeights& w) {
  if (processes.empty()) throw std::invalid_argument("nothing to pool");
  if (processes.size() != w.group_count()) {
    throw std::invalid_argument("weight count must match process count");
  }
  const Interval dom = processes.front().domain();
  for (const auto& p : processes) {
    if (p.domain().a != dom.a || p.domain().b != dom.b) {
      throw std::invalid_argument("pooled processes must share a domain");
    }
  }

  std::vector<double> merged;
  std::size_t total_bp = 0;
  for (const auto& p : processes) total_bp += p.breakpoints().size();
  merged.reserve(total_bp);
  for (const auto& p : processes) {
    merged.insert(merged.end(), p.breakpoints().begin(), p.breakpoints().end());
  }
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  double base = 0.0;
  for (std::size_t j = 0; j < processes.size(); ++j) base += w.c[j] * processes[j].base_value();

  // Walk each process once across the merged grid.
  std::vector<std::size_t> cursor(processes.size(), 0);
  std::vector<double> current(processes.size());
  for (std::size_t j = 0; j < processes.size(); ++j) current[j] = processes[j].base_value();

  std::vector<double> values;
  values.reserve(merged.size());
  for (double t : merged) {
    double v = 0.0;
    for (std::size_t j = 0; j < processes.size(); ++j) {
      const auto& bp = processes[j].breakpoints();
      auto& k = cursor[j];
      while (k < bp.size() && bp[k] <= t) {
        current[j] = processes[j].values()[k];
        ++k;
      }
      v += w.c[j] * current[j];
    }
    values.push_back(v);
  }
  return CumulativeProcess(dom, std::move(merged), std::move(values), base);
}

}  // namespace monotest
