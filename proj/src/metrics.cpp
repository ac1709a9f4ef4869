#include "swarmsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace swarmsim {

namespace {

SojournStats summarize(const std::vector<double>& v) {
  SojournStats s;
  s.count = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  s.min = v.front();
  s.max = v.front();
  for (double w : v) {
    sum += w;
    s.min = std::min(s.min, w);
    s.max = std::max(s.max, w);
  }
  s.mean = sum / double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double w : v) ss += (w - s.mean) * (w - s.mean);
    s.stddev = std::sqrt(ss / double(v.size() - 1));
  }
  return s;
}

void append_sojourns(const EventTrace& trace, std::size_t warmup, std::vector<double>& out) {
  for (std::size_t i = warmup; i < trace.departures.size(); ++i) out.push_back(trace.departures[i].sojourn());
}

}  // namespace

SojournStats sojourn_stats(const EventTrace& trace, std::size_t warmup_departures) {
  std::vector<double> v;
  append_sojourns(trace, warmup_departures, v);
  return summarize(v);
}

SojournStats pooled_sojourn_stats(std::span<const EventTrace> traces, std::size_t warmup_departures) {
  std::vector<double> v;
  for (const auto& t : traces) append_sojourns(t, warmup_departures, v);
  return summarize(v);
}

ReplicationMeans replication_means(std::span<const EventTrace> traces, std::size_t warmup_departures) {
  ReplicationMeans r;
  for (const auto& t : traces) {
    const SojournStats s = sojourn_stats(t, warmup_departures);
    if (s.defined()) r.means.push_back(s.mean);
  }
  const SojournStats agg = summarize(r.means);
  r.mean = agg.mean;
  r.stddev = agg.stddev;
  r.standard_error = r.means.empty() ? 0.0 : agg.stddev / std::sqrt(double(r.means.size()));
  return r;
}

double frequency_gap(const TimeSample& s) {
  if (s.pi.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(s.pi.begin(), s.pi.end());
  return *hi - *lo;
}

std::optional<double> stabilization_time(const EventTrace& trace, double epsilon) {
  for (const auto& s : trace.samples)
    if (frequency_gap(s) <= epsilon) return s.time;
  return std::nullopt;
}

PopulationSummary population_summary(std::span<const EventTrace> traces) {
  PopulationSummary out;
  if (traces.empty()) return out;
  const double dt = traces.front().sample_interval;
  std::size_t longest = 0;
  for (const auto& t : traces) {
    if (t.sample_interval != dt) throw std::invalid_argument("traces use different sample intervals");
    if (!t.samples.empty() && t.samples.front().time != traces.front().samples.front().time)
      throw std::invalid_argument("traces start on different grids");
    longest = std::max(longest, t.samples.size());
  }
  for (std::size_t k = 0; k < longest; ++k) {
    double sum = 0.0, mx = 0.0, time = 0.0;
    int n = 0;
    for (const auto& t : traces) {
      if (k >= t.samples.size()) continue;
      const auto p = double(t.samples[k].population);
      time = t.samples[k].time;
      sum += p;
      mx = n == 0 ? p : std::max(mx, p);
      ++n;
    }
    out.time.push_back(time);
    out.mean.push_back(sum / n);
    out.max.push_back(mx);
    out.traces.push_back(n);
  }
  return out;
}

TrendTest linear_trend(std::span<const double> x, std::span<const double> y) {
  TrendTest r;
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 3) return r;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return r;
  r.slope = sxy / sxx;
  const double intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (intercept + r.slope * x[i]);
    sse += e * e;
  }
  r.degrees_of_freedom = static_cast<int>(n) - 2;
  r.standard_error = std::sqrt(sse / r.degrees_of_freedom / sxx);
  r.valid = true;
  if (r.standard_error == 0.0) {
    r.t_statistic = r.slope > 0 ? INFINITY : (r.slope < 0 ? -INFINITY : 0.0);
    r.p_positive = r.slope > 0 ? 0.0 : 1.0;
    return r;
  }
  r.t_statistic = r.slope / r.standard_error;
  const boost::math::students_t dist(r.degrees_of_freedom);
  r.p_positive = boost::math::cdf(boost::math::complement(dist, r.t_statistic));
  return r;
}

TrendTest population_trend(const EventTrace& trace, double burn_in_fraction, int batches) {
  const auto& s = trace.samples;
  const auto start = static_cast<std::size_t>(std::floor(double(s.size()) * burn_in_fraction));
  const std::size_t n = s.size() - std::min(start, s.size());
  std::vector<double> x, y;
  if (batches <= 0 || n < static_cast<std::size_t>(batches) * 2) {
    for (std::size_t i = start; i < s.size(); ++i) {
      x.push_back(s[i].time);
      y.push_back(double(s[i].population));
    }
    return linear_trend(x, y);
  }
  const std::size_t per = n / static_cast<std::size_t>(batches);
  for (int b = 0; b < batches; ++b) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
      const auto& smp = s[start + static_cast<std::size_t>(b) * per + i];
      sx += smp.time;
      sy += double(smp.population);
    }
    x.push_back(sx / double(per));
    y.push_back(sy / double(per));
  }
  return linear_trend(x, y);
}

}  // namespace swarmsim
