#pragma once

#include <optional>
#include <span>
#include <vector>

#include "swarmsim/engine.hpp"

namespace swarmsim {

struct SojournStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;

  // false when no departure survived the warm-up cut
  bool defined() const { return count > 0; }
};

// Statistics over departures after the first `warmup_departures`, in departure order.
SojournStats sojourn_stats(const EventTrace& trace, std::size_t warmup_departures);
// Pools the post-warm-up sojourns of every trace.
SojournStats pooled_sojourn_stats(std::span<const EventTrace> traces, std::size_t warmup_departures);

// Mean and spread of the per-replication mean sojourns.
struct ReplicationMeans {
  std::vector<double> means;
  double mean = 0.0;
  double stddev = 0.0;
  double standard_error = 0.0;
};
ReplicationMeans replication_means(std::span<const EventTrace> traces, std::size_t warmup_departures);

double frequency_gap(const TimeSample& s);

// First sampled time at which max_j pi_j - min_j pi_j <= epsilon.
std::optional<double> stabilization_time(const EventTrace& trace, double epsilon = 0.05);

struct PopulationSummary {
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<double> max;
  std::vector<int> traces;  // how many traces still had a sample at this time
};

// Pointwise mean/max across replications; throws std::invalid_argument on mismatched grids.
PopulationSummary population_summary(std::span<const EventTrace> traces);

// Least-squares trend of population against time on batch means, after
// discarding the first `burn_in_fraction` of the samples. Batching absorbs
// the short-range autocorrelation of the population process.
struct TrendTest {
  double slope = 0.0;
  double standard_error = 0.0;
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_positive = 1.0;  // one-sided p-value for H1: slope > 0
  bool valid = false;
};

TrendTest population_trend(const EventTrace& trace, double burn_in_fraction = 0.5, int batches = 10);
TrendTest linear_trend(std::span<const double> x, std::span<const double> y);

}  // namespace swarmsim
