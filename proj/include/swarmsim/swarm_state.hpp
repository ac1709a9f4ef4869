#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmsim/chunk_set.hpp"

namespace swarmsim {

using Count = std::int64_t;

struct ModelParams {
  int m = 5;             // chunks per file
  double lambda = 1.0;   // peer arrival rate
  double mu = 1.0;       // per-peer contact rate
  double u = 1.0;        // seed contact rate

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

class InvalidTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The CTMC state x = (x_S): peer counts per proper-subset profile.
// Zero-count profiles are never stored. Per-chunk holder counts y_j are
// maintained incrementally.
class SwarmState {
 public:
  explicit SwarmState(int m = 2);

  int m() const { return m_; }
  Count population() const { return population_; }
  Count count(ChunkSet profile) const;
  const std::map<ChunkSet, Count>& counts() const { return counts_; }
  // y_j for j in [0, m)
  const std::vector<Count>& holders() const { return holders_; }

  void add(ChunkSet profile, Count n = 1);
  void remove(ChunkSet profile, Count n = 1);

  // Recomputes population and y from the counts; throws std::logic_error on mismatch.
  void check_consistency() const;

  bool operator==(const SwarmState& o) const { return m_ == o.m_ && counts_ == o.counts_; }
  bool operator<(const SwarmState& o) const { return counts_ < o.counts_; }

  // "{}:3 {1}:2" with 1-based chunk indices, empty string for the empty state
  std::string to_string() const;

 private:
  int m_;
  Count population_ = 0;
  std::map<ChunkSet, Count> counts_;
  std::vector<Count> holders_;
};

struct FrequencySnapshot {
  std::vector<Count> y;
  std::vector<double> pi;
  Count y_max = 0;
  Count y_min = 0;
  ChunkSet mode_set;
  Count total_chunks = 0;  // r(x)
  Count population = 0;

  double pi_max() const { return population > 0 ? double(y_max) / double(population) : 0.0; }
  double pi_min() const { return population > 0 ? double(y_min) / double(population) : 0.0; }
};

FrequencySnapshot frequency_snapshot(const SwarmState& state);
// Builds a snapshot from raw holder counts (used when only y is known).
FrequencySnapshot frequency_snapshot(const std::vector<Count>& y, Count population);

// D_T(x): modes whose holder count is at least T above the least-held chunk.
ChunkSet suppressed_set_ms(const FrequencySnapshot& snap, int threshold);
ChunkSet suppressed_set_ms(const SwarmState& state, int threshold);

// A(x,B,S) = B \ (S u D)
constexpr ChunkSet allowable_set(ChunkSet source, ChunkSet dest, ChunkSet suppressed) {
  return source - (dest | suppressed);
}

struct Transition {
  enum class Kind { Arrival, Transfer, Departure };
  Kind kind = Kind::Arrival;
  ChunkSet profile;  // receiving peer's profile before the transfer
  int chunk = -1;

  static Transition arrival() { return {}; }
  static Transition transfer(ChunkSet s, int j) { return {Kind::Transfer, s, j}; }
  static Transition departure(ChunkSet s, int j) { return {Kind::Departure, s, j}; }
  // Transfer or Departure depending on whether j completes the file.
  static Transition receive(ChunkSet s, int j, int m) {
    return s.size() == m - 1 ? departure(s, j) : transfer(s, j);
  }

  bool operator==(const Transition&) const = default;
};

// In-place variant used on hot paths.
void apply_transition_inplace(SwarmState& state, const Transition& t);
SwarmState apply_transition(SwarmState state, const Transition& t);

}  // namespace swarmsim
