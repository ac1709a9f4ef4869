#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "swarmsim/policies.hpp"
#include "swarmsim/swarm_state.hpp"

namespace swarmsim {

struct InitialCondition {
  enum class Kind { Empty, OneClub };
  Kind kind = Kind::Empty;
  Count n = 0;

  bool operator==(const InitialCondition&) const = default;
};

struct Scenario {
  ModelParams params;
  PolicyConfig policy;
  InitialCondition initial;
  double horizon = 100.0;
  Count max_population = 0;  // 0 selects the default cap
  std::uint64_t rng_seed = 1;
  Count warmup_departures = 2000;
  double sample_interval = 1.0;

  void validate() const;
  // 10 x initial population + 5000 unless set explicitly
  Count population_cap() const;
  SwarmState initial_state() const;

  bool operator==(const Scenario&) const = default;
};

enum class Termination { HorizonReached, PopulationCapHit };

struct TimeSample {
  double time = 0.0;
  Count population = 0;
  std::vector<double> pi;

  bool operator==(const TimeSample&) const = default;
};

struct DepartureRecord {
  double arrival_time = 0.0;
  double departure_time = 0.0;
  double sojourn() const { return departure_time - arrival_time; }

  bool operator==(const DepartureRecord&) const = default;
};

struct EventTrace {
  int m = 0;
  double sample_interval = 1.0;
  std::vector<TimeSample> samples;
  std::vector<DepartureRecord> departures;
  Termination termination = Termination::HorizonReached;
  double end_time = 0.0;
  std::uint64_t events = 0;

  bool operator==(const EventTrace&) const = default;
};

enum class EventKind { None, Arrival, SeedTick, PeerTick };

struct StepResult {
  double elapsed = 0.0;
  EventKind event = EventKind::None;
  std::optional<Transition> transition;
  std::optional<DepartureRecord> departure;
};

// Gillespie-style race over the superposed arrival, seed and peer clocks.
// Total rate lambda + U*1{|x|>0} + mu*|x|; the event type is drawn in
// proportion to its share of that rate.
class Simulator {
 public:
  Simulator(ModelParams params, PolicyConfig policy, std::uint64_t seed);

  // Replaces the swarm; every peer gets arrival time `now`.
  void reset(const SwarmState& initial, double now = 0.0);
  // Arrivals are blocked while |x| >= limit (truncated-chain comparisons).
  void set_arrival_limit(std::optional<Count> limit) { arrival_limit_ = limit; }

  double total_rate() const;
  // Advances to the next event. If it would fall after `time_limit`, the
  // clock stops at `time_limit` and nothing happens (memorylessness keeps this exact).
  StepResult step(double time_limit = std::numeric_limits<double>::infinity());

  // Two-phase form of step(): advance() moves the clock to the next event
  // time (or to `time_limit`, returning false); fire() then executes the
  // pending event. Lets callers observe the pre-event state at the new time.
  bool advance(double time_limit = std::numeric_limits<double>::infinity());
  StepResult fire();

  const SwarmState& state() const { return state_; }
  double now() const { return now_; }
  Count population() const { return state_.population(); }

 private:
  struct Peer {
    ChunkSet profile;
    double arrival = 0.0;
    EwmaEstimate estimate;
  };

  bool arrivals_enabled() const;
  // Up to k distinct uniformly chosen peer indices.
  int sample_peers(int k, std::array<std::size_t, 3>& out);
  Decision decide(std::size_t dest, bool seed_push);
  void deliver(std::size_t dest, int chunk, StepResult& result);

  ModelParams params_;
  PolicyConfig policy_;
  Rng rng_;
  SwarmState state_;
  std::vector<Peer> peers_;
  double now_ = 0.0;
  double pending_elapsed_ = 0.0;
  bool pending_ = false;
  std::optional<Count> arrival_limit_;
};

EventTrace run(const Scenario& scenario);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Replication i runs with derive_seed(rng_seed, i). OpenMP-parallel over replications.
std::vector<EventTrace> run_replications(const Scenario& scenario, int n_reps);
// Sequential reference used to check the parallel path.
std::vector<EventTrace> run_replications_serial(const Scenario& scenario, int n_reps);

}  // namespace swarmsim
