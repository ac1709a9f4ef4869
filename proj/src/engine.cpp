#include "swarmsim/engine.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace swarmsim {

void Scenario::validate() const {
  params.validate();
  policy.validate();
  if (initial.n < 0) throw std::invalid_argument("initial.n: must be >= 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon: must be > 0");
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
    throw std::invalid_argument("sample_interval: must be > 0");
  if (max_population < 0) throw std::invalid_argument("max_population: must be >= 0 (0 = default)");
  if (max_population > 0 && max_population <= initial.n)
    throw std::invalid_argument("max_population: must exceed the initial population");
  if (warmup_departures < 0) throw std::invalid_argument("warmup_departures: must be >= 0");
}

Count Scenario::population_cap() const { return max_population > 0 ? max_population : 10 * initial.n + 5000; }

SwarmState Scenario::initial_state() const {
  SwarmState s(params.m);
  if (initial.kind == InitialCondition::Kind::Empty) {
    s.add(ChunkSet{}, initial.n);
  } else {
    ChunkSet club = ChunkSet::full(params.m);
    club.erase(0);
    s.add(club, initial.n);
  }
  return s;
}

Simulator::Simulator(ModelParams params, PolicyConfig policy, std::uint64_t seed)
    : params_(params), policy_(policy), rng_(seed), state_(params.m) {
  params_.validate();
  policy_.validate();
}

void Simulator::reset(const SwarmState& initial, double now) {
  if (initial.m() != params_.m) throw std::invalid_argument("initial state has the wrong chunk count");
  state_ = initial;
  now_ = now;
  pending_ = false;
  peers_.clear();
  peers_.reserve(static_cast<std::size_t>(initial.population()));
  const int est_size = policy_.kind == PolicyKind::EwmaMS ? params_.m : 0;
  for (const auto& [profile, n] : initial.counts())
    for (Count i = 0; i < n; ++i) peers_.push_back({profile, now, EwmaEstimate(est_size)});
}

bool Simulator::arrivals_enabled() const {
  return !arrival_limit_ || state_.population() < *arrival_limit_;
}

double Simulator::total_rate() const {
  const auto pop = static_cast<double>(state_.population());
  return (arrivals_enabled() ? params_.lambda : 0.0) + (pop > 0 ? params_.u : 0.0) + params_.mu * pop;
}

bool Simulator::advance(double time_limit) {
  const double rate = total_rate();
  if (rate <= 0.0) throw std::logic_error("no event can occur: total rate is zero");
  const double dt = std::exponential_distribution<double>(rate)(rng_);
  if (now_ + dt > time_limit) {
    pending_elapsed_ = time_limit - now_;
    now_ = time_limit;
    pending_ = false;
    return false;
  }
  now_ += dt;
  pending_elapsed_ = dt;
  pending_ = true;
  return true;
}

StepResult Simulator::step(double time_limit) {
  if (!advance(time_limit)) return {pending_elapsed_, EventKind::None, {}, {}};
  return fire();
}

int Simulator::sample_peers(int k, std::array<std::size_t, 3>& out) {
  const std::size_t n = peers_.size();
  if (static_cast<std::size_t>(k) >= n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return static_cast<int>(n);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int i = 0; i < k; ++i) {
    std::size_t c;
    bool fresh;
    do {
      c = pick(rng_);
      fresh = true;
      for (int p = 0; p < i; ++p) fresh = fresh && out[p] != c;
    } while (!fresh);
    out[i] = c;
  }
  return k;
}

Decision Simulator::decide(std::size_t dest, bool seed_push) {
  const int m = params_.m;
  Peer& peer = peers_[dest];
  std::array<std::size_t, 3> idx{};
  std::array<ChunkSet, 3> sampled{};
  const int want = seed_push ? seed_samples_needed(policy_) : peer_samples_needed(policy_, peer.profile, m);
  const int got = want > 0 ? sample_peers(want, idx) : 0;
  for (int i = 0; i < got; ++i) sampled[i] = peers_[idx[i]].profile;

  const ChunkSet seed_profile = ChunkSet::full(m);
  ContactContext ctx;
  ctx.m = m;
  ctx.dest = peer.profile;
  ctx.seed_push = seed_push;
  ctx.samples = std::span<const ChunkSet>(sampled.data(), static_cast<std::size_t>(got));
  ctx.sources = seed_push ? std::span<const ChunkSet>(&seed_profile, 1) : ctx.samples;

  FrequencySnapshot snap;
  if (needs_global_snapshot(policy_.kind)) {
    snap = frequency_snapshot(state_);
    ctx.snapshot = &snap;
  }
  if (policy_.kind == PolicyKind::GroupSuppression) ctx.histogram = &state_.counts();

  const EwmaEstimate* est = nullptr;
  if (policy_.kind == PolicyKind::EwmaMS && !seed_push) {
    for (int i = 0; i < got; ++i) ewma_update_inplace(peer.estimate, sampled[i], policy_.alpha);
    est = &peer.estimate;
  }
  return select(policy_, ctx, est, rng_);
}

void Simulator::deliver(std::size_t dest, int chunk, StepResult& result) {
  Peer& peer = peers_[dest];
  const Transition t = Transition::receive(peer.profile, chunk, params_.m);
  apply_transition_inplace(state_, t);
  result.transition = t;
  if (t.kind == Transition::Kind::Departure) {
    result.departure = DepartureRecord{peer.arrival, now_};
    if (dest + 1 != peers_.size()) peers_[dest] = std::move(peers_.back());
    peers_.pop_back();
  } else {
    peer.profile.insert(chunk);
  }
}

StepResult Simulator::fire() {
  if (!pending_) throw std::logic_error("fire() called without a pending event");
  pending_ = false;
  StepResult result;
  result.elapsed = pending_elapsed_;

  const double pop = static_cast<double>(state_.population());
  const double arrival_rate = arrivals_enabled() ? params_.lambda : 0.0;
  const double seed_rate = pop > 0 ? params_.u : 0.0;
  const double total = arrival_rate + seed_rate + params_.mu * pop;
  const double draw = std::uniform_real_distribution<double>(0.0, total)(rng_);

  if (draw < arrival_rate || peers_.empty()) {
    result.event = EventKind::Arrival;
    const Transition t = Transition::arrival();
    apply_transition_inplace(state_, t);
    peers_.push_back({ChunkSet{}, now_, EwmaEstimate(policy_.kind == PolicyKind::EwmaMS ? params_.m : 0)});
    result.transition = t;
    return result;
  }

  const bool seed_push = draw < arrival_rate + seed_rate;
  result.event = seed_push ? EventKind::SeedTick : EventKind::PeerTick;
  const std::size_t dest = std::uniform_int_distribution<std::size_t>(0, peers_.size() - 1)(rng_);
  const Decision d = decide(dest, seed_push);
  if (d.is_transfer()) deliver(dest, d.chunk, result);

#ifndef NDEBUG
  state_.check_consistency();
#endif
  return result;
}

EventTrace run(const Scenario& scenario) {
  scenario.validate();
  Simulator sim(scenario.params, scenario.policy, scenario.rng_seed);
  sim.reset(scenario.initial_state());

  EventTrace trace;
  trace.m = scenario.params.m;
  trace.sample_interval = scenario.sample_interval;
  const Count cap = scenario.population_cap();
  const auto last_k = static_cast<std::int64_t>(std::floor(scenario.horizon / scenario.sample_interval + 1e-9));
  std::int64_t next_k = 0;

  // Records every grid point strictly before `t` (or up to and including it when `inclusive`).
  auto record_until = [&](double t, bool inclusive) {
    while (next_k <= last_k) {
      const double gt = static_cast<double>(next_k) * scenario.sample_interval;
      if (inclusive ? gt > t : gt >= t) break;
      const FrequencySnapshot snap = frequency_snapshot(sim.state());
      trace.samples.push_back({gt, snap.population, snap.pi});
      ++next_k;
    }
  };

  record_until(0.0, true);
  trace.termination = Termination::HorizonReached;
  while (true) {
    if (sim.population() >= cap) {
      trace.termination = Termination::PopulationCapHit;
      break;
    }
    if (!sim.advance(scenario.horizon)) {
      record_until(scenario.horizon, true);
      break;
    }
    record_until(sim.now(), false);
    StepResult r = sim.fire();
    ++trace.events;
    if (r.departure) trace.departures.push_back(*r.departure);
  }
  trace.end_time = sim.now();
  return trace;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over (base, index)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {
Scenario replication_scenario(const Scenario& s, int i) {
  Scenario r = s;
  r.rng_seed = derive_seed(s.rng_seed, static_cast<std::uint64_t>(i));
  return r;
}
}  // namespace

std::vector<EventTrace> run_replications(const Scenario& scenario, int n_reps) {
  if (n_reps < 1) throw std::invalid_argument("replications: must be >= 1");
  scenario.validate();
  std::vector<EventTrace> traces(static_cast<std::size_t>(n_reps));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_reps; ++i) traces[static_cast<std::size_t>(i)] = run(replication_scenario(scenario, i));
  return traces;
}

std::vector<EventTrace> run_replications_serial(const Scenario& scenario, int n_reps) {
  if (n_reps < 1) throw std::invalid_argument("replications: must be >= 1");
  std::vector<EventTrace> traces;
  traces.reserve(static_cast<std::size_t>(n_reps));
  for (int i = 0; i < n_reps; ++i) traces.push_back(run(replication_scenario(scenario, i)));
  return traces;
}

}  // namespace swarmsim
