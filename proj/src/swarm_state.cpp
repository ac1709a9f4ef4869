#include "swarmsim/swarm_state.hpp"

#include <algorithm>
#include <cmath>

namespace swarmsim {

void ModelParams::validate() const {
  if (m < 2 || m > kMaxChunks) throw std::invalid_argument("m: must be in [2, 64]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda: must be > 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu: must be > 0");
  if (!(u > 0.0) || !std::isfinite(u)) throw std::invalid_argument("u: must be > 0");
}

SwarmState::SwarmState(int m) : m_(m), holders_(static_cast<std::size_t>(m), 0) {
  if (m < 1 || m > kMaxChunks) throw std::invalid_argument("m: must be in [1, 64]");
}

Count SwarmState::count(ChunkSet profile) const {
  auto it = counts_.find(profile);
  return it == counts_.end() ? 0 : it->second;
}

void SwarmState::add(ChunkSet profile, Count n) {
  if (n < 0) throw std::invalid_argument("negative count");
  if (n == 0) return;
  if (!profile.is_subset_of(ChunkSet::full(m_)) || profile == ChunkSet::full(m_))
    throw InvalidTransition("profile " + profile.to_string() + " is not a proper subset of [m]");
  counts_[profile] += n;
  population_ += n;
  for (ChunkSet::word_type b = profile.bits(); b != 0; b &= b - 1) holders_[std::countr_zero(b)] += n;
}

void SwarmState::remove(ChunkSet profile, Count n) {
  auto it = counts_.find(profile);
  if (it == counts_.end() || it->second < n)
    throw InvalidTransition("no peer with profile " + profile.to_string() + " to remove");
  it->second -= n;
  if (it->second == 0) counts_.erase(it);
  population_ -= n;
  for (ChunkSet::word_type b = profile.bits(); b != 0; b &= b - 1) holders_[std::countr_zero(b)] -= n;
}

void SwarmState::check_consistency() const {
  Count pop = 0;
  std::vector<Count> y(static_cast<std::size_t>(m_), 0);
  for (const auto& [s, c] : counts_) {
    if (c <= 0) throw std::logic_error("non-positive count stored");
    if (s == ChunkSet::full(m_)) throw std::logic_error("full profile stored");
    pop += c;
    for (int j : s.members()) y[j] += c;
  }
  if (pop != population_) throw std::logic_error("population cache mismatch");
  if (y != holders_) throw std::logic_error("holder cache mismatch");
}

std::string SwarmState::to_string() const {
  std::string out;
  for (const auto& [s, c] : counts_) {
    if (!out.empty()) out += ' ';
    out += s.to_string() + ':' + std::to_string(c);
  }
  return out.empty() ? "empty" : out;
}

FrequencySnapshot frequency_snapshot(const std::vector<Count>& y, Count population) {
  FrequencySnapshot snap;
  snap.y = y;
  snap.population = population;
  snap.pi.resize(y.size(), 0.0);
  if (y.empty()) return snap;
  snap.y_max = *std::max_element(y.begin(), y.end());
  snap.y_min = *std::min_element(y.begin(), y.end());
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (population > 0) snap.pi[j] = double(y[j]) / double(population);
    if (y[j] == snap.y_max) snap.mode_set.insert(static_cast<int>(j));
    snap.total_chunks += y[j];
  }
  return snap;
}

FrequencySnapshot frequency_snapshot(const SwarmState& state) {
  return frequency_snapshot(state.holders(), state.population());
}

ChunkSet suppressed_set_ms(const FrequencySnapshot& snap, int threshold) {
  if (threshold < 1) throw std::invalid_argument("T: must be >= 1");
  // All modes share y_max, so D_T is either every mode or nothing.
  if (snap.y_max >= snap.y_min + threshold) return snap.mode_set;
  return {};
}

ChunkSet suppressed_set_ms(const SwarmState& state, int threshold) {
  return suppressed_set_ms(frequency_snapshot(state), threshold);
}

void apply_transition_inplace(SwarmState& state, const Transition& t) {
  const int m = state.m();
  switch (t.kind) {
    case Transition::Kind::Arrival:
      state.add(ChunkSet{});
      return;
    case Transition::Kind::Transfer:
    case Transition::Kind::Departure: {
      if (t.chunk < 0 || t.chunk >= m) throw InvalidTransition("chunk index out of range");
      if (t.profile.contains(t.chunk))
        throw InvalidTransition("chunk " + std::to_string(t.chunk + 1) + " already in " + t.profile.to_string());
      const bool completes = t.profile.size() == m - 1;
      if (completes != (t.kind == Transition::Kind::Departure))
        throw InvalidTransition("transition kind does not match profile size " + t.profile.to_string());
      if (state.count(t.profile) <= 0)
        throw InvalidTransition("no peer with profile " + t.profile.to_string());
      state.remove(t.profile);
      if (!completes) {
        ChunkSet next = t.profile;
        next.insert(t.chunk);
        state.add(next);
      }
      return;
    }
  }
}

SwarmState apply_transition(SwarmState state, const Transition& t) {
  apply_transition_inplace(state, t);
  return state;
}

}  // namespace swarmsim
