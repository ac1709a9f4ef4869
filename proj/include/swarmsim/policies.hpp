#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swarmsim/chunk_set.hpp"
#include "swarmsim/swarm_state.hpp"

namespace swarmsim {

using Rng = std::mt19937_64;

enum class PolicyKind {
  Random,
  RarestFirst,
  RareChunk,
  CommonChunk,
  GroupSuppression,
  ModeSuppression,
  DistributedMS,
  EwmaMS,
};

// Which peer's chunks must be "common" (seen at least twice among the three
// samples) before a common-chunk downloader takes its last chunk.
enum class CommonChunkVariant { Downloader, Source };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);  // throws std::invalid_argument
std::string_view to_string(CommonChunkVariant v);
CommonChunkVariant cc_variant_from_string(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Random;
  int threshold = 1;       // T, mode-suppression only
  double alpha = 0.1;      // EWMA weight
  int sample_peers = 1;    // 1 or 3: how many peers' chunk sets a download may draw from
  CommonChunkVariant cc_variant = CommonChunkVariant::Downloader;

  void validate() const;
  bool operator==(const PolicyConfig&) const = default;
};

// Per-peer EWMA estimate of marginal chunk frequencies.
struct EwmaEstimate {
  std::vector<double> pi;
  std::uint64_t ticks = 0;

  explicit EwmaEstimate(int m = 0) : pi(static_cast<std::size_t>(m), 0.0) {}
};

void ewma_update_inplace(EwmaEstimate& est, ChunkSet observed, double alpha);
EwmaEstimate ewma_update(EwmaEstimate est, ChunkSet observed, double alpha);

struct ContactContext {
  int m = 0;
  ChunkSet dest;                          // downloader's profile (proper subset)
  std::span<const ChunkSet> sources;      // chunk sets a transfer may draw from; {[m]} on a seed push
  std::span<const ChunkSet> samples;      // sampled peer profiles for local statistics
  const FrequencySnapshot* snapshot = nullptr;
  const std::map<ChunkSet, Count>* histogram = nullptr;
  bool seed_push = false;
};

struct Decision {
  static constexpr int kNone = -1;
  int chunk = kNone;

  static Decision none() { return {}; }
  static Decision transfer(int j) { return {j}; }
  bool is_transfer() const { return chunk != kNone; }
  bool operator==(const Decision&) const = default;
};

// Uniform draw over a set; NoTransfer when empty.
Decision pick_uniform(ChunkSet candidates, Rng& rng);

ChunkSet union_of(std::span<const ChunkSet> profiles);

Decision select_random(const ContactContext& ctx, Rng& rng);
Decision select_rarest_first(const ContactContext& ctx, Rng& rng);
Decision select_mode_suppression(const ContactContext& ctx, int threshold, Rng& rng);
Decision select_rare_chunk(const ContactContext& ctx, Rng& rng);
Decision select_common_chunk(const ContactContext& ctx, Rng& rng,
                             CommonChunkVariant variant = CommonChunkVariant::Downloader);
Decision select_group_suppression(const ContactContext& ctx, Rng& rng);
Decision select_dms(const ContactContext& ctx, Rng& rng);
// `est` must already include this contact's observation.
Decision select_ewma_ms(const ContactContext& ctx, const EwmaEstimate& est, Rng& rng);

// Local-mode suppressed set from sampled profiles (DMS).
ChunkSet dms_suppressed_set(std::span<const ChunkSet> samples, int m);
// Suppressed set from an EWMA estimate.
ChunkSet ewma_suppressed_set(const EwmaEstimate& est);

Decision select(const PolicyConfig& config, const ContactContext& ctx, const EwmaEstimate* est, Rng& rng);

// How many peers a downloader with profile `dest` samples on its own tick.
int peer_samples_needed(const PolicyConfig& config, ChunkSet dest, int m);
// How many peers the seed samples for statistics on a push (DMS only).
int seed_samples_needed(const PolicyConfig& config);
bool needs_global_snapshot(PolicyKind kind);

}  // namespace swarmsim
