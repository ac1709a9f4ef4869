#include "swarmsim/policies.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace swarmsim {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 8> kPolicyNames{{
    {PolicyKind::Random, "random"},
    {PolicyKind::RarestFirst, "rarest_first"},
    {PolicyKind::RareChunk, "rare_chunk"},
    {PolicyKind::CommonChunk, "common_chunk"},
    {PolicyKind::GroupSuppression, "group_suppression"},
    {PolicyKind::ModeSuppression, "mode_suppression"},
    {PolicyKind::DistributedMS, "distributed_ms"},
    {PolicyKind::EwmaMS, "ewma_ms"},
}};

// Number of sampled profiles holding each chunk.
std::array<int, kMaxChunks> sample_counts(std::span<const ChunkSet> samples, int m) {
  std::array<int, kMaxChunks> c{};
  for (ChunkSet s : samples)
    for (int j = 0; j < m; ++j) c[j] += s.contains(j) ? 1 : 0;
  return c;
}

Decision seed_uniform_push(const ContactContext& ctx, Rng& rng) {
  return pick_uniform(ChunkSet::full(ctx.m) - ctx.dest, rng);
}

ChunkSet candidates(const ContactContext& ctx) { return union_of(ctx.sources) - ctx.dest; }

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames)
    if (k == kind) return name;
  return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown policy kind '" + std::string(name) + "'");
}

std::string_view to_string(CommonChunkVariant v) {
  return v == CommonChunkVariant::Downloader ? "downloader" : "source";
}

CommonChunkVariant cc_variant_from_string(std::string_view name) {
  if (name == "downloader") return CommonChunkVariant::Downloader;
  if (name == "source") return CommonChunkVariant::Source;
  throw std::invalid_argument("unknown common-chunk variant '" + std::string(name) + "'");
}

void PolicyConfig::validate() const {
  if (kind == PolicyKind::ModeSuppression && threshold < 1)
    throw std::invalid_argument("policy.T: must be >= 1");
  if (kind == PolicyKind::EwmaMS && !(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("policy.alpha: must be in (0, 1]");
  if (sample_peers != 1 && sample_peers != 3)
    throw std::invalid_argument("policy.sample_peers: must be 1 or 3");
}

void ewma_update_inplace(EwmaEstimate& est, ChunkSet observed, double alpha) {
  for (std::size_t j = 0; j < est.pi.size(); ++j)
    est.pi[j] = (1.0 - alpha) * est.pi[j] + (observed.contains(static_cast<int>(j)) ? alpha : 0.0);
  ++est.ticks;
}

EwmaEstimate ewma_update(EwmaEstimate est, ChunkSet observed, double alpha) {
  ewma_update_inplace(est, observed, alpha);
  return est;
}

Decision pick_uniform(ChunkSet candidates, Rng& rng) {
  const int n = candidates.size();
  if (n == 0) return Decision::none();
  if (n == 1) return Decision::transfer(candidates.nth(0));
  std::uniform_int_distribution<int> pick(0, n - 1);
  return Decision::transfer(candidates.nth(pick(rng)));
}

ChunkSet union_of(std::span<const ChunkSet> profiles) {
  ChunkSet u;
  for (ChunkSet s : profiles) u |= s;
  return u;
}

Decision select_random(const ContactContext& ctx, Rng& rng) { return pick_uniform(candidates(ctx), rng); }

Decision select_rarest_first(const ContactContext& ctx, Rng& rng) {
  if (ctx.snapshot == nullptr) throw std::invalid_argument("rarest-first needs a frequency snapshot");
  const ChunkSet cand = candidates(ctx);
  if (cand.empty()) return Decision::none();
  Count best = -1;
  ChunkSet rarest;
  for (int j : cand.members()) {
    const Count y = ctx.snapshot->y[j];
    if (best < 0 || y < best) {
      best = y;
      rarest = ChunkSet::single(j);
    } else if (y == best) {
      rarest.insert(j);
    }
  }
  return pick_uniform(rarest, rng);
}

Decision select_mode_suppression(const ContactContext& ctx, int threshold, Rng& rng) {
  if (ctx.snapshot == nullptr) throw std::invalid_argument("mode-suppression needs a frequency snapshot");
  const ChunkSet d = suppressed_set_ms(*ctx.snapshot, threshold);
  return pick_uniform(allowable_set(union_of(ctx.sources), ctx.dest, d), rng);
}

Decision select_rare_chunk(const ContactContext& ctx, Rng& rng) {
  if (ctx.seed_push) return seed_uniform_push(ctx, rng);
  const auto c = sample_counts(ctx.samples, ctx.m);
  ChunkSet rare;
  for (int j = 0; j < ctx.m; ++j)
    if (c[j] == 1 && !ctx.dest.contains(j)) rare.insert(j);
  return pick_uniform(rare, rng);
}

Decision select_common_chunk(const ContactContext& ctx, Rng& rng, CommonChunkVariant variant) {
  if (ctx.seed_push) return seed_uniform_push(ctx, rng);
  const int held = ctx.dest.size();
  if (held == 0) return select_rare_chunk(ctx, rng);
  if (held < ctx.m - 1) return select_random(ctx, rng);

  // One chunk left: take it only when the sample shows the relevant chunks as common.
  const int missing = (ChunkSet::full(ctx.m) - ctx.dest).nth(0);
  const auto c = sample_counts(ctx.samples, ctx.m);
  auto all_common = [&](ChunkSet s) {
    for (int j : s.members())
      if (j != missing && c[j] < 2) return false;
    return true;
  };
  if (variant == CommonChunkVariant::Downloader) {
    if (c[missing] >= 1 && all_common(ctx.dest)) return Decision::transfer(missing);
    return Decision::none();
  }
  for (ChunkSet s : ctx.samples)
    if (s.contains(missing) && all_common(s)) return Decision::transfer(missing);
  return Decision::none();
}

Decision select_group_suppression(const ContactContext& ctx, Rng& rng) {
  if (ctx.seed_push) return seed_uniform_push(ctx, rng);
  if (ctx.histogram == nullptr) throw std::invalid_argument("group suppression needs a profile histogram");
  Count largest = 0;
  for (const auto& [s, n] : *ctx.histogram) largest = std::max(largest, n);
  ChunkSet allowed_sources;
  for (ChunkSet src : ctx.sources) {
    auto it = ctx.histogram->find(src);
    const bool in_largest_group = it != ctx.histogram->end() && it->second == largest;
    if (in_largest_group && ctx.dest.size() < src.size()) continue;
    allowed_sources |= src;
  }
  return pick_uniform(allowed_sources - ctx.dest, rng);
}

ChunkSet dms_suppressed_set(std::span<const ChunkSet> samples, int m) {
  const auto c = sample_counts(samples, m);
  const int top = *std::max_element(c.begin(), c.begin() + m);
  ChunkSet modes;
  if (top > 1)
    for (int j = 0; j < m; ++j)
      if (c[j] == top) modes.insert(j);
  return modes == ChunkSet::full(m) ? ChunkSet{} : modes;
}

Decision select_dms(const ContactContext& ctx, Rng& rng) {
  const ChunkSet d = dms_suppressed_set(ctx.samples, ctx.m);
  const ChunkSet pool = ctx.seed_push ? ChunkSet::full(ctx.m) : union_of(ctx.samples);
  return pick_uniform(allowable_set(pool, ctx.dest, d), rng);
}

ChunkSet ewma_suppressed_set(const EwmaEstimate& est) {
  const int m = static_cast<int>(est.pi.size());
  if (m == 0) return {};
  const double top = *std::max_element(est.pi.begin(), est.pi.end());
  ChunkSet modes;
  for (int j = 0; j < m; ++j)
    if (est.pi[j] >= top) modes.insert(j);
  return modes == ChunkSet::full(m) ? ChunkSet{} : modes;
}

Decision select_ewma_ms(const ContactContext& ctx, const EwmaEstimate& est, Rng& rng) {
  if (ctx.seed_push) return seed_uniform_push(ctx, rng);
  return pick_uniform(allowable_set(union_of(ctx.sources), ctx.dest, ewma_suppressed_set(est)), rng);
}

Decision select(const PolicyConfig& config, const ContactContext& ctx, const EwmaEstimate* est, Rng& rng) {
  switch (config.kind) {
    case PolicyKind::Random:
      return select_random(ctx, rng);
    case PolicyKind::RarestFirst:
      return select_rarest_first(ctx, rng);
    case PolicyKind::RareChunk:
      return select_rare_chunk(ctx, rng);
    case PolicyKind::CommonChunk:
      return select_common_chunk(ctx, rng, config.cc_variant);
    case PolicyKind::GroupSuppression:
      return select_group_suppression(ctx, rng);
    case PolicyKind::ModeSuppression:
      return select_mode_suppression(ctx, config.threshold, rng);
    case PolicyKind::DistributedMS:
      return select_dms(ctx, rng);
    case PolicyKind::EwmaMS:
      if (ctx.seed_push) return select_ewma_ms(ctx, EwmaEstimate{}, rng);
      if (est == nullptr) throw std::invalid_argument("EWMA mode-suppression needs the downloader's estimate");
      return select_ewma_ms(ctx, *est, rng);
  }
  return Decision::none();
}

int peer_samples_needed(const PolicyConfig& config, ChunkSet dest, int m) {
  switch (config.kind) {
    case PolicyKind::RareChunk:
    case PolicyKind::DistributedMS:
      return 3;
    case PolicyKind::CommonChunk: {
      const int held = dest.size();
      return (held == 0 || held == m - 1) ? 3 : 1;
    }
    default:
      return config.sample_peers;
  }
}

int seed_samples_needed(const PolicyConfig& config) {
  return config.kind == PolicyKind::DistributedMS ? 3 : 0;
}

bool needs_global_snapshot(PolicyKind kind) {
  return kind == PolicyKind::RarestFirst || kind == PolicyKind::ModeSuppression;
}

}  // namespace swarmsim
