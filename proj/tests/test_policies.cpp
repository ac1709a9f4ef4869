#include <array>
#include <map>

#include "doctest.h"
#include "swarmsim/policies.hpp"

using namespace swarmsim;

namespace {
ChunkSet cs(std::initializer_list<int> one_based) { return ChunkSet::of_one_based(one_based); }

struct Ctx {
  std::vector<ChunkSet> sources;
  std::vector<ChunkSet> samples;
  FrequencySnapshot snap;
  std::map<ChunkSet, Count> hist;
  ContactContext ctx;

  Ctx(int m, ChunkSet dest, std::vector<ChunkSet> src, std::vector<Count> y = {}, bool seed = false)
      : sources(std::move(src)) {
    samples = sources;
    if (y.empty()) y.assign(static_cast<std::size_t>(m), 0);
    Count pop = 0;
    for (Count v : y) pop = std::max(pop, v);
    snap = frequency_snapshot(y, pop + 1);
    ctx.m = m;
    ctx.dest = dest;
    ctx.sources = sources;
    ctx.samples = samples;
    ctx.snapshot = &snap;
    ctx.histogram = &hist;
    ctx.seed_push = seed;
  }
  // Seed push with separately sampled peers.
  static Ctx seed_push(int m, ChunkSet dest, std::vector<ChunkSet> sampled) {
    Ctx c(m, dest, {ChunkSet::full(m)}, {}, true);
    c.samples = std::move(sampled);
    c.ctx.samples = c.samples;
    return c;
  }
};

// Empirical distribution of decisions over many draws.
template <class F>
std::map<int, int> histogram_of(F&& f, int draws = 6000, std::uint64_t seed = 7) {
  Rng rng(seed);
  std::map<int, int> h;
  for (int i = 0; i < draws; ++i) ++h[f(rng).chunk];
  return h;
}

void check_uniform_over(const std::map<int, int>& h, std::initializer_list<int> one_based, int draws = 6000) {
  REQUIRE(h.size() == one_based.size());
  for (int j : one_based) {
    REQUIRE(h.count(j - 1));
    const double expected = double(draws) / double(one_based.size());
    CHECK(std::abs(h.at(j - 1) - expected) < 5.0 * std::sqrt(expected));
  }
}
}  // namespace

TEST_CASE("select_random") {
  Rng rng(1);
  CHECK_FALSE(select_random(Ctx(2, cs({1, 2}), {cs({1, 2})}).ctx, rng).is_transfer());
  CHECK(select_random(Ctx(3, cs({}), {cs({1})}).ctx, rng) == Decision::transfer(0));
  Ctx three(3, cs({}), {cs({1}), cs({2}), cs({3})});
  check_uniform_over(histogram_of([&](Rng& r) { return select_random(three.ctx, r); }), {1, 2, 3});
  // fixed seed replays
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) CHECK(select_random(three.ctx, a) == select_random(three.ctx, b));
}

TEST_CASE("select_rarest_first") {
  Rng rng(2);
  CHECK(select_rarest_first(Ctx(3, cs({}), {cs({1, 2})}, {2, 9, 9}).ctx, rng) == Decision::transfer(0));
  Ctx tie(2, cs({}), {cs({1, 2})}, {5, 5});
  check_uniform_over(histogram_of([&](Rng& r) { return select_rarest_first(tie.ctx, r); }), {1, 2});
  CHECK_FALSE(select_rarest_first(Ctx(2, cs({1}), {cs({1})}, {5, 5}).ctx, rng).is_transfer());
}

TEST_CASE("select_mode_suppression") {
  Rng rng(3);
  SUBCASE("one-club seed push recovers the missing chunk") {
    const Count n = 40;
    Ctx c(3, cs({2, 3}), {ChunkSet::full(3)}, {0, n, n}, true);
    for (int i = 0; i < 20; ++i) CHECK(select_mode_suppression(c.ctx, 1, rng) == Decision::transfer(0));
  }
  SUBCASE("allowable set empty") {
    CHECK_FALSE(select_mode_suppression(Ctx(3, cs({3}), {cs({1, 3})}, {5, 5, 2}).ctx, 1, rng).is_transfer());
  }
  SUBCASE("T above every count never suppresses") {
    Ctx c(3, cs({}), {cs({1, 2, 3})}, {9, 3, 0});
    check_uniform_over(histogram_of([&](Rng& r) { return select_mode_suppression(c.ctx, 10, r); }), {1, 2, 3});
  }
}

// With nothing suppressed, MS and Random consume the RNG identically, so
// every small context yields the same decision under the same stream.
TEST_CASE("mode suppression coincides with random when nothing is suppressed") {
  const int m = 3;
  const std::vector<std::vector<Count>> ys = {{0, 0, 0}, {3, 3, 3}, {4, 3, 3}, {2, 1, 2}};
  for (const auto& y : ys) {
    for (ChunkSet::word_type dest = 0; dest < 7; ++dest) {
      for (ChunkSet::word_type src = 0; src < 8; ++src) {
        Ctx c(m, ChunkSet(dest), {ChunkSet(src)}, y);
        for (int threshold : {2, 5}) {
          if (!suppressed_set_ms(c.snap, threshold).empty()) continue;
          for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng a(seed), b(seed);
            REQUIRE(select_mode_suppression(c.ctx, threshold, a) == select_random(c.ctx, b));
          }
        }
      }
    }
  }
}

TEST_CASE("select_rare_chunk") {
  Rng rng(4);
  CHECK(select_rare_chunk(Ctx(3, cs({}), {cs({1, 2}), cs({1, 2}), cs({2, 3})}).ctx, rng) == Decision::transfer(2));
  CHECK_FALSE(select_rare_chunk(Ctx(3, cs({}), {cs({1}), cs({1}), cs({1})}).ctx, rng).is_transfer());
  CHECK_FALSE(select_rare_chunk(Ctx(3, cs({1, 2}), {cs({1}), cs({2}), cs({})}).ctx, rng).is_transfer());
}

TEST_CASE("select_common_chunk") {
  SUBCASE("middle phase is random over one sampled peer") {
    Ctx c(4, cs({1}), {cs({1, 2, 3})});
    check_uniform_over(histogram_of([&](Rng& r) { return select_common_chunk(c.ctx, r); }), {2, 3});
  }
  Rng rng(5);
  SUBCASE("last chunk taken when the held chunks are common") {
    CHECK(select_common_chunk(Ctx(3, cs({1, 2}), {cs({1, 2}), cs({1, 2}), cs({3})}).ctx, rng) ==
          Decision::transfer(2));
  }
  SUBCASE("last chunk refused when a held chunk is seen once") {
    CHECK_FALSE(select_common_chunk(Ctx(3, cs({1, 2}), {cs({1}), cs({2}), cs({3})}).ctx, rng).is_transfer());
  }
  SUBCASE("last chunk refused when no sample holds it") {
    CHECK_FALSE(
        select_common_chunk(Ctx(3, cs({1, 2}), {cs({1, 2}), cs({1, 2}), cs({1})}).ctx, rng).is_transfer());
  }
  SUBCASE("empty downloader behaves as rare chunk") {
    CHECK(select_common_chunk(Ctx(3, cs({}), {cs({1, 2}), cs({1, 2}), cs({2, 3})}).ctx, rng) ==
          Decision::transfer(2));
  }
  SUBCASE("source variant checks the holder's chunks") {
    // samples {1,3},{1},{2}: downloader {1,2} sees chunk 2 once -> refused under the downloader reading;
    // holder {1,3} has chunk 1 seen twice -> accepted under the source reading.
    Ctx c(3, cs({1, 2}), {cs({1, 3}), cs({1}), cs({2})});
    CHECK_FALSE(select_common_chunk(c.ctx, rng, CommonChunkVariant::Downloader).is_transfer());
    CHECK(select_common_chunk(c.ctx, rng, CommonChunkVariant::Source) == Decision::transfer(2));
  }
  CHECK(peer_samples_needed({PolicyKind::CommonChunk}, cs({}), 4) == 3);
  CHECK(peer_samples_needed({PolicyKind::CommonChunk}, cs({1}), 4) == 1);
  CHECK(peer_samples_needed({PolicyKind::CommonChunk}, cs({1, 2, 3}), 4) == 3);
}

TEST_CASE("select_group_suppression") {
  Rng rng(6);
  Ctx c(2, cs({}), {cs({1})});
  c.hist = {{cs({1}), 5}, {cs({1, 2}), 3}};
  CHECK_FALSE(select_group_suppression(c.ctx, rng).is_transfer());

  Ctx other(3, cs({}), {cs({1, 2})});
  other.hist = {{cs({1}), 5}, {cs({1, 2}), 3}};
  check_uniform_over(histogram_of([&](Rng& r) { return select_group_suppression(other.ctx, r); }), {1, 2});

  Ctx equal(2, cs({2}), {cs({1})});
  equal.hist = {{cs({1}), 5}, {cs({1, 2}), 3}};
  CHECK(select_group_suppression(equal.ctx, rng) == Decision::transfer(0));

  Ctx seed(2, cs({}), {ChunkSet::full(2)}, {}, true);
  seed.hist = {{cs({}), 9}};
  CHECK(select_group_suppression(seed.ctx, rng).is_transfer());
}

TEST_CASE("select_dms") {
  Ctx c(3, cs({}), {cs({1, 2}), cs({1, 2}), cs({2, 3})});
  CHECK(dms_suppressed_set(c.samples, 3) == cs({2}));
  check_uniform_over(histogram_of([&](Rng& r) { return select_dms(c.ctx, r); }), {1, 3});

  CHECK(dms_suppressed_set(std::vector<ChunkSet>{cs({1, 2}), cs({1, 2}), cs({1, 2})}, 2).empty());

  Ctx low(3, cs({}), {cs({1}), cs({2}), cs({})});
  CHECK(dms_suppressed_set(low.samples, 3).empty());
  check_uniform_over(histogram_of([&](Rng& r) { return select_dms(low.ctx, r); }), {1, 2});

  // Seed push draws from [m] minus the sampled local mode.
  Ctx seed = Ctx::seed_push(3, cs({}), {cs({2}), cs({2}), cs({1})});
  check_uniform_over(histogram_of([&](Rng& r) { return select_dms(seed.ctx, r); }), {1, 3});
}

TEST_CASE("DMS at m=2 with strict local counts suppresses a locally most frequent chunk") {
  const std::array<ChunkSet, 4> profiles{cs({}), cs({1}), cs({2}), cs({1, 2})};
  for (auto a : profiles)
    for (auto b : profiles)
      for (auto c : profiles) {
        const std::vector<ChunkSet> s{a, b, c};
        int c1 = 0, c2 = 0;
        for (auto p : s) {
          c1 += p.contains(0);
          c2 += p.contains(1);
        }
        if (c1 == c2) continue;
        const ChunkSet d = dms_suppressed_set(s, 2);
        const int top = std::max(c1, c2);
        if (top > 1) {
          CHECK(d == ChunkSet::single(c1 > c2 ? 0 : 1));
        } else {
          CHECK(d.empty());
        }
      }
}

TEST_CASE("ewma_update") {
  auto e = ewma_update(EwmaEstimate(3), cs({1, 3}), 0.1);
  CHECK(e.pi[0] == doctest::Approx(0.1));
  CHECK(e.pi[1] == 0.0);
  CHECK(e.pi[2] == doctest::Approx(0.1));
  CHECK(e.ticks == 1);

  EwmaEstimate any(3);
  any.pi = {0.3, 0.9, 0.2};
  CHECK(ewma_update(any, cs({2}), 1.0).pi == std::vector<double>{0.0, 1.0, 0.0});

  EwmaEstimate grow(3);
  for (int i = 0; i < 500; ++i) {
    const auto prev = grow.pi;
    ewma_update_inplace(grow, cs({1, 2, 3}), 0.3);
    for (int j = 0; j < 3; ++j) {
      REQUIRE(grow.pi[j] >= prev[j]);
      REQUIRE(grow.pi[j] <= 1.0);
    }
  }
  // arbitrary observation sequences stay in [0,1]
  Rng rng(11);
  EwmaEstimate mixed(5);
  for (int i = 0; i < 2000; ++i) {
    ewma_update_inplace(mixed, ChunkSet(rng() & 31u), 0.37);
    for (double p : mixed.pi) REQUIRE((p >= 0.0 && p <= 1.0));
  }
}

TEST_CASE("select_ewma_ms") {
  Rng rng(12);
  EwmaEstimate est(3);
  est.pi = {0.5, 0.5, 0.1};
  Ctx c(3, cs({}), {cs({1, 2, 3})});
  for (int i = 0; i < 10; ++i) CHECK(select_ewma_ms(c.ctx, est, rng) == Decision::transfer(2));

  EwmaEstimate flat(3);
  flat.pi = {0.4, 0.4, 0.4};
  check_uniform_over(histogram_of([&](Rng& r) { return select_ewma_ms(c.ctx, flat, r); }), {1, 2, 3});

  const double alpha = 0.2;
  const EwmaEstimate first = ewma_update(EwmaEstimate(3), cs({2}), alpha);
  CHECK(first.pi == std::vector<double>{0.0, alpha, 0.0});
  CHECK_FALSE(select_ewma_ms(Ctx(3, cs({}), {cs({2})}).ctx, first, rng).is_transfer());
}

TEST_CASE("every transfer is safe") {
  Rng rng(13);
  const std::array<PolicyKind, 8> kinds{PolicyKind::Random,           PolicyKind::RarestFirst,
                                        PolicyKind::RareChunk,        PolicyKind::CommonChunk,
                                        PolicyKind::GroupSuppression, PolicyKind::ModeSuppression,
                                        PolicyKind::DistributedMS,    PolicyKind::EwmaMS};
  const int m = 4;
  for (int trial = 0; trial < 3000; ++trial) {
    const ChunkSet dest(rng() % 15);
    std::vector<ChunkSet> src{ChunkSet(rng() % 15), ChunkSet(rng() % 15), ChunkSet(rng() % 15)};
    std::vector<Count> y{Count(rng() % 7), Count(rng() % 7), Count(rng() % 7), Count(rng() % 7)};
    const bool seed = trial % 5 == 0;
    Ctx c = seed ? Ctx::seed_push(m, dest, src) : Ctx(m, dest, src, y);
    if (seed) c.snap = frequency_snapshot(y, 10);
    c.hist = {{src[0], 3}, {src[1], 2}};
    EwmaEstimate est(m);
    for (auto s : src) ewma_update_inplace(est, s, 0.1);
    for (auto kind : kinds) {
      PolicyConfig cfg;
      cfg.kind = kind;
      cfg.threshold = 1 + trial % 3;
      const Decision d = select(cfg, c.ctx, &est, rng);
      if (!d.is_transfer()) continue;
      REQUIRE_FALSE(dest.contains(d.chunk));
      const ChunkSet pool = seed ? ChunkSet::full(m) : union_of(src);
      REQUIRE(pool.contains(d.chunk));
    }
  }
}

TEST_CASE("policy names round trip and config validation") {
  for (auto k : {PolicyKind::Random, PolicyKind::EwmaMS, PolicyKind::DistributedMS})
    CHECK(policy_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(policy_kind_from_string("bogus"), std::invalid_argument);
  PolicyConfig bad;
  bad.kind = PolicyKind::ModeSuppression;
  bad.threshold = 0;
  CHECK_THROWS_WITH(bad.validate(), doctest::Contains("policy.T"));
  bad = {};
  bad.sample_peers = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
