#include <cmath>
#include <functional>
#include <numeric>

#include "doctest.h"
#include "swarmsim/oracle.hpp"

using namespace swarmsim;
using namespace swarmsim::oracle;

namespace {
ChunkSet cs(std::initializer_list<int> one_based) { return ChunkSet::of_one_based(one_based); }

const ModelParams kUnit{2, 1.0, 1.0, 1.0};

// Brute-force count: number of weak compositions of at most `cap` into `p` parts.
long long brute_count(int p, int cap) {
  if (p == 0) return 1;
  long long total = 0;
  std::function<void(int, int)> rec = [&](int k, int left) {
    if (k == p) {
      ++total;
      return;
    }
    for (int c = 0; c <= left; ++c) rec(k + 1, left - c);
  };
  rec(0, cap);
  return total;
}
}  // namespace

TEST_CASE("state enumeration") {
  const auto s = enumerate_states({2, 1});
  REQUIRE(s.size() == 4);
  CHECK(s[0].population() == 0);
  CHECK(s[1].count(cs({})) == 1);
  CHECK(s[2].count(cs({1})) == 1);
  CHECK(s[3].count(cs({2})) == 1);
  CHECK(enumerate_states({2, 0}).size() == 1);
  CHECK(enumerate_states({2, 2}).size() == 10);
  for (int m : {2, 3})
    for (int cap : {0, 1, 3, 5}) {
      CHECK(count_states({m, cap}) == doctest::Approx(double(brute_count((1 << m) - 1, cap))));
      CHECK(enumerate_states({m, cap}).size() == std::size_t(brute_count((1 << m) - 1, cap)));
    }
  CHECK_THROWS_AS(enumerate_states({6, 40}), StateSpaceTooLarge);
  CHECK_THROWS_AS(TruncationSpec({7, 1}).validate(), std::invalid_argument);
}

TEST_CASE("MS transfer rates") {
  SwarmState x(2);
  x.add(cs({1}), 2);
  x.add(cs({2}), 1);
  CHECK(ms_transfer_rate(x, cs({1}), 1, kUnit, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(ms_transfer_rate(x, cs({2}), 0, kUnit, 1) == 0.0);  // chunk 1 is the suppressed mode
  CHECK(ms_transfer_rate(x, cs({2}), 0, kUnit, 2) == doctest::Approx(1.0 / 3.0 * (1.0 + 2.0)));
  CHECK(ms_transfer_rate(x, cs({}), 0, kUnit, 1) == 0.0);  // no such peers

  SwarmState y(3);
  y.add(cs({}), 1);
  y.add(cs({1, 2}), 1);
  // |A| = 2 for both the seed and the {1,2} holder: (1/2) (1/3 + 1/2)
  CHECK(ms_transfer_rate(y, cs({}), 0, {3, 1.0, 1.0, 1.0}, 5) == doctest::Approx(0.5 * (1.0 / 3.0 + 0.5)));
}

TEST_CASE("generator structure") {
  for (int m : {2, 3}) {
    const ModelParams p{m, 1.3, 0.7, 2.0};
    const auto gen = build_generator_ms({m, m == 2 ? 8 : 4}, p, 2);
    const auto audit = audit_generator(gen);
    CHECK(audit.max_row_sum_residual < 1e-12);
    CHECK(audit.min_off_diagonal >= 0.0);
    const auto ser = build_generator_ms_serial({m, m == 2 ? 8 : 4}, p, 2);
    CHECK(gen.states == ser.states);
    CHECK((gen.q - ser.q).norm() == 0.0);
    // arrivals only below the cap
    for (int id = 0; id < gen.size(); ++id) {
      const SwarmState& x = gen.states[std::size_t(id)];
      if (gen.is_boundary(id)) continue;
      SwarmState up = x;
      up.add(ChunkSet{});
      CHECK(gen.rate(id, gen.index_of(up)) == doctest::Approx(1.3));
    }
  }
  CHECK_THROWS_AS(build_generator_ms({3, 2}, kUnit, 1), std::invalid_argument);
}

TEST_CASE("stationary distribution") {
  SUBCASE("single state") {
    const auto r = stationary_distribution(build_generator_ms({2, 0}, kUnit, 1));
    REQUIRE(r.p.size() == 1);
    CHECK(r.p[0] == 1.0);
  }
  SUBCASE("birth-death at cap 1 for m=2") {
    // States {}, {∅:1}, {{1}:1}, {{2}:1}. The only moves are {} -> {∅:1} at lambda,
    // {∅:1} -> {{j}:1} at U/2 each, and {{j}:1} -> {} at U.
    const auto gen = build_generator_ms({2, 1}, kUnit, 5);
    const auto r = stationary_distribution(gen);
    CHECK(r.residual < 1e-12);
    CHECK(std::accumulate(r.p.begin(), r.p.end(), 0.0) == doctest::Approx(1.0));
    const double p_empty = r.p[0], p_none = r.p[1], p_one = r.p[2], p_two = r.p[3];
    CHECK(p_one == doctest::Approx(p_two));
    CHECK(p_empty == doctest::Approx(p_none));
    CHECK(p_none == doctest::Approx(p_one + p_two));
    CHECK(p_empty == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("larger truncations solve to small residual") {
    for (int t : {1, 2, 3}) {
      const auto gen = build_generator_ms({2, 12}, {2, 1.0, 1.0, 1.0}, t);
      const auto r = stationary_distribution(gen);
      CHECK(r.residual < 1e-10);
      CHECK(std::accumulate(r.p.begin(), r.p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (double v : r.p) CHECK(v >= 0.0);
    }
    const auto r3 = stationary_distribution(build_generator_ms({3, 5}, {3, 1.0, 1.0, 1.0}, 2));
    CHECK(r3.residual < 1e-10);
  }
  SUBCASE("T=1 leaves unreachable imbalanced states transient") {
    const auto gen = build_generator_ms({2, 8}, kUnit, 1);
    const auto r = stationary_distribution(gen);
    CHECK(r.transient_states > 0);
    for (int id = 0; id < gen.size(); ++id) {
      const auto snap = frequency_snapshot(gen.states[std::size_t(id)]);
      if (snap.y_max - snap.y_min >= 2) CHECK(r.p[std::size_t(id)] == 0.0);
    }
  }
}

TEST_CASE("Lyapunov function and drift") {
  const auto lp = LyapunovParams::theorem_compliant(2, 1, 1.0, 1.0, 1.0, 6.0);
  CHECK(lp.c1 == 2.0);
  CHECK(lp.c2 == doctest::Approx(8.0 * 3.0));
  CHECK_NOTHROW(lp.validate(2, 1, 1.0, 1.0));
  LyapunovParams bad = lp;
  bad.c1 = 1.0;
  CHECK_THROWS_WITH(bad.validate(2, 1, 1.0, 1.0), doctest::Contains("C1"));
  bad = lp;
  bad.c2 = 1.0;
  CHECK_THROWS_WITH(bad.validate(2, 1, 1.0, 1.0), doctest::Contains("C2"));

  CHECK(lyapunov_value(SwarmState(2), lp) == doctest::Approx(lp.c2 * lp.m_const));
  SwarmState one(2);
  one.add(ChunkSet{});
  CHECK(lyapunov_value(one, lp) == doctest::Approx(lp.c1 + lp.c2 * lp.m_const));
  SwarmState mixed(2);
  mixed.add(cs({1}), 3);
  mixed.add(cs({2}), 1);
  // spread (3-1)^2, |x| - ybar = 1, r = 4
  CHECK(lyapunov_value(mixed, lp) == doctest::Approx(4.0 + lp.c1 * 1.0 + lp.c2 * 2.0));

  const auto gen = build_generator_ms({2, 6}, kUnit, 1);
  const auto rep = drift_report(gen, lp);
  CHECK(rep[0].qv == doctest::Approx(1.0 * lp.c1));
  const auto ser = drift_report_serial(gen, lp);
  for (std::size_t i = 0; i < rep.size(); ++i) {
    CHECK(rep[i].qv == ser[i].qv);
    CHECK(rep[i].boundary == gen.is_boundary(int(i)));
  }
  // brute-force drift straight from the generator row
  for (int id = 0; id < gen.size(); ++id) {
    double qv = 0.0;
    for (int to = 0; to < gen.size(); ++to)
      qv += gen.rate(id, to) * lyapunov_value(gen.states[std::size_t(to)], lp);
    CHECK(rep[std::size_t(id)].qv == doctest::Approx(qv).epsilon(1e-9).scale(lp.c2 * lp.m_const));
  }
  const auto ex = exceptional_set(rep, lp.epsilon);
  for (int id : ex) {
    CHECK_FALSE(gen.is_boundary(id));
    CHECK(rep[std::size_t(id)].qv > -lp.epsilon);
  }
  CHECK(region_of(mixed, 1) == Region::Suppressed);
  CHECK(region_of(mixed, 3) == Region::Unsuppressed);
  CHECK(region_of(SwarmState(2), 1) == Region::Balanced);
}

TEST_CASE("structural lemmas hold on every enumerated state") {
  SUBCASE("m=2 cap=6 T=1") {
    const auto rep = verify_lemmas({2, 6}, kUnit, 1);
    CHECK(rep.ok());
    CHECK(rep.states_checked == 84);
    CHECK(rep.equality_rows_checked > 0);
  }
  SUBCASE("m=3 cap=5 T=2") {
    const auto rep = verify_lemmas({3, 5}, {3, 0.8, 1.4, 0.6}, 2);
    for (const auto& v : rep.violations) MESSAGE(v.lemma << " " << v.state << " " << v.detail);
    CHECK(rep.ok());
    CHECK(rep.rate_bounds_checked > 0);
  }
  SUBCASE("a corrupted rate is detected") {
    auto gen = build_generator_ms({2, 4}, kUnit, 2);
    SwarmState x(2);
    x.add(cs({1}), 2);
    x.add(cs({2}), 1);
    SwarmState after(2);
    after.add(cs({1}), 1);
    after.add(cs({2}), 1);
    gen.q.coeffRef(gen.index_of(x), gen.index_of(after)) *= 1.5;
    const auto rep = verify_lemmas(gen);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations.front().state == x.to_string());
  }
}
