// Wall-clock comparison of the OpenMP kernels against their serial references.
// Usage: bench_parallel [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "swarmsim/engine.hpp"
#include "swarmsim/oracle.hpp"

using namespace swarmsim;
using namespace swarmsim::oracle;

namespace {

double best_of(int repeats, const std::function<void()>& f) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.4f %10.4f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("threads %d, best of %d\n", omp_get_max_threads(), repeats);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  const TruncationSpec spec{3, 14};
  const ModelParams params{3, 1.5, 1.0, 1.0};
  volatile double sink = 0;

  const double gs = best_of(repeats, [&] { sink = sink + build_generator_ms_serial(spec, params, 2).size(); });
  const double gp = best_of(repeats, [&] { sink = sink + build_generator_ms(spec, params, 2).size(); });
  row("generator m=3 cap=14", gs, gp);

  const auto gen = build_generator_ms(spec, params, 2);
  const auto lp = LyapunovParams::theorem_compliant(3, 2, 1.5, 1.0, 1.0, 16.0);
  const double ds = best_of(repeats, [&] { sink = sink + drift_report_serial(gen, lp).size(); });
  const double dp = best_of(repeats, [&] { sink = sink + drift_report(gen, lp).size(); });
  row("drift report", ds, dp);

  Scenario s;
  s.params = {5, 30.0, 1.0, 1.0};
  s.policy.kind = PolicyKind::ModeSuppression;
  s.policy.threshold = 10;
  s.policy.sample_peers = 3;
  s.horizon = 1000.0;
  s.rng_seed = 7;
  const int reps = 2 * omp_get_max_threads();
  const double rs = best_of(repeats, [&] { sink = sink + run_replications_serial(s, reps).size(); });
  const double rp = best_of(repeats, [&] { sink = sink + run_replications(s, reps).size(); });
  row("replications (MS, lambda=30)", rs, rp);
  return 0;
}
