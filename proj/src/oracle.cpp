#include "swarmsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/SparseLU>

namespace swarmsim::oracle {

namespace {

int profile_count(int m) { return (1 << m) - 1; }

struct RowEntry {
  int col;
  double rate;
};

// Off-diagonal entries of one generator row.
std::vector<RowEntry> generator_row(const GeneratorMatrix& gen, int id) {
  const SwarmState& x = gen.states[static_cast<std::size_t>(id)];
  const int m = gen.spec.m;
  std::vector<RowEntry> row;
  if (x.population() < gen.spec.cap) {
    const int to = gen.index_of(apply_transition(x, Transition::arrival()));
    row.push_back({to, gen.params.lambda});
  }
  for (const auto& [s, xs] : x.counts()) {
    (void)xs;
    for (int j = 0; j < m; ++j) {
      if (s.contains(j)) continue;
      const double r = ms_transfer_rate(x, s, j, gen.params, gen.threshold);
      if (r <= 0.0) continue;
      const int to = gen.index_of(apply_transition(x, Transition::receive(s, j, m)));
      if (to < 0) throw std::logic_error("transition leaves the enumerated space");
      row.push_back({to, r});
    }
  }
  return row;
}

GeneratorMatrix prepare(const TruncationSpec& spec, const ModelParams& params, int threshold) {
  spec.validate();
  params.validate();
  if (spec.m != params.m) throw std::invalid_argument("m: truncation and model disagree");
  if (threshold < 1) throw std::invalid_argument("T: must be >= 1");
  GeneratorMatrix gen;
  gen.spec = spec;
  gen.params = params;
  gen.threshold = threshold;
  gen.states = enumerate_states(spec);
  for (std::size_t i = 0; i < gen.states.size(); ++i) gen.index.emplace(dense_key(gen.states[i]), static_cast<int>(i));
  return gen;
}

void assemble(GeneratorMatrix& gen, const std::vector<std::vector<RowEntry>>& rows) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double out = 0.0;
    for (const auto& e : rows[i]) {
      trip.emplace_back(static_cast<int>(i), e.col, e.rate);
      out += e.rate;
    }
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -out);
  }
  gen.q.resize(gen.size(), gen.size());
  gen.q.setFromTriplets(trip.begin(), trip.end());
  gen.q.makeCompressed();
}

}  // namespace

void TruncationSpec::validate() const {
  if (m < 1 || m > 6) throw std::invalid_argument("m: oracle supports 1 <= m <= 6");
  if (cap < 0) throw std::invalid_argument("cap: must be >= 0");
}

double count_states(const TruncationSpec& spec) {
  // C(cap + P, P) multisets of size <= cap over P profiles
  const double p = profile_count(spec.m);
  double c = 1.0;
  for (Count k = 1; k <= spec.cap; ++k) c = c * (p + double(k)) / double(k);
  return c;
}

std::vector<SwarmState> enumerate_states(const TruncationSpec& spec) {
  spec.validate();
  const double n = count_states(spec);
  if (n > kMaxStates)
    throw StateSpaceTooLarge("state space has " + std::to_string(static_cast<long long>(n)) +
                             " states (limit 1000000)");
  const int p = profile_count(spec.m);
  std::vector<SwarmState> out;
  out.reserve(static_cast<std::size_t>(n));
  std::vector<Count> counts(static_cast<std::size_t>(p), 0);
  // Distribute exactly `left` peers over profiles [k, p).
  std::function<void(int, Count)> fill = [&](int k, Count left) {
    if (k == p - 1) {
      counts[static_cast<std::size_t>(k)] = left;
      SwarmState s(spec.m);
      for (int b = 0; b < p; ++b) s.add(ChunkSet(static_cast<ChunkSet::word_type>(b)), counts[static_cast<std::size_t>(b)]);
      out.push_back(std::move(s));
      return;
    }
    for (Count c = left; c >= 0; --c) {
      counts[static_cast<std::size_t>(k)] = c;
      fill(k + 1, left - c);
    }
  };
  for (Count total = 0; total <= spec.cap; ++total) fill(0, total);
  return out;
}

DenseKey dense_key(const SwarmState& x) {
  DenseKey k(static_cast<std::size_t>(profile_count(x.m())), 0);
  for (const auto& [s, c] : x.counts()) k[static_cast<std::size_t>(s.bits())] = c;
  return k;
}

int GeneratorMatrix::index_of(const SwarmState& x) const {
  auto it = index.find(dense_key(x));
  return it == index.end() ? -1 : it->second;
}

double ms_transfer_rate(const SwarmState& x, ChunkSet s, int j, const ModelParams& params, int threshold) {
  const Count xs = x.count(s);
  if (xs <= 0 || s.contains(j)) return 0.0;
  const FrequencySnapshot snap = frequency_snapshot(x);
  const ChunkSet d = suppressed_set_ms(snap, threshold);
  if (d.contains(j)) return 0.0;
  const double seed_h = allowable_set(ChunkSet::full(x.m()), s, d).size();
  double peer_term = 0.0;
  for (const auto& [b, xb] : x.counts()) {
    if (!b.contains(j)) continue;
    peer_term += double(xb) / double(allowable_set(b, s, d).size());
  }
  return double(xs) / double(x.population()) * (params.u / seed_h + params.mu * peer_term);
}

GeneratorMatrix build_generator_ms(const TruncationSpec& spec, const ModelParams& params, int threshold) {
  GeneratorMatrix gen = prepare(spec, params, threshold);
  std::vector<std::vector<RowEntry>> rows(gen.states.size());
  const int n = gen.size();
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = generator_row(gen, i);
  assemble(gen, rows);
  return gen;
}

GeneratorMatrix build_generator_ms_serial(const TruncationSpec& spec, const ModelParams& params, int threshold) {
  GeneratorMatrix gen = prepare(spec, params, threshold);
  std::vector<std::vector<RowEntry>> rows;
  rows.reserve(gen.states.size());
  for (int i = 0; i < gen.size(); ++i) rows.push_back(generator_row(gen, i));
  assemble(gen, rows);
  return gen;
}

GeneratorAudit audit_generator(const GeneratorMatrix& gen) {
  GeneratorAudit a;
  a.row_sum_residual.assign(gen.states.size(), 0.0);
  for (int r = 0; r < gen.q.outerSize(); ++r) {
    double sum = 0.0, scale = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.q, r); it; ++it) {
      sum += it.value();
      scale = std::max(scale, std::abs(it.value()));
      if (it.col() != r) a.min_off_diagonal = std::min(a.min_off_diagonal, it.value());
    }
    a.row_sum_residual[static_cast<std::size_t>(r)] = std::abs(sum);
    a.max_row_sum_residual = std::max(a.max_row_sum_residual, std::abs(sum));
  }
  return a;
}

namespace {

// Kosaraju SCC labelling on the positive-rate graph (iterative).
std::vector<int> strongly_connected(const GeneratorMatrix& gen, int& n_comp) {
  const int n = gen.size();
  std::vector<std::vector<int>> fwd(static_cast<std::size_t>(n)), rev(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.q, r); it; ++it)
      if (it.col() != r && it.value() > 0.0) {
        fwd[static_cast<std::size_t>(r)].push_back(static_cast<int>(it.col()));
        rev[static_cast<std::size_t>(it.col())].push_back(r);
      }
  std::vector<int> order;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const auto& adj = fwd[static_cast<std::size_t>(v)];
      if (next < adj.size()) {
        const int w = adj[next++];
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back({w, 0});
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  n_comp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[static_cast<std::size_t>(*it)] >= 0) continue;
    std::vector<int> stack{*it};
    comp[static_cast<std::size_t>(*it)] = n_comp;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : rev[static_cast<std::size_t>(v)])
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = n_comp;
          stack.push_back(w);
        }
    }
    ++n_comp;
  }
  return comp;
}

}  // namespace

StationaryResult stationary_distribution(const GeneratorMatrix& gen) {
  const int n = gen.size();
  StationaryResult res;
  res.p.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    res.p[0] = 1.0;
    return res;
  }

  int n_comp = 0;
  const std::vector<int> comp = strongly_connected(gen, n_comp);
  std::vector<char> leaks(static_cast<std::size_t>(n_comp), 0);
  for (int r = 0; r < n; ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.q, r); it; ++it)
      if (it.value() > 0.0 && comp[static_cast<std::size_t>(it.col())] != comp[static_cast<std::size_t>(r)])
        leaks[static_cast<std::size_t>(comp[static_cast<std::size_t>(r)])] = 1;
  std::vector<int> closed;
  for (int c = 0; c < n_comp; ++c)
    if (!leaks[static_cast<std::size_t>(c)]) closed.push_back(c);
  if (closed.size() != 1) {
    std::ostringstream msg;
    msg << "chain has " << closed.size() << " closed classes;";
    for (int c : closed) {
      msg << " class {";
      int shown = 0;
      for (int i = 0; i < n && shown < 8; ++i)
        if (comp[static_cast<std::size_t>(i)] == c) {
          msg << (shown++ ? "; " : "") << "#" << i << " [" << gen.states[static_cast<std::size_t>(i)].to_string() << "]";
        }
      msg << "}";
    }
    throw ReducibleChain(msg.str());
  }

  std::vector<int> local(static_cast<std::size_t>(n), -1), members;
  for (int i = 0; i < n; ++i)
    if (comp[static_cast<std::size_t>(i)] == closed.front()) {
      local[static_cast<std::size_t>(i)] = static_cast<int>(members.size());
      members.push_back(i);
    }
  res.transient_states = n - static_cast<int>(members.size());
  const int k = static_cast<int>(members.size());

  if (k == 1) {
    res.p[static_cast<std::size_t>(members[0])] = 1.0;
  } else {
    // Q_c^T p = 0 with the last equation replaced by sum p = 1.
    std::vector<Eigen::Triplet<double>> trip;
    for (int li = 0; li < k; ++li) {
      const int r = members[static_cast<std::size_t>(li)];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.q, r); it; ++it) {
        const int lc = local[static_cast<std::size_t>(it.col())];
        if (lc < 0 || lc == k - 1) continue;
        trip.emplace_back(lc, li, it.value());
      }
      trip.emplace_back(k - 1, li, 1.0);
    }
    Eigen::SparseMatrix<double> a(k, k);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::runtime_error("stationary solve: factorization failed");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    b(k - 1) = 1.0;
    Eigen::VectorXd p = lu.solve(b);
    for (int iter = 0; iter < 3; ++iter) {  // iterative refinement
      const Eigen::VectorXd r = b - a * p;
      if (r.lpNorm<Eigen::Infinity>() < 1e-15) break;
      p += lu.solve(r);
    }
    double total = 0.0;
    for (int li = 0; li < k; ++li) {
      const double v = std::max(0.0, p(li));
      res.p[static_cast<std::size_t>(members[static_cast<std::size_t>(li)])] = v;
      total += v;
    }
    for (double& v : res.p) v /= total;
  }

  std::vector<double> flow(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < n; ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.q, r); it; ++it)
      flow[static_cast<std::size_t>(it.col())] += res.p[static_cast<std::size_t>(r)] * it.value();
  for (double f : flow) res.residual = std::max(res.residual, std::abs(f));
  return res;
}

void LyapunovParams::validate(int m, int threshold, double lambda, double u) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon: must be > 0");
  if (!(c1 > double((2 * threshold - 1) * (m - 1)))) throw std::invalid_argument("C1: must exceed (2T-1)(m-1)");
  const double c2_min = 2.0 * m * m * (c1 * lambda + epsilon) / u;
  if (c2 < c2_min * (1.0 - 1e-12)) throw std::invalid_argument("C2: must be >= 2m^2 (C1 lambda + eps) / U");
  if (!(m_const > 0.0)) throw std::invalid_argument("M: must be > 0");
}

LyapunovParams LyapunovParams::theorem_compliant(int m, int threshold, double lambda, double u, double epsilon,
                                                 double m_const) {
  LyapunovParams lp;
  lp.epsilon = epsilon;
  lp.c1 = double((2 * threshold - 1) * (m - 1) + 1);
  lp.c2 = 2.0 * m * m * (lp.c1 * lambda + epsilon) / u;
  lp.m_const = m_const;
  return lp;
}

double lyapunov_value(const SwarmState& x, const LyapunovParams& lp) {
  const FrequencySnapshot snap = frequency_snapshot(x);
  double spread = 0.0;
  for (Count y : snap.y) spread += double(snap.y_max - y) * double(snap.y_max - y);
  return spread + lp.c1 * double(x.population() - snap.y_max) +
         lp.c2 * std::max(0.0, lp.m_const - double(snap.total_chunks));
}

const char* to_string(Region r) {
  switch (r) {
    case Region::Suppressed:
      return "suppressed";
    case Region::Unsuppressed:
      return "unsuppressed";
    case Region::Balanced:
      return "balanced";
  }
  return "?";
}

Region region_of(const SwarmState& x, int threshold) {
  const FrequencySnapshot snap = frequency_snapshot(x);
  if (snap.mode_set == ChunkSet::full(x.m())) return Region::Balanced;
  return suppressed_set_ms(snap, threshold).empty() ? Region::Unsuppressed : Region::Suppressed;
}

DriftEntry mean_drift(const GeneratorMatrix& gen, int state_id, const LyapunovParams& lp) {
  const SwarmState& x = gen.states[static_cast<std::size_t>(state_id)];
  DriftEntry e;
  e.state_id = state_id;
  e.population = x.population();
  e.boundary = gen.is_boundary(state_id);
  e.region = region_of(x, gen.threshold);
  e.v = lyapunov_value(x, lp);
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen.q, state_id); it; ++it) {
    if (it.col() == state_id) continue;
    e.qv += it.value() * (lyapunov_value(gen.states[static_cast<std::size_t>(it.col())], lp) - e.v);
  }
  return e;
}

std::vector<DriftEntry> drift_report(const GeneratorMatrix& gen, const LyapunovParams& lp) {
  std::vector<DriftEntry> out(gen.states.size());
  const int n = gen.size();
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = mean_drift(gen, i, lp);
  return out;
}

std::vector<DriftEntry> drift_report_serial(const GeneratorMatrix& gen, const LyapunovParams& lp) {
  std::vector<DriftEntry> out;
  out.reserve(gen.states.size());
  for (int i = 0; i < gen.size(); ++i) out.push_back(mean_drift(gen, i, lp));
  return out;
}

std::vector<int> exceptional_set(const std::vector<DriftEntry>& report, double epsilon) {
  std::vector<int> ids;
  for (const auto& e : report)
    if (!e.boundary && e.qv > -epsilon) ids.push_back(e.state_id);
  return ids;
}

LemmaReport verify_lemmas(const GeneratorMatrix& gen, double rel_tol) {
  LemmaReport rep;
  const int m = gen.spec.m;
  const int t = gen.threshold;
  auto violate = [&](const char* lemma, int id, const std::string& detail) {
    rep.violations.push_back({lemma, id, gen.states[static_cast<std::size_t>(id)].to_string(), detail});
  };

  for (int id = 0; id < gen.size(); ++id) {
    const SwarmState& x = gen.states[static_cast<std::size_t>(id)];
    ++rep.states_checked;
    const FrequencySnapshot snap = frequency_snapshot(x);
    const Count pop = x.population();
    const ChunkSet d = suppressed_set_ms(snap, t);

    if (snap.total_chunks < snap.y_max) violate("chunk-count-bound", id, "r(x) < max_j y_j");
    if (snap.mode_set != ChunkSet::full(m) && !d.empty() && d != snap.mode_set)
      violate("suppressed-set-dichotomy", id, "D_T is neither empty nor the mode set");
    if (pop == 0) continue;

    // pi_min <= (m-1)/m
    if (Count(m) * snap.y_min > Count(m - 1) * pop) violate("least-frequency-bound", id, "pi_min > (m-1)/m");
    // D_T empty and |x| > 2Tm  =>  pi_max <= 1 - 1/(2m)
    if (d.empty() && pop > 2 * Count(t) * m && Count(2 * m) * snap.y_max > Count(2 * m - 1) * pop)
      violate("unsuppressed-mode-bound", id, "pi_max > 1 - 1/(2m)");

    for (int j = 0; j < m; ++j) {
      ChunkSet complement = ChunkSet::full(m);
      complement.erase(j);
      // gamma_j = x_{ {j}^c } / |x| <= pi_max, and the strict-subset mass identity
      const Count xc = x.count(complement);
      if (xc > snap.y_max) violate("one-club-fraction-bound", id, "gamma_" + std::to_string(j + 1) + " > pi_max");
      Count strict = 0;
      for (const auto& [s, c] : x.counts())
        if (!s.contains(j) && s != complement) strict += c;
      if (strict != pop - snap.y[static_cast<std::size_t>(j)] - xc)
        violate("one-club-fraction-bound", id, "strict-subset mass identity fails");

      if (d.contains(j)) continue;  // suppressed chunks have rate 0 by construction
      const double rj = gen.params.u + gen.params.mu * double(snap.y[static_cast<std::size_t>(j)]);
      for (const auto& [s, xs] : x.counts()) {
        if (s.contains(j)) continue;
        const int to = gen.index_of(apply_transition(x, Transition::receive(s, j, m)));
        const double q = to >= 0 ? gen.rate(id, to) : 0.0;
        const double upper = double(xs) / double(pop) * rj;
        const double lower = upper / double(m);
        ++rep.rate_bounds_checked;
        if (q > upper * (1.0 + rel_tol) || q < lower * (1.0 - rel_tol)) {
          std::ostringstream os;
          os << "Q(x, T_{" << s.to_string() << "," << j + 1 << "}) = " << q << " outside [" << lower << ", "
             << upper << "]";
          violate("transition-rate-bounds", id, os.str());
        }
        if (s == complement) {
          ++rep.equality_rows_checked;
          const double rel = std::abs(q - upper) / upper;
          rep.max_equality_rel_error = std::max(rep.max_equality_rel_error, rel);
          if (rel > rel_tol) {
            std::ostringstream os;
            os << "departure rate " << q << " != x_S R_j / |x| = " << upper;
            violate("transition-rate-equality", id, os.str());
          }
        }
      }
    }
  }
  return rep;
}

LemmaReport verify_lemmas(const TruncationSpec& spec, const ModelParams& params, int threshold) {
  return verify_lemmas(build_generator_ms(spec, params, threshold));
}

}  // namespace swarmsim::oracle
