#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "swarmsim/swarm_state.hpp"

namespace swarmsim::oracle {

inline constexpr double kMaxStates = 1e6;

// All states with |x| <= cap over proper subsets of [m]. Arrivals are
// disabled at |x| == cap; every other rate is the untruncated one.
struct TruncationSpec {
  int m = 2;
  Count cap = 1;

  void validate() const;
};

class StateSpaceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReducibleChain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Number of multisets of proper subsets with total size <= cap.
double count_states(const TruncationSpec& spec);

// Canonical order: by population, then lexicographically by the dense
// count vector (profile bit patterns ascending), larger counts first.
std::vector<SwarmState> enumerate_states(const TruncationSpec& spec);

using DenseKey = std::vector<Count>;
DenseKey dense_key(const SwarmState& x);

// Exact MS rate of T_{S,j}(x); zero when x_S = 0, j in S, or j in D_T(x).
double ms_transfer_rate(const SwarmState& x, ChunkSet s, int j, const ModelParams& params, int threshold);

struct GeneratorMatrix {
  TruncationSpec spec;
  ModelParams params;
  int threshold = 1;
  std::vector<SwarmState> states;
  std::map<DenseKey, int> index;
  Eigen::SparseMatrix<double, Eigen::RowMajor> q;

  int size() const { return static_cast<int>(states.size()); }
  bool is_boundary(int id) const { return states[static_cast<std::size_t>(id)].population() >= spec.cap; }
  int index_of(const SwarmState& x) const;  // -1 when outside the space
  double rate(int from, int to) const { return q.coeff(from, to); }
};

// OpenMP-parallel over rows.
GeneratorMatrix build_generator_ms(const TruncationSpec& spec, const ModelParams& params, int threshold);
// Sequential reference.
GeneratorMatrix build_generator_ms_serial(const TruncationSpec& spec, const ModelParams& params, int threshold);

struct GeneratorAudit {
  double max_row_sum_residual = 0.0;
  double min_off_diagonal = 0.0;
  std::vector<double> row_sum_residual;
};
GeneratorAudit audit_generator(const GeneratorMatrix& gen);

struct StationaryResult {
  std::vector<double> p;
  double residual = 0.0;  // max_x |(pQ)(x)|
  int transient_states = 0;
};

// Solves pQ = 0, sum p = 1 on the unique closed communicating class; states
// outside it are transient and get probability 0. Throws ReducibleChain when
// there is more than one closed class.
StationaryResult stationary_distribution(const GeneratorMatrix& gen);

struct LyapunovParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double m_const = 0.0;
  double epsilon = 1.0;

  // Checks C1 > (2T-1)(m-1), C2 >= 2m^2 (C1 lambda + eps) / U, eps > 0, M > 0.
  void validate(int m, int threshold, double lambda, double u) const;
  // Smallest admissible C1 (integer step above the bound) and C2 at its bound.
  static LyapunovParams theorem_compliant(int m, int threshold, double lambda, double u, double epsilon,
                                          double m_const);
};

// V(x) = sum_i (ybar - y_i)^2 + C1 (|x| - ybar) + C2 (M - r)^+
double lyapunov_value(const SwarmState& x, const LyapunovParams& lp);

enum class Region { Suppressed, Unsuppressed, Balanced };
const char* to_string(Region r);
Region region_of(const SwarmState& x, int threshold);

struct DriftEntry {
  int state_id = 0;
  Count population = 0;
  double v = 0.0;
  double qv = 0.0;
  bool boundary = false;
  Region region = Region::Balanced;
};

// QV(x) = sum_y Q(x,y) (V(y) - V(x)); boundary states are flagged.
DriftEntry mean_drift(const GeneratorMatrix& gen, int state_id, const LyapunovParams& lp);
std::vector<DriftEntry> drift_report(const GeneratorMatrix& gen, const LyapunovParams& lp);
std::vector<DriftEntry> drift_report_serial(const GeneratorMatrix& gen, const LyapunovParams& lp);
// Non-boundary states with QV(x) > -epsilon.
std::vector<int> exceptional_set(const std::vector<DriftEntry>& report, double epsilon);

struct LemmaViolation {
  std::string lemma;
  int state_id = 0;
  std::string state;
  std::string detail;
};

struct LemmaReport {
  std::size_t states_checked = 0;
  std::size_t rate_bounds_checked = 0;
  std::size_t equality_rows_checked = 0;
  double max_equality_rel_error = 0.0;
  std::vector<LemmaViolation> violations;

  bool ok() const { return violations.empty(); }
};

LemmaReport verify_lemmas(const GeneratorMatrix& gen, double rel_tol = 1e-12);
LemmaReport verify_lemmas(const TruncationSpec& spec, const ModelParams& params, int threshold);

}  // namespace swarmsim::oracle
