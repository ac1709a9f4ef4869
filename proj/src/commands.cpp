#include "swarmsim/commands.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

#include "swarmsim/metrics.hpp"
#include "swarmsim/oracle.hpp"
#include "swarmsim/scenario_io.hpp"

namespace swarmsim::cli {

namespace fs = std::filesystem;

namespace {

const char* termination_name(Termination t) {
  return t == Termination::HorizonReached ? "horizon_reached" : "population_cap_hit";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

fs::path resolve_out(const SimulateOptions& opts, const ScenarioFile& file) {
  if (!opts.out.empty()) return opts.out;
  if (!file.output_dir.empty()) return file.output_dir;
  throw ConfigError("out", "no output directory given (--out or output_dir)");
}

int parse_int(const std::string& text, const std::string& field) {
  int v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) throw ConfigError(field, "expected an integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& text, const std::string& field) {
  double v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) throw ConfigError(field, "expected a number, got '" + text + "'");
  return v;
}

void apply_sweep_value(Scenario& s, const std::string& param, const std::string& value) {
  if (param == "lambda") {
    s.params.lambda = parse_real(value, "lambda");
  } else if (param == "m") {
    s.params.m = parse_int(value, "m");
  } else if (param == "T") {
    if (!value.empty() && value.back() == 'm') {
      const std::string mult = value.substr(0, value.size() - 1);
      s.policy.threshold = (mult.empty() ? 1 : parse_int(mult, "T")) * s.params.m;
    } else {
      s.policy.threshold = parse_int(value, "T");
    }
  } else if (param == "policy.kind") {
    try {
      s.policy.kind = policy_kind_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("policy.kind", e.what());
    }
  } else if (param == "sample_peers") {
    s.policy.sample_peers = parse_int(value, "sample_peers");
  } else {
    throw ConfigError("parameter", "unknown sweep parameter '" + param + "'");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(param, e.what());
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const oracle::StateSpaceTooLarge& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace

std::string population_csv(const std::vector<EventTrace>& traces) {
  std::string out = "time,replication,population\n";
  for (std::size_t r = 0; r < traces.size(); ++r)
    for (const auto& s : traces[r].samples)
      out += format_double(s.time) + ',' + std::to_string(r) + ',' + std::to_string(s.population) + '\n';
  return out;
}

std::string frequencies_csv(const std::vector<EventTrace>& traces, int m) {
  std::string out = "time,replication";
  for (int j = 1; j <= m; ++j) out += ",pi_" + std::to_string(j);
  out += '\n';
  for (std::size_t r = 0; r < traces.size(); ++r)
    for (const auto& s : traces[r].samples) {
      out += format_double(s.time) + ',' + std::to_string(r);
      for (double p : s.pi) out += ',' + format_double(p);
      out += '\n';
    }
  return out;
}

std::string departures_csv(const std::vector<EventTrace>& traces) {
  std::string out = "replication,arrival_time,departure_time,sojourn\n";
  for (std::size_t r = 0; r < traces.size(); ++r)
    for (const auto& d : traces[r].departures)
      out += std::to_string(r) + ',' + format_double(d.arrival_time) + ',' + format_double(d.departure_time) + ',' +
             format_double(d.sojourn()) + '\n';
  return out;
}

std::string summary_header() {
  return "replication,policy,m,lambda,mu,u,T,alpha,sample_peers,initial,departures,sojourn_count,mean_sojourn,"
         "stddev_sojourn,stabilization_time,termination,end_time";
}

std::string summary_row(const Scenario& s, int replication, const EventTrace& trace, double stabilization_epsilon) {
  const SojournStats st = sojourn_stats(trace, static_cast<std::size_t>(s.warmup_departures));
  const auto stab = stabilization_time(trace, stabilization_epsilon);
  std::ostringstream os;
  os << replication << ',' << to_string(s.policy.kind) << ',' << s.params.m << ',' << format_double(s.params.lambda)
     << ',' << format_double(s.params.mu) << ',' << format_double(s.params.u) << ',' << s.policy.threshold << ','
     << format_double(s.policy.alpha) << ',' << s.policy.sample_peers << ','
     << (s.initial.kind == InitialCondition::Kind::Empty ? "empty:" : "one_club:") << s.initial.n << ','
     << trace.departures.size() << ',' << st.count << ',' << (st.defined() ? format_double(st.mean) : "") << ','
     << (st.defined() ? format_double(st.stddev) : "") << ',' << (stab ? format_double(*stab) : "") << ','
     << termination_name(trace.termination) << ',' << format_double(trace.end_time);
  return os.str();
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioFile file = load_scenario(opts.config);
    if (opts.replications) {
      if (*opts.replications < 1) throw ConfigError("replications", "must be >= 1");
      file.replications = *opts.replications;
    }
    const fs::path out = resolve_out(opts, file);
    ensure_dir(out);
    const Scenario& s = file.scenario;
    const std::vector<EventTrace> traces = run_replications(s, file.replications);

    std::string summary = summary_header() + '\n';
    for (std::size_t r = 0; r < traces.size(); ++r)
      summary += summary_row(s, static_cast<int>(r), traces[r], opts.stabilization_epsilon) + '\n';

    write_file_atomic(out / "population.csv", population_csv(traces));
    write_file_atomic(out / "frequencies.csv", frequencies_csv(traces, s.params.m));
    write_file_atomic(out / "departures.csv", departures_csv(traces));
    write_file_atomic(out / "summary.csv", summary);
    if (!opts.quiet) err << "wrote " << traces.size() << " replication(s) to " << out.string() << "\n";
    return int(kOk);
  });
}

int cmd_sweep(const SweepOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioFile file = load_scenario(opts.base.config);
    if (opts.base.replications) {
      if (*opts.base.replications < 1) throw ConfigError("replications", "must be >= 1");
      file.replications = *opts.base.replications;
    }
    if (opts.values.empty()) throw ConfigError("values", "empty value list");
    // Validate every cell before running any of them.
    std::vector<Scenario> cells;
    for (const auto& v : opts.values) {
      Scenario s = file.scenario;
      apply_sweep_value(s, opts.parameter, v);
      cells.push_back(s);
    }
    const fs::path out = resolve_out(opts.base, file);
    ensure_dir(out);

    // Every cell uses the same replication seeds so cells are compared on matched randomness.
    std::string summary = "parameter,value," + summary_header() + '\n';
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::vector<EventTrace> traces = run_replications(cells[c], file.replications);
      for (std::size_t r = 0; r < traces.size(); ++r)
        summary += opts.parameter + ',' + opts.values[c] + ',' +
                   summary_row(cells[c], static_cast<int>(r), traces[r], opts.base.stabilization_epsilon) + '\n';
      if (!opts.base.quiet) err << opts.parameter << "=" << opts.values[c] << " done\n";
    }
    write_file_atomic(out / "summary.csv", summary);
    return int(kOk);
  });
}

int cmd_oracle(const OracleOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.m != 2 && opts.m != 3) throw ConfigError("m", "oracle supports m = 2 or 3");
    if (opts.cap < 0) throw ConfigError("cap", "must be >= 0");
    if (opts.out.empty()) throw ConfigError("out", "no output directory given");
    const oracle::TruncationSpec spec{opts.m, opts.cap};
    if (oracle::count_states(spec) > oracle::kMaxStates)
      throw oracle::StateSpaceTooLarge("cap: state space exceeds 1000000 states");
    ModelParams params{opts.m, opts.lambda, opts.mu, opts.u};
    try {
      params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("params", e.what());
    }
    if (opts.threshold < 1) throw ConfigError("T", "must be >= 1");

    oracle::LyapunovParams lp = oracle::LyapunovParams::theorem_compliant(
        opts.m, opts.threshold, opts.lambda, opts.u, opts.epsilon,
        opts.m_const.value_or(2.0 * double(std::max<long long>(opts.cap, 1))));
    if (opts.c1) lp.c1 = *opts.c1;
    if (opts.c2) lp.c2 = *opts.c2;
    try {
      lp.validate(opts.m, opts.threshold, opts.lambda, opts.u);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("lyapunov", e.what());
    }

    ensure_dir(opts.out);
    const oracle::GeneratorMatrix gen = oracle::build_generator_ms(spec, params, opts.threshold);
    const oracle::GeneratorAudit audit = oracle::audit_generator(gen);
    const oracle::LemmaReport lemmas = oracle::verify_lemmas(gen);
    const oracle::StationaryResult stat = oracle::stationary_distribution(gen);
    const std::vector<oracle::DriftEntry> drift = oracle::drift_report(gen, lp);

    std::vector<int> violations_per_state(gen.states.size(), 0);
    for (const auto& v : lemmas.violations) ++violations_per_state[static_cast<std::size_t>(v.state_id)];

    std::string audit_csv = "state_id,population,state,row_sum_residual,lemma_violations\n";
    std::string stat_csv = "state_id,population,state,probability\n";
    std::string drift_csv = "state_id,population,V,QV,boundary,region\n";
    for (int i = 0; i < gen.size(); ++i) {
      const auto& x = gen.states[static_cast<std::size_t>(i)];
      const std::string head = std::to_string(i) + ',' + std::to_string(x.population()) + ',';
      audit_csv += head + '"' + x.to_string() + "\"," +
                   format_double(audit.row_sum_residual[static_cast<std::size_t>(i)]) + ',' +
                   std::to_string(violations_per_state[static_cast<std::size_t>(i)]) + '\n';
      stat_csv += head + '"' + x.to_string() + "\"," + format_double(stat.p[static_cast<std::size_t>(i)]) + '\n';
      const auto& d = drift[static_cast<std::size_t>(i)];
      drift_csv += head + format_double(d.v) + ',' + format_double(d.qv) + ',' + (d.boundary ? "1" : "0") + ',' +
                   oracle::to_string(d.region) + '\n';
    }
    write_file_atomic(opts.out / "generator-audit.csv", audit_csv);
    write_file_atomic(opts.out / "stationary.csv", stat_csv);
    write_file_atomic(opts.out / "drift.csv", drift_csv);

    if (!opts.quiet) {
      const auto exc = oracle::exceptional_set(drift, lp.epsilon);
      err << gen.size() << " states, max row-sum residual " << audit.max_row_sum_residual << ", lemma violations "
          << lemmas.violations.size() << ", stationary residual " << stat.residual << " (" << stat.transient_states
          << " transient), " << exc.size() << " non-boundary states with QV > -eps\n";
    }
    return int(kOk);
  });
}

}  // namespace swarmsim::cli
