#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/engine.hpp"

namespace swarmsim::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kInternal = 4 };

struct SimulateOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<int> replications;
  double stabilization_epsilon = 0.05;
  bool quiet = false;
};

struct SweepOptions {
  SimulateOptions base;
  std::string parameter;            // lambda | m | T | policy.kind | sample_peers
  std::vector<std::string> values;  // T accepts multiples of m such as "2m"
};

struct OracleOptions {
  int m = 2;
  long long cap = 6;
  double lambda = 1.0;
  double mu = 1.0;
  double u = 1.0;
  int threshold = 1;
  double epsilon = 1.0;
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<double> m_const;  // default 2 * cap
  std::filesystem::path out;
  bool quiet = false;
};

// Each returns a process exit code and reports errors on `err`.
int cmd_simulate(const SimulateOptions& opts, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& err);
int cmd_oracle(const OracleOptions& opts, std::ostream& err);

// CSV renderers shared by the commands.
std::string population_csv(const std::vector<EventTrace>& traces);
std::string frequencies_csv(const std::vector<EventTrace>& traces, int m);
std::string departures_csv(const std::vector<EventTrace>& traces);
std::string summary_header();
std::string summary_row(const Scenario& s, int replication, const EventTrace& trace, double stabilization_epsilon);

}  // namespace swarmsim::cli
