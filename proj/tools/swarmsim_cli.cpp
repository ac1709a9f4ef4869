// swarmsim: simulate chunk-sharing swarms, sweep parameters, and run the exact CTMC oracle.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "swarmsim/commands.hpp"

using namespace swarmsim;

int main(int argc, char** argv) {
  CLI::App app{"Chunk-level P2P swarm simulator and mode-suppression oracle"};
  app.require_subcommand(1);

  std::string default_out;
  if (const char* env = std::getenv("SWARMSIM_OUT")) default_out = env;

  cli::SimulateOptions sim;
  std::string sim_out = default_out;
  int sim_reps = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write population/frequency/departure CSVs");
  simulate->add_option("--config", sim.config, "Scenario JSON file")->required();
  simulate->add_option("--out", sim_out, "Output directory");
  simulate->add_option("--replications", sim_reps, "Override the scenario's replication count");
  simulate->add_option("--stabilization-epsilon", sim.stabilization_epsilon, "Frequency gap counted as stabilized");
  simulate->add_flag("--quiet", sim.quiet, "Suppress progress output");

  cli::SweepOptions sweep;
  std::string sweep_out = default_out;
  int sweep_reps = 0;
  auto* sw = app.add_subcommand("sweep", "Run a scenario once per parameter value; write summary.csv");
  sw->add_option("--config", sweep.base.config, "Scenario JSON file")->required();
  sw->add_option("--param", sweep.parameter, "lambda | m | T | policy.kind | sample_peers")->required();
  sw->add_option("--values", sweep.values, "Comma-separated values (T accepts multiples of m, e.g. 2m)")
      ->delimiter(',');
  sw->add_option("--out", sweep_out, "Output directory");
  sw->add_option("--replications", sweep_reps, "Override the scenario's replication count");
  sw->add_option("--stabilization-epsilon", sweep.base.stabilization_epsilon, "Frequency gap counted as stabilized");
  sw->add_flag("--quiet", sweep.base.quiet, "Suppress progress output");

  cli::OracleOptions orc;
  std::string orc_out = default_out;
  double m_const = 0.0, c1 = 0.0, c2 = 0.0;
  auto* oracle = app.add_subcommand("oracle", "Exact truncated-CTMC audit, stationary law and Lyapunov drift");
  oracle->add_option("--m", orc.m, "Chunks per file (2 or 3)")->required();
  oracle->add_option("--cap", orc.cap, "Maximum population of the truncated chain")->required();
  oracle->add_option("--lambda", orc.lambda, "Peer arrival rate");
  oracle->add_option("--mu", orc.mu, "Peer contact rate");
  oracle->add_option("--u", orc.u, "Seed contact rate");
  oracle->add_option("--T", orc.threshold, "Mode-suppression threshold");
  oracle->add_option("--epsilon", orc.epsilon, "Drift margin");
  auto* m_opt = oracle->add_option("--M", m_const, "Lyapunov constant M (default 2*cap)");
  auto* c1_opt = oracle->add_option("--C1", c1, "Lyapunov constant C1 (default (2T-1)(m-1)+1)");
  auto* c2_opt = oracle->add_option("--C2", c2, "Lyapunov constant C2 (default 2m^2(C1 lambda+eps)/U)");
  oracle->add_option("--out", orc_out, "Output directory");
  oracle->add_flag("--quiet", orc.quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kUsage;
  }

  if (simulate->parsed()) {
    sim.out = sim_out;
    if (simulate->count("--replications")) sim.replications = sim_reps;
    return cli::cmd_simulate(sim, std::cerr);
  }
  if (sw->parsed()) {
    sweep.base.out = sweep_out;
    if (sw->count("--replications")) sweep.base.replications = sweep_reps;
    return cli::cmd_sweep(sweep, std::cerr);
  }
  orc.out = orc_out;
  if (m_opt->count()) orc.m_const = m_const;
  if (c1_opt->count()) orc.c1 = c1;
  if (c2_opt->count()) orc.c2 = c2;
  return cli::cmd_oracle(orc, std::cerr);
}
