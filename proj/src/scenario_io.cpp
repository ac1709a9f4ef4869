#include "swarmsim/scenario_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace swarmsim {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(prefix + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path, "missing required key");
  return *it;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

// Validation errors are "field: message"; lift the field into ConfigError.
[[noreturn]] void rethrow_as_config_error(const std::invalid_argument& e) {
  const std::string what = e.what();
  const auto colon = what.find(':');
  if (colon == std::string::npos) throw ConfigError("scenario", what);
  std::string msg = what.substr(colon + 1);
  if (!msg.empty() && msg.front() == ' ') msg.erase(0, 1);
  throw ConfigError(what.substr(0, colon), msg);
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("document", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("document", "expected a JSON object");
  reject_unknown(doc, "",
                 {"m", "lambda", "mu", "u", "policy", "initial", "horizon", "max_population", "rng_seed",
                  "warmup_departures", "sample_interval", "replications", "output_dir"});

  ScenarioFile f;
  Scenario& s = f.scenario;
  s.params.m = static_cast<int>(get_integer(require(doc, "m", "m"), "m"));
  s.params.lambda = get_number(require(doc, "lambda", "lambda"), "lambda");
  if (doc.contains("mu")) s.params.mu = get_number(doc["mu"], "mu");
  if (doc.contains("u")) s.params.u = get_number(doc["u"], "u");

  const json& pol = require(doc, "policy", "policy");
  if (!pol.is_object()) throw ConfigError("policy", "expected an object");
  reject_unknown(pol, "policy.", {"kind", "T", "alpha", "sample_peers", "cc_variant"});
  try {
    s.policy.kind = policy_kind_from_string(get_string(require(pol, "kind", "policy.kind"), "policy.kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("policy.kind", e.what());
  }
  if (pol.contains("T")) s.policy.threshold = static_cast<int>(get_integer(pol["T"], "policy.T"));
  if (pol.contains("alpha")) s.policy.alpha = get_number(pol["alpha"], "policy.alpha");
  if (pol.contains("sample_peers"))
    s.policy.sample_peers = static_cast<int>(get_integer(pol["sample_peers"], "policy.sample_peers"));
  if (pol.contains("cc_variant")) {
    try {
      s.policy.cc_variant = cc_variant_from_string(get_string(pol["cc_variant"], "policy.cc_variant"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("policy.cc_variant", e.what());
    }
  }

  if (doc.contains("initial")) {
    const json& init = doc["initial"];
    if (!init.is_object()) throw ConfigError("initial", "expected an object");
    reject_unknown(init, "initial.", {"kind", "n"});
    const std::string kind = get_string(require(init, "kind", "initial.kind"), "initial.kind");
    if (kind == "empty") {
      s.initial.kind = InitialCondition::Kind::Empty;
    } else if (kind == "one_club") {
      s.initial.kind = InitialCondition::Kind::OneClub;
    } else {
      throw ConfigError("initial.kind", "expected \"empty\" or \"one_club\"");
    }
    s.initial.n = get_integer(require(init, "n", "initial.n"), "initial.n");
  }

  s.horizon = get_number(require(doc, "horizon", "horizon"), "horizon");
  if (doc.contains("max_population")) s.max_population = get_integer(doc["max_population"], "max_population");
  if (doc.contains("rng_seed")) {
    const json& v = doc["rng_seed"];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError("rng_seed", "expected a non-negative integer");
    s.rng_seed = v.get<std::uint64_t>();
  }
  if (doc.contains("warmup_departures"))
    s.warmup_departures = get_integer(doc["warmup_departures"], "warmup_departures");
  if (doc.contains("sample_interval")) s.sample_interval = get_number(doc["sample_interval"], "sample_interval");
  if (doc.contains("replications")) {
    f.replications = static_cast<int>(get_integer(doc["replications"], "replications"));
    if (f.replications < 1) throw ConfigError("replications", "must be >= 1");
  }
  if (doc.contains("output_dir")) f.output_dir = get_string(doc["output_dir"], "output_dir");

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    rethrow_as_config_error(e);
  }
  return f;
}

std::string serialize_scenario(const ScenarioFile& f) {
  const Scenario& s = f.scenario;
  json doc = json::object();
  doc["m"] = s.params.m;
  doc["lambda"] = s.params.lambda;
  doc["mu"] = s.params.mu;
  doc["u"] = s.params.u;
  doc["policy"] = {{"kind", std::string(to_string(s.policy.kind))},
                   {"T", s.policy.threshold},
                   {"alpha", s.policy.alpha},
                   {"sample_peers", s.policy.sample_peers},
                   {"cc_variant", std::string(to_string(s.policy.cc_variant))}};
  doc["initial"] = {{"kind", s.initial.kind == InitialCondition::Kind::Empty ? "empty" : "one_club"},
                    {"n", s.initial.n}};
  doc["horizon"] = s.horizon;
  if (s.max_population > 0) doc["max_population"] = s.max_population;
  doc["rng_seed"] = s.rng_seed;
  doc["warmup_departures"] = s.warmup_departures;
  doc["sample_interval"] = s.sample_interval;
  doc["replications"] = f.replications;
  if (!f.output_dir.empty()) doc["output_dir"] = f.output_dir;
  return doc.dump(2) + "\n";
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace swarmsim
