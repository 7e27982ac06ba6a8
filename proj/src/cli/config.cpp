#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "binmem/cli.hpp"
#include "binmem/errors.hpp"
#include "binmem/processes.hpp"

namespace binmem::cli {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* name) { return key == name; });
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double read_double(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + "." + key + " must be finite");
  return d;
}

std::uint64_t read_unsigned(const json& v, const std::string& name) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(name + " must be a non-negative integer");
}

std::string read_string(const json& j, const std::string& key, const std::string& where,
                        std::initializer_list<const char*> choices) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  const auto s = v.get<std::string>();
  if (std::none_of(choices.begin(), choices.end(), [&](const char* c) { return s == c; })) {
    throw ConfigError(where + "." + key + " has unsupported value '" + s + "'");
  }
  return s;
}

bool read_bool(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::vector<std::size_t> read_size_list(const json& v, const std::string& name) {
  if (!v.is_array()) throw ConfigError(name + " must be an array");
  std::vector<std::size_t> out;
  for (const auto& item : v) out.push_back(static_cast<std::size_t>(read_unsigned(item, name)));
  return out;
}

KernelBlock parse_kernel(const json& j) {
  require_object(j, "kernel");
  KernelBlock k;
  if (!j.contains("kind")) throw ConfigError("kernel.kind is required");
  k.kind = read_string(j, "kind", "kernel", {"memory", "constant"});
  if (k.kind == "memory") {
    reject_unknown(j, "kernel (memory)", {"kind", "p", "q"});
    if (!j.contains("p") || !j.contains("q")) throw ConfigError("memory kernel needs p and q");
    k.p = read_double(j, "p", "kernel");
    k.q = read_double(j, "q", "kernel");
  } else {
    reject_unknown(j, "kernel (constant)", {"kind", "c"});
    if (!j.contains("c")) throw ConfigError("constant kernel needs c");
    k.c = read_double(j, "c", "kernel");
  }
  return k;
}

MarketBlock parse_market(const json& j) {
  require_object(j, "market");
  reject_unknown(j, "market", {"N", "N_sweep", "T", "r", "b", "sigma", "s0"});
  MarketBlock m;
  if (j.contains("N") && j.contains("N_sweep")) {
    throw ConfigError("market takes either N or N_sweep, not both");
  }
  if (j.contains("N")) m.N = {static_cast<std::size_t>(read_unsigned(j.at("N"), "market.N"))};
  if (j.contains("N_sweep")) {
    m.N = read_size_list(j.at("N_sweep"), "market.N_sweep");
    m.sweep = true;
    if (m.N.empty()) throw ConfigError("market.N_sweep is empty");
  }
  if (j.contains("T")) m.T = read_double(j, "T", "market");
  if (j.contains("r")) m.r = read_double(j, "r", "market");
  if (j.contains("b")) m.b = read_double(j, "b", "market");
  if (j.contains("sigma")) m.sigma = read_double(j, "sigma", "market");
  if (j.contains("s0")) m.s0 = read_double(j, "s0", "market");
  return m;
}

Bands parse_bands(const json& j) {
  require_object(j, "experiment.bands");
  reject_unknown(j, "experiment.bands", {"variance_slope", "qv_max", "fdd_max"});
  Bands b;
  if (j.contains("variance_slope")) {
    const json& v = j.at("variance_slope");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError("experiment.bands.variance_slope must be [low, high]");
    }
    b.variance_slope_low = v[0].get<double>();
    b.variance_slope_high = v[1].get<double>();
  }
  if (j.contains("qv_max")) b.qv_max = read_double(j, "qv_max", "experiment.bands");
  if (j.contains("fdd_max")) b.fdd_max = read_double(j, "fdd_max", "experiment.bands");
  return b;
}

ExperimentBlock parse_experiment(const json& j) {
  require_object(j, "experiment");
  reject_unknown(j, "experiment",
                 {"seed", "trials", "paths", "samples", "innovation", "engine", "mode", "budget",
                  "use_theorem41", "alpha", "witness", "grid", "n_list", "times", "statistics",
                  "bands"});
  ExperimentBlock e;
  const auto size_field = [&](const char* key, std::size_t& slot) {
    if (j.contains(key)) {
      slot = static_cast<std::size_t>(read_unsigned(j.at(key), std::string("experiment.") + key));
    }
  };
  if (j.contains("seed")) e.seed = read_unsigned(j.at("seed"), "experiment.seed");
  size_field("trials", e.trials);
  size_field("paths", e.paths);
  size_field("samples", e.samples);
  size_field("budget", e.budget);
  size_field("grid", e.grid);
  if (j.contains("innovation")) {
    e.innovation = read_string(j, "innovation", "experiment", {"rademacher", "standard_normal"});
  }
  if (j.contains("engine")) e.engine = read_string(j, "engine", "experiment", {"auto", "fast", "direct"});
  if (j.contains("mode")) {
    e.mode = read_string(j, "mode", "experiment", {"auto", "exact", "monte_carlo"});
  }
  if (j.contains("use_theorem41")) e.use_theorem41 = read_bool(j, "use_theorem41", "experiment");
  if (j.contains("witness")) e.witness = read_bool(j, "witness", "experiment");
  if (j.contains("alpha")) e.alpha = read_double(j, "alpha", "experiment");
  if (j.contains("n_list")) e.n_list = read_size_list(j.at("n_list"), "experiment.n_list");
  if (j.contains("times")) {
    const json& v = j.at("times");
    if (!v.is_array()) throw ConfigError("experiment.times must be an array");
    for (const auto& t : v) {
      if (!t.is_number()) throw ConfigError("experiment.times entries must be numbers");
      e.times.push_back(t.get<double>());
    }
  }
  if (j.contains("statistics")) {
    const json& v = j.at("statistics");
    if (!v.is_array()) throw ConfigError("experiment.statistics must be an array");
    for (const auto& s : v) {
      if (!s.is_string()) throw ConfigError("experiment.statistics entries must be strings");
      e.statistics.push_back(s.get<std::string>());
    }
  }
  if (j.contains("bands")) e.bands = parse_bands(j.at("bands"));
  return e;
}

OutputBlock parse_output(const json& j) {
  require_object(j, "output");
  reject_unknown(j, "output", {"directory", "formats"});
  OutputBlock o;
  if (j.contains("directory")) {
    if (!j.at("directory").is_string()) throw ConfigError("output.directory must be a string");
    o.directory = j.at("directory").get<std::string>();
  }
  if (j.contains("formats")) {
    const json& v = j.at("formats");
    if (!v.is_array()) throw ConfigError("output.formats must be an array");
    o.formats.clear();
    for (const auto& f : v) {
      if (!f.is_string()) throw ConfigError("output.formats entries must be strings");
      o.formats.push_back(f.get<std::string>());
    }
  }
  return o;
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
  require_object(doc, "config");
  reject_unknown(doc, "config", {"kernel", "market", "experiment", "output"});
  if (!doc.contains("kernel")) throw ConfigError("config needs a kernel block");
  RunConfig c;
  c.kernel = parse_kernel(doc.at("kernel"));
  if (doc.contains("market")) c.market = parse_market(doc.at("market"));
  if (doc.contains("experiment")) c.experiment = parse_experiment(doc.at("experiment"));
  if (doc.contains("output")) c.output = parse_output(doc.at("output"));
  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json k;
  k["kind"] = kernel.kind;
  if (kernel.kind == "memory") {
    k["p"] = kernel.p;
    k["q"] = kernel.q;
  } else {
    k["c"] = kernel.c;
  }
  json m;
  if (market.sweep) {
    m["N_sweep"] = market.N;
  } else if (!market.N.empty()) {
    m["N"] = market.N.front();
  }
  m["T"] = market.T;
  m["r"] = market.r;
  m["b"] = market.b;
  m["sigma"] = market.sigma;
  m["s0"] = market.s0;
  json e;
  e["seed"] = experiment.seed;
  e["trials"] = experiment.trials;
  e["paths"] = experiment.paths;
  e["samples"] = experiment.samples;
  e["innovation"] = experiment.innovation;
  e["engine"] = experiment.engine;
  e["mode"] = experiment.mode;
  e["budget"] = experiment.budget;
  e["use_theorem41"] = experiment.use_theorem41;
  if (experiment.alpha) e["alpha"] = *experiment.alpha;
  e["witness"] = experiment.witness;
  e["grid"] = experiment.grid;
  e["n_list"] = experiment.n_list;
  e["times"] = experiment.times;
  e["statistics"] = experiment.statistics;
  json bands;
  bands["variance_slope"] = {experiment.bands.variance_slope_low,
                             experiment.bands.variance_slope_high};
  if (experiment.bands.qv_max) bands["qv_max"] = *experiment.bands.qv_max;
  if (experiment.bands.fdd_max) bands["fdd_max"] = *experiment.bands.fdd_max;
  e["bands"] = bands;
  json o;
  o["directory"] = output.directory;
  o["formats"] = output.formats;
  return json{{"kernel", k}, {"market", m}, {"experiment", e}, {"output", o}};
}

KernelModel RunConfig::make_kernel() const {
  if (kernel.kind == "memory") return KernelModel::memory({kernel.p, kernel.q, market.T});
  return KernelModel::constant(kernel.c, market.T);
}

void RunConfig::validate() const {
  try {
    (void)make_kernel();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  if (!(market.T > 0.0)) throw ConfigError("market.T must be positive");
  if (!(market.sigma > 0.0)) throw ConfigError("market.sigma must be positive");
  if (!(market.s0 > 0.0)) throw ConfigError("market.s0 must be positive");
  for (std::size_t n : market.N) {
    if (n < 1) throw ConfigError("market N values must be positive");
    if (step_count(n, market.T) < 1) throw ConfigError("market N gives floor(N T) = 0 periods");
  }
  for (std::size_t n : experiment.n_list) {
    if (n < 1) throw ConfigError("experiment.n_list entries must be positive");
  }
  for (double t : experiment.times) {
    if (!(t >= 0.0 && t <= market.T)) throw ConfigError("experiment.times must lie in [0, T]");
  }
  static const std::set<std::string> stats{"variance", "qv", "jump", "fdd", "terminal_price"};
  for (const auto& s : experiment.statistics) {
    if (!stats.count(s)) throw ConfigError("unknown statistic '" + s + "'");
  }
  if (experiment.bands.variance_slope_low > experiment.bands.variance_slope_high) {
    throw ConfigError("experiment.bands.variance_slope must have low <= high");
  }
  if (experiment.alpha && !(*experiment.alpha > 0.0 && *experiment.alpha < 1.0)) {
    throw ConfigError("experiment.alpha must lie in (0, 1)");
  }
  if (experiment.grid < 2) throw ConfigError("experiment.grid must be at least 2");
  for (const auto& f : output.formats) {
    if (f != "csv" && f != "json") throw ConfigError("unsupported output format '" + f + "'");
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return RunConfig::from_json(doc);
}

}  // namespace binmem::cli
