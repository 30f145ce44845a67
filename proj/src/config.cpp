#include "nlmimo/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nlmimo {

using nlohmann::json;

namespace {

// Object reader that tracks consumed keys so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected a mapping");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void mark(const std::string& key) { used_.insert(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    return convert<T>(j_.at(key), path_ + "." + key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(path_ + "." + key + ": required");
    return convert<T>(j_.at(key), path_ + "." + key);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return convert<T>(j_.at(key), path_ + "." + key);
  }

  std::optional<Section> child(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return Section(j_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError(path_ + "." + item.key() + ": unknown key");
    }
  }

  const std::string& path() const { return path_; }

  template <class T>
  static T convert(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        return v.get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
        return v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where + ": expected a string");
        return v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() < 1.8e19 &&
            std::floor(v.get<double>()) == v.get<double>()) {
          return static_cast<T>(v.get<double>());
        }
        throw ConfigError(where + ": expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, int>) {
        if (v.is_number_integer()) return v.get<int>();
        if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
          return static_cast<int>(v.get<double>());
        }
        throw ConfigError(where + ": expected an integer");
      } else if constexpr (std::is_same_v<T, std::vector<double>> ||
                           std::is_same_v<T, std::vector<int>>) {
        if (!v.is_array()) throw ConfigError(where + ": expected a list");
        T out;
        for (std::size_t i = 0; i < v.size(); ++i) {
          out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
        }
        return out;
      } else {
        static_assert(sizeof(T) == 0, "unsupported config type");
      }
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

QuantizerKind parse_quantizer_kind(const std::string& s, const std::string& where) {
  if (s == "uniform") return QuantizerKind::uniform;
  if (s == "lloyd_max") return QuantizerKind::lloyd_max;
  throw ConfigError(where + ": unknown quantizer '" + s + "' (uniform|lloyd_max)");
}

std::string quantizer_name(QuantizerKind k) {
  return k == QuantizerKind::uniform ? "uniform" : "lloyd_max";
}

PowerControlConfig parse_pc(Section s) {
  PowerControlConfig pc;
  pc.scheme = parse_pc_scheme(s.get<std::string>("scheme", "none"));
  pc.sinr_th_db = s.get<double>("sinr_th_db", pc.sinr_th_db);
  pc.n_iter = s.get<int>("n_iter", pc.n_iter);
  pc.tol_db = s.get<double>("tol_db", pc.tol_db);
  pc.effective_noise = s.get<bool>("effective_noise", pc.effective_noise);
  s.finish();
  pc.validate();
  return pc;
}

json pc_to_json(const PowerControlConfig& pc) {
  return {{"scheme", to_string(pc.scheme)},
          {"sinr_th_db", pc.sinr_th_db},
          {"n_iter", pc.n_iter},
          {"tol_db", pc.tol_db},
          {"effective_noise", pc.effective_noise}};
}

Scenario parse_scenario(Section s) {
  Scenario sc;
  const int n = s.get<int>("antennas", sc.geometry.num_antennas);
  const double spacing = s.get<double>("d_over_lambda", sc.geometry.spacing_wavelengths);
  const auto carrier = s.opt<double>("carrier_hz");
  const auto wavelength = s.opt<double>("wavelength_m");
  if (carrier && wavelength) throw ConfigError(s.path() + ": give carrier_hz or wavelength_m, not both");
  double lambda = sc.geometry.wavelength;
  if (carrier) {
    if (!(*carrier > 0.0)) throw ConfigError(s.path() + ".carrier_hz: must be positive");
    lambda = kSpeedOfLight / *carrier;
  }
  if (wavelength) lambda = *wavelength;
  if (n < 1 || !(spacing > 0.0) || !(lambda > 0.0)) {
    throw ConfigError(s.path() + ": need antennas >= 1 and positive spacing and wavelength");
  }
  sc.geometry = ArrayGeometry(n, spacing, lambda);

  const auto users = s.opt<int>("users");
  const auto beta = s.opt<double>("beta");
  if (users && beta) throw ConfigError(s.path() + ": give users or beta, not both");
  if (users) sc.num_users = *users;
  if (beta) {
    sc.num_users = static_cast<int>(std::lround(*beta * n));
    if (std::abs(sc.num_users - *beta * n) > 1e-9) {
      throw ConfigError(s.path() + ".beta: beta * antennas must be an integer");
    }
  }
  sc.r_min = s.get<double>("r_min", sc.r_min);
  sc.r_max = s.get<double>("r_max", sc.r_max);
  sc.delta_omega_min = s.get<double>("delta_omega_min", sc.delta_omega_min);
  sc.snr_edge_db = s.get<double>("snr_edge_db", sc.snr_edge_db);
  if (auto pc = s.child("power_control")) sc.pc = parse_pc(*pc);
  s.finish();
  sc.validate();
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  return {{"antennas", sc.geometry.num_antennas},
          {"d_over_lambda", sc.geometry.spacing_wavelengths},
          {"wavelength_m", sc.geometry.wavelength},
          {"users", sc.num_users},
          {"r_min", sc.r_min},
          {"r_max", sc.r_max},
          {"delta_omega_min", sc.delta_omega_min},
          {"snr_edge_db", sc.snr_edge_db},
          {"power_control", pc_to_json(sc.pc)}};
}

ChainSpec parse_chain_section(Section s) {
  ChainSpec c;
  if (auto lim = s.child("limiter")) {
    ChainSpec::LimiterSpec l;
    l.threshold_db = lim->get<double>("threshold_db", l.threshold_db);
    l.gain_db = lim->get<double>("gain_db", l.gain_db);
    l.per_dimension = lim->get<bool>("per_dimension", l.per_dimension);
    lim->finish();
    c.limiter = l;
  }
  c.p1db_pb_db = s.opt<double>("p1db_pb_db");
  c.p1db_bb_db = s.opt<double>("p1db_bb_db");
  c.bits = s.get<int>("bits", 0);
  if (c.bits < 0 || c.bits > 8) throw ConfigError(s.path() + ".bits: must be in 0..8");
  c.quantizer = parse_quantizer_kind(s.get<std::string>("quantizer", "uniform"), s.path());
  c.agc = s.get<bool>("agc", false);
  s.finish();
  return c;
}

BussgangOptions parse_bussgang(Section s) {
  BussgangOptions b;
  b.samples = s.get<std::size_t>("samples", b.samples);
  b.method = s.get<std::string>("method", b.method);
  if (b.method != "mc" && b.method != "quadrature") {
    throw ConfigError(s.path() + ".method: expected mc or quadrature");
  }
  if (b.samples < 2) throw ConfigError(s.path() + ".samples: too small");
  s.finish();
  return b;
}

SimulateOptions parse_simulate(Section s) {
  SimulateOptions o;
  o.n_symbols = s.get<std::size_t>("n_symbols", o.n_symbols);
  o.n_drops = s.get<int>("n_drops", o.n_drops);
  o.target_ber = s.get<double>("target_ber", o.target_ber);
  o.availability = s.get<double>("availability", o.availability);
  o.snr_lo_db = s.get<double>("snr_lo_db", o.snr_lo_db);
  o.snr_hi_db = s.get<double>("snr_hi_db", o.snr_hi_db);
  o.tol_db = s.get<double>("tol_db", o.tol_db);
  o.snr_points_db = s.get<std::vector<double>>("snr_points_db", {});
  o.bussgang_samples = s.get<std::size_t>("bussgang_samples", o.bussgang_samples);
  o.eta_ideal_db = s.opt<double>("eta_ideal_db");
  s.finish();
  if (o.n_symbols == 0 || o.n_drops < 1) throw ConfigError(s.path() + ": need symbols and drops");
  if (!(o.target_ber > 0.0 && o.target_ber < 0.5)) {
    throw ConfigError(s.path() + ".target_ber: must be in (0, 0.5)");
  }
  if (!(o.availability > 0.0 && o.availability <= 1.0)) {
    throw ConfigError(s.path() + ".availability: must be in (0, 1]");
  }
  if (!(o.snr_lo_db < o.snr_hi_db) || !(o.tol_db > 0.0)) {
    throw ConfigError(s.path() + ": need snr_lo_db < snr_hi_db and tol_db > 0");
  }
  return o;
}

json simulate_to_json(const SimulateOptions& o) {
  json j = {{"n_symbols", o.n_symbols},     {"n_drops", o.n_drops},
            {"target_ber", o.target_ber},   {"availability", o.availability},
            {"snr_lo_db", o.snr_lo_db},     {"snr_hi_db", o.snr_hi_db},
            {"tol_db", o.tol_db},           {"snr_points_db", o.snr_points_db},
            {"bussgang_samples", o.bussgang_samples}};
  if (o.eta_ideal_db) j["eta_ideal_db"] = *o.eta_ideal_db;
  return j;
}

EtaConfig parse_eta(Section s) {
  EtaConfig e;
  e.method = parse_eta_method(s.get<std::string>("method", to_string(e.method)));
  e.n_drops = s.get<int>("n_drops", e.n_drops);
  e.n_symbols = s.get<std::size_t>("n_symbols", e.n_symbols);
  e.snr_lo_db = s.get<double>("snr_lo_db", e.snr_lo_db);
  e.snr_hi_db = s.get<double>("snr_hi_db", e.snr_hi_db);
  e.tol_db = s.get<double>("tol_db", e.tol_db);
  e.availability = s.get<double>("availability", e.availability);
  s.finish();
  if (e.n_drops < 1) throw ConfigError(s.path() + ".n_drops: must be >= 1");
  return e;
}

json eta_to_json(const EtaConfig& e) {
  return {{"method", to_string(e.method)}, {"n_drops", e.n_drops},
          {"n_symbols", e.n_symbols},       {"snr_lo_db", e.snr_lo_db},
          {"snr_hi_db", e.snr_hi_db},       {"tol_db", e.tol_db},
          {"availability", e.availability}};
}

DesignOptions parse_design(Section s) {
  DesignOptions o;
  if (s.has("rows")) {
    const auto& rows = s.raw("rows");
    if (!rows.is_array()) throw ConfigError(s.path() + ".rows: expected a list");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Section r(rows[i], s.path() + ".rows[" + std::to_string(i) + "]");
      DesignRow row;
      row.beta = r.require<double>("beta");
      row.pc = parse_pc_scheme(r.get<std::string>("pc", "none"));
      row.snr_edge_db = r.opt<double>("snr_edge_db");
      row.gamma_g_db = r.opt<double>("gamma_g_db");
      row.eta_ideal_db = r.opt<double>("eta_ideal_db");
      r.finish();
      if (!(row.beta > 0.0 && row.beta <= 1.0)) throw ConfigError(r.path() + ".beta: must be in (0, 1]");
      if (row.snr_edge_db.has_value() == row.gamma_g_db.has_value()) {
        throw ConfigError(r.path() + ": give exactly one of snr_edge_db or gamma_g_db");
      }
      if (row.eta_ideal_db && *row.eta_ideal_db > 0.0) {
        throw ConfigError(r.path() + ".eta_ideal_db: efficiency must be <= 0 dB");
      }
      o.rows.push_back(row);
    }
  } else {
    s.mark("rows");
  }
  o.sinr_target_db = s.opt<double>("sinr_target_db");
  o.target_ber = s.get<double>("target_ber", o.target_ber);
  if (auto e = s.child("eta")) o.eta = parse_eta(*e);
  o.bits = s.get<std::vector<int>>("bits", o.bits);
  o.p1db_min_db = s.get<double>("p1db_min_db", o.p1db_min_db);
  o.p1db_max_db = s.get<double>("p1db_max_db", o.p1db_max_db);
  o.p1db_step_db = s.get<double>("p1db_step_db", o.p1db_step_db);
  o.samples = s.get<std::size_t>("samples", o.samples);
  o.alpha_drops = s.get<std::size_t>("alpha_drops", o.alpha_drops);
  s.finish();
  if (o.bits.empty()) throw ConfigError(s.path() + ".bits: must not be empty");
  for (int b : o.bits) {
    if (b < 1 || b > 8) throw ConfigError(s.path() + ".bits: values must be in 1..8");
  }
  if (!(o.p1db_step_db > 0.0) || !(o.p1db_min_db <= o.p1db_max_db)) {
    throw ConfigError(s.path() + ": need p1db_step_db > 0 and p1db_min_db <= p1db_max_db");
  }
  if (o.alpha_drops < 2) throw ConfigError(s.path() + ".alpha_drops: must be >= 2");
  return o;
}

json design_to_json(const DesignOptions& o) {
  json rows = json::array();
  for (const auto& r : o.rows) {
    json jr = {{"beta", r.beta}, {"pc", to_string(r.pc)}};
    if (r.snr_edge_db) jr["snr_edge_db"] = *r.snr_edge_db;
    if (r.gamma_g_db) jr["gamma_g_db"] = *r.gamma_g_db;
    if (r.eta_ideal_db) jr["eta_ideal_db"] = *r.eta_ideal_db;
    rows.push_back(jr);
  }
  json j = {{"rows", rows},
            {"target_ber", o.target_ber},
            {"eta", eta_to_json(o.eta)},
            {"bits", o.bits},
            {"p1db_min_db", o.p1db_min_db},
            {"p1db_max_db", o.p1db_max_db},
            {"p1db_step_db", o.p1db_step_db},
            {"samples", o.samples},
            {"alpha_drops", o.alpha_drops}};
  if (o.sinr_target_db) j["sinr_target_db"] = *o.sinr_target_db;
  return j;
}

SweepOptions parse_sweep(Section s) {
  SweepOptions o;
  o.betas = s.get<std::vector<double>>("betas", {});
  if (s.has("pc")) {
    const auto& pcs = s.raw("pc");
    if (!pcs.is_array()) throw ConfigError(s.path() + ".pc: expected a list");
    for (const auto& p : pcs) {
      o.pc.push_back(parse_pc_scheme(Section::convert<std::string>(p, s.path() + ".pc")));
    }
  } else {
    s.mark("pc");
  }
  if (s.has("chains")) {
    const auto& chains = s.raw("chains");
    if (!chains.is_array()) throw ConfigError(s.path() + ".chains: expected a list");
    for (std::size_t i = 0; i < chains.size(); ++i) {
      const std::string where = s.path() + ".chains[" + std::to_string(i) + "]";
      Section c(chains[i], where);
      SweepChain sc;
      sc.name = c.require<std::string>("name");
      auto spec = c.child("chain");
      if (!spec) throw ConfigError(where + ".chain: required");
      sc.chain = parse_chain_section(*spec);
      c.finish();
      o.chains.push_back(sc);
    }
  } else {
    s.mark("chains");
  }
  o.out_dir = s.get<std::string>("out_dir", "");
  s.finish();
  for (double b : o.betas) {
    if (!(b > 0.0 && b <= 1.0)) throw ConfigError(s.path() + ".betas: values must be in (0, 1]");
  }
  return o;
}

json sweep_to_json(const SweepOptions& o) {
  json pcs = json::array();
  for (auto p : o.pc) pcs.push_back(to_string(p));
  json chains = json::array();
  for (const auto& c : o.chains) chains.push_back({{"name", c.name}, {"chain", to_json(c.chain)}});
  return {{"betas", o.betas}, {"pc", pcs}, {"chains", chains}, {"out_dir", o.out_dir}};
}

json yaml_node_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : n) arr.push_back(yaml_node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (obj.contains(key)) throw ConfigError("duplicate key '" + key + "'");
        obj[key] = yaml_node_to_json(kv.second);
      }
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      if (s == "true" || s == "True") return true;
      if (s == "false" || s == "False") return false;
      if (s == "~" || s == "null") return nullptr;
      // Integers first so large seeds keep all 64 bits.
      if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
        try {
          return std::stoull(s);
        } catch (const std::out_of_range&) {
        }
      }
      if (!s.empty() && s[0] == '-' && s.size() > 1 &&
          s.find_first_not_of("0123456789", 1) == std::string::npos) {
        return std::stoll(s);
      }
      try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      return s;
    }
  }
  return nullptr;
}

}  // namespace

NonlinearChain ChainSpec::build() const {
  NonlinearChain c = make_cascade(p1db_pb_db, p1db_bb_db, bits, quantizer);
  if (limiter) {
    const double g = from_db(0.5 * limiter->gain_db);  // amplitude gain
    c.limiter = Limiter(g, from_db(limiter->threshold_db) * g * g, limiter->per_dimension);
  }
  if (agc) c.agc = true;
  return c;
}

ChainSpec parse_chain(const json& j, const std::string& where) {
  return parse_chain_section(Section(j, where));
}

json to_json(const ChainSpec& c) {
  json j = json::object();
  if (c.limiter) {
    j["limiter"] = {{"threshold_db", c.limiter->threshold_db},
                    {"gain_db", c.limiter->gain_db},
                    {"per_dimension", c.limiter->per_dimension}};
  }
  if (c.p1db_pb_db) j["p1db_pb_db"] = *c.p1db_pb_db;
  if (c.p1db_bb_db) j["p1db_bb_db"] = *c.p1db_bb_db;
  j["bits"] = c.bits;
  j["quantizer"] = quantizer_name(c.quantizer);
  j["agc"] = c.agc;
  return j;
}

std::uint64_t RunConfig::require_seed(const std::string& command) const {
  if (!seed) throw ConfigError(command + ": a seed is required (config 'seed' or --seed)");
  return *seed;
}

RunConfig parse_config(const json& j) {
  Section root(j, "config");
  RunConfig c;
  c.seed = root.opt<std::uint64_t>("seed");
  c.workers = root.get<int>("workers", 0);
  if (c.workers < 0) throw ConfigError("config.workers: must be >= 0");
  if (auto out = root.child("output")) {
    c.format = out->get<std::string>("format", c.format);
    c.out_path = out->get<std::string>("path", "");
    out->finish();
  }
  if (c.format != "csv" && c.format != "json") throw ConfigError("config.output.format: csv or json");
  if (auto s = root.child("scenario")) c.scenario = parse_scenario(*s);
  if (auto s = root.child("chain")) c.chain = parse_chain_section(*s);
  if (auto s = root.child("bussgang")) c.bussgang = parse_bussgang(*s);
  if (auto s = root.child("simulate")) c.simulate = parse_simulate(*s);
  if (auto s = root.child("design")) c.design = parse_design(*s);
  if (auto s = root.child("sweep")) c.sweep = parse_sweep(*s);
  root.finish();
  return c;
}

json to_json(const RunConfig& c) {
  json j = {{"workers", c.workers},
            {"output", {{"format", c.format}, {"path", c.out_path}}},
            {"scenario", scenario_to_json(c.scenario)},
            {"chain", to_json(c.chain)},
            {"bussgang", {{"samples", c.bussgang.samples}, {"method", c.bussgang.method}}},
            {"simulate", simulate_to_json(c.simulate)},
            {"design", design_to_json(c.design)},
            {"sweep", sweep_to_json(c.sweep)}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

json yaml_to_json(const std::string& text) {
  try {
    const YAML::Node root = YAML::Load(text);
    if (!root.IsDefined() || root.IsNull()) return json::object();
    return yaml_node_to_json(root);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
}

json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool is_json = (first != std::string::npos && text[first] == '{') ||
                       (path.size() >= 5 && path.substr(path.size() - 5) == ".json");
  if (is_json) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("JSON: ") + e.what());
    }
  }
  return yaml_to_json(text);
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("workers");
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nlmimo
