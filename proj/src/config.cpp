#include "kaefam/config.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace kaefam {

using nlohmann::json;

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

json default_json() {
  return json{
      {"grid", {{"resolution", 64}, {"tau_re", 0.0}, {"tau_im", 1.0}}},
      {"family",
       {{"potential", nullptr},
        {"H", {1.0, 1.0, 0.0, 0.0}},
        {"base_points", {{0.0, 0.0}}},
        {"epsilon_list", {1.0, 0.5, 0.25, 0.1, 0.05}},
        {"allow_non_psd", false}}},
      {"solver", {{"tol", 1e-12}, {"max_iters", 50}}},
      {"bergman",
       {{"radius", 1.0},
        {"weight", "abs2(t)"},
        {"m_list", {10, 20, 40}},
        {"degree", 24},
        {"quadrature", 64},
        {"points", {{0.0, 0.0}}}}},
      {"output", {{"directory", "out"}, {"formats", {"csv", "json"}}}}};
}

void merge_checked(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object())
    throw ConfigError(prefix.empty() ? "config root: must be a JSON object"
                                     : prefix + ": must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown key '" + path + "'");
    if (base[it.key()].is_object() && !base[it.key()].empty() && it->is_object())
      merge_checked(base[it.key()], *it, path);
    else
      base[it.key()] = *it;
  }
}

std::vector<cplx> read_points(const json& arr, const std::string& key) {
  if (!arr.is_array() || arr.empty())
    throw ConfigError(key + ": must be a non-empty array of [re, im] pairs");
  std::vector<cplx> pts;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ConfigError(key + ": entries must be [re, im] number pairs");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  c.grid.resolution = j["grid"]["resolution"].is_number_integer()
                          ? j["grid"]["resolution"].get<int>()
                          : throw ConfigError("grid.resolution: must be an integer");
  c.grid.tau_re = j["grid"]["tau_re"].get<double>();
  c.grid.tau_im = j["grid"]["tau_im"].get<double>();
  if (!is_pow2(c.grid.resolution) || c.grid.resolution < 8)
    throw ConfigError("grid.resolution: resolution must be a power of two (>= 8)");
  if (!(c.grid.tau_im > 0.0)) throw ConfigError("grid.tau_im: Im tau must be positive");

  const json& fam = j["family"];
  if (!fam["potential"].is_string())
    throw ConfigError("family.potential: required string");
  c.family.potential = fam["potential"].get<std::string>();
  try {
    parse_potential(c.family.potential);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("family.potential: ") + e.what());
  }
  const json& H = fam["H"];
  if (!H.is_array() || H.size() != 4)
    throw ConfigError("family.H: must be [h_tt, h_zz, h_tz_re, h_tz_im]");
  c.family.h_tt = H[0].get<double>();
  c.family.h_zz = H[1].get<double>();
  c.family.h_tz_re = H[2].get<double>();
  c.family.h_tz_im = H[3].get<double>();
  if (c.background().eigmin() < -1e-10)
    throw ConfigError("family.H: must be positive semidefinite");
  c.family.base_points = read_points(fam["base_points"], "family.base_points");
  c.family.epsilon_list.clear();
  for (const auto& e : fam["epsilon_list"]) {
    double v = e.get<double>();
    if (!(v > 0.0)) throw ConfigError("family.epsilon_list: entries must be positive");
    c.family.epsilon_list.push_back(v);
  }
  if (c.family.epsilon_list.empty())
    throw ConfigError("family.epsilon_list: must be non-empty");
  c.family.allow_non_psd = fam["allow_non_psd"].get<bool>();

  c.solver.tol = j["solver"]["tol"].get<double>();
  c.solver.max_iters = j["solver"]["max_iters"].get<int>();
  if (!(c.solver.tol > 0.0 && c.solver.tol < 1.0))
    throw ConfigError("solver.tol: must lie in (0, 1)");
  if (c.solver.max_iters < 1) throw ConfigError("solver.max_iters: must be >= 1");

  const json& bg = j["bergman"];
  c.bergman.radius = bg["radius"].get<double>();
  if (!(c.bergman.radius > 0.0)) throw ConfigError("bergman.radius: must be positive");
  c.bergman.weight = bg["weight"].get<std::string>();
  try {
    PotentialExpr w = parse_potential(c.bergman.weight);
    if (w.depends_on_fiber())
      throw ConfigError("bergman.weight: must not contain fiber modes");
  } catch (const ParseError& e) {
    throw ConfigError(std::string("bergman.weight: ") + e.what());
  }
  c.bergman.m_list.clear();
  for (const auto& m : bg["m_list"]) {
    int v = m.get<int>();
    if (v < 1) throw ConfigError("bergman.m_list: entries must be positive integers");
    c.bergman.m_list.push_back(v);
  }
  if (c.bergman.m_list.empty()) throw ConfigError("bergman.m_list: must be non-empty");
  c.bergman.degree = bg["degree"].get<int>();
  if (c.bergman.degree < 0) throw ConfigError("bergman.degree: must be >= 0");
  c.bergman.quadrature = bg["quadrature"].get<int>();
  if (c.bergman.quadrature < 8) throw ConfigError("bergman.quadrature: must be >= 8");
  c.bergman.points = read_points(bg["points"], "bergman.points");
  for (cplx p : c.bergman.points)
    if (std::abs(p) >= c.bergman.radius)
      throw ConfigError("bergman.points: points must lie inside the chart radius");

  const json& out = j["output"];
  c.output.directory = out["directory"].get<std::string>();
  c.output.formats.clear();
  for (const auto& f : out["formats"]) {
    std::string s = f.get<std::string>();
    if (s != "csv" && s != "json")
      throw ConfigError("output.formats: entries must be 'csv' or 'json'");
    c.output.formats.push_back(s);
  }
  return c;
}

json to_json(const RunConfig& c) {
  json pts = json::array();
  for (cplx p : c.family.base_points) pts.push_back({p.real(), p.imag()});
  json bpts = json::array();
  for (cplx p : c.bergman.points) bpts.push_back({p.real(), p.imag()});
  return json{
      {"grid",
       {{"resolution", c.grid.resolution},
        {"tau_re", c.grid.tau_re},
        {"tau_im", c.grid.tau_im}}},
      {"family",
       {{"potential", c.family.potential},
        {"H", {c.family.h_tt, c.family.h_zz, c.family.h_tz_re, c.family.h_tz_im}},
        {"base_points", pts},
        {"epsilon_list", c.family.epsilon_list},
        {"allow_non_psd", c.family.allow_non_psd}}},
      {"solver", {{"tol", c.solver.tol}, {"max_iters", c.solver.max_iters}}},
      {"bergman",
       {{"radius", c.bergman.radius},
        {"weight", c.bergman.weight},
        {"m_list", c.bergman.m_list},
        {"degree", c.bergman.degree},
        {"quadrature", c.bergman.quadrature},
        {"points", bpts}}},
      {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
}

} // namespace

std::string RunConfig::to_json_text() const { return to_json(*this).dump(2); }

RunConfig parse_config_text(const std::string& json_text) {
  json user;
  try {
    user = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  json merged = default_json();
  merge_checked(merged, user, "");
  return from_json(merged);
}

RunConfig load_config(const std::string& path) { return load_config_file(path).config; }

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  for (int i = 15; i >= 0; --i) os << "0123456789abcdef"[(h >> (4 * i)) & 0xf];
  return os.str();
}

LoadedConfig load_config_file(const std::string& path,
                              const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();

  LoadedConfig lc;
  lc.raw_bytes = buf.str();
  lc.hash = fnv1a_hex(lc.raw_bytes);

  json user;
  try {
    user = json::parse(lc.raw_bytes);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + ov + "' must have the form key=value");
    std::string key = ov.substr(0, eq);
    std::string val = ov.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(val);
    } catch (const json::parse_error&) {
      parsed = val; // plain string
    }
    json* node = &user;
    std::size_t start = 0;
    for (;;) {
      auto dot = key.find('.', start);
      std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
      if (part.empty()) throw ConfigError("override key '" + key + "' is malformed");
      if (dot == std::string::npos) {
        (*node)[part] = parsed;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  json merged = default_json();
  merge_checked(merged, user, "");
  lc.config = from_json(merged);
  return lc;
}

} // namespace kaefam
