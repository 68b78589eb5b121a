#include "conegreen/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace conegreen {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_double(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) return to_double(s.substr(0, slash)) / to_double(s.substr(slash + 1));
  const std::string t = trim(s);
  if (t == "pi") return std::numbers::pi;
  std::size_t used = 0;
  const double v = std::stod(t, &used);
  if (used != t.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s) {
  const std::string t = trim(s);
  std::size_t used = 0;
  const long long v = std::stoll(t, &used);
  if (used != t.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

std::uint64_t to_uint(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty() || t[0] == '-') throw std::invalid_argument("not a non-negative integer: '" + s + "'");
  std::size_t used = 0;
  const unsigned long long v = std::stoull(t, &used, 0);
  if (used != t.size()) throw std::invalid_argument("not a non-negative integer: '" + s + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(to_double(part));
  return out;
}

Point to_point(const std::string& s) {
  std::vector<std::int64_t> c;
  for (const auto& part : split(s, ',')) c.push_back(to_int(part));
  return Point(c);
}

GreenMethod to_method(const std::string& s) {
  if (s == "dp") return GreenMethod::dp;
  if (s == "mc") return GreenMethod::mc;
  if (s == "tilted") return GreenMethod::tilted;
  if (s == "auto") return GreenMethod::auto_select;
  throw std::invalid_argument("method must be dp, mc, tilted or auto, got '" + s + "'");
}

std::vector<Atom> to_atoms(const std::string& s) {
  // "1,0:1/4; -1,0:1/4; ..."
  std::vector<Atom> atoms;
  for (const auto& part : split(s, ';')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("atom '" + part + "' needs step:probability");
    atoms.push_back({to_point(part.substr(0, colon)), to_double(part.substr(colon + 1))});
  }
  return atoms;
}

using Setter = void (*)(ExperimentConfig&, const std::string&);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"dist.kind", [](ExperimentConfig& c, const std::string& v) { c.dist_kind = v; }},
      {"dist.d", [](ExperimentConfig& c, const std::string& v) { c.dist_dim = static_cast<int>(to_int(v)); }},
      {"dist.beta", [](ExperimentConfig& c, const std::string& v) { c.williamson_beta = to_double(v); }},
      {"dist.n_max", [](ExperimentConfig& c, const std::string& v) { c.williamson_n_max = static_cast<int>(to_int(v)); }},
      {"dist.atoms", [](ExperimentConfig& c, const std::string& v) { c.custom_atoms = to_atoms(v); }},
      {"cone.kind", [](ExperimentConfig& c, const std::string& v) { c.cone_kind = v; }},
      {"cone.d", [](ExperimentConfig& c, const std::string& v) { c.dim = static_cast<int>(to_int(v)); }},
      {"cone.beta", [](ExperimentConfig& c, const std::string& v) { c.wedge_opening = to_double(v); }},
      {"start", [](ExperimentConfig& c, const std::string& v) { c.start = to_point(v); }},
      {"start2", [](ExperimentConfig& c, const std::string& v) { c.start2 = to_point(v); }},
      {"target", [](ExperimentConfig& c, const std::string& v) { c.target = to_point(v); }},
      {"target.direction", [](ExperimentConfig& c, const std::string& v) { c.direction = to_doubles(v); }},
      {"target.moduli", [](ExperimentConfig& c, const std::string& v) { c.moduli = to_doubles(v); }},
      {"target.height", [](ExperimentConfig& c, const std::string& v) { c.height = to_int(v); }},
      {"target.along", [](ExperimentConfig& c, const std::string& v) { c.along = to_doubles(v); }},
      {"method", [](ExperimentConfig& c, const std::string& v) { c.method = to_method(v); }},
      {"horizon", [](ExperimentConfig& c, const std::string& v) { c.horizon = to_int(v); }},
      {"horizon.factor", [](ExperimentConfig& c, const std::string& v) { c.horizon_factor = to_double(v); }},
      {"replicas", [](ExperimentConfig& c, const std::string& v) { c.replicas = to_int(v); }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_uint(v); }},
      {"gamma", [](ExperimentConfig& c, const std::string& v) { c.gamma = to_double(v); }},
      {"threads", [](ExperimentConfig& c, const std::string& v) { c.threads = static_cast<int>(to_int(v)); }},
      {"memory_cap", [](ExperimentConfig& c, const std::string& v) { c.memory_cap = static_cast<std::size_t>(to_uint(v)); }},
      {"output", [](ExperimentConfig& c, const std::string& v) { c.output = v; }},
      {"tolerance.plateau", [](ExperimentConfig& c, const std::string& v) { c.plateau_tolerance = to_double(v); }},
      {"tolerance.interior", [](ExperimentConfig& c, const std::string& v) { c.interior_tolerance = to_double(v); }},
      {"tolerance.boundary", [](ExperimentConfig& c, const std::string& v) { c.boundary_tolerance = to_double(v); }},
      {"tolerance.martin", [](ExperimentConfig& c, const std::string& v) { c.martin_tolerance = to_double(v); }},
      {"tolerance.llt", [](ExperimentConfig& c, const std::string& v) { c.llt_tolerance = to_double(v); }},
      {"llt.n", [](ExperimentConfig& c, const std::string& v) { c.llt_n = to_int(v); }},
      {"v.schedule",
       [](ExperimentConfig& c, const std::string& v) {
         c.schedule.clear();
         for (const auto& part : split(v, ',')) c.schedule.push_back(to_int(part));
       }},
      {"v.replicas", [](ExperimentConfig& c, const std::string& v) { c.v_replicas = to_int(v); }},
      {"ladder.pmf", [](ExperimentConfig& c, const std::string& v) { c.ladder_pmf = parse_pmf(v); }},
      {"ladder.horizon", [](ExperimentConfig& c, const std::string& v) { c.ladder_horizon = to_int(v); }},
      {"ladder.kmax", [](ExperimentConfig& c, const std::string& v) { c.ladder_kmax = to_int(v); }},
      {"p", [](ExperimentConfig& c, const std::string& v) { c.integral_p = to_double(v); }},
      {"d", [](ExperimentConfig& c, const std::string& v) { c.integral_d = to_double(v); }},
      {"eps", [](ExperimentConfig& c, const std::string& v) { c.integral_eps = to_double(v); }},
  };
  return table;
}

void check_dim(const std::optional<Point>& p, const char* name, int d, std::vector<std::string>& errors) {
  if (p && p->dim() != d)
    errors.push_back(std::string("dimension mismatch: ") + name + " has " + std::to_string(p->dim()) +
                     " coordinates, cone.d = " + std::to_string(d));
}

}  // namespace

Pmf1D parse_pmf(const std::string& text) {
  Pmf1D pmf;
  for (const auto& part : split(text, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("pmf entry '" + part + "' needs value:probability");
    pmf.atoms.emplace_back(to_int(part.substr(0, colon)), to_double(part.substr(colon + 1)));
  }
  std::sort(pmf.atoms.begin(), pmf.atoms.end());
  double total = 0.0;
  for (auto [v, p] : pmf.atoms) {
    if (!(p > 0.0)) throw std::invalid_argument("pmf probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("pmf probabilities sum to " + std::to_string(total));
  // Absorb rounding of decimal inputs into the largest atom.
  auto it = std::max_element(pmf.atoms.begin(), pmf.atoms.end(), [](auto a, auto b) { return a.second < b.second; });
  it->second += 1.0 - total;
  return pmf;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, f] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

KeyValues read_key_values(const std::string& text, std::vector<std::string>& errors) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

ParseResult parse_config(const std::string& text, const KeyValues& overrides) {
  ParseResult r;
  KeyValues kv = read_key_values(text, r.errors);
  kv.insert(kv.end(), overrides.begin(), overrides.end());
  const auto& table = setters();
  ExperimentConfig& c = r.config;
  bool cap_given = false;
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) {
      r.errors.push_back("unknown key '" + key + "'");
      continue;
    }
    try {
      it->second(c, value);
      cap_given |= key == "memory_cap";
    } catch (const std::exception& e) {
      r.errors.push_back(key + ": " + e.what());
    }
  }
  if (!cap_given || std::getenv("CONE_GREEN_MEMCAP_BYTES")) c.memory_cap = default_memory_cap();

  static const std::vector<std::string> dists{"simple", "product-rademacher", "product-lazy", "williamson", "custom"};
  static const std::vector<std::string> cones{"half-space", "wedge", "orthant", "full-space"};
  if (std::find(dists.begin(), dists.end(), c.dist_kind) == dists.end())
    r.errors.push_back("dist.kind: unknown law '" + c.dist_kind + "'");
  if (std::find(cones.begin(), cones.end(), c.cone_kind) == cones.end())
    r.errors.push_back("cone.kind: unknown cone '" + c.cone_kind + "'");
  if (c.dim < 1 || c.dim > kMaxDim) r.errors.push_back("cone.d must be in [1, " + std::to_string(kMaxDim) + "]");
  if (c.cone_kind == "wedge" && c.dim != 2) r.errors.push_back("dimension mismatch: wedges need cone.d = 2");
  if (c.dist_dim && *c.dist_dim != c.dim)
    r.errors.push_back("dimension mismatch: dist.d = " + std::to_string(*c.dist_dim) + ", cone.d = " +
                       std::to_string(c.dim));
  if (c.dist_kind == "custom") {
    if (c.custom_atoms.empty()) r.errors.push_back("dist.atoms is required for a custom law");
    for (const auto& a : c.custom_atoms)
      if (a.step.dim() != c.dim) {
        r.errors.push_back("dimension mismatch: dist.atoms entry " + a.step.to_string(',') + " vs cone.d = " +
                           std::to_string(c.dim));
        break;
      }
  }
  check_dim(c.start, "start", c.dim, r.errors);
  check_dim(c.start2, "start2", c.dim, r.errors);
  check_dim(c.target, "target", c.dim, r.errors);
  if (!c.direction.empty() && static_cast<int>(c.direction.size()) != c.dim)
    r.errors.push_back("dimension mismatch: target.direction has " + std::to_string(c.direction.size()) +
                       " components, cone.d = " + std::to_string(c.dim));
  if (c.method != GreenMethod::dp && !c.seed)
    r.errors.push_back("missing seed: method " + to_string(c.method) + " needs seed");
  for (auto [name, v] : {std::pair{"tolerance.plateau", c.plateau_tolerance}, {"tolerance.interior", c.interior_tolerance},
                         {"tolerance.boundary", c.boundary_tolerance}, {"tolerance.martin", c.martin_tolerance},
                         {"tolerance.llt", c.llt_tolerance}, {"horizon.factor", c.horizon_factor}})
    if (!(v > 0.0)) r.errors.push_back(std::string(name) + " must be positive");
  if (c.replicas < 2) r.errors.push_back("replicas must be >= 2");
  if (c.horizon && *c.horizon < 0) r.errors.push_back("horizon must be >= 0");
  if (c.threads < 1) r.errors.push_back("threads must be >= 1");
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) r.errors.push_back("gamma must lie in (0, 1)");
  return r;
}

StepDistribution build_distribution(const ExperimentConfig& c) {
  if (c.dist_kind == "simple") return make_simple_walk(c.dim);
  if (c.dist_kind == "product-rademacher") return make_product_rademacher(c.dim);
  if (c.dist_kind == "product-lazy") return make_product_lazy(c.dim);
  if (c.dist_kind == "williamson") return make_williamson(c.dim, c.williamson_beta, c.williamson_n_max);
  if (c.dist_kind == "custom") return StepDistribution(c.dim, c.custom_atoms, StepDistribution::Kind::custom, "custom");
  throw std::invalid_argument("unknown law '" + c.dist_kind + "'");
}

Cone build_cone(const ExperimentConfig& c) {
  if (c.cone_kind == "half-space") return Cone::half_space(c.dim);
  if (c.cone_kind == "wedge") return Cone::wedge(c.wedge_opening);
  if (c.cone_kind == "orthant") return Cone::orthant(c.dim);
  if (c.cone_kind == "full-space") return Cone::full_space(c.dim);
  throw std::invalid_argument("unknown cone '" + c.cone_kind + "'");
}

}  // namespace conegreen
