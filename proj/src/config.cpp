#include "atorsion/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "atorsion/errors.hpp"

namespace atorsion {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw ValidationError(key + ": expected a real number, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE || x < -1000000 || x > 1000000)
    throw ValidationError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_real(key, trim(item)));
  if (out.empty()) throw ValidationError(key + ": empty list");
  return out;
}

void set(RunConfig& c, const std::string& section, const std::string& key, const std::string& v) {
  const std::string k = section + "." + key;
  if (k == "metric.spec") c.metric = v;
  else if (k == "metric.reference") c.reference = v;
  else if (k == "discretization.L") c.L = to_int(k, v);
  else if (k == "discretization.n_theta") c.n_theta = to_int(k, v);
  else if (k == "discretization.n_phi") c.n_phi = to_int(k, v);
  else if (k == "heat.t_lo") c.t_grid.lo = to_real(k, v);
  else if (k == "heat.t_hi") c.t_grid.hi = to_real(k, v);
  else if (k == "heat.t_count") c.t_grid.count = to_int(k, v);
  else if (k == "heat.t_geometric") c.t_grid.geometric = to_bool(k, v);
  else if (k == "heat.fit_t_lo") c.fit_t_lo = to_real(k, v);
  else if (k == "heat.fit_t_hi") c.fit_t_hi = to_real(k, v);
  else if (k == "heat.fit_terms") c.fit_terms = to_int(k, v);
  else if (k == "heat.fit_nodes") c.fit_nodes = to_int(k, v);
  else if (k == "zeta.s") c.s_list = to_list(k, v);
  else if (k == "family.spec") c.family = v;
  else if (k == "family.params") c.params = to_list(k, v);
  else if (k == "family.resolvent_L") c.resolvent_L = to_int(k, v);
  else if (k == "run.output_dir") c.output_dir = v;
  else if (k == "run.cache_dir") c.cache_dir = v;
  else if (k == "run.threads") c.threads = to_int(k, v);
  else throw ValidationError("unknown config key '" + k + "'");
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ValidationError("line " + std::to_string(lineno) + ": key outside of a section");
    set(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ValidationError("override must look like section.key=value: '" + assignment + "'");
  set(config, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
      trim(assignment.substr(eq + 1)));
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
  };
  require(c.L >= 1 && c.L <= 64, "discretization.L must be in [1, 64]");
  require(c.n_theta == 0 || c.n_theta >= 2 * c.L + 2, "discretization.n_theta must be 0 or >= 2L+2");
  require(c.n_phi == 0 || c.n_phi >= 2 * c.L + 2, "discretization.n_phi must be 0 or >= 2L+2");
  require(c.n_theta <= 1024 && c.n_phi <= 1024, "quadrature sizes must be <= 1024");
  require(c.t_grid.lo > 0 && c.t_grid.hi > c.t_grid.lo, "heat.t_lo must be positive and below heat.t_hi");
  require(c.t_grid.count >= 2 && c.t_grid.count <= 100000, "heat.t_count must be in [2, 100000]");
  require(!c.fit_t_lo || *c.fit_t_lo > 0, "heat.fit_t_lo must be positive");
  require(!c.fit_t_hi || !c.fit_t_lo || *c.fit_t_hi > *c.fit_t_lo, "heat.fit_t_hi must exceed heat.fit_t_lo");
  require(c.fit_terms >= 2 && c.fit_terms <= 6, "heat.fit_terms must be in [2, 6]");
  require(c.fit_nodes >= c.fit_terms + 2 && c.fit_nodes <= 1000, "heat.fit_nodes must be in [fit_terms + 2, 1000]");
  for (double s : c.s_list) require(s > 1, "zeta.s entries must exceed 1");
  require(c.params.size() >= 1, "family.params must not be empty");
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    require(c.params[i] >= 1, "family.params entries must be >= 1");
    require(i == 0 || c.params[i] > c.params[i - 1], "family.params must be ascending");
  }
  require(c.resolvent_L >= 1 && c.resolvent_L <= 48, "family.resolvent_L must be in [1, 48]");
  require(c.threads >= 1 && c.threads <= 256, "run.threads must be in [1, 256]");
  require(!c.output_dir.empty(), "run.output_dir must not be empty");
}

}  // namespace atorsion
