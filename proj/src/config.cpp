#include "piml/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "piml/errors.hpp"

namespace piml {

const std::map<std::string, std::string>& config_schema() {
  static const std::map<std::string, std::string> schema = {
      {"experiment.name", "custom"},
      {"experiment.kind", "train"},
      {"seed", "0"},
      {"output.dir", ""},

      {"problem.kind", "poisson1d"},
      {"problem.omega", "1"},
      {"problem.beta", "1"},
      {"problem.nu", "0"},
      {"problem.t_end", "1"},
      {"problem.interval", "[]"},

      {"model.kind", "fourier"},
      {"model.k_max", "4"},
      {"model.kt_max", "0"},
      {"model.normalized", "true"},
      {"model.hidden", "[32, 32]"},
      {"model.init_gain", "1"},
      {"model.hard_bc", "none"},

      {"loss.form", "strong"},
      {"loss.lambda_s", "1"},
      {"loss.lambda_t", "1"},
      {"loss.lambda_d", "1"},
      {"loss.reg", "0"},

      {"quadrature.kind", "midpoint"},
      {"quadrature.n_int", "64"},
      {"quadrature.n_s", "2"},
      {"quadrature.n_t", "32"},
      {"quadrature.refine", "4"},
      {"quadrature.coscale", "false"},

      {"data.box", "[]"},
      {"data.n", "0"},

      {"optimizer.kind", "adam"},
      {"optimizer.lr", "1e-3"},
      {"optimizer.epochs", "1000"},
      {"optimizer.batch", "0"},
      {"optimizer.schedule", "constant"},
      {"optimizer.eps_inside_sqrt", "true"},
      {"optimizer.target_loss", "0"},
      {"optimizer.divergence_factor", "1e6"},
      {"optimizer.log_every", "1"},

      {"conditioning.lambda", "none"},
      {"conditioning.lambda_grid", "[1e-4, 1e6, 161]"},
      {"conditioning.preconditioner", "none"},
      {"conditioning.gamma", "1"},
      {"conditioning.windows", "2"},
      {"conditioning.seeds", "20"},
      {"conditioning.k_values", "[4, 8, 16, 32]"},

      {"sweep.variable", ""},
      {"sweep.values", "[]"},

      {"wpinn.u_hidden", "[20, 20]"},
      {"wpinn.adversary_hidden", "[24, 24]"},
      {"wpinn.outer_steps", "3000"},
      {"wpinn.ascent_steps", "8"},
      {"wpinn.reinit_every", "200"},
      {"wpinn.lr_u", "1e-3"},
      {"wpinn.lr_phi", "1e-2"},
      {"wpinn.c_count", "17"},
      {"wpinn.normalize", "true"},
      {"wpinn.log_every", "10"},

      {"rates.midpoint_levels", "[8, 16, 32, 64, 128, 256]"},
      {"rates.mc_levels", "[64, 256, 1024, 4096, 16384]"},
      {"rates.mc_seeds", "100"},

      {"ntk.widths", "[16, 256]"},
      {"ntk.seeds", "5"},
      {"ntk.epochs", "200"},
      {"ntk.probes", "32"},
  };
  return schema;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const char c = k[i];
    if (c == '.') {
      if (k[i - 1] == '.') return false;
      continue;
    }
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  }
  return true;
}

bool parse_number(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && !s.empty();
}

// Splits "[a, b]" into items; returns false for malformed lists.
bool split_list(const std::string& v, std::vector<std::string>& items) {
  items.clear();
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') return false;
  const std::string inner = trim(v.substr(1, v.size() - 2));
  if (inner.empty()) return true;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty() || item.find_first_of("[]") != std::string::npos) return false;
    items.push_back(item);
  }
  return !inner.empty() && inner.back() != ',';
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  const auto& schema = config_schema();
  std::istringstream in(text);
  std::string line;
  int no = 0;
  auto err = [&](const std::string& msg) { return ConfigError(source + ":" + std::to_string(no) + ": " + msg); };
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw err("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw err("malformed key '" + key + "'");
    if (!schema.count(key)) throw err("unknown key '" + key + "'");
    if (cfg.entries_.count(key))
      throw err("duplicate key '" + key + "' (first set on line " + std::to_string(cfg.entries_[key].line) + ")");
    if (value.find_first_of("[]") != std::string::npos) {
      std::vector<std::string> items;
      if (!split_list(value, items)) throw err("key '" + key + "': malformed list '" + value + "'");
    }
    cfg.entries_[key] = Entry{value, no};
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
  if (!config_schema().count(key)) throw ConfigError("unknown key '" + key + "'");
  entries_[key] = Entry{trim(value), 0};
}

const Config::Entry& Config::raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  const auto& schema = config_schema();
  auto d = schema.find(key);
  if (d == schema.end()) throw ConfigError("unknown key '" + key + "'");
  static thread_local Entry tmp;
  tmp = Entry{d->second, 0};
  return tmp;
}

void Config::fail(const std::string& key, const std::string& what) const {
  auto it = entries_.find(key);
  std::string where = source_;
  if (it != entries_.end() && it->second.line > 0) where += ":" + std::to_string(it->second.line);
  throw ConfigError(where + ": key '" + key + "': " + what);
}

std::string Config::get_string(const std::string& key) const { return raw(key).value; }

double Config::get_double(const std::string& key) const {
  const std::string v = raw(key).value;
  double d = 0.0;
  if (!parse_number(v, d)) fail(key, "expected a number, got '" + v + "'");
  return d;
}

long Config::get_int(const std::string& key) const {
  const std::string v = raw(key).value;
  long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) fail(key, "expected an integer, got '" + v + "'");
  return out;
}

bool Config::get_bool(const std::string& key) const {
  const std::string v = raw(key).value;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string v = raw(key).value;
  std::vector<std::string> items;
  if (!split_list(v, items)) fail(key, "expected a list '[a, b, ...]', got '" + v + "'");
  std::vector<double> out;
  for (const auto& s : items) {
    double d = 0.0;
    if (!parse_number(s, d)) fail(key, "list item '" + s + "' is not a number");
    out.push_back(d);
  }
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (double d : get_list(key)) {
    if (d != static_cast<int>(d)) fail(key, "list items must be integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

bool Config::is_word(const std::string& key) const {
  double d = 0.0;
  return !parse_number(raw(key).value, d);
}

std::string Config::resolved() const {
  std::ostringstream out;
  for (const auto& [key, def] : config_schema()) {
    auto it = entries_.find(key);
    out << key << " = " << (it != entries_.end() ? it->second.value : def) << "\n";
  }
  return out.str();
}

}  // namespace piml
