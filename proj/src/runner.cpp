#include "piml/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "piml/errors.hpp"
#include "piml/format.hpp"
#include "piml/linalg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace piml {

namespace {

#ifndef PIML_SOURCE_DIR
#define PIML_SOURCE_DIR "."
#endif

json jnum(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double parse_double(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (s == "nan" || s.empty()) return NAN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw EvaluationError("malformed number '" + s + "' in CSV");
  return v;
}

json fit_json(const std::vector<double>& x, const std::vector<double>& y) {
  const LineFit f = fit_loglog(x, y);
  return json{{"slope", jnum(f.slope)},
              {"intercept", jnum(f.intercept)},
              {"slope_halfwidth", jnum(f.slope_halfwidth)},
              {"points", f.points}};
}

// Log-log fit of y against x over entries where both are finite and
// positive; null plus a notice with fewer than 3 such points.
json maybe_fit(const std::vector<double>& x, const std::vector<double>& y, const std::string& what,
               json& notices) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i]) && x[i] > 0 && y[i] > 0) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  if (xs.size() < 3) {
    notices.push_back(what + ": fewer than 3 usable points, slope omitted");
    return nullptr;
  }
  return fit_json(xs, ys);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json summarize_cond(const CsvTable& t, json& notices, const std::string& stem) {
  const auto cv = t.column("sweep_var"), cval = t.column("value"), cl = t.column("lambda"), ck = t.column("kappa"),
             cmin = t.column("lambda_min"), cmax = t.column("lambda_max"), cnz = t.column("near_zero_count");
  // One entry per (sweep_var, value); several rows (time windows) keep the
  // worst kappa.
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::size_t> pick;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto key = std::make_pair(t.rows[i][cv], t.rows[i][cval]);
    auto it = pick.find(key);
    if (it == pick.end()) {
      order.push_back(key);
      pick[key] = i;
    } else if (parse_double(t.rows[i][ck]) > parse_double(t.rows[it->second][ck])) {
      it->second = i;
    }
  }
  json points = json::array();
  std::map<std::string, std::vector<double>> xs, ks, ls;
  for (const auto& key : order) {
    const auto& r = t.rows[pick[key]];
    const double value = parse_double(r[cval]);
    points.push_back({{"sweep_var", r[cv]},
                      {"value", jnum(value)},
                      {"lambda", jnum(parse_double(r[cl]))},
                      {"kappa", jnum(parse_double(r[ck]))},
                      {"lambda_min", jnum(parse_double(r[cmin]))},
                      {"lambda_max", jnum(parse_double(r[cmax]))},
                      {"near_zero_count", std::stol(r[cnz])}});
    xs[r[cv]].push_back(value);
    ks[r[cv]].push_back(parse_double(r[ck]));
    ls[r[cv]].push_back(parse_double(r[cl]));
  }
  json out{{"points", points}};
  json fits = json::object();
  for (const auto& [var, x] : xs) {
    if (var == "-" || x.size() < 2) continue;
    if (var == "variant") continue;
    if (var == "windows") {
      out["split_ratio"] = jnum(ks[var].front() / ks[var].back());
      continue;
    }
    fits["kappa_vs_" + var] = maybe_fit(x, ks[var], stem + " kappa vs " + var, notices);
    fits["lambda_vs_" + var] = maybe_fit(x, ls[var], stem + " lambda vs " + var, notices);
  }
  if (!fits.empty()) out["fits"] = fits;
  return out;
}

json summarize_errors(const CsvTable& t, json& notices) {
  const auto cq = t.column("quantity"), cn = t.column("n"), cv = t.column("value");
  std::vector<std::string> qorder;
  std::map<std::string, std::map<double, std::vector<double>>> groups;
  for (const auto& r : t.rows) {
    if (!groups.count(r[cq])) qorder.push_back(r[cq]);
    groups[r[cq]][parse_double(r[cn])].push_back(parse_double(r[cv]));
  }
  json values = json::object(), fits = json::object();
  for (const auto& q : qorder) {
    const auto& g = groups[q];
    if (g.size() == 1 && g.begin()->first == 0.0) {
      values[q] = jnum(median(g.begin()->second));
      continue;
    }
    json per = json::object();
    std::vector<double> ns, meds;
    for (const auto& [n, v] : g) {
      per[format_double(n)] = jnum(median(v));
      ns.push_back(n);
      meds.push_back(median(v));
    }
    values[q] = per;
    if (g.size() >= 3) fits[q + "_vs_n"] = maybe_fit(ns, meds, q + " vs n", notices);
  }
  json out{{"values", values}};
  if (!fits.empty()) out["fits"] = fits;
  return out;
}

bool close_json(const json& a, const json& b, const std::string& path, std::vector<std::string>& problems) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)})) return true;
    problems.push_back(path + ": recomputed " + format_double(x) + " vs stored " + format_double(y));
    return false;
  }
  if (a.type() != b.type()) {
    problems.push_back(path + ": type mismatch");
    return false;
  }
  if (a.is_object()) {
    bool ok = true;
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) {
        problems.push_back(path + "/" + it.key() + ": missing from summary.json");
        ok = false;
        continue;
      }
      ok = close_json(it.value(), b.at(it.key()), path + "/" + it.key(), problems) && ok;
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key())) {
        problems.push_back(path + "/" + it.key() + ": not derivable from the CSVs");
        ok = false;
      }
    return ok;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) {
      problems.push_back(path + ": length mismatch");
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      ok = close_json(a[i], b[i], path + "[" + std::to_string(i) + "]", problems) && ok;
    return ok;
  }
  if (a != b) {
    problems.push_back(path + ": value mismatch");
    return false;
  }
  return true;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write '" + p.string() + "'");
  f << text;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw Error("cannot read '" + p.string() + "'");
  return json::parse(f);
}

std::string output_dir(const Config& cfg, const RunOptions& opts) {
  if (!opts.out.empty()) return opts.out;
  const std::string d = cfg.get_string("output.dir");
  if (!d.empty()) return d;
  return (fs::path("runs") / cfg.get_string("experiment.name")).string();
}

std::mutex log_mutex;

void log_line(const RunOptions& opts, const std::string& s) {
  if (opts.log == nullptr) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  *opts.log << s << std::endl;
}

RunOutcome write_run(const Config& cfg, const std::string& dir, const SweepPoint& pt, bool cond_only,
                     const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  write_text(fs::path(dir) / "config.resolved", cfg.resolved());
  RunTables tables = execute_experiment(cfg, pt, cond_only);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const char* name : {"train.csv", "cond.csv", "errors.csv", "theta.bin"}) fs::remove(fs::path(dir) / name);
  if (tables.train) write_csv((fs::path(dir) / "train.csv").string(), *tables.train);
  if (tables.cond) write_csv((fs::path(dir) / "cond.csv").string(), *tables.cond);
  if (tables.errors) write_csv((fs::path(dir) / "errors.csv").string(), *tables.errors);
  for (const auto& [name, t] : tables.extra) write_csv((fs::path(dir) / (name + ".csv")).string(), t);
  if (tables.theta) write_snapshot((fs::path(dir) / "theta.bin").string(), *tables.theta);

  json summary = summarize_run_dir(dir);
  json notices = json::array();
  for (const auto& n : tables.notices) notices.push_back(n);
  summary["meta"] = {{"experiment", cfg.get_string("experiment.name")},
                     {"kind", cfg.get_string("experiment.kind")},
                     {"seed", cfg.get_int("seed")},
                     {"sweep_var", pt.variable},
                     {"sweep_value", jnum(pt.value)},
                     {"wall_seconds", wall},
                     {"status", tables.status.empty() ? "ok" : tables.status},
                     {"diverged", tables.diverged},
                     {"notices", notices}};
  write_text(fs::path(dir) / "summary.json", summary.dump(2) + "\n");
  log_line(opts, "wrote " + dir + " (" + format_double(std::round(wall * 100) / 100) + " s)" +
                     (tables.diverged ? " [diverged: " + tables.status + "]" : ""));
  return RunOutcome{dir, summary, tables.diverged};
}

std::string point_dir_name(const std::string& var, double v) { return var + "=" + format_double(v); }

}  // namespace

void write_csv(const std::string& path, const CsvTable& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << "\n";
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw ContractViolation("CSV row width does not match header");
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
  write_text(path, out.str());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read '" + path + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      t.header = cells;
      first = false;
    } else {
      if (cells.size() != t.header.size()) throw EvaluationError(path + ": row width does not match header");
      t.rows.push_back(cells);
    }
  }
  if (first) throw EvaluationError(path + ": empty CSV");
  return t;
}

std::string presets_dir() {
  if (const char* env = std::getenv("PIML_PRESETS")) return env;
  return (fs::path(PIML_SOURCE_DIR) / "presets").string();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "poisson-ff-cond", "poisson-ff-precond", "advection-ff-cond", "advection-dd-split",
      "toy-hard-bc",     "heat-pinn-errors",   "heat-quadrature-rates", "burgers-wpinn",
      "poisson-ritz",    "poisson-inverse-data", "ntk-drift",         "lambda-strategies"};
  return names;
}

std::string resolve_config_path(const std::string& arg) {
  if (fs::is_regular_file(arg)) return arg;
  if (fs::is_regular_file(arg + ".cfg")) return arg + ".cfg";
  const fs::path preset = fs::path(presets_dir()) / (fs::path(arg).filename().string() + ".cfg");
  if (fs::is_regular_file(preset)) return preset.string();
  throw ConfigError("no config file or preset named '" + arg + "'");
}

Config load_config(const std::string& arg, const RunOptions& opts) {
  Config cfg = Config::load(resolve_config_path(arg));
  if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
  return cfg;
}

RunOutcome run_config(const Config& cfg, const RunOptions& opts, bool cond_only) {
  return write_run(cfg, output_dir(cfg, opts), SweepPoint{}, cond_only, opts);
}

RunOutcome sweep_config(const Config& cfg, const RunOptions& opts) {
  const std::string var = cfg.get_string("sweep.variable");
  if (var.empty()) throw ConfigError(cfg.source() + ": sweep needs sweep.variable");
  const auto& known = sweep_variables();
  if (std::find(known.begin(), known.end(), var) == known.end())
    throw ConfigError(cfg.source() + ": key 'sweep.variable': unknown sweep variable '" + var +
                      "' (expected K, beta, n_int, width, gamma or lambda)");
  const std::vector<double> values = cfg.get_list("sweep.values");
  if (values.empty()) throw ConfigError(cfg.source() + ": key 'sweep.values': empty");
  const std::string root = output_dir(cfg, opts);
  fs::create_directories(root);
  write_text(fs::path(root) / "config.resolved", cfg.resolved());

  std::vector<Config> point_cfgs;
  for (double v : values) {
    Config c = cfg;
    apply_sweep_value(c, var, v);
    point_cfgs.push_back(c);
  }
  std::vector<std::optional<RunOutcome>> outcomes(values.size());
  std::vector<std::string> failures(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        outcomes[i] = write_run(point_cfgs[i], (fs::path(root) / point_dir_name(var, values[i])).string(),
                                SweepPoint{var, values[i]}, false, opts);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!failures[i].empty()) throw Error("sweep point " + point_dir_name(var, values[i]) + ": " + failures[i]);

  // Sequential aggregation.
  CsvTable sweep{{"sweep_var", "value", "kappa", "lambda", "final_loss", "error_total", "error_training",
                  "error_generalization"},
                 {}};
  CsvTable cond = make_cond_table();
  bool any_diverged = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const fs::path pdir = fs::path(root) / point_dir_name(var, values[i]);
    const json s = summarize_run_dir(pdir.string());
    any_diverged = any_diverged || outcomes[i]->diverged;
    auto get = [&](const json& j, std::initializer_list<const char*> path) -> std::string {
      const json* cur = &j;
      for (const char* k : path) {
        if (!cur->is_object() || !cur->contains(k)) return "nan";
        cur = &(*cur)[k];
      }
      return cur->is_number() ? format_double(cur->get<double>()) : (cur->is_string() ? cur->get<std::string>() : "nan");
    };
    std::string kappa = "nan", lambda = "nan";
    if (s.contains("cond") && !s["cond"]["points"].empty()) {
      const json& p = s["cond"]["points"].back();
      kappa = p["kappa"].is_number() ? format_double(p["kappa"].get<double>()) : p["kappa"].get<std::string>();
      lambda = p["lambda"].is_number() ? format_double(p["lambda"].get<double>()) : p["lambda"].get<std::string>();
    }
    sweep.add({var, format_double(values[i]), kappa, lambda, get(s, {"train", "final_loss"}),
               get(s, {"errors", "values", "error_total"}), get(s, {"errors", "values", "error_training"}),
               get(s, {"errors", "values", "error_generalization"})});
    if (fs::exists(pdir / "cond.csv"))
      for (auto& r : read_csv((pdir / "cond.csv").string()).rows) cond.add(r);
  }
  write_csv((fs::path(root) / "sweep.csv").string(), sweep);
  if (!cond.rows.empty()) write_csv((fs::path(root) / "cond.csv").string(), cond);
  else fs::remove(fs::path(root) / "cond.csv");

  json summary = summarize_sweep_dir(root);
  summary["meta"] = {{"experiment", cfg.get_string("experiment.name")},
                     {"kind", cfg.get_string("experiment.kind")},
                     {"seed", cfg.get_int("seed")},
                     {"sweep_var", var},
                     {"jobs", jobs},
                     {"diverged", any_diverged}};
  write_text(fs::path(root) / "summary.json", summary.dump(2) + "\n");
  log_line(opts, "wrote sweep summary " + (fs::path(root) / "summary.json").string());
  for (const auto& n : summary["notices"]) log_line(opts, "notice: " + n.get<std::string>());
  return RunOutcome{root, summary, any_diverged};
}

json summarize_run_dir(const std::string& dir) {
  const fs::path d(dir);
  json s = json::object();
  json notices = json::array();
  if (fs::exists(d / "train.csv")) {
    const CsvTable t = read_csv((d / "train.csv").string());
    if (!t.rows.empty()) {
      const auto& last = t.rows.back();
      s["train"] = {{"final_epoch", std::stol(last[t.column("epoch")])},
                    {"final_loss", jnum(parse_double(last[t.column("loss_total")]))},
                    {"final_loss_int", jnum(parse_double(last[t.column("loss_int")]))},
                    {"final_loss_s", jnum(parse_double(last[t.column("loss_s")]))},
                    {"final_loss_t", jnum(parse_double(last[t.column("loss_t")]))},
                    {"final_loss_data", jnum(parse_double(last[t.column("loss_data")]))},
                    {"initial_loss", jnum(parse_double(t.rows.front()[t.column("loss_total")]))},
                    {"rows", t.rows.size()}};
    }
  }
  std::vector<fs::path> conds;
  if (fs::exists(d))
    for (const auto& e : fs::directory_iterator(d)) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.rfind("cond", 0) == 0 && e.path().extension() == ".csv") conds.push_back(e.path());
    }
  std::sort(conds.begin(), conds.end());
  for (const auto& p : conds) {
    const std::string stem = p.stem().string();
    s[stem] = summarize_cond(read_csv(p.string()), notices, stem);
  }
  if (fs::exists(d / "errors.csv")) s["errors"] = summarize_errors(read_csv((d / "errors.csv").string()), notices);
  s["notices"] = notices;
  return s;
}

json summarize_sweep_dir(const std::string& dir) {
  const CsvTable t = read_csv((fs::path(dir) / "sweep.csv").string());
  json notices = json::array();
  const auto cval = t.column("value");
  std::vector<double> x;
  for (const auto& r : t.rows) x.push_back(parse_double(r[cval]));
  auto col = [&](const char* name) {
    std::vector<double> v;
    const auto c = t.column(name);
    for (const auto& r : t.rows) v.push_back(parse_double(r[c]));
    return v;
  };
  auto has_values = [](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double a) { return !std::isnan(a); });
  };
  json fits = json::object();
  const std::string var = t.rows.empty() ? "value" : t.rows.front()[t.column("sweep_var")];
  for (const char* m : {"kappa", "lambda", "final_loss", "error_total", "error_training", "error_generalization"}) {
    const auto v = col(m);
    if (has_values(v)) fits[std::string(m) + "_vs_" + var] = maybe_fit(x, v, std::string(m) + " vs " + var, notices);
  }
  const auto e = col("error_total"), et = col("error_training");
  if (has_values(e) && has_values(et))
    fits["error_total_vs_error_training"] = maybe_fit(et, e, "error_total vs error_training", notices);
  return json{{"points", t.rows.size()}, {"fits", fits}, {"notices", notices}};
}

VerifyReport verify_dir(const std::string& dir) {
  VerifyReport rep;
  const fs::path d(dir);
  if (!fs::exists(d / "summary.json")) {
    rep.ok = false;
    rep.problems.push_back(dir + ": no summary.json");
    return rep;
  }
  json stored = read_json(d / "summary.json");
  stored.erase("meta");
  const bool sweep = fs::exists(d / "sweep.csv");
  const json derived = sweep ? summarize_sweep_dir(dir) : summarize_run_dir(dir);
  std::vector<std::string> problems;
  if (!close_json(derived, stored, dir, problems)) rep.ok = false;
  rep.problems.insert(rep.problems.end(), problems.begin(), problems.end());
  ++rep.checked;
  if (sweep) {
    std::vector<fs::path> subs;
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_directory() && fs::exists(e.path() / "summary.json")) subs.push_back(e.path());
    std::sort(subs.begin(), subs.end());
    for (const auto& p : subs) {
      VerifyReport r = verify_dir(p.string());
      rep.ok = rep.ok && r.ok;
      rep.checked += r.checked;
      rep.problems.insert(rep.problems.end(), r.problems.begin(), r.problems.end());
    }
  }
  return rep;
}

}  // namespace piml
