#include "piml/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "piml/conditioning.hpp"
#include "piml/errors.hpp"
#include "piml/format.hpp"
#include "piml/fourier_model.hpp"
#include "piml/mlp_model.hpp"
#include "piml/optimizers.hpp"
#include "piml/rng.hpp"
#include "piml/wpinn.hpp"
#include "piml/wrappers.hpp"

namespace piml {

using std::numbers::pi;

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ConfigError("missing column '" + name + "'");
}

CsvTable make_train_table() { return CsvTable{{"epoch", "loss_total", "loss_int", "loss_s", "loss_t", "loss_data"}, {}}; }

CsvTable make_cond_table() {
  return CsvTable{{"sweep_var", "value", "lambda", "kappa", "lambda_min", "lambda_max", "near_zero_count"}, {}};
}

CsvTable make_errors_table() { return CsvTable{{"quantity", "n", "value"}, {}}; }

namespace {

std::string fmt(double v) { return format_double(v); }

void add_error(CsvTable& t, const std::string& q, double v, double n = 0.0) { t.add({q, fmt(n), fmt(v)}); }

void add_cond_row(CsvTable& t, const SweepPoint& pt, double lambda, const SpectralReport& r) {
  t.add({pt.variable, fmt(pt.value), fmt(lambda), fmt(r.kappa), fmt(r.lambda_min), fmt(r.lambda_max),
         std::to_string(r.near_zero_count)});
}

void add_train_row(CsvTable& t, long epoch, const LossTerms& l) {
  t.add({std::to_string(epoch), fmt(l.total), fmt(l.interior), fmt(l.spatial), fmt(l.temporal), fmt(l.data)});
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MlpSpec mlp_spec_from_config(const Config& cfg, const PdeProblem& problem) {
  MlpSpec spec;
  spec.inputs = problem.domain().time_dependent() ? 2 : 1;
  spec.hidden = cfg.get_int_list("model.hidden");
  if (spec.hidden.empty()) throw ConfigError(cfg.source() + ": key 'model.hidden': need at least one hidden layer");
  for (int w : spec.hidden)
    if (w < 1) throw ConfigError(cfg.source() + ": key 'model.hidden': widths must be positive");
  spec.order = std::max(1, problem.required_order());
  return spec;
}

TrainingSetSpec training_spec(const Config& cfg, const PdeProblem& problem) {
  TrainingSetSpec ts;
  ts.n_int = static_cast<int>(cfg.get_int("quadrature.n_int"));
  ts.n_s = static_cast<int>(cfg.get_int("quadrature.n_s"));
  ts.n_t = static_cast<int>(cfg.get_int("quadrature.n_t"));
  ts.kind = rule_kind_from_string(cfg.get_string("quadrature.kind"));
  ts.seed = Rng(static_cast<std::uint64_t>(cfg.get_int("seed"))).substream("training-set").seed();
  if (ts.n_int < 1) throw ConfigError(cfg.source() + ": key 'quadrature.n_int': must be positive");
  if (cfg.get_bool("quadrature.coscale") && problem.domain().time_dependent()) {
    const int m = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(ts.n_int)))));
    ts.n_t = m;
    ts.n_s = 2 * m;
  }
  return ts;
}

std::optional<QuadratureRule> data_rule(const Config& cfg, const PdeProblem& problem) {
  const long n = cfg.get_int("data.n");
  if (n <= 0) return std::nullopt;
  const auto box = cfg.get_list("data.box");
  if (box.size() != 2 || !(box[1] > box[0]))
    throw ConfigError(cfg.source() + ": key 'data.box': expected [lo, hi] with lo < hi");
  const auto& d = problem.domain();
  if (d.time_dependent()) {
    const int m = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
    return midpoint_rule(Box::rect(box[0], box[1], 0.0, d.t_end), m);
  }
  return midpoint_rule(Box::interval(box[0], box[1]), static_cast<int>(n));
}

struct LambdaChoice {
  double lambda = 1.0;
  std::string strategy;
  std::optional<LambdaSearchResult> search;
};

// Gradients of the interior and boundary halves of the quadratic loss at
// theta0 + delta: 2 (A delta - c).
std::optional<double> annealing_lambda(const GramParts& parts, int seeds, std::uint64_t seed) {
  const std::size_t n = parts.interior.rows();
  std::vector<double> samples;
  for (int s = 0; s < seeds; ++s) {
    Rng rng = Rng(seed).substream("annealing").substream(static_cast<std::uint64_t>(s));
    Vector delta(n);
    const double sd = std::sqrt(2.0 / (static_cast<double>(n) + 1.0));
    for (double& v : delta) v = rng.normal(0.0, sd);
    Vector gr = subtract(parts.interior * delta, parts.c_int);
    Vector gb = subtract(parts.boundary * delta, parts.c_bnd);
    for (double& v : gr) v *= 2.0;
    for (double& v : gb) v *= 2.0;
    if (auto l = lambda_annealing(gr, gb)) samples.push_back(*l);
  }
  if (samples.empty()) return std::nullopt;
  return median(samples);
}

LambdaChoice resolve_lambda(const Config& cfg, const GramParts& parts) {
  LambdaChoice c;
  const std::string s = cfg.get_string("conditioning.lambda");
  c.strategy = s;
  if (!cfg.is_word("conditioning.lambda")) {
    c.lambda = cfg.get_double("conditioning.lambda");
    c.strategy = "fixed";
  } else if (s == "none") {
    c.lambda = cfg.get_double("loss.lambda_s");
  } else if (s == "auto") {
    const auto g = cfg.get_list("conditioning.lambda_grid");
    if (g.size() != 3) throw ConfigError(cfg.source() + ": key 'conditioning.lambda_grid': expected [lo, hi, count]");
    c.search = lambda_search(parts, log_grid(g[0], g[1], static_cast<int>(g[2])));
    c.lambda = c.search->lambda_star;
  } else if (s == "precond") {
    const double gamma = cfg.get_double("conditioning.gamma");
    c.lambda = 2.0 * pi / (gamma * gamma);
  } else if (s == "annealing") {
    auto l = annealing_lambda(parts, static_cast<int>(cfg.get_int("conditioning.seeds")),
                              static_cast<std::uint64_t>(cfg.get_int("seed")));
    if (!l) throw EvaluationError("annealing lambda undefined: boundary gradient vanishes");
    c.lambda = *l;
  } else if (s == "ntk") {
    auto l = lambda_ntk(parts);
    if (!l) throw EvaluationError("trace-ratio lambda undefined: boundary features vanish");
    c.lambda = *l;
  } else {
    throw ConfigError(cfg.source() + ": key 'conditioning.lambda': expected a number or one of none, auto, precond, "
                      "annealing, ntk");
  }
  return c;
}

ModelPtr apply_preconditioner(const Config& cfg, ModelPtr model) {
  const std::string kind = cfg.get_string("conditioning.preconditioner");
  if (kind == "none" || kind == "identity") return model;
  if (kind != "inverse_k2")
    throw ConfigError(cfg.source() + ": key 'conditioning.preconditioner': expected none, identity or inverse_k2");
  const auto* fm = dynamic_cast<const FourierFeatureModel*>(model.get());
  if (fm == nullptr) throw CapabilityError("inverse_k2 preconditioning needs a Fourier model without hard BC wrapper");
  const Matrix p = fourier_inverse_k2(*fm, cfg.get_double("conditioning.gamma"));
  Vector d(p.rows());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = p(i, i);
  return std::make_shared<ScaledParamsWrapper>(model, d);
}

void write_lambda_curve(RunTables& out, const SweepPoint& pt, const LambdaSearchResult& r) {
  CsvTable t{{"sweep_var", "value", "lambda", "kappa"}, {}};
  for (const auto& c : r.curve) t.add({pt.variable, fmt(pt.value), fmt(c.lambda), fmt(c.kappa)});
  out.extra.emplace_back("lambda_curve", std::move(t));
  if (!r.unimodal) out.notices.push_back("kappa(lambda) is not unimodal on the grid; lambda* is the grid minimum");
}

// Energy I[w] of the Ritz problem evaluated from jets on a rule.
double ritz_energy_of(const PdeProblem& problem, const std::function<Jet(const Point&)>& w,
                      const QuadratureRule& q) {
  double g = 0.0, m = 0.0, f = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const Jet u = w(q.points[j]);
    g += q.weights[j] * u.x() * u.x();
    m += q.weights[j] * u.v();
    f += q.weights[j] * problem.source(q.points[j]) * u.v();
  }
  return 0.5 * g + 0.5 * m * m - f;
}

// ----------------------------------------------------------------- train / cond

RunTables run_train(const Config& cfg, const SweepPoint& pt, bool cond_only) {
  RunTables out;
  const PdeProblem problem = problem_from_config(cfg);
  ModelPtr model = apply_preconditioner(cfg, model_from_config(cfg, problem));
  const Vector theta0 = initial_parameters(cfg, *model);
  const std::string strategy = cfg.get_string("conditioning.lambda");
  LossWeights w;
  w.s = cfg.get_double("loss.lambda_s");
  w.t = cfg.get_double("loss.lambda_t");
  w.d = cfg.get_double("loss.lambda_d");
  w.reg = cfg.get_double("loss.reg");
  const LossForm form = loss_form_from_string(cfg.get_string("loss.form"));
  if (form == LossForm::weak_kruzkhov)
    throw ConfigError(cfg.source() + ": key 'loss.form': weak_kruzkhov runs use experiment.kind = wpinn");

  const bool want_gram = cond_only || strategy != "none" || model->is_linear();
  if (want_gram && form == LossForm::strong) {
    const GramParts parts = assemble_gram_parts(problem, *model, theta0, fine_gram_rules(problem));
    const LambdaChoice lc = resolve_lambda(cfg, parts);
    if (strategy != "none") w.s = w.t = lc.lambda;
    const SpectralReport rep = condition_number(combine(parts, lc.lambda).a);
    out.cond = make_cond_table();
    add_cond_row(*out.cond, pt, lc.lambda, rep);
    if (lc.search) write_lambda_curve(out, pt, *lc.search);
  }
  if (cond_only) {
    if (!out.cond) throw ConfigError("cond needs a strong-form configuration");
    return out;
  }

  const TrainingSetSpec ts = training_spec(cfg, problem);
  TrainingSet set = make_training_set(problem.domain(), ts);
  set.data_set = data_rule(cfg, problem);
  TrainingSet fine = refine_training_set(problem.domain(), ts, static_cast<int>(cfg.get_int("quadrature.refine")));
  fine.data_set = set.data_set;

  Objective objective = form == LossForm::ritz ? make_ritz_objective(problem, model, set.interior)
                                               : make_strong_objective(problem, model, set, w);
  TrainConfig tc;
  tc.kind = optimizer_kind_from_string(cfg.get_string("optimizer.kind"));
  tc.epochs = cfg.get_int("optimizer.epochs");
  tc.batch = static_cast<std::size_t>(std::max(0L, cfg.get_int("optimizer.batch")));
  const std::string sched = cfg.get_string("optimizer.schedule");
  if (sched == "inv_sqrt")
    tc.schedule = Schedule::inv_sqrt;
  else if (sched != "constant")
    throw ConfigError(cfg.source() + ": key 'optimizer.schedule': expected constant or inv_sqrt");
  tc.adam.eps_inside_sqrt = cfg.get_bool("optimizer.eps_inside_sqrt");
  tc.target_loss = cfg.get_double("optimizer.target_loss");
  tc.divergence_factor = cfg.get_double("optimizer.divergence_factor");
  tc.seed = Rng(static_cast<std::uint64_t>(cfg.get_int("seed"))).substream("optimizer").seed();

  std::optional<Matrix> hessian;
  if (model->is_linear() && form == LossForm::strong) hessian = loss_hessian(problem, *model, theta0, set, w);
  if (cfg.is_word("optimizer.lr")) {
    if (cfg.get_string("optimizer.lr") != "auto")
      throw ConfigError(cfg.source() + ": key 'optimizer.lr': expected a number or auto");
    if (!hessian) throw ConfigError(cfg.source() + ": optimizer.lr = auto needs a linear model and strong loss");
    const double lmax = condition_number(*hessian).lambda_max;
    tc.lr = 0.9 / lmax;
    out.notices.push_back("learning rate 0.9 / lambda_max(H) = " + fmt(tc.lr));
  } else {
    tc.lr = cfg.get_double("optimizer.lr");
  }

  Vector theta = theta0;
  BatchObjective bobj;
  const BatchObjective* bptr = nullptr;
  if (tc.batch > 0 || tc.kind == OptimizerKind::sgd) {
    if (form != LossForm::strong) throw ConfigError("minibatching is implemented for the strong loss only");
    bobj = make_strong_batch_objective(problem, model, set, w);
    bptr = &bobj;
  }
  const TrainRecord rec = train(objective, theta, tc, bptr, set.interior.size(), hessian ? &*hessian : nullptr);
  if (rec.ridge_used) out.notices.push_back("singular Hessian: Newton step used a 1e-10 ridge");
  out.diverged = rec.diverged;
  out.status = rec.diverged ? rec.message : "ok";

  out.train = make_train_table();
  const long every = std::max(1L, cfg.get_int("optimizer.log_every"));
  for (std::size_t i = 0; i < rec.epochs.size(); ++i) {
    const auto& e = rec.epochs[i];
    if (e.epoch % every == 0 || i + 1 == rec.epochs.size()) add_train_row(*out.train, e.epoch, e.terms);
  }

  out.errors = make_errors_table();
  CsvTable& errs = *out.errors;
  if (form == LossForm::ritz) {
    const QuadratureRule& q = fine.interior;
    auto wj = [&](const Point& p) { return model->forward(theta, p); };
    auto uj = [&](const Point& p) { return problem.exact(p); };
    const double iw = ritz_energy_of(problem, wj, q);
    const double iu = ritz_energy_of(problem, uj, q);
    double h1 = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const Jet a = wj(q.points[j]), b = uj(q.points[j]);
      h1 += q.weights[j] * ((a.v() - b.v()) * (a.v() - b.v()) + (a.x() - b.x()) * (a.x() - b.x()));
    }
    add_error(errs, "ritz_energy", iw);
    add_error(errs, "ritz_energy_exact", iu);
    add_error(errs, "energy_gap", iw - iu);
    add_error(errs, "h1_error_sq", h1);
    add_error(errs, "h1_bound", ritz_h1_bound(std::max(0.0, iw - iu)));
  } else {
    const ErrorReport er = error_report(problem, *model, theta, set, fine, w);
    if (er.total) add_error(errs, "error_total", *er.total);
    add_error(errs, "error_training", er.training);
    add_error(errs, "error_generalization", er.generalization);
    add_error(errs, "generalization_gap", er.gap);
    if (problem.kind() == ProblemKind::heat1d && er.total) {
      const double t_end = problem.domain().t_end;
      const double nu = boundary_c1_norm([&](const Point& p) { return problem.exact(p); }, problem.domain());
      const double nv = boundary_c1_norm([&](const Point& p) { return model->forward(theta, p); }, problem.domain());
      const double c2 = heat_constant_c2(t_end, problem.boundary_measure(), nu, nv);
      HeatResidualNorms r;
      r.pde_sq = er.fine_terms.interior;
      r.t_sq = er.fine_terms.temporal;
      r.s = std::sqrt(er.fine_terms.spatial);
      add_error(errs, "stability_lhs", (*er.total) * (*er.total));
      add_error(errs, "stability_rhs", heat_stability_rhs(t_end, 0.0, r, c2));
    }
    if (problem.kind() == ProblemKind::scl && problem.nu() > 0.0 && er.total) {
      SclNorms n;
      const QuadratureRule probe = midpoint_rule(problem.domain().interior_box(), 45);
      for (const auto& p : probe.points) {
        const Jet u = problem.exact(p), v = model->forward(theta, p);
        n.u_inf = std::max(n.u_inf, std::abs(u.v()));
        n.u_x_inf = std::max(n.u_x_inf, std::abs(u.x()));
        n.u_theta_inf = std::max(n.u_theta_inf, std::abs(v.v()));
        n.u_theta_x_inf = std::max(n.u_theta_x_inf, std::abs(v.x()));
      }
      SclResidualNorms r;
      r.pde_sq = er.fine_terms.interior;
      r.t_sq = er.fine_terms.temporal;
      r.s = std::sqrt(er.fine_terms.spatial);
      const SclBound b = scl_stability_rhs(problem, n, r);
      add_error(errs, "stability_lhs", (*er.total) * (*er.total));
      add_error(errs, "stability_rhs", b.value);
      out.notices.push_back("viscous stability bound uses the heuristic C3 = ||f'||_inf (1 + ||u_theta||_C0)");
    }
  }
  out.theta = ParameterVector(model->layout(), theta);
  return out;
}

// ----------------------------------------------------------------- surveys

RunTables run_toy(const SweepPoint&) {
  RunTables out;
  const HardBcSurvey s = hard_bc_condition_survey();
  out.cond = make_cond_table();
  add_cond_row(*out.cond, {"variant", 0.0}, s.lambda_star, condition_number(s.a_soft));
  add_cond_row(*out.cond, {"variant", 1.0}, 1.0, condition_number(s.a_variant1));
  add_cond_row(*out.cond, {"variant", 2.0}, 1.0, condition_number(s.a_variant2));
  out.notices.push_back("variant 0: soft boundary penalty at lambda*; 1: u = sin(x) u_theta; 2: u = u_theta - u_theta(pi)");
  return out;
}

RunTables run_split(const Config& cfg, const SweepPoint& pt) {
  RunTables out;
  const double beta = cfg.get_double("problem.beta");
  const int windows = static_cast<int>(cfg.get_int("conditioning.windows"));
  const int k = static_cast<int>(cfg.get_int("model.k_max"));
  const int m = static_cast<int>(cfg.get_int("model.kt_max"));
  const double t_end = cfg.get_double("problem.t_end");
  const PdeProblem problem = PdeProblem::advection1d(beta, t_end);
  auto inner = std::make_shared<FourierFeatureModel>(FourierSpec{k, m, false});
  out.cond = make_cond_table();
  const auto grid = cfg.get_list("conditioning.lambda_grid");
  if (grid.size() != 3) throw ConfigError(cfg.source() + ": key 'conditioning.lambda_grid': expected [lo, hi, count]");
  for (int nw : {1, windows}) {
    const double dt = t_end / nw;
    for (int wi = 0; wi < nw; ++wi) {
      const double t0 = wi * dt;
      const TimeAffineWrapper local(inner, t0, t_end / dt);
      TrainingSet rules;
      rules.interior = midpoint_rule(Box::rect(0.0, 2.0 * pi, t0, t0 + dt), 128);
      rules.temporal_boundary = midpoint_rule(Box::interval(0.0, 2.0 * pi), 128);
      for (auto& p : rules.temporal_boundary.points) p.t = t0;
      const GramParts parts = assemble_gram_parts(problem, local, Vector(local.num_params(), 0.0), rules);
      const LambdaSearchResult r = lambda_search(parts, log_grid(grid[0], grid[1], static_cast<int>(grid[2])));
      add_cond_row(*out.cond, {"windows", static_cast<double>(nw)}, r.lambda_star,
                   condition_number(combine(parts, r.lambda_star).a));
    }
    if (nw == windows) break;
  }
  (void)pt;
  return out;
}

RunTables run_rates(const Config& cfg) {
  RunTables out;
  out.errors = make_errors_table();
  // C^2 test integrand on [0, 1] with non-periodic derivatives.
  auto g = [](const Point& p) { return std::exp(p.x) * std::sin(pi * p.x); };
  const double exact = pi * (std::exp(1.0) + 1.0) / (1.0 + pi * pi);
  const Box box = Box::interval(0.0, 1.0);
  for (int m : cfg.get_int_list("rates.midpoint_levels"))
    add_error(*out.errors, "midpoint_error", std::abs(estimate_integral(midpoint_rule(box, m), g) - exact), m);
  const long seeds = cfg.get_int("rates.mc_seeds");
  const Rng base(static_cast<std::uint64_t>(cfg.get_int("seed")));
  for (int n : cfg.get_int_list("rates.mc_levels")) {
    double sum = 0.0;
    for (long s = 0; s < seeds; ++s) {
      const std::uint64_t seed = base.substream("mc").substream(static_cast<std::uint64_t>(s)).seed();
      sum += std::abs(estimate_integral(monte_carlo_rule(box, n, seed), g) - exact);
    }
    add_error(*out.errors, "mc_mean_abs_error", sum / static_cast<double>(seeds), n);
  }
  return out;
}

RunTables run_wpinn(const Config& cfg) {
  RunTables out;
  const PdeProblem problem = problem_from_config(cfg);
  if (problem.kind() != ProblemKind::scl) throw ConfigError(cfg.source() + ": wpinn needs problem.kind = burgers");
  WpinnConfig wc;
  wc.u_hidden = cfg.get_int_list("wpinn.u_hidden");
  wc.adversary_hidden = cfg.get_int_list("wpinn.adversary_hidden");
  wc.n_int = static_cast<int>(cfg.get_int("quadrature.n_int"));
  wc.n_s = static_cast<int>(cfg.get_int("quadrature.n_s"));
  wc.n_t = static_cast<int>(cfg.get_int("quadrature.n_t"));
  wc.kind = rule_kind_from_string(cfg.get_string("quadrature.kind"));
  wc.outer_steps = cfg.get_int("wpinn.outer_steps");
  wc.ascent_steps = static_cast<int>(cfg.get_int("wpinn.ascent_steps"));
  wc.reinit_every = cfg.get_int("wpinn.reinit_every");
  wc.lr_u = cfg.get_double("wpinn.lr_u");
  wc.lr_phi = cfg.get_double("wpinn.lr_phi");
  wc.lambda_s = cfg.get_double("loss.lambda_s");
  wc.lambda_t = cfg.get_double("loss.lambda_t");
  wc.c_count = static_cast<int>(cfg.get_int("wpinn.c_count"));
  wc.normalize = cfg.get_bool("wpinn.normalize");
  wc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  wc.log_every = cfg.get_int("wpinn.log_every");
  const WpinnResult r = train_wpinn(problem, wc);
  out.train = make_train_table();
  for (const auto& h : r.history) {
    LossTerms l;
    l.total = h.terms.total;
    l.interior = h.terms.residual;
    l.spatial = h.terms.boundary;
    l.temporal = h.terms.initial;
    add_train_row(*out.train, h.step, l);
  }
  out.errors = make_errors_table();
  add_error(*out.errors, "rel_l1_error", r.rel_l1);
  out.theta = ParameterVector(r.model->layout(), r.theta);
  out.notices.push_back("adversary re-initialized every " + std::to_string(wc.reinit_every) + " outer steps with " +
                        std::to_string(wc.ascent_steps) + " ascent steps per descent step");
  return out;
}

RunTables run_ntk(const Config& cfg) {
  RunTables out;
  out.errors = make_errors_table();
  const PdeProblem problem = problem_from_config(cfg);
  const auto widths = cfg.get_int_list("ntk.widths");
  const long seeds = cfg.get_int("ntk.seeds");
  const std::size_t depth = cfg.get_int_list("model.hidden").size();
  const TrainingSetSpec ts = training_spec(cfg, problem);
  const TrainingSet set = make_training_set(problem.domain(), ts);
  const QuadratureRule probes_rule =
      midpoint_rule(problem.domain().interior_box(), static_cast<int>(cfg.get_int("ntk.probes")));
  LossWeights w;
  w.s = cfg.get_double("loss.lambda_s");
  w.t = cfg.get_double("loss.lambda_t");
  TrainConfig tc;
  tc.kind = optimizer_kind_from_string(cfg.get_string("optimizer.kind"));
  tc.lr = cfg.get_double("optimizer.lr");
  tc.epochs = cfg.get_int("ntk.epochs");
  for (int width : widths) {
    for (long s = 0; s < seeds; ++s) {
      MlpSpec spec = mlp_spec_from_config(cfg, problem);
      spec.hidden.assign(depth, width);
      auto model = std::make_shared<MlpModel>(spec);
      const std::uint64_t seed =
          Rng(static_cast<std::uint64_t>(cfg.get_int("seed"))).substream("ntk").substream(static_cast<std::uint64_t>(s)).seed();
      const Vector theta0 = xavier_init(*model, cfg.get_double("model.init_gain"), seed).values();
      Vector theta = theta0;
      const TrainRecord rec = train(make_strong_objective(problem, model, set, w), theta, tc);
      if (rec.diverged) out.notices.push_back("width " + std::to_string(width) + " seed " + std::to_string(s) + ": " + rec.message);
      const NtkDrift d = ntk_drift(*model, theta0, theta, probes_rule.points, problem.linearization());
      add_error(*out.errors, "drift_u", d.u, width);
      add_error(*out.errors, "drift_lu", d.lu, width);
    }
  }
  return out;
}

RunTables run_lambda_strategies(const Config& cfg) {
  RunTables out;
  const PdeProblem problem = problem_from_config(cfg);
  const auto grid = cfg.get_list("conditioning.lambda_grid");
  if (grid.size() != 3) throw ConfigError(cfg.source() + ": key 'conditioning.lambda_grid': expected [lo, hi, count]");
  CsvTable star = make_cond_table(), ann = make_cond_table(), ntk = make_cond_table();
  for (int k : cfg.get_int_list("conditioning.k_values")) {
    const FourierFeatureModel model(FourierSpec{k, 0, cfg.get_bool("model.normalized")});
    const GramParts parts =
        assemble_gram_parts(problem, model, Vector(model.num_params(), 0.0), fine_gram_rules(problem));
    const SweepPoint pt{"K", static_cast<double>(k)};
    const LambdaSearchResult r = lambda_search(parts, log_grid(grid[0], grid[1], static_cast<int>(grid[2])));
    add_cond_row(star, pt, r.lambda_star, condition_number(combine(parts, r.lambda_star).a));
    const auto la = annealing_lambda(parts, static_cast<int>(cfg.get_int("conditioning.seeds")),
                                     static_cast<std::uint64_t>(cfg.get_int("seed")));
    if (!la) throw EvaluationError("annealing lambda undefined at K = " + std::to_string(k));
    add_cond_row(ann, pt, *la, condition_number(combine(parts, *la).a));
    const auto lb = lambda_ntk(parts);
    if (!lb) throw EvaluationError("trace-ratio lambda undefined at K = " + std::to_string(k));
    add_cond_row(ntk, pt, *lb, condition_number(combine(parts, *lb).a));
  }
  out.cond = std::move(star);
  out.extra.emplace_back("cond_annealing", std::move(ann));
  out.extra.emplace_back("cond_ntk", std::move(ntk));
  return out;
}

}  // namespace

PdeProblem problem_from_config(const Config& cfg) {
  const ProblemKind kind = problem_kind_from_string(cfg.get_string("problem.kind"));
  const double t_end = cfg.get_double("problem.t_end");
  switch (kind) {
    case ProblemKind::poisson1d: {
      const auto iv = cfg.get_list("problem.interval");
      const double omega = cfg.get_double("problem.omega");
      if (iv.empty()) return PdeProblem::poisson1d(omega);
      if (iv.size() != 2 || !(iv[1] > iv[0]))
        throw ConfigError(cfg.source() + ": key 'problem.interval': expected [a, b] with a < b");
      return PdeProblem::poisson_interval(iv[0], iv[1], omega);
    }
    case ProblemKind::poisson_neumann: return PdeProblem::poisson_neumann();
    case ProblemKind::heat1d: return PdeProblem::heat1d(t_end);
    case ProblemKind::advection1d: return PdeProblem::advection1d(cfg.get_double("problem.beta"), t_end);
    case ProblemKind::scl: return PdeProblem::burgers(cfg.get_double("problem.nu"), t_end);
  }
  throw ConfigError("unknown problem kind");
}

ModelPtr model_from_config(const Config& cfg, const PdeProblem& problem) {
  const std::string kind = cfg.get_string("model.kind");
  ModelPtr model;
  if (kind == "fourier") {
    FourierSpec fs;
    fs.k_max = static_cast<int>(cfg.get_int("model.k_max"));
    fs.kt_max = static_cast<int>(cfg.get_int("model.kt_max"));
    fs.normalized = cfg.get_bool("model.normalized");
    if (fs.k_max < 0 || fs.kt_max < 0) throw ConfigError(cfg.source() + ": Fourier frequencies must be nonnegative");
    model = std::make_shared<FourierFeatureModel>(fs);
  } else if (kind == "mlp") {
    model = std::make_shared<MlpModel>(mlp_spec_from_config(cfg, problem));
  } else {
    throw ConfigError(cfg.source() + ": key 'model.kind': expected fourier or mlp");
  }
  const std::string bc = cfg.get_string("model.hard_bc");
  const auto& d = problem.domain();
  if (bc == "none") return model;
  if (d.time_dependent()) throw CapabilityError("hard boundary wrappers are implemented for stationary problems");
  if (bc == "multiply") {
    const double a = d.x_lo, len = d.x_hi - d.x_lo;
    auto eta = [a, len](const Point& p) {
      const double k = pi / len;
      Jet e;
      e.v() = std::sin(k * (p.x - a));
      e.x() = k * std::cos(k * (p.x - a));
      e.xx() = -k * k * e.v();
      return e;
    };
    return wrap_hard_bc_multiply(model, eta, {{d.x_lo, 0.0}, {d.x_hi, 0.0}}, "sin-bump");
  }
  if (bc == "subtract") {
    std::vector<Point> probes;
    for (int i = 0; i < 64; ++i) probes.push_back({d.x_lo + (d.x_hi - d.x_lo) * (i + 0.5) / 64.0, 0.0});
    return wrap_hard_bc_subtract(model, d.x_hi, probes);
  }
  throw ConfigError(cfg.source() + ": key 'model.hard_bc': expected none, multiply or subtract");
}

Vector initial_parameters(const Config& cfg, const Model& model) {
  if (cfg.get_string("model.kind") != "mlp") return Vector(model.num_params(), 0.0);
  const PdeProblem problem = problem_from_config(cfg);
  const MlpModel shape(mlp_spec_from_config(cfg, problem));
  const std::uint64_t seed = Rng(static_cast<std::uint64_t>(cfg.get_int("seed"))).substream("init").seed();
  Vector theta = xavier_init(shape, cfg.get_double("model.init_gain"), seed).values();
  if (theta.size() != model.num_params()) throw ContractViolation("initial parameters do not match the model");
  return theta;
}

const std::vector<std::string>& sweep_variables() {
  static const std::vector<std::string> v{"K", "beta", "n_int", "width", "gamma", "lambda"};
  return v;
}

void apply_sweep_value(Config& cfg, const std::string& variable, double value) {
  const std::string s = format_double(value);
  auto as_int = [&]() {
    if (value != std::floor(value) || value < 0) throw ConfigError("sweep value " + s + " of " + variable + " must be a nonnegative integer");
    return std::to_string(static_cast<long>(value));
  };
  if (variable == "K") {
    cfg.set("model.k_max", as_int());
    cfg.set("conditioning.k_values", "[" + as_int() + "]");
  } else if (variable == "beta") {
    cfg.set("problem.beta", s);
  } else if (variable == "n_int") {
    cfg.set("quadrature.n_int", as_int());
  } else if (variable == "width") {
    const std::size_t depth = cfg.get_int_list("model.hidden").size();
    std::string h = "[";
    for (std::size_t i = 0; i < depth; ++i) h += (i ? ", " : "") + as_int();
    cfg.set("model.hidden", h + "]");
  } else if (variable == "gamma") {
    cfg.set("conditioning.gamma", s);
  } else if (variable == "lambda") {
    cfg.set("conditioning.lambda", s);
  } else {
    throw ConfigError("unknown sweep variable '" + variable + "' (expected K, beta, n_int, width, gamma or lambda)");
  }
}

double boundary_c1_norm(const std::function<Jet(const Point&)>& f, const SpaceTimeDomain& d, int samples) {
  std::vector<double> ends{d.x_lo, d.x_hi};
  if (d.periodic_x) ends = {d.x_hi};
  const int per = std::max(1, samples / static_cast<int>(ends.size()));
  double sv = 0.0, sx = 0.0, st = 0.0;
  for (double e : ends) {
    for (int i = 0; i < per; ++i) {
      const double t = d.time_dependent() ? d.t_end * i / std::max(1, per - 1) : 0.0;
      const Jet j = f({e, t});
      sv = std::max(sv, std::abs(j.v()));
      sx = std::max(sx, std::abs(j.x()));
      st = std::max(st, std::abs(j.t()));
    }
  }
  return sv + sx + st;
}

RunTables execute_experiment(const Config& cfg, const SweepPoint& point, bool cond_only) {
  const std::string kind = cfg.get_string("experiment.kind");
  if (kind == "train" || kind == "cond") return run_train(cfg, point, cond_only || kind == "cond");
  if (kind == "toy-hard-bc") return run_toy(point);
  if (kind == "split") return run_split(cfg, point);
  if (kind == "quadrature-rates") return run_rates(cfg);
  if (kind == "wpinn") return run_wpinn(cfg);
  if (kind == "ntk-drift") return run_ntk(cfg);
  if (kind == "lambda-strategies") return run_lambda_strategies(cfg);
  throw ConfigError(cfg.source() + ": key 'experiment.kind': unknown kind '" + kind +
                    "' (train, cond, toy-hard-bc, split, quadrature-rates, wpinn, ntk-drift, lambda-strategies)");
}

}  // namespace piml
