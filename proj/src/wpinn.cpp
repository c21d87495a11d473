#include "piml/wpinn.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "piml/errors.hpp"
#include "piml/wrappers.hpp"

namespace piml {

using std::numbers::pi;

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// R and its gradients for cached model values v_j and adversary jets.
double residual_from_cache(const PdeProblem& problem, const Vector& v, const std::vector<Jet>& phi, double c,
                           const QuadratureRule& quad) {
  double r = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j)
    r -= quad.weights[j] *
         (std::abs(v[j] - c) * phi[j].t() + EntropyData::flux_q(problem, v[j], c) * phi[j].x());
  return r;
}

double grad_norm_sq(const std::vector<Jet>& phi, const QuadratureRule& quad) {
  double s = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) s += quad.weights[j] * (phi[j].x() * phi[j].x() + phi[j].t() * phi[j].t());
  return s;
}

void check_first_order(const Model& m) {
  if (m.max_order() < 1) throw CapabilityError(m.name() + " cannot provide first derivatives for a test function");
}

}  // namespace

double kruzkhov_residual(const PdeProblem& problem, const Model& v_model, std::span<const double> theta_v,
                         const Model& phi_model, std::span<const double> theta_phi, double c,
                         const QuadratureRule& quad, Vector* grad_v, Vector* grad_phi) {
  check_first_order(phi_model);
  if (grad_v) grad_v->assign(v_model.num_params(), 0.0);
  if (grad_phi) grad_phi->assign(phi_model.num_params(), 0.0);
  double r = 0.0;
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const Point& p = quad.points[j];
    const double w = quad.weights[j];
    const double v = v_model.forward(theta_v, p).v();
    const Jet phi = phi_model.forward(theta_phi, p);
    const double q = EntropyData::flux_q(problem, v, c);
    r -= w * (std::abs(v - c) * phi.t() + q * phi.x());
    if (grad_phi) {
      Jet cot;
      cot.t() = -w * std::abs(v - c);
      cot.x() = -w * q;
      phi_model.backward(theta_phi, p, cot, *grad_phi);
    }
    if (grad_v) {
      Jet cot;
      cot.v() = -w * sgn(v - c) * (phi.t() + problem.flux_prime(v) * phi.x());
      v_model.backward(theta_v, p, cot, *grad_v);
    }
  }
  return r;
}

ModelPtr make_adversary(const PdeProblem& problem, const std::vector<int>& hidden) {
  const auto& d = problem.domain();
  if (!d.time_dependent()) throw CapabilityError("adversary needs a time-dependent problem");
  MlpSpec spec;
  spec.inputs = 2;
  spec.hidden = hidden;
  spec.order = 1;
  auto mlp = std::make_shared<MlpModel>(spec);
  const double a = d.x_lo, len = d.x_hi - d.x_lo, t_end = d.t_end;
  auto bump = [a, len, t_end](const Point& p) {
    const double kx = pi / len, kt = pi / t_end;
    Jet bx, bt;
    bx.v() = std::sin(kx * (p.x - a));
    bx.x() = kx * std::cos(kx * (p.x - a));
    bx.xx() = -kx * kx * bx.v();
    bt.v() = std::sin(kt * p.t);
    bt.t() = kt * std::cos(kt * p.t);
    bt.tt() = -kt * kt * bt.v();
    return jet_product(bx, bt);
  };
  std::vector<Point> boundary;
  for (int i = 0; i <= 8; ++i) {
    const double s = i / 8.0;
    boundary.push_back({d.x_lo, s * t_end});
    boundary.push_back({d.x_hi, s * t_end});
    boundary.push_back({a + s * len, 0.0});
    boundary.push_back({a + s * len, t_end});
  }
  return wrap_hard_bc_multiply(mlp, bump, boundary, "sin-bump");
}

WpinnTerms wpinn_loss(const PdeProblem& problem, const Model& v_model, std::span<const double> theta_v,
                      const Model& phi_model, std::span<const double> theta_phi, const std::vector<double>& c_grid,
                      const TrainingSet& set, double lambda_s, double lambda_t, bool normalize, Vector* grad_v,
                      Vector* grad_phi) {
  if (c_grid.empty()) throw ConfigError("empty c grid");
  check_first_order(phi_model);
  const QuadratureRule& quad = set.interior;
  Vector v(quad.size());
  std::vector<Jet> phi(quad.size());
  for (std::size_t j = 0; j < quad.size(); ++j) {
    v[j] = v_model.forward(theta_v, quad.points[j]).v();
    phi[j] = phi_model.forward(theta_phi, quad.points[j]);
  }
  const double nsq = grad_norm_sq(phi, quad);
  const double norm = normalize ? std::sqrt(std::max(nsq, 1e-300)) : 1.0;

  WpinnTerms terms;
  double best = -INFINITY;
  for (double c : c_grid) {
    const double r = residual_from_cache(problem, v, phi, c, quad);
    if (r > best) {
      best = r;
      terms.c_star = c;
    }
  }
  terms.residual = best / norm;
  const double c = terms.c_star;

  if (grad_v) grad_v->assign(v_model.num_params(), 0.0);
  if (grad_phi) grad_phi->assign(phi_model.num_params(), 0.0);
  for (std::size_t j = 0; j < quad.size(); ++j) {
    const Point& p = quad.points[j];
    const double w = quad.weights[j];
    if (grad_phi) {
      // d(R / N) = dR / N - R / N^3 * d(N^2 / 2).
      Jet cot;
      cot.t() = -w * std::abs(v[j] - c) / norm;
      cot.x() = -w * EntropyData::flux_q(problem, v[j], c) / norm;
      if (normalize) {
        const double k = best / (norm * norm * norm);
        cot.x() -= k * w * phi[j].x();
        cot.t() -= k * w * phi[j].t();
      }
      phi_model.backward(theta_phi, p, cot, *grad_phi);
    }
    if (grad_v) {
      Jet cot;
      cot.v() = -w * sgn(v[j] - c) * (phi[j].t() + problem.flux_prime(v[j]) * phi[j].x()) / norm;
      v_model.backward(theta_v, p, cot, *grad_v);
    }
  }

  for (std::size_t j = 0; j < set.temporal_boundary.size(); ++j) {
    const Point& p = set.temporal_boundary.points[j];
    const double w = set.temporal_boundary.weights[j];
    const double r = v_model.forward(theta_v, p).v() - problem.initial_value(p.x);
    terms.initial += w * std::abs(r);
    if (grad_v) {
      Jet cot;
      cot.v() = lambda_t * w * sgn(r);
      v_model.backward(theta_v, p, cot, *grad_v);
    }
  }
  for (std::size_t j = 0; j < set.spatial_boundary.size(); ++j) {
    const Point& p = set.spatial_boundary.points[j];
    const double w = set.spatial_boundary.weights[j];
    const double r = v_model.forward(theta_v, p).v() - problem.boundary_value(p);
    terms.boundary += w * std::abs(r);
    if (grad_v) {
      Jet cot;
      cot.v() = lambda_s * w * sgn(r);
      v_model.backward(theta_v, p, cot, *grad_v);
    }
  }
  terms.total = terms.residual + lambda_t * terms.initial + lambda_s * terms.boundary;
  return terms;
}

double relative_l1_error(const PdeProblem& problem, const Model& model, std::span<const double> theta, int m) {
  const QuadratureRule rule = midpoint_rule(problem.domain().interior_box(), m);
  const double err = solution_error(problem, model, theta, rule, 1);
  const double ref = solution_norm(problem, rule, 1);
  return ref > 0.0 ? err / ref : err;
}

WpinnResult train_wpinn(const PdeProblem& problem, const WpinnConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Rng base(cfg.seed);
  MlpSpec spec;
  spec.inputs = 2;
  spec.hidden = cfg.u_hidden;
  spec.order = 0;
  auto model = std::make_shared<MlpModel>(spec);
  ModelPtr adversary = make_adversary(problem, cfg.adversary_hidden);
  MlpSpec aspec;
  aspec.inputs = 2;
  aspec.hidden = cfg.adversary_hidden;
  aspec.order = 1;
  const MlpModel adv_shape(aspec);

  TrainingSetSpec ts;
  ts.n_int = cfg.n_int;
  ts.n_s = cfg.n_s;
  ts.n_t = cfg.n_t;
  ts.kind = cfg.kind;
  ts.seed = base.substream("training-set").seed();
  const TrainingSet set = make_training_set(problem.domain(), ts);
  const EntropyData entropy = EntropyData::for_problem(problem, cfg.c_count);

  WpinnResult res;
  res.model = model;
  res.theta = xavier_init(*model, 1.0, base.substream("u-init").seed()).values();
  OptimizerState opt_u;
  opt_u.kind = OptimizerKind::adam;
  opt_u.adam.alpha = cfg.lr_u;
  OptimizerState opt_phi;
  Vector theta_phi;
  long restart = 0;
  auto reinit_adversary = [&]() {
    theta_phi = xavier_init(adv_shape, 1.0, base.substream(1000 + static_cast<std::uint64_t>(restart++)).seed()).values();
    opt_phi = OptimizerState{};
    opt_phi.kind = OptimizerKind::adam;
    opt_phi.adam.alpha = cfg.lr_phi;
  };
  reinit_adversary();

  Vector gv, gphi;
  for (long step = 0; step < cfg.outer_steps; ++step) {
    if (step > 0 && cfg.reinit_every > 0 && step % cfg.reinit_every == 0) reinit_adversary();
    for (int a = 0; a < cfg.ascent_steps; ++a) {
      wpinn_loss(problem, *model, res.theta, *adversary, theta_phi, entropy.c_grid, set, cfg.lambda_s, cfg.lambda_t,
                 cfg.normalize, nullptr, &gphi);
      for (double& g : gphi) g = -g;  // ascent
      adam_step(opt_phi, theta_phi, gphi);
    }
    const WpinnTerms terms = wpinn_loss(problem, *model, res.theta, *adversary, theta_phi, entropy.c_grid, set,
                                        cfg.lambda_s, cfg.lambda_t, cfg.normalize, &gv, nullptr);
    adam_step(opt_u, res.theta, gv);
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.outer_steps))
      res.history.push_back({step, terms});
  }
  res.rel_l1 = relative_l1_error(problem, *model, res.theta);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace piml
