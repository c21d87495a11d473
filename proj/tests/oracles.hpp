#ifndef PIML_TESTS_ORACLES_HPP_
#define PIML_TESTS_ORACLES_HPP_

// Finite-difference oracles shared by the unit tests and the acceptance
// driver. Errors are relative with a unit floor: |a - b| / max(1, |b|).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "piml/model.hpp"
#include "piml/problems.hpp"
#include "piml/rng.hpp"

namespace piml::oracle {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct DerivativeCheck {
  double first = 0.0;   // worst error over x, t, theta and L-composed features
  double second = 0.0;  // xx, tt
  double mixed = 0.0;   // xt
  std::string worst;    // description of the worst first-order entry
};

inline Jet jet_at(const Model& m, const Vector& th, double x, double t) { return m.forward(th, Point{x, t}); }

// Compares analytic jets and parameter gradients with central differences at
// `probes` random points of `box` (1 or 2 axes). Second derivatives are
// differences of the analytic first derivatives.
inline DerivativeCheck check_derivatives(const Model& model, const Vector& theta,
                                         const std::vector<std::pair<double, double>>& box, int probes,
                                         std::uint64_t seed, const PdeProblem* problem = nullptr) {
  const double h = 1e-5;
  const bool has_t = box.size() > 1;
  Rng rng(seed);
  DerivativeCheck out;
  auto note = [&](double e, const std::string& what) {
    if (e > out.first) {
      out.first = e;
      out.worst = what;
    }
  };
  const OperatorLinearization op = problem ? problem->linearization() : OperatorLinearization{};
  for (int k = 0; k < probes; ++k) {
    const double x = rng.uniform(box[0].first, box[0].second);
    const double t = has_t ? rng.uniform(box[1].first, box[1].second) : 0.0;
    const Jet j = jet_at(model, theta, x, t);
    const Jet xp = jet_at(model, theta, x + h, t), xm = jet_at(model, theta, x - h, t);
    note(rel_err(j.x(), (xp.v() - xm.v()) / (2 * h)), "u_x");
    if (model.max_order() >= 2) out.second = std::max(out.second, rel_err(j.xx(), (xp.x() - xm.x()) / (2 * h)));
    if (has_t) {
      const Jet tp = jet_at(model, theta, x, t + h), tm = jet_at(model, theta, x, t - h);
      note(rel_err(j.t(), (tp.v() - tm.v()) / (2 * h)), "u_t");
      if (model.max_order() >= 2) {
        out.second = std::max(out.second, rel_err(j.tt(), (tp.t() - tm.t()) / (2 * h)));
        out.mixed = std::max(out.mixed, rel_err(j.xt(), (tp.x() - tm.x()) / (2 * h)));
      }
    }
    // Parameter derivatives of u and of L u.
    Jet cot_v;
    cot_v.v() = 1.0;
    Vector g(model.num_params(), 0.0);
    model.backward(theta, Point{x, t}, cot_v, g);
    Vector lg(model.num_params(), 0.0);
    if (problem) model.backward(theta, Point{x, t}, op(Point{x, t}, j), lg);
    for (std::size_t i = 0; i < model.num_params(); ++i) {
      Vector tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      const Jet jp = model.forward(tp, Point{x, t}), jm = model.forward(tm, Point{x, t});
      note(rel_err(g[i], (jp.v() - jm.v()) / (2 * h)), "du/dtheta_" + std::to_string(i));
      if (problem) {
        const double fd = (problem->apply_operator(Point{x, t}, jp) - problem->apply_operator(Point{x, t}, jm)) / (2 * h);
        note(rel_err(lg[i], fd), "dLu/dtheta_" + std::to_string(i));
      }
    }
  }
  return out;
}

}  // namespace piml::oracle

#endif  // PIML_TESTS_ORACLES_HPP_
