#include "piml/mlp_model.hpp"

#include <cmath>
#include <sstream>

#include "piml/errors.hpp"
#include "piml/rng.hpp"

namespace piml {

MlpModel::MlpModel(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.inputs != 1 && spec_.inputs != 2) throw ConfigError("mlp inputs must be 1 or 2");
  if (spec_.hidden.empty()) throw ConfigError("mlp needs at least one hidden layer");
  for (int w : spec_.hidden)
    if (w < 1) throw ConfigError("mlp widths must be positive");
  if (spec_.order < 0 || spec_.order > 2) throw ConfigError("mlp order must be 0, 1 or 2");
  ncomp_ = spec_.order == 0 ? 1 : (spec_.order == 1 ? 3 : kJetSize);
  if (spec_.input_scale.empty()) spec_.input_scale.assign(spec_.inputs, 1.0);
  if (static_cast<int>(spec_.input_scale.size()) != spec_.inputs)
    throw ConfigError("mlp input_scale must have one entry per input");
  std::size_t off = 0;
  for (std::size_t k = 0; k < num_layers(); ++k) {
    const auto rows = static_cast<std::size_t>(fan_out(k));
    const auto cols = static_cast<std::size_t>(fan_in(k));
    layout_.push_back(LayoutBlock{"W" + std::to_string(k), rows, cols});
    w_off_.push_back(off);
    off += rows * cols;
    layout_.push_back(LayoutBlock{"b" + std::to_string(k), rows, 1});
    b_off_.push_back(off);
    off += rows;
  }
  n_params_ = off;
}

int MlpModel::fan_in(std::size_t k) const { return k == 0 ? spec_.inputs : spec_.hidden[k - 1]; }
int MlpModel::fan_out(std::size_t k) const { return k < spec_.hidden.size() ? spec_.hidden[k] : 1; }

std::string MlpModel::describe() const {
  std::ostringstream os;
  os << "mlp tanh inputs=" << spec_.inputs << " hidden=[";
  for (std::size_t i = 0; i < spec_.hidden.size(); ++i) os << (i ? "," : "") << spec_.hidden[i];
  os << "] order=" << spec_.order << " params=" << n_params_;
  return os.str();
}

namespace {

struct Workspace {
  std::vector<std::vector<Jet>> a;  // a[0] inputs, a[k] activations of hidden layer k
  std::vector<std::vector<Jet>> z;  // z[k] pre-activations feeding a[k], k >= 1
  std::vector<Jet> abar, zbar;
};

void input_jets(const MlpSpec& spec, const Point& p, std::vector<Jet>& a0) {
  a0.assign(spec.inputs, Jet{});
  a0[0].v() = spec.input_scale[0] * p.x;
  a0[0].x() = spec.input_scale[0];
  if (spec.inputs == 2) {
    a0[1].v() = spec.input_scale[1] * p.t;
    a0[1].t() = spec.input_scale[1];
  }
}

// y = W a + b for jets; the bias only enters the value component.
void affine(std::span<const double> w, std::span<const double> b, const std::vector<Jet>& in, std::vector<Jet>& out,
            int rows, int ncomp) {
  const std::size_t cols = in.size();
  out.assign(rows, Jet{});
  for (int i = 0; i < rows; ++i) {
    Jet& o = out[i];
    const double* wi = w.data() + static_cast<std::size_t>(i) * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      const double wij = wi[j];
      const Jet& aj = in[j];
      for (int c = 0; c < ncomp; ++c) o.c[c] += wij * aj.c[c];
    }
    o.v() += b[i];
  }
}

void activate(const std::vector<Jet>& z, std::vector<Jet>& a) {
  a.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Jet& zi = z[i];
    const double s = std::tanh(zi.v());
    const double d1 = 1.0 - s * s;
    const double d2 = -2.0 * s * d1;
    Jet& o = a[i];
    o.v() = s;
    o.x() = d1 * zi.x();
    o.t() = d1 * zi.t();
    o.xx() = d2 * zi.x() * zi.x() + d1 * zi.xx();
    o.xt() = d2 * zi.x() * zi.t() + d1 * zi.xt();
    o.tt() = d2 * zi.t() * zi.t() + d1 * zi.tt();
  }
}

// Pulls the cotangent of a = tanh-jet(z) back to z.
Jet activate_backward(const Jet& z, const Jet& ab) {
  const double s = std::tanh(z.v());
  const double d1 = 1.0 - s * s;
  const double d2 = -2.0 * s * d1;
  const double d3 = -2.0 * d1 * d1 + 4.0 * s * s * d1;
  Jet zb;
  zb.v() = ab.v() * d1 + ab.x() * d2 * z.x() + ab.t() * d2 * z.t() + ab.xx() * (d3 * z.x() * z.x() + d2 * z.xx()) +
           ab.xt() * (d3 * z.x() * z.t() + d2 * z.xt()) + ab.tt() * (d3 * z.t() * z.t() + d2 * z.tt());
  zb.x() = ab.x() * d1 + 2.0 * ab.xx() * d2 * z.x() + ab.xt() * d2 * z.t();
  zb.t() = ab.t() * d1 + 2.0 * ab.tt() * d2 * z.t() + ab.xt() * d2 * z.x();
  zb.xx() = ab.xx() * d1;
  zb.xt() = ab.xt() * d1;
  zb.tt() = ab.tt() * d1;
  return zb;
}

double contract_prefix(const Jet& a, const Jet& b, int ncomp) {
  double s = 0.0;
  for (int c = 0; c < ncomp; ++c) s += a.c[c] * b.c[c];
  return s;
}

}  // namespace

Jet MlpModel::forward(std::span<const double> theta, const Point& p) const {
  thread_local std::vector<Jet> a, z;
  input_jets(spec_, p, a);
  const std::size_t hidden = spec_.hidden.size();
  for (std::size_t k = 0; k < hidden; ++k) {
    affine(theta.subspan(w_off_[k]), theta.subspan(b_off_[k]), a, z, fan_out(k), ncomp_);
    activate(z, a);
  }
  affine(theta.subspan(w_off_[hidden]), theta.subspan(b_off_[hidden]), a, z, 1, ncomp_);
  return z[0];
}

Jet MlpModel::backward(std::span<const double> theta, const Point& p, const Jet& cot, std::span<double> grad) const {
  thread_local Workspace ws;
  const std::size_t hidden = spec_.hidden.size();
  ws.a.resize(hidden + 1);
  ws.z.resize(hidden + 1);
  input_jets(spec_, p, ws.a[0]);
  for (std::size_t k = 0; k < hidden; ++k) {
    affine(theta.subspan(w_off_[k]), theta.subspan(b_off_[k]), ws.a[k], ws.z[k + 1], fan_out(k), ncomp_);
    activate(ws.z[k + 1], ws.a[k + 1]);
  }
  thread_local std::vector<Jet> out;
  affine(theta.subspan(w_off_[hidden]), theta.subspan(b_off_[hidden]), ws.a[hidden], out, 1, ncomp_);

  // Output layer: y = W_L a_L + b_L.
  {
    const std::vector<Jet>& aL = ws.a[hidden];
    const std::size_t wo = w_off_[hidden];
    for (std::size_t j = 0; j < aL.size(); ++j) grad[wo + j] += contract_prefix(cot, aL[j], ncomp_);
    grad[b_off_[hidden]] += cot.v();
    ws.abar.assign(aL.size(), Jet{});
    for (std::size_t j = 0; j < aL.size(); ++j) {
      ws.abar[j] = cot;
      ws.abar[j] *= theta[wo + j];
    }
  }
  for (std::size_t kk = hidden; kk-- > 0;) {
    // Layer kk maps a[kk] to z[kk + 1].
    const std::vector<Jet>& zin = ws.z[kk + 1];
    const std::vector<Jet>& ain = ws.a[kk];
    const int rows = fan_out(kk);
    const std::size_t cols = ain.size();
    ws.zbar.resize(rows);
    for (int i = 0; i < rows; ++i) ws.zbar[i] = activate_backward(zin[i], ws.abar[i]);
    const std::size_t wo = w_off_[kk];
    for (int i = 0; i < rows; ++i) {
      const Jet& zb = ws.zbar[i];
      double* gi = grad.data() + wo + static_cast<std::size_t>(i) * cols;
      for (std::size_t j = 0; j < cols; ++j) gi[j] += contract_prefix(zb, ain[j], ncomp_);
      grad[b_off_[kk] + i] += zb.v();
    }
    if (kk == 0) break;
    ws.abar.assign(cols, Jet{});
    for (int i = 0; i < rows; ++i) {
      const Jet& zb = ws.zbar[i];
      const double* wi = theta.data() + wo + static_cast<std::size_t>(i) * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        const double wij = wi[j];
        for (int c = 0; c < ncomp_; ++c) ws.abar[j].c[c] += wij * zb.c[c];
      }
    }
  }
  return out[0];
}

ParameterVector xavier_init(const MlpModel& model, double gain, std::uint64_t seed) {
  if (!(gain > 0.0)) throw DomainError("Xavier gain must be positive");
  ParameterVector theta(model.layout());
  Rng rng(seed);
  for (std::size_t k = 0; k < model.num_layers(); ++k) {
    const double sd = gain * std::sqrt(2.0 / (model.fan_in(k) + model.fan_out(k)));
    const std::size_t n = static_cast<std::size_t>(model.fan_in(k)) * model.fan_out(k);
    for (std::size_t i = 0; i < n; ++i) theta[model.weight_offset(k) + i] = rng.normal(0.0, sd);
  }
  return theta;
}

}  // namespace piml
