#include "odt/inversion.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace odt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double weighted_norm(std::span<const Complex> r, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += w[i] * std::norm(r[i]);
  return std::sqrt(s);
}

ComplexVec weighted(std::span<const Complex> r, std::span<const double> w) {
  ComplexVec out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = w[i] * r[i];
  return out;
}

void check_samples(const FourierSamples& g, const NdftOperator& op) {
  if (g.size() != op.nodes().node_count())
    throw std::invalid_argument("Fourier samples do not match the node set");
}

int default_tvd_iterations(int dim) { return dim == 2 ? 50 : 20; }

}  // namespace

// ---------------------------------------------------------------------------

NdftDataTerm::NdftDataTerm(const NdftOperator& op, const FourierSamples& g,
                           std::span<const double> weights)
    : op_(op), g_(g), w_(weights) {
  check_samples(g, op);
  if (weights.size() != g.size()) throw std::invalid_argument("NdftDataTerm: weight count");
}

double NdftDataTerm::gradient(std::span<const double> f, std::span<double> grad) const {
  ComplexVec r = op_.apply(f);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= g_[i];
  const double res = weighted_norm(r, w_);
  const RealVec gr = op_.adjoint_real(weighted(r, w_));
  std::copy(gr.begin(), gr.end(), grad.begin());
  return res;
}

double NdftDataTerm::lipschitz() const {
  if (lipschitz_) return *lipschitz_;
  // Power method on Re F* W F from a fixed start vector.
  const std::size_t n = op_.object_size();
  RealVec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i));
  double lambda = 0.0;
  for (int it = 0; it < 10; ++it) {
    const double nv = norm2(v);
    for (auto& x : v) x /= nv;
    const RealVec Av = op_.adjoint_real(weighted(op_.apply(v), w_));
    lambda = dot(v, Av);
    v = Av;
  }
  lipschitz_ = lambda;
  return lambda;
}

double IdentityDataTerm::gradient(std::span<const double> f, std::span<double> grad) const {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    grad[i] = f[i] - f_in_[i];
    s += grad[i] * grad[i];
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

std::vector<double> solver_weights(const NodeSet& nodes, WeightsMode mode) {
  if (mode == WeightsMode::quadrature) return nodes.weights;
  return std::vector<double>(nodes.node_count(), 1.0);
}

FourierSamples measurements_to_fourier(const MeasurementStack& stack, const OdtModel& model) {
  const auto& cfg = model.config();
  if (stack.kind == StackKind::magnitude)
    throw std::invalid_argument(
        "measurements_to_fourier: magnitude-only data needs phase retrieval");
  if (stack.dim != cfg.dim || stack.M != cfg.M || stack.N != cfg.N)
    throw std::invalid_argument("measurements_to_fourier: stack shape does not match config");
  const auto& nodes = model.nodes();
  const auto& c = model.coefficients();
  const Complex inc = stack.kind == StackKind::total_field ? model.incident() : Complex(0.0);
  FourierSamples g(nodes.node_count());
  ComplexVec v(cfg.detector_size());
  for (int m = 0; m < cfg.M; ++m) {
    const auto step = stack.step(m);
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = step[n] - inc;
    const ComplexVec spec = dft(v, cfg.N, cfg.dim - 1);
    for (std::size_t j = 0; j < nodes.per_step(); ++j)
      g[m * nodes.per_step() + j] = spec[nodes.detector_index[j]] / c[j];
  }
  return g;
}

ScatteringPotential backpropagation(const FourierSamples& g, const NdftOperator& op) {
  check_samples(g, op);
  return {op.dim(), op.K(), op.adjoint_real(weighted(g, op.nodes().weights))};
}

ReconstructionReport cg_solve(const FourierSamples& g, const NdftOperator& op, WeightsMode mode,
                              int iterations, const ScatteringPotential* f0) {
  check_samples(g, op);
  if (iterations < 1) throw std::invalid_argument("cg_solve: need at least one iteration");
  const auto start = Clock::now();
  const std::vector<double> w = solver_weights(op.nodes(), mode);

  ReconstructionReport rep;
  rep.method = "cg";
  rep.potential = f0 ? *f0 : ScatteringPotential(op.dim(), op.K());
  if (rep.potential.size() != op.object_size())
    throw std::invalid_argument("cg_solve: initial guess has the wrong size");

  ComplexVec r = g;
  if (f0) {
    const ComplexVec Ff = op.apply(rep.potential.values);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= Ff[i];
  }
  RealVec s = op.adjoint_real(weighted(r, w));
  RealVec p = s;
  double gamma = dot(s, s);
  const double gamma0 = gamma;
  rep.history.push_back({0, weighted_norm(r, w), std::nullopt, std::nullopt, std::nullopt,
                         elapsed_ms(start)});

  for (int j = 0; j < iterations; ++j) {
    // Stationary point, up to rounding.
    if (gamma <= 1e-30 * gamma0) break;
    const ComplexVec q = op.apply(p);
    double delta = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) delta += w[i] * std::norm(q[i]);
    if (!(delta > 0.0)) {
      rep.breakdown = true;
      break;
    }
    const double alpha = gamma / delta;
    for (std::size_t i = 0; i < p.size(); ++i) rep.potential.values[i] += alpha * p[i];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * q[i];
    s = op.adjoint_real(weighted(r, w));
    const double gamma_next = dot(s, s);
    const double beta = gamma_next / gamma;
    gamma = gamma_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = s[i] + beta * p[i];
    rep.iterations = j + 1;
    rep.history.push_back({j + 1, weighted_norm(r, w), std::nullopt, std::nullopt, std::nullopt,
                           elapsed_ms(start)});
  }
  rep.wall_ms = elapsed_ms(start);
  return rep;
}

PdResult pd_solve(const DataTerm& data, int dim, int K, const PdParams& params,
                  const PdState* warm, const ScatteringPotential* initial) {
  if (!(params.lambda > 0.0)) throw std::invalid_argument("pd_solve: lambda must be positive");
  if (params.iterations < 0) throw std::invalid_argument("pd_solve: negative iteration count");
  const auto start = Clock::now();
  const std::size_t n = grid_size(K, dim);

  PdState st;
  if (warm) {
    st = *warm;
    if (st.primal.size() != n || st.dual.values.size() != n * dim)
      throw std::invalid_argument("pd_solve: warm state has the wrong shape");
  } else {
    st.primal = initial ? *initial : ScatteringPotential(dim, K);
    if (st.primal.size() != n) throw std::invalid_argument("pd_solve: initial guess size");
    for (auto& v : st.primal.values) v = std::max(v, 0.0);
    st.dual = DualField(dim, K);
    const double grad_norm_sq = 4.0 * dim;  // ||grad||^2 <= 4 dim
    const double step = 1.0 / std::sqrt(grad_norm_sq + data.lipschitz());
    st.tau = params.tau0.value_or(step);
    st.sigma = params.sigma0.value_or(step);
  }
  if (!(st.tau > 0.0) || !(st.sigma > 0.0))
    throw std::invalid_argument("pd_solve: step sizes must be positive");

  ReconstructionReport rep;
  rep.method = "pdtv";
  rep.lambda = params.lambda;

  RealVec grad(n), grad_next(n);
  double residual = data.gradient(st.primal.values, grad);
  rep.history.push_back(
      {0, residual, total_variation(st.primal), st.tau, st.sigma, elapsed_ms(start)});

  ScatteringPotential f_next(dim, K);
  ScatteringPotential df(dim, K);
  DualField dy(dim, K);
  for (int j = 0; j < params.iterations; ++j) {
    const double tau = st.tau;
    const double sigma = st.sigma;

    // Primal step with projection onto the nonnegative orthant.
    const ScatteringPotential divy = div_op(st.dual);
    for (std::size_t i = 0; i < n; ++i)
      f_next.values[i] = std::max(0.0, st.primal.values[i] - tau * (grad[i] - divy.values[i]));

    // Dual step on the extrapolated primal.
    ScatteringPotential extra(dim, K);
    for (std::size_t i = 0; i < n; ++i)
      extra.values[i] = 2.0 * f_next.values[i] - st.primal.values[i];
    DualField ybar = grad_op(extra);
    for (std::size_t i = 0; i < ybar.values.size(); ++i)
      ybar.values[i] = st.dual.values[i] + sigma * ybar.values[i];
    DualField y_next = prox_dual_tv(ybar, sigma, params.lambda);

    residual = data.gradient(f_next.values, grad_next);

    // Primal and dual residuals; F*WF(f - f+) = grad G(f) - grad G(f+).
    for (std::size_t i = 0; i < n; ++i) df.values[i] = st.primal.values[i] - f_next.values[i];
    for (std::size_t i = 0; i < dy.values.size(); ++i)
      dy.values[i] = st.dual.values[i] - y_next.values[i];
    const ScatteringPotential div_dy = div_op(dy);
    RealVec p(n);
    for (std::size_t i = 0; i < n; ++i)
      p[i] = df.values[i] / tau - (grad[i] - grad_next[i]) + div_dy.values[i];
    const DualField grad_df = grad_op(df);
    RealVec dres(dy.values.size());
    for (std::size_t i = 0; i < dres.size(); ++i)
      dres[i] = dy.values[i] / sigma - grad_df.values[i];

    const double ndf = norm2(df.values);
    const double np = norm2(p);
    const double ndy = norm2(dy.values);
    const double nd = norm2(dres);
    double tau_j = tau;
    double sigma_j = sigma;
    if (ndf > 0.0 && np > 0.0) {
      const double omega_p = dot(df.values, p) / (ndf * np);
      if (omega_p > params.alignment) tau_j *= params.growth;
      if (omega_p < 0.0) tau_j *= params.shrink;
    }
    if (ndy > 0.0 && nd > 0.0) {
      const double omega_d = dot(dy.values, dres) / (ndy * nd);
      if (omega_d > params.alignment) sigma_j *= params.growth;
      if (omega_d < 0.0) sigma_j *= params.shrink;
    }
    const double nf = norm2(f_next.values);
    const double ny = norm2(y_next.values);
    if (nf > 0.0 && ny > 0.0) {
      const double bal = std::pow(nf / ny, params.balance_exponent);
      tau_j *= bal;
      sigma_j /= bal;
    }

    st.primal.values.swap(f_next.values);
    st.dual = std::move(y_next);
    grad.swap(grad_next);
    st.tau = tau_j;
    st.sigma = sigma_j;
    ++st.iteration;
    rep.iterations = j + 1;
    rep.history.push_back(
        {j + 1, residual, total_variation(st.primal), st.tau, st.sigma, elapsed_ms(start)});
  }
  rep.potential = st.primal;
  rep.wall_ms = elapsed_ms(start);
  return {std::move(rep), std::move(st)};
}

PdResult pd_tv_solve(const FourierSamples& g, const NdftOperator& op, const PdParams& params,
                     const PdState* warm, const ScatteringPotential* initial, WeightsMode mode) {
  const std::vector<double> w = solver_weights(op.nodes(), mode);
  const NdftDataTerm data(op, g, w);
  return pd_solve(data, op.dim(), op.K(), params, warm, initial);
}

ScatteringPotential tv_denoise(const ScatteringPotential& f_in, double lambda, int iterations) {
  const IdentityDataTerm data(f_in.values);
  PdParams params;
  params.lambda = lambda;
  params.iterations = iterations;
  return pd_solve(data, f_in.dim, f_in.K, params).report.potential;
}

ReconstructionReport reconstruct_fourier(const FourierSamples& g, const OdtModel& model,
                                         const ReconstructOptions& options) {
  const auto start = Clock::now();
  const auto& op = model.ndft();
  ReconstructionReport rep;
  switch (options.method) {
    case Method::bp: {
      rep.method = "bp";
      rep.potential = backpropagation(g, op);
      ComplexVec r = op.apply(rep.potential.values);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= g[i];
      const auto w = solver_weights(op.nodes(), options.weights);
      rep.history.push_back({0, weighted_norm(r, w), std::nullopt, std::nullopt, std::nullopt,
                             elapsed_ms(start)});
      break;
    }
    case Method::cg:
      rep = cg_solve(g, op, options.weights, options.cg_iterations);
      break;
    case Method::pdtv:
      rep = pd_tv_solve(g, op, options.pd, nullptr, nullptr, options.weights).report;
      break;
  }
  if (options.tvd_lambda && options.method != Method::pdtv) {
    rep.potential =
        tv_denoise(rep.potential, *options.tvd_lambda,
                   options.tvd_iterations.value_or(default_tvd_iterations(rep.potential.dim)));
    rep.method += "+tvd";
    rep.lambda = *options.tvd_lambda;
  }
  rep.wall_ms = elapsed_ms(start);
  return rep;
}

ReconstructionReport reconstruct(const MeasurementStack& stack, const OdtModel& model,
                                 const ReconstructOptions& options) {
  return reconstruct_fourier(measurements_to_fourier(stack, model), model, options);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::bp:
      return "bp";
    case Method::cg:
      return "cg";
    case Method::pdtv:
      return "pdtv";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "bp") return Method::bp;
  if (s == "cg") return Method::cg;
  if (s == "pdtv") return Method::pdtv;
  throw std::invalid_argument("unknown method '" + s + "' (expected bp, cg or pdtv)");
}

}  // namespace odt
