#include "odt/phase_retrieval.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace odt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_magnitudes(const MeasurementStack& d, const ExperimentConfig& cfg) {
  if (d.dim != cfg.dim || d.M != cfg.M || d.N != cfg.N)
    throw std::invalid_argument("phase retrieval: data shape does not match config");
  for (const auto& v : d.values)
    if (v.imag() != 0.0 || v.real() < 0.0 || !std::isfinite(v.real()))
      throw std::invalid_argument("phase retrieval: data must be real and nonnegative");
}

MeasurementStack initial_field(const MeasurementStack& d, std::optional<std::uint64_t> seed) {
  MeasurementStack g = d;
  g.kind = StackKind::total_field;
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (auto& v : g.values) v = std::polar(v.real(), phase(rng));
  }
  return g;
}

// g <- d sgn(g); returns || |g| - d ||_inf afterwards.
double replace_magnitude(MeasurementStack& g, const MeasurementStack& d) {
  double worst = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.values[i] = d.values[i].real() * sgn_cx(g.values[i]);
    worst = std::max(worst, std::abs(std::abs(g.values[i]) - d.values[i].real()));
  }
  return worst;
}

}  // namespace

Complex sgn_cx(Complex z) {
  if (z == Complex(0.0)) return 1.0;
  return z / std::abs(z);
}

SupportConstraint SupportConstraint::ball(const ExperimentConfig& config, double r_s) {
  if (!(r_s > 0.0)) throw std::invalid_argument("invalid r_s: must be positive");
  if (r_s > config.L_s * std::sqrt(static_cast<double>(config.dim)) * (1.0 + 1e-12))
    throw std::invalid_argument("invalid r_s: exceeds the object box diagonal L_s*sqrt(d)");
  SupportConstraint s;
  s.r_s = r_s;
  s.dim = config.dim;
  s.K = config.K;
  s.mask.resize(config.object_size());
  bool any = false;
  for (std::size_t k = 0; k < s.mask.size(); ++k) {
    const auto x = object_position(k, config);
    double r2 = 0.0;
    for (int a = 0; a < config.dim; ++a) r2 += x[a] * x[a];
    s.mask[k] = std::sqrt(r2) <= r_s;
    any = any || s.mask[k];
  }
  if (!any) throw std::invalid_argument("invalid r_s: support contains no grid point");
  return s;
}

double default_support_radius(const ExperimentConfig& config) { return 0.8 * config.L_s; }

ScatteringPotential object_project(const ScatteringPotential& f, const SupportConstraint& support) {
  if (f.size() != support.mask.size())
    throw std::invalid_argument("object_project: support does not match the potential");
  ScatteringPotential out = f;
  for (std::size_t k = 0; k < out.size(); ++k)
    out.values[k] = support.mask[k] ? std::max(out.values[k], 0.0) : 0.0;
  return out;
}

ScatteringPotential hio_input(const ScatteringPotential& f_j, const ScatteringPotential& f_tilde,
                              const ScatteringPotential& f_prev_half, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("hio_input: beta must be in (0,1]");
  if (f_j.size() != f_tilde.size() || f_j.size() != f_prev_half.size())
    throw std::invalid_argument("hio_input: shape mismatch");
  ScatteringPotential out = f_j;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (f_j.values[k] != f_tilde.values[k])
      out.values[k] = f_prev_half.values[k] - beta * (f_j.values[k] - f_tilde.values[k]);
  return out;
}

IoVariant variant_from_string(const std::string& s) {
  if (s == "er") return IoVariant::er;
  if (s == "hio") return IoVariant::hio;
  if (s == "md") return IoVariant::md;
  throw std::invalid_argument("unknown variant '" + s + "' (expected er, hio or md)");
}

double magnitude_misfit(const MeasurementStack& g, const MeasurementStack& d) {
  if (g.values.size() != d.values.size()) throw std::invalid_argument("magnitude_misfit: shapes");
  double s = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double e = std::abs(g.values[i]) - std::abs(d.values[i]);
    s += e * e;
  }
  return std::sqrt(s);
}

ReconstructionReport io_retrieve(const MeasurementStack& d, const OdtModel& model,
                                 const SupportConstraint& support, const IoOptions& options) {
  const auto& cfg = model.config();
  check_magnitudes(d, cfg);
  if (options.variant == IoVariant::md)
    throw std::invalid_argument("io_retrieve: use md_retrieve for the md variant");
  if (options.inner == Method::bp)
    throw std::invalid_argument("io_retrieve: inner solver must be cg or pdtv");
  if (!(options.beta > 0.0 && options.beta <= 1.0))
    throw std::invalid_argument("invalid beta: must be in (0,1]");
  if (options.outer_iterations < 1) throw std::invalid_argument("invalid J_IO: must be >= 1");
  if (support.mask.size() != cfg.object_size())
    throw std::invalid_argument("io_retrieve: support does not match config");
  const auto start = Clock::now();
  const auto& op = model.ndft();

  MeasurementStack g = initial_field(d, options.seed_phase);
  if (options.initial_field) {
    if (options.initial_field->values.size() != d.values.size())
      throw std::invalid_argument("io_retrieve: initial field shape does not match the data");
    g = *options.initial_field;
    g.kind = StackKind::total_field;
  }
  std::optional<ScatteringPotential> f_init;

  if (options.inner == Method::pdtv && options.init_from_cg) {
    IoOptions pre = options;
    pre.inner = Method::cg;
    pre.outer_iterations = options.init_outer_iterations;
    pre.cg_iterations = options.init_cg_iterations;
    pre.init_from_cg = false;
    pre.warm_start = true;
    pre.initial_field = options.initial_field;
    const ReconstructionReport cg_run = io_retrieve(d, model, support, pre);
    f_init = cg_run.potential;
    g = dtot_apply(cg_run.potential, model);
    replace_magnitude(g, d);
  }

  ReconstructionReport rep;
  rep.method = std::string(options.variant == IoVariant::er ? "er/" : "hio/") +
               to_string(options.inner);
  rep.lambda = options.inner == Method::pdtv ? options.pd.lambda : 0.0;
  rep.magnitude_violation = 0.0;

  std::optional<PdState> pd_state;
  std::optional<ScatteringPotential> cg_iterate;
  std::optional<ScatteringPotential> prev_half;
  ScatteringPotential f_tilde;

  for (int j = 0; j < options.outer_iterations; ++j) {
    const FourierSamples G = measurements_to_fourier(g, model);
    ScatteringPotential f;
    std::optional<double> tau, sigma;
    if (options.inner == Method::cg) {
      const ScatteringPotential* f0 = options.warm_start && cg_iterate ? &*cg_iterate : nullptr;
      f = cg_solve(G, op, options.weights, options.cg_iterations, f0).potential;
      cg_iterate = f;
    } else {
      const PdState* warm = options.warm_start && pd_state ? &*pd_state : nullptr;
      const ScatteringPotential* initial = (!pd_state && f_init) ? &*f_init : nullptr;
      PdResult r = pd_tv_solve(G, op, options.pd, warm, initial, options.weights);
      f = std::move(r.report.potential);
      tau = r.state.tau;
      sigma = r.state.sigma;
      pd_state = std::move(r.state);
    }

    f_tilde = object_project(f, support);
    ScatteringPotential input;
    if (options.variant == IoVariant::er) {
      input = f_tilde;
    } else {
      if (!prev_half) prev_half = f;
      input = hio_input(f, f_tilde, *prev_half, options.beta);
      prev_half = input;
    }

    MeasurementStack g_half = dtot_apply(input, model);
    const double misfit =
        options.variant == IoVariant::er ? magnitude_misfit(g_half, d)
                                         : magnitude_misfit(dtot_apply(f_tilde, model), d);
    g = std::move(g_half);
    const double violation = replace_magnitude(g, d);
    rep.magnitude_violation = std::max(*rep.magnitude_violation, violation);

    rep.iterations = j + 1;
    rep.history.push_back({j + 1, misfit, total_variation(f_tilde), tau, sigma, elapsed_ms(start)});
  }
  rep.potential = std::move(f_tilde);
  rep.wall_ms = elapsed_ms(start);
  return rep;
}

MdResult md_retrieve(const MeasurementStack& d, const OdtModel& model, const MdOptions& options) {
  const auto& cfg = model.config();
  check_magnitudes(d, cfg);
  if (options.variant == IoVariant::md)
    throw std::invalid_argument("md_retrieve: field stage variant must be er or hio");
  if (!(options.beta > 0.0 && options.beta <= 1.0))
    throw std::invalid_argument("invalid beta: must be in (0,1]");
  if (options.outer_iterations < 1) throw std::invalid_argument("invalid J_IO: must be >= 1");
  const auto start = Clock::now();
  const double r_s = options.r_s > 0.0 ? options.r_s : default_support_radius(cfg);

  // Support of u^sca(., 0) on the detector grid.
  const std::size_t per = cfg.detector_size();
  std::vector<std::uint8_t> mask(per);
  for (std::size_t n = 0; n < per; ++n) {
    const auto l = unflatten(n, cfg.N, cfg.dim - 1);
    double r2 = 0.0;
    for (int a = 0; a < cfg.dim - 1; ++a) {
      const double z = cfg.detector_step() * l[a];
      r2 += z * z;
    }
    mask[n] = std::sqrt(r2) <= r_s;
  }

  const Complex inc = model.incident();
  MeasurementStack g = initial_field(d, std::nullopt);
  MeasurementStack prev_half(cfg.dim, cfg.M, cfg.N, StackKind::scattered_field);
  bool have_prev = false;

  ReconstructionReport stage1;
  stage1.magnitude_violation = 0.0;
  for (int j = 0; j < options.outer_iterations; ++j) {
    double misfit_sq = 0.0;
    for (int m = 0; m < cfg.M; ++m) {
      auto gm = g.step(m);
      ComplexVec sca(gm.begin(), gm.end());
      for (auto& v : sca) v -= inc;
      const ComplexVec v = free_space_propagate(sca, cfg.r_M, cfg, true);
      ComplexVec vt = v;
      for (std::size_t n = 0; n < per; ++n)
        if (!mask[n]) vt[n] = 0.0;

      ComplexVec input;
      if (options.variant == IoVariant::er) {
        input = vt;
      } else {
        auto prev = prev_half.step(m);
        if (!have_prev) std::copy(v.begin(), v.end(), prev.begin());
        input = v;
        for (std::size_t n = 0; n < per; ++n)
          if (v[n] != vt[n]) input[n] = prev[n] - options.beta * (v[n] - vt[n]);
        std::copy(input.begin(), input.end(), prev.begin());
      }

      const ComplexVec fwd = free_space_propagate(input, cfg.r_M, cfg, false);
      const ComplexVec fwd_t =
          options.variant == IoVariant::er ? fwd : free_space_propagate(vt, cfg.r_M, cfg, false);
      const auto dm = d.step(m);
      for (std::size_t n = 0; n < per; ++n) {
        const double e = std::abs(fwd_t[n] + inc) - dm[n].real();
        misfit_sq += e * e;
        gm[n] = fwd[n] + inc;
      }
    }
    have_prev = true;
    const double violation = replace_magnitude(g, d);
    stage1.magnitude_violation = std::max(*stage1.magnitude_violation, violation);
    stage1.history.push_back({j + 1, std::sqrt(misfit_sq), std::nullopt, std::nullopt,
                              std::nullopt, elapsed_ms(start)});
  }

  MdResult out;
  out.field = g;
  out.field.kind = StackKind::total_field;
  out.report = reconstruct(out.field, model, options.stage2);
  out.report.method = "md/" + out.report.method;
  out.report.history = std::move(stage1.history);
  out.report.magnitude_violation = stage1.magnitude_violation;
  out.report.iterations = options.outer_iterations;
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace odt
