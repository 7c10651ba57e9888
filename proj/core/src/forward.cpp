#include "odt/forward.hpp"

#include <cmath>
#include <stdexcept>

namespace odt {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// Power series of J0 and Y0, accurate for moderate x.
Complex hankel_series(double x) {
  const double q = x * x / 4.0;
  double term = 1.0;  // (-1)^k q^k / (k!)^2
  double j0 = 1.0;
  double ysum = 0.0;
  double harmonic = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    j0 += term;
    ysum -= harmonic * term;
    if (std::abs(term) * (1.0 + harmonic) < 1e-18 * std::max(1.0, std::abs(j0))) break;
  }
  const double y0 = (2.0 / kPi) * ((std::log(x / 2.0) + kEulerGamma) * j0 + ysum);
  return {j0, y0};
}

// Miller backward recurrence for J_2k, normalized by J0 + 2 sum J_2k = 1, with
// Y0 from its Neumann series.
Complex hankel_miller(double x) {
  int start = 2 * static_cast<int>(x / 2.0) + 40;
  double next = 0.0;  // J_{n+1}
  double cur = 1e-30; // J_n
  double norm = 0.0;
  double ysum = 0.0;  // sum_{k>=1} (-1)^k J_2k / k
  for (int n = start; n >= 1; --n) {
    const double prev = (2.0 * n / x) * cur - next;
    next = cur;
    cur = prev;  // now J_{n-1}
    const int order = n - 1;
    if (order > 0 && order % 2 == 0) {
      norm += 2.0 * cur;
      const int k = order / 2;
      ysum += ((k % 2) ? -1.0 : 1.0) * cur / k;
    }
    if (std::abs(cur) > 1e200) {
      cur *= 1e-200;
      next *= 1e-200;
      norm *= 1e-200;
      ysum *= 1e-200;
    }
  }
  norm += cur;
  const double j0 = cur / norm;
  const double y0 = (2.0 / kPi) * ((std::log(x / 2.0) + kEulerGamma) * j0 - 2.0 * ysum / norm);
  return {j0, y0};
}

Complex hankel_asymptotic(double x) {
  Complex sum = 1.0;
  double a = 1.0;
  Complex ipow = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    a *= -static_cast<double>((2 * k - 1) * (2 * k - 1)) / (8.0 * k * x);
    ipow *= Complex(0.0, 1.0);
    if (std::abs(a) > last) break;
    sum += ipow * a;
    last = std::abs(a);
    if (last < 1e-17) break;
  }
  return std::sqrt(2.0 / (kPi * x)) * std::polar(1.0, x - kPi / 4.0) * sum;
}

}  // namespace

OdtModel::OdtModel(ExperimentConfig config, NdftMethod method)
    : config_((config.validate(), config)),
      ndft_(build_node_set(config_), config_.K, config_.L_s, method),
      coeff_(coefficient_vector(config_, ndft_.nodes())) {}

Complex OdtModel::incident() const { return std::polar(1.0, config_.k0 * config_.r_M); }

MeasurementStack fourier_to_scattered(const FourierSamples& g, const OdtModel& model) {
  const auto& cfg = model.config();
  const auto& nodes = model.nodes();
  if (g.size() != nodes.node_count())
    throw std::invalid_argument("fourier_to_scattered: sample count does not match node set");
  MeasurementStack out(cfg.dim, cfg.M, cfg.N, StackKind::scattered_field);
  const auto& c = model.coefficients();
  ComplexVec spectrum(cfg.detector_size());
  for (int m = 0; m < cfg.M; ++m) {
    std::fill(spectrum.begin(), spectrum.end(), Complex(0.0));
    for (std::size_t j = 0; j < nodes.per_step(); ++j)
      spectrum[nodes.detector_index[j]] = c[j] * g[m * nodes.per_step() + j];
    const ComplexVec v = idft(spectrum, cfg.N, cfg.dim - 1);
    std::copy(v.begin(), v.end(), out.step(m).begin());
  }
  return out;
}

MeasurementStack dtot_apply(const ScatteringPotential& f, const OdtModel& model) {
  const auto& cfg = model.config();
  if (f.dim != cfg.dim || f.K != cfg.K)
    throw std::invalid_argument("dtot_apply: potential does not match the configuration");
  MeasurementStack out = fourier_to_scattered(model.ndft().apply(f.values), model);
  const Complex inc = model.incident();
  for (auto& v : out.values) v += inc;
  out.kind = StackKind::total_field;
  return out;
}

Complex hankel_h1_0(double x) {
  if (!(x > 0.0)) throw std::domain_error("hankel_h1_0: argument must be positive");
  if (x <= 8.0) return hankel_series(x);
  if (x <= 25.0) return hankel_miller(x);
  return hankel_asymptotic(x);
}

Complex green_function(int dim, double k0, double r) {
  if (dim == 2) return Complex(0.0, 0.25) * hankel_h1_0(k0 * r);
  return std::polar(1.0, k0 * r) / (4.0 * kPi * r);
}

MeasurementStack born_convolution_forward(const ScatteringPotential& f,
                                          const ExperimentConfig& config) {
  config.validate();
  if (f.dim != config.dim || f.K != config.K)
    throw std::invalid_argument("born_convolution_forward: potential does not match config");
  const int d = config.dim;

  // Nonzero samples only; the detector plane must lie outside their support.
  std::vector<std::array<double, 3>> pos;
  std::vector<double> val;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f.values[k] == 0.0) continue;
    const auto x = object_position(k, config);
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    if (std::sqrt(r2) >= config.r_M)
      throw std::domain_error(
          "born_convolution_forward: potential support reaches the detector plane (|x_k| >= r_M)");
    pos.push_back(x);
    val.push_back(f.values[k]);
  }

  MeasurementStack out(d, config.M, config.N, StackKind::total_field);
  const double cell = std::pow(config.object_step(), d);
  const Complex inc = std::polar(1.0, config.k0 * config.r_M);
  const double zstep = config.detector_step();
  std::vector<std::array<double, 3>> rot(pos.size());
  std::vector<Complex> src(pos.size());

  for (int m = 0; m < config.M; ++m) {
    // Substituting z = R_t y turns f(R_t y) into f(z) at the rotated nodes R_t^T x_k.
    const Matrix3 R = rotation(config.time(m), config);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (int a = 0; a < d; ++a) {
        double v = 0.0;
        for (int b = 0; b < d; ++b) v += R[b][a] * pos[i][b];
        rot[i][a] = v;
      }
      src[i] = cell * val[i] * std::polar(1.0, config.k0 * rot[i][d - 1]);
    }
    auto step = out.step(m);
    for (std::size_t n = 0; n < step.size(); ++n) {
      const auto l = unflatten(n, config.N, d - 1);
      std::array<double, 3> x{zstep * l[0], zstep * l[1], 0.0};
      x[d - 1] = config.r_M;
      Complex acc = 0.0;
      for (std::size_t i = 0; i < rot.size(); ++i) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          const double dx = x[a] - rot[i][a];
          r2 += dx * dx;
        }
        acc += src[i] * green_function(d, config.k0, std::sqrt(r2));
      }
      step[n] = acc + inc;
    }
  }
  return out;
}

ComplexVec free_space_propagate(std::span<const Complex> v, double distance,
                                const ExperimentConfig& config, bool inverse) {
  const int dp = config.dim - 1;
  ComplexVec spec = dft(v, config.N, dp);
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    const auto y = detector_frequency(l, config);
    const std::span<const double> ys(y.data(), dp);
    if (frequency_kept(ys, config.k0))
      spec[l] *= std::polar(1.0, sign * kappa(ys, config.k0) * distance);
    else
      spec[l] = 0.0;
  }
  return idft(spec, config.N, dp);
}

}  // namespace odt
