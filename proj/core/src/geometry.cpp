#include "odt/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace odt {

namespace {

// kappa below this fraction of k0 counts as the rim of the band.
constexpr double kKappaFloor = 1e-6;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument("invalid " + field + ": " + what);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dim != 2 && dim != 3) fail("dim", "must be 2 or 3");
  if (!(k0 > 0.0)) fail("k0", "must be positive");
  if (!(r_M > 0.0)) fail("r_M", "must be positive");
  if (!(L_M > 0.0)) fail("L_M", "must be positive");
  if (!(L_s > 0.0)) fail("L_s", "must be positive");
  if (K <= 0 || K % 2 != 0) fail("K", "must be an even positive integer");
  if (N <= 0 || N % 2 != 0) fail("N", "must be an even positive integer");
  if (M < 1) fail("M", "must be at least 1");
  if (!(T > 0.0)) fail("T", "must be positive");
  if (dim == 3 && rotation_axis != 0 && rotation_axis != 1)
    fail("rotation_axis", "must be 0 (x1) or 1 (x2) in 3D");
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  // Nodes reach |nu| = sqrt(2) k0; x_k . nu must stay within one period per axis.
  const double reach = object_step() * std::numbers::sqrt2 * k0;
  if (reach > kPi * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "node set exceeds one NDFT periodicity interval (2 L_s sqrt(2) k0 / K = " << reach
        << " > pi); reconstructions may alias";
    out.push_back(msg.str());
  }
  return out;
}

bool ExperimentConfig::full_turn() const { return std::abs(T - 2.0 * kPi) < 1e-12 * 2.0 * kPi; }

ExperimentConfig ExperimentConfig::scaled(int dim, int size, double r_M) {
  ExperimentConfig c;
  c.dim = dim;
  c.K = c.N = c.M = size;
  c.L_M = size / 4.0;
  c.L_s = size / (4.0 * std::numbers::sqrt2);
  c.r_M = r_M;
  return c;
}

double kappa(std::span<const double> y_prime, double k0) {
  double n2 = 0.0;
  for (double v : y_prime) n2 += v * v;
  if (n2 >= k0 * k0) throw std::domain_error("kappa: |y'| must be smaller than k0");
  return std::sqrt(k0 * k0 - n2);
}

std::vector<double> h_map(std::span<const double> y_prime, double k0) {
  std::vector<double> h(y_prime.begin(), y_prime.end());
  h.push_back(kappa(y_prime, k0) - k0);
  return h;
}

Matrix3 rotation(double t, const ExperimentConfig& config) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  if (config.dim == 2) return {{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}};
  switch (config.rotation_axis) {
    case 0:
      return {{{1.0, 0.0, 0.0}, {0.0, c, -s}, {0.0, s, c}}};
    case 1:
      return {{{c, 0.0, s}, {0.0, 1.0, 0.0}, {-s, 0.0, c}}};
    default:
      return {{{c, -s, 0.0}, {s, c, 0.0}, {0.0, 0.0, 1.0}}};
  }
}

NodeSet NodeSet::from_points(int dim, std::vector<double> coords, std::vector<double> weights) {
  if (dim < 1 || coords.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("NodeSet::from_points: coordinate count not a multiple of dim");
  NodeSet s;
  s.dim = dim;
  s.M = 1;
  s.N = 0;
  const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
  s.coords = std::move(coords);
  s.weights = weights.empty() ? std::vector<double>(n, 1.0) : std::move(weights);
  if (s.weights.size() != n) throw std::invalid_argument("NodeSet::from_points: weight count");
  s.detector_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.detector_index[i] = i;
  s.mask.assign(n, 1);
  return s;
}

std::array<double, 2> detector_frequency(std::size_t flat, const ExperimentConfig& config) {
  const auto l = unflatten(flat, config.N, config.dim - 1);
  return {config.frequency_step() * l[0], config.frequency_step() * l[1]};
}

bool frequency_kept(std::span<const double> y_prime, double k0) {
  double n2 = 0.0;
  for (double v : y_prime) n2 += v * v;
  if (n2 >= k0 * k0) return false;
  return std::sqrt(k0 * k0 - n2) >= kKappaFloor * k0;
}

NodeSet build_node_set(const ExperimentConfig& config) {
  config.validate();
  const int d = config.dim;
  const int dp = d - 1;
  NodeSet s;
  s.dim = d;
  s.M = config.M;
  s.N = config.N;
  const std::size_t ndet = config.detector_size();
  s.mask.assign(ndet, 0);
  for (std::size_t l = 0; l < ndet; ++l) {
    const auto y = detector_frequency(l, config);
    if (frequency_kept(std::span<const double>(y.data(), dp), config.k0)) {
      s.mask[l] = 1;
      s.detector_index.push_back(l);
    }
  }
  if (s.detector_index.empty())
    throw std::invalid_argument("build_node_set: every detector frequency lies outside the k0 band");

  // Quadrature of the inverse Fourier integral over the covered set under the
  // substitution y = R_t h(y'): cell (T/M)(pi/L_M)^(d-1) times the Jacobian
  // k0 |y'_perp| / kappa, halved for a full turn (each point is hit twice),
  // times (2 pi)^-d (2 L_s/K)^d so that Re F*(w g) approximates f itself.
  const double dy = config.frequency_step();
  const double cell = (config.T / config.M) * std::pow(dy, dp);
  const double coverage = config.full_turn() ? 0.5 : 1.0;
  const double scale =
      std::pow(2.0 * kPi, -d) * std::pow(config.object_step(), d) * coverage * cell;
  const int perp = (d == 2) ? 0 : 1 - config.rotation_axis;

  std::vector<std::array<double, 3>> h(s.per_step());
  std::vector<double> w_step(s.per_step());
  for (std::size_t j = 0; j < s.per_step(); ++j) {
    const auto y = detector_frequency(s.detector_index[j], config);
    const double kap = kappa(std::span<const double>(y.data(), dp), config.k0);
    h[j] = {y[0], dp == 2 ? y[1] : kap - config.k0, kap - config.k0};
    // Cell average of |s| over [s - dy/2, s + dy/2]; differs from |s| only at s = 0.
    const double yperp = std::max(std::abs(y[perp]), dy / 4.0);
    w_step[j] = scale * config.k0 * yperp / kap;
  }

  s.coords.resize(static_cast<std::size_t>(config.M) * s.per_step() * d);
  s.weights.resize(static_cast<std::size_t>(config.M) * s.per_step());
  for (int m = 0; m < config.M; ++m) {
    const Matrix3 R = rotation(config.time(m), config);
    for (std::size_t j = 0; j < s.per_step(); ++j) {
      const std::size_t i = m * s.per_step() + j;
      for (int a = 0; a < d; ++a) {
        double v = 0.0;
        for (int b = 0; b < d; ++b) v += R[a][b] * h[j][b];
        s.coords[i * d + a] = v;
      }
      s.weights[i] = w_step[j];
    }
  }
  return s;
}

ComplexVec coefficient_vector(const ExperimentConfig& config, const NodeSet& nodes) {
  const int d = config.dim;
  const double scale =
      std::pow(config.N / config.L_M, d - 1) * std::pow(config.L_s / config.K, d);
  ComplexVec c(nodes.per_step());
  for (std::size_t j = 0; j < nodes.per_step(); ++j) {
    const auto y = detector_frequency(nodes.detector_index[j], config);
    const double kap = kappa(std::span<const double>(y.data(), d - 1), config.k0);
    c[j] = Complex(0.0, 1.0) / kap * std::polar(1.0, kap * config.r_M) * scale;
  }
  return c;
}

std::array<double, 3> object_position(std::size_t flat, const ExperimentConfig& config) {
  const auto k = unflatten(flat, config.K, config.dim);
  const double h = config.object_step();
  return {h * k[0], h * k[1], h * k[2]};
}

}  // namespace odt
