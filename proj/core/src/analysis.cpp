#include "odt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace odt {

namespace {

using nlohmann::json;

std::array<double, 3> vec3(const json& j, int dim, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || static_cast<int>(j.at(key).size()) != dim)
    throw std::invalid_argument(std::string("phantom: '") + key + "' must be an array of " +
                                std::to_string(dim) + " numbers");
  std::array<double, 3> v{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) v[a] = j.at(key).at(a).get<double>();
  return v;
}

json to_array(const std::array<double, 3>& v, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(v[i]);
  return a;
}

double sq(double x) { return x * x; }

bool inside(const Primitive& p, const std::array<double, 3>& x, int dim) {
  switch (p.kind) {
    case PrimitiveKind::ball: {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += sq(x[a] - p.center[a]);
      return r2 <= sq(p.size[0]);
    }
    case PrimitiveKind::box:
      for (int a = 0; a < dim; ++a)
        if (std::abs(x[a] - p.center[a]) > p.size[a]) return false;
      return true;
    case PrimitiveKind::ellipsoid: {
      double s = 0.0;
      for (int a = 0; a < dim; ++a) s += sq((x[a] - p.center[a]) / p.size[a]);
      return s <= 1.0;
    }
    case PrimitiveKind::crescent: {
      double r2 = 0.0, c2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        r2 += sq(x[a] - p.center[a]);
        c2 += sq(x[a] - p.cut_center[a]);
      }
      return r2 <= sq(p.size[0]) && c2 > sq(p.size[1]);
    }
  }
  return false;
}

// Half-extent of the primitive along axis a.
double extent(const Primitive& p, int a) {
  switch (p.kind) {
    case PrimitiveKind::ball:
    case PrimitiveKind::crescent:
      return p.size[0];
    case PrimitiveKind::box:
    case PrimitiveKind::ellipsoid:
      return p.size[a];
  }
  return 0.0;
}

void validate_spec(const PhantomSpec& spec) {
  if (spec.dim != 2 && spec.dim != 3) throw std::invalid_argument("phantom: dim must be 2 or 3");
  if (!(spec.cap >= 0.0)) throw std::invalid_argument("phantom: cap must be nonnegative");
  for (const auto& p : spec.primitives) {
    const int n = p.kind == PrimitiveKind::crescent ? 2
                  : (p.kind == PrimitiveKind::ball ? 1 : spec.dim);
    for (int a = 0; a < n; ++a)
      if (!(p.size[a] > 0.0)) throw std::invalid_argument("phantom: sizes must be positive");
  }
}

double gaussian_tap(int i) { return std::exp(-0.5 * sq(i / 1.5)); }

// Separable 11-tap Gaussian filter over the valid region.
std::vector<double> filter_valid(const std::vector<double>& v, int dim, int K,
                                 const std::array<double, 11>& w) {
  const int out_n = K - 10;
  std::vector<double> cur = v;
  std::array<int, 3> shape{K, dim >= 2 ? K : 1, dim >= 3 ? K : 1};
  for (int a = 0; a < dim; ++a) {
    std::array<int, 3> next_shape = shape;
    next_shape[a] = out_n;
    std::vector<double> next(static_cast<std::size_t>(next_shape[0]) * next_shape[1] *
                             next_shape[2]);
    const std::size_t s1 = next_shape[2], s0 = static_cast<std::size_t>(next_shape[1]) * s1;
    const std::size_t c1 = shape[2], c0 = static_cast<std::size_t>(shape[1]) * c1;
    for (int i = 0; i < next_shape[0]; ++i)
      for (int j = 0; j < next_shape[1]; ++j)
        for (int k = 0; k < next_shape[2]; ++k) {
          double acc = 0.0;
          for (int t = 0; t < 11; ++t) {
            std::array<int, 3> src{i, j, k};
            src[a] += t;
            acc += w[t] * cur[src[0] * c0 + src[1] * c1 + src[2]];
          }
          next[i * s0 + j * s1 + k] = acc;
        }
    cur.swap(next);
    shape = next_shape;
  }
  return cur;
}

}  // namespace

PhantomSpec phantom_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("phantom: invalid JSON: ") + e.what());
  }
  PhantomSpec spec;
  try {
    spec.dim = j.value("dim", 2);
    spec.cap = j.value("cap", 1.0);
    if (spec.dim != 2 && spec.dim != 3) throw std::invalid_argument("phantom: dim must be 2 or 3");
    for (const auto& e : j.value("primitives", json::array())) {
      Primitive p;
      const std::string type = e.at("type").get<std::string>();
      p.center = vec3(e, spec.dim, "center");
      p.amplitude = e.at("amplitude").get<double>();
      if (type == "ball" || type == "disk") {
        p.kind = PrimitiveKind::ball;
        p.size[0] = e.at("radius").get<double>();
      } else if (type == "box" || type == "rectangle") {
        p.kind = PrimitiveKind::box;
        p.size = vec3(e, spec.dim, "half");
      } else if (type == "ellipsoid" || type == "ellipse") {
        p.kind = PrimitiveKind::ellipsoid;
        p.size = vec3(e, spec.dim, "radii");
      } else if (type == "crescent") {
        p.kind = PrimitiveKind::crescent;
        p.size[0] = e.at("radius").get<double>();
        p.size[1] = e.at("cut_radius").get<double>();
        p.cut_center = vec3(e, spec.dim, "cut_center");
      } else {
        throw std::invalid_argument("phantom: unknown primitive type '" + type + "'");
      }
      spec.primitives.push_back(p);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("phantom: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

std::string phantom_to_json(const PhantomSpec& spec) {
  json j;
  j["dim"] = spec.dim;
  j["cap"] = spec.cap;
  j["primitives"] = json::array();
  for (const auto& p : spec.primitives) {
    json e;
    e["center"] = to_array(p.center, spec.dim);
    e["amplitude"] = p.amplitude;
    switch (p.kind) {
      case PrimitiveKind::ball:
        e["type"] = "ball";
        e["radius"] = p.size[0];
        break;
      case PrimitiveKind::box:
        e["type"] = "box";
        e["half"] = to_array(p.size, spec.dim);
        break;
      case PrimitiveKind::ellipsoid:
        e["type"] = "ellipsoid";
        e["radii"] = to_array(p.size, spec.dim);
        break;
      case PrimitiveKind::crescent:
        e["type"] = "crescent";
        e["radius"] = p.size[0];
        e["cut_radius"] = p.size[1];
        e["cut_center"] = to_array(p.cut_center, spec.dim);
        break;
    }
    j["primitives"].push_back(e);
  }
  return j.dump(2);
}

PhantomSpec mini_shapes(int dim, double L) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("mini_shapes: dim must be 2 or 3");
  PhantomSpec s;
  s.dim = dim;
  const bool d3 = dim == 3;
  s.cap = d3 ? 1.0 : 0.5;
  Primitive disk;
  disk.kind = PrimitiveKind::ball;
  disk.center = {-0.26 * L, 0.19 * L, 0.0};
  disk.size[0] = 0.15 * L;
  disk.amplitude = d3 ? 1.0 : 0.5;
  Primitive rect;
  rect.kind = PrimitiveKind::box;
  rect.center = {0.21 * L, 0.19 * L, 0.0};
  rect.size = {0.11 * L, 0.15 * L, 0.11 * L};
  rect.amplitude = d3 ? 0.6 : 0.3;
  Primitive cres;
  cres.kind = PrimitiveKind::crescent;
  cres.center = {0.0, -0.22 * L, 0.0};
  cres.cut_center = {0.0, -0.13 * L, 0.0};
  cres.size = {0.19 * L, 0.15 * L, 0.0};
  cres.amplitude = d3 ? 0.8 : 0.4;
  s.primitives = {disk, rect, cres};
  return s;
}

PhantomSpec ball_box(int dim, double L) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("ball_box: dim must be 2 or 3");
  PhantomSpec s;
  s.dim = dim;
  s.cap = 1.0;
  Primitive ball;
  ball.kind = PrimitiveKind::ball;
  ball.center = {-0.3 * L, 0.15 * L, 0.0};
  ball.size[0] = 0.28 * L;
  ball.amplitude = 1.0;
  Primitive box;
  box.kind = PrimitiveKind::box;
  box.center = {0.3 * L, -0.15 * L, 0.0};
  box.size = {0.2 * L, 0.25 * L, 0.2 * L};
  box.amplitude = 0.6;
  s.primitives = {ball, box};
  return s;
}

PhantomSpec named_phantom(const std::string& name, int dim, double L_s) {
  if (name == "named:mini-shapes" || name == "mini-shapes") return mini_shapes(dim, L_s);
  if (name == "named:ball-box" || name == "ball-box") return ball_box(dim, L_s);
  if (name.rfind("named:", 0) == 0) throw std::invalid_argument("unknown phantom '" + name + "'");
  return phantom_from_json(name);
}

ScatteringPotential render_phantom(const PhantomSpec& spec, const ExperimentConfig& config) {
  validate_spec(spec);
  if (spec.dim != config.dim) throw std::invalid_argument("phantom: dim does not match config");
  for (const auto& p : spec.primitives)
    for (int a = 0; a < spec.dim; ++a)
      if (std::abs(p.center[a]) + extent(p, a) > config.L_s)
        throw std::invalid_argument("phantom: primitive outside the [-L_s, L_s] box");
  ScatteringPotential f(config.dim, config.K);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto x = object_position(k, config);
    double v = 0.0;
    for (const auto& p : spec.primitives)
      if (inside(p, x, spec.dim)) v += p.amplitude;
    f.values[k] = std::clamp(v, 0.0, spec.cap);
  }
  return f;
}

MeasurementStack add_noise(const MeasurementStack& stack, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw std::invalid_argument("add_noise: level must be nonnegative");
  MeasurementStack out = stack;
  if (level == 0.0) return out;
  const bool real = stack.kind == StackKind::magnitude;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexVec eps(stack.values.size());
  double eps_sq = 0.0, sig_sq = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double re = normal(rng);
    const double im = real ? 0.0 : normal(rng);
    eps[i] = {re, im};
    eps_sq += std::norm(eps[i]);
    sig_sq += std::norm(stack.values[i]);
  }
  if (eps_sq == 0.0) return out;
  const double scale = level * std::sqrt(sig_sq) / std::sqrt(eps_sq);
  for (std::size_t i = 0; i < eps.size(); ++i) out.values[i] += scale * eps[i];
  return out;
}

double psnr(const ScatteringPotential& ref, const ScatteringPotential& test) {
  if (ref.size() != test.size() || ref.dim != test.dim)
    throw std::invalid_argument("psnr: shape mismatch");
  double peak = 0.0, mse = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    peak = std::max(peak, ref.values[k] * ref.values[k]);
    mse += sq(ref.values[k] - test.values[k]);
  }
  if (peak == 0.0) throw std::invalid_argument("psnr: reference is identically zero");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  mse /= static_cast<double>(ref.size());
  return 10.0 * std::log10(peak / mse);
}

double ssim(const ScatteringPotential& ref, const ScatteringPotential& test) {
  if (ref.size() != test.size() || ref.dim != test.dim)
    throw std::invalid_argument("ssim: shape mismatch");
  if (ref.K < 11) throw std::invalid_argument("ssim: need at least 11 samples per axis");
  const auto [lo, hi] = std::minmax_element(ref.values.begin(), ref.values.end());
  const double L = *hi - *lo;
  if (!(L > 0.0)) throw std::invalid_argument("ssim: reference has no dynamic range");

  std::array<double, 11> w{};
  double wsum = 0.0;
  for (int t = 0; t < 11; ++t) wsum += w[t] = gaussian_tap(t - 5);
  for (auto& v : w) v /= wsum;

  const std::size_t n = ref.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xx[k] = ref.values[k] * ref.values[k];
    yy[k] = test.values[k] * test.values[k];
    xy[k] = ref.values[k] * test.values[k];
  }
  const int d = ref.dim, K = ref.K;
  const auto mx = filter_valid(ref.values, d, K, w);
  const auto my = filter_valid(test.values, d, K, w);
  const auto sxx = filter_valid(xx, d, K, w);
  const auto syy = filter_valid(yy, d, K, w);
  const auto sxy = filter_valid(xy, d, K, w);
  const double C1 = sq(0.01 * L), C2 = sq(0.03 * L);
  double acc = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cxy = sxy[i] - mx[i] * my[i];
    acc += ((2.0 * mx[i] * my[i] + C1) * (2.0 * cxy + C2)) /
           ((mx[i] * mx[i] + my[i] * my[i] + C1) * (vx + vy + C2));
  }
  return acc / static_cast<double>(mx.size());
}

std::vector<LcurvePoint> lcurve_sweep(const MeasurementStack& data, const OdtModel& model,
                                      const std::vector<double>& lambdas,
                                      const LcurveOptions& options) {
  if (lambdas.empty()) throw std::invalid_argument("lcurve: empty lambda list");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw std::invalid_argument("lcurve: lambdas must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw std::invalid_argument("lcurve: lambdas must be strictly increasing");
  }
  std::vector<LcurvePoint> out;
  if (data.kind == StackKind::magnitude) {
    const auto& cfg = model.config();
    const auto support = SupportConstraint::ball(
        cfg, options.r_s > 0.0 ? options.r_s : default_support_radius(cfg));
    for (double lambda : lambdas) {
      IoOptions io = options.io;
      io.pd.lambda = lambda;
      LcurvePoint p;
      p.lambda = lambda;
      p.report = io_retrieve(data, model, support, io);
      const double mis = magnitude_misfit(dtot_apply(p.report.potential, model), data);
      p.residual = mis * mis;
      p.tv = total_variation(p.report.potential);
      out.push_back(std::move(p));
    }
    return out;
  }
  const FourierSamples g = measurements_to_fourier(data, model);
  const auto& op = model.ndft();
  const auto w = solver_weights(op.nodes(), options.weights);
  for (double lambda : lambdas) {
    PdParams pd = options.pd;
    pd.lambda = lambda;
    LcurvePoint p;
    p.lambda = lambda;
    p.report = pd_tv_solve(g, op, pd, nullptr, nullptr, options.weights).report;
    const ComplexVec Ff = op.apply(p.report.potential.values);
    double r = 0.0;
    for (std::size_t i = 0; i < Ff.size(); ++i) r += w[i] * std::norm(Ff[i] - g[i]);
    p.residual = r;
    p.tv = total_variation(p.report.potential);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace odt
