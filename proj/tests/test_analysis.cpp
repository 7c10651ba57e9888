#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "odt/analysis.hpp"
#include "test_util.hpp"

using namespace odt;

namespace {

double mass(const ScatteringPotential& f, const ExperimentConfig& cfg) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * std::pow(cfg.object_step(), cfg.dim);
}

// Direct 2D SSIM with explicit Gaussian windows, long double accumulation.
double ssim_oracle(const ScatteringPotential& x, const ScatteringPotential& y) {
  const int K = x.K;
  long double w[11], ws = 0;
  for (int t = 0; t < 11; ++t) ws += w[t] = std::exp(-(t - 5) * (t - 5) / (2.0L * 1.5L * 1.5L));
  for (auto& v : w) v /= ws;
  const auto [lo, hi] = std::minmax_element(x.values.begin(), x.values.end());
  const long double L = *hi - *lo, C1 = (0.01L * L) * (0.01L * L), C2 = (0.03L * L) * (0.03L * L);
  long double acc = 0;
  int count = 0;
  for (int i = 0; i + 11 <= K; ++i)
    for (int j = 0; j + 11 <= K; ++j) {
      long double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int a = 0; a < 11; ++a)
        for (int b = 0; b < 11; ++b) {
          const long double ww = w[a] * w[b];
          const long double u = x.values[(i + a) * K + j + b], v = y.values[(i + a) * K + j + b];
          mx += ww * u;
          my += ww * v;
          sxx += ww * u * u;
          syy += ww * v * v;
          sxy += ww * u * v;
        }
      const long double vx = sxx - mx * mx, vy = syy - my * my, c = sxy - mx * my;
      acc += (2 * mx * my + C1) * (2 * c + C2) / ((mx * mx + my * my + C1) * (vx + vy + C2));
      ++count;
    }
  return static_cast<double>(acc / count);
}

}  // namespace

TEST_CASE("empty phantom renders to zero") {
  const auto cfg = ExperimentConfig::scaled(2, 16, 6.0);
  PhantomSpec s;
  const auto f = render_phantom(s, cfg);
  for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("disk phantom area converges") {
  for (int K : {32, 64, 128}) {
    auto cfg = ExperimentConfig::scaled(2, K, 60.0);
    cfg.L_s = 4.0;
    PhantomSpec s;
    s.cap = 1.0;
    s.primitives.push_back({PrimitiveKind::ball, {0.3, -0.2, 0.0}, {2.0, 0, 0}, {}, 0.5});
    const auto f = render_phantom(s, cfg);
    const double exact = 0.5 * std::numbers::pi * 4.0;
    CHECK(mass(f, cfg) == doctest::Approx(exact).epsilon(K == 32 ? 0.05 : 0.02));
  }
}

TEST_CASE("overlaps add and clamp") {
  auto cfg = ExperimentConfig::scaled(2, 16, 60.0);
  cfg.L_s = 4.0;
  PhantomSpec s;
  s.cap = 0.7;
  s.primitives.push_back({PrimitiveKind::box, {0, 0, 0}, {1.0, 1.0, 0}, {}, 0.4});
  s.primitives.push_back({PrimitiveKind::box, {0, 0, 0}, {0.4, 0.4, 0}, {}, 0.4});
  const auto f = render_phantom(s, cfg);
  CHECK(f.values[flatten({0, 0, 0}, 16, 2)] == doctest::Approx(0.7));
  CHECK(f.values[flatten({1, 0, 0}, 16, 2)] == doctest::Approx(0.4));  // x1 = 0.5
  s.primitives.push_back({PrimitiveKind::ball, {3.5, 0, 0}, {1.0, 0, 0}, {}, 0.1});
  CHECK_THROWS_AS(render_phantom(s, cfg), std::invalid_argument);
}

TEST_CASE("crescent is concave and lies inside its disk") {
  const auto cfg = ExperimentConfig::scaled(2, 64, 6.0);
  const auto f = render_phantom(mini_shapes(2, cfg.L_s), cfg);
  double mx = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto x = object_position(k, cfg);
    mx = std::max(mx, f.values[k]);
    if (f.values[k] > 0.0) CHECK(std::hypot(x[0], x[1]) < 0.5 * cfg.L_s * std::numbers::sqrt2 + 1e-12);
  }
  CHECK(mx <= 0.5);
  CHECK(mx > 0.0);
  // The cut disk of the crescent is empty at its center.
  const auto spec = mini_shapes(2, cfg.L_s);
  for (const auto& p : spec.primitives)
    if (p.kind == PrimitiveKind::crescent) {
      const int i = static_cast<int>(std::lround(p.cut_center[0] / cfg.object_step()));
      const int j = static_cast<int>(std::lround(p.cut_center[1] / cfg.object_step()));
      CHECK(f.values[flatten({i, j, 0}, 64, 2)] == 0.0);
    }
}

TEST_CASE("phantom JSON round trip and aliases") {
  const auto a = mini_shapes(3, 5.0);
  const auto b = phantom_from_json(phantom_to_json(a));
  REQUIRE(b.primitives.size() == a.primitives.size());
  CHECK(b.dim == 3);
  CHECK(b.cap == a.cap);
  for (std::size_t i = 0; i < a.primitives.size(); ++i) {
    CHECK(b.primitives[i].kind == a.primitives[i].kind);
    CHECK(b.primitives[i].center == a.primitives[i].center);
    CHECK(b.primitives[i].amplitude == a.primitives[i].amplitude);
  }
  const auto c = phantom_from_json(
      R"({"dim":2,"cap":1,"primitives":[{"type":"disk","center":[0,0],"radius":1,"amplitude":0.2},)"
      R"({"type":"rectangle","center":[1,1],"half":[0.5,0.2],"amplitude":0.1},)"
      R"({"type":"ellipse","center":[0,1],"radii":[0.5,0.2],"amplitude":0.1}]})");
  CHECK(c.primitives[0].kind == PrimitiveKind::ball);
  CHECK(c.primitives[1].kind == PrimitiveKind::box);
  CHECK(c.primitives[2].kind == PrimitiveKind::ellipsoid);
  CHECK_THROWS(phantom_from_json(R"({"dim":2,"primitives":[{"type":"star"}]})"));
  CHECK_THROWS(phantom_from_json("not json"));
  CHECK(named_phantom("named:ball-box", 2, 5.0).primitives.size() == 2);
  CHECK_THROWS(named_phantom("named:shepp-logan", 2, 5.0));
}

TEST_CASE("noise has the requested relative level and is seeded") {
  std::mt19937_64 rng(31);
  MeasurementStack s(2, 4, 16, StackKind::total_field);
  s.values = testutil::random_complex(s.values.size(), rng);
  for (double level : {0.01, 0.05, 0.5}) {
    const auto n = add_noise(s, level, 7);
    double ne = 0.0, ns = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      ne += std::norm(n.values[i] - s.values[i]);
      ns += std::norm(s.values[i]);
    }
    CHECK(std::sqrt(ne / ns) == doctest::Approx(level).epsilon(1e-14));
  }
  CHECK(add_noise(s, 0.05, 7).values == add_noise(s, 0.05, 7).values);
  CHECK(add_noise(s, 0.05, 7).values != add_noise(s, 0.05, 8).values);
  CHECK(add_noise(s, 0.0, 7).values == s.values);
  CHECK_THROWS_AS(add_noise(s, -0.1, 7), std::invalid_argument);

  MeasurementStack m = s;
  m.kind = StackKind::magnitude;
  for (auto& v : m.values) v = std::abs(v);
  for (const auto& v : add_noise(m, 0.1, 3).values) CHECK(v.imag() == 0.0);
}

TEST_CASE("PSNR") {
  std::mt19937_64 rng(32);
  const int K = 12;
  const ScatteringPotential f(2, K, testutil::random_real(K * K, rng, 0.0, 1.0));
  CHECK(psnr(f, f) == std::numeric_limits<double>::infinity());

  // A single unit error at the peak of a delta: 10 log10(K^2).
  ScatteringPotential d(2, K), z(2, K);
  d.values[5] = 1.0;
  CHECK(psnr(d, z) == doctest::Approx(10.0 * std::log10(K * K)));

  const ScatteringPotential g(2, K, testutil::random_real(K * K, rng, 0.0, 1.0));
  long double peak = 0, mse = 0;
  for (int k = 0; k < K * K; ++k) {
    peak = std::max<long double>(peak, static_cast<long double>(f.values[k]) * f.values[k]);
    mse += std::pow(static_cast<long double>(f.values[k]) - g.values[k], 2);
  }
  const double expect = static_cast<double>(10 * std::log10(peak / (mse / (K * K))));
  CHECK(psnr(f, g) == doctest::Approx(expect).epsilon(1e-13));
  CHECK_THROWS_AS(psnr(z, f), std::invalid_argument);
  CHECK_THROWS_AS(psnr(f, ScatteringPotential(2, K + 1)), std::invalid_argument);

  // More noise, lower PSNR.
  double last = std::numeric_limits<double>::infinity();
  for (double a : {0.01, 0.05, 0.2}) {
    ScatteringPotential h = f;
    for (std::size_t k = 0; k < h.size(); ++k) h.values[k] += a * std::sin(3.0 * k);
    const double p = psnr(f, h);
    CHECK(p < last);
    last = p;
  }
}

TEST_CASE("SSIM") {
  std::mt19937_64 rng(33);
  const int K = 20;
  const ScatteringPotential f(2, K, testutil::random_real(K * K, rng, 0.0, 1.0));
  CHECK(ssim(f, f) == doctest::Approx(1.0).epsilon(1e-12));

  ScatteringPotential b(2, K), inv(2, K);
  for (std::size_t k = 0; k < b.size(); ++k) {
    b.values[k] = (k / K + k % K) % 2 ? 1.0 : 0.0;
    inv.values[k] = 1.0 - b.values[k];
  }
  CHECK(ssim(b, inv) < 0.1);

  const ScatteringPotential g(2, K, testutil::random_real(K * K, rng, 0.0, 1.0));
  ScatteringPotential h = f;
  for (std::size_t k = 0; k < h.size(); ++k) h.values[k] = 0.7 * f.values[k] + 0.3 * g.values[k];
  CHECK(ssim(f, h) == doctest::Approx(ssim_oracle(f, h)).epsilon(1e-12));
  CHECK(ssim(f, g) == doctest::Approx(ssim_oracle(f, g)).epsilon(1e-12));
  CHECK(ssim(f, h) > ssim(f, g));
  CHECK_THROWS_AS(ssim(ScatteringPotential(2, 8), ScatteringPotential(2, 8)), std::invalid_argument);
  CHECK_THROWS_AS(ssim(ScatteringPotential(2, K), f), std::invalid_argument);

  // 3D runs over the valid cube.
  const ScatteringPotential f3(3, 12, testutil::random_real(12 * 12 * 12, rng, 0.0, 1.0));
  CHECK(ssim(f3, f3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("L-curve sweep") {
  const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
  const OdtModel model(cfg);
  auto spec = mini_shapes(2, cfg.L_s);
  const auto f = render_phantom(spec, cfg);
  const auto u = dtot_apply(f, model);
  LcurveOptions o;
  o.pd.iterations = 30;
  const std::vector<double> lams{1e-3, 1e-2, 1e-1, 1.0};
  const auto pts = lcurve_sweep(u, model, lams, o);
  REQUIRE(pts.size() == 4);
  // Stronger regularization trades data fit for smaller TV.
  CHECK(pts.back().residual > pts.front().residual);
  CHECK(pts.back().tv < pts.front().tv);

  // A single point equals a direct solve.
  PdParams p = o.pd;
  p.lambda = 1e-2;
  const auto direct = pd_tv_solve(measurements_to_fourier(u, model), model.ndft(), p);
  CHECK(pts[1].report.potential.values == direct.report.potential.values);
  CHECK(pts[1].tv == total_variation(direct.report.potential));

  CHECK_THROWS_AS(lcurve_sweep(u, model, {}, o), std::invalid_argument);
  CHECK_THROWS_AS(lcurve_sweep(u, model, {0.1, 0.01}, o), std::invalid_argument);
  CHECK_THROWS_AS(lcurve_sweep(u, model, {-1.0}, o), std::invalid_argument);

  auto d = u;
  d.kind = StackKind::magnitude;
  for (auto& v : d.values) v = std::abs(v);
  o.io.outer_iterations = 2;
  const auto mp = lcurve_sweep(d, model, {0.01}, o);
  CHECK(mp[0].residual >= 0.0);
  CHECK(mp[0].report.method == "hio/pdtv");
}
