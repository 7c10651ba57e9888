#include <cmath>
#include <numbers>

#include "doctest.h"
#include "odt/inversion.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace odt;
using testutil::rel_err;

namespace {

using LD = long double;

NodeSet random_node_set(std::size_t count, int K, double L_s, std::mt19937_64& rng) {
  const double lim = std::numbers::pi * K / (2.0 * L_s);
  auto coords = testutil::random_real(2 * count, rng, -lim, lim);
  auto w = testutil::random_real(count, rng, 0.2, 2.0);
  return NodeSet::from_points(2, std::move(coords), std::move(w));
}

// 1D TV denoising by projected gradient on the dual in long double.
std::vector<LD> tv1d_oracle(const std::vector<double>& y, double lambda) {
  const std::size_t n = y.size();
  std::vector<LD> z(n - 1, 0), x(n);
  for (int it = 0; it < 200000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      LD dtz = 0;
      if (i > 0) dtz += z[i - 1];
      if (i + 1 < n) dtz -= z[i];
      x[i] = y[i] - dtz;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      z[i] += 0.25L * (x[i + 1] - x[i]);
      z[i] = std::clamp<LD>(z[i], -lambda, lambda);
    }
  }
  return x;
}

}  // namespace

TEST_CASE("CG converges to the dense weighted least-squares solution") {
  std::mt19937_64 rng(21);
  const int K = 4;
  const double L_s = 1.5;
  const NodeSet nodes = random_node_set(64, K, L_s, rng);
  const NdftOperator op(nodes, K, L_s, NdftMethod::direct);
  const auto g = testutil::random_complex(64, rng);
  const auto rep = cg_solve(g, op, WeightsMode::quadrature, 40);
  const auto d = oracle::normal_equations(nodes, K, L_s, nodes.weights, g);
  const auto x = oracle::solve(d.M, d.rhs);
  std::vector<double> xd(x.begin(), x.end());
  CHECK(rel_err(rep.potential.values, xd) < 1e-8);
  CHECK_FALSE(rep.breakdown);
  for (std::size_t i = 1; i < rep.history.size(); ++i)
    CHECK(rep.history[i].residual <= rep.history[i - 1].residual * (1.0 + 1e-12));
  CHECK(rep.history.size() == static_cast<std::size_t>(rep.iterations) + 1);
}

TEST_CASE("CG from a warm start and with uniform weights") {
  std::mt19937_64 rng(22);
  const int K = 4;
  const double L_s = 1.5;
  const NodeSet nodes = random_node_set(48, K, L_s, rng);
  const NdftOperator op(nodes, K, L_s, NdftMethod::direct);
  // Consistent data from a known real object: CG recovers it exactly.
  const ScatteringPotential truth(2, K, testutil::random_real(16, rng));
  const auto g = op.apply(truth.values);
  const ScatteringPotential f0(2, K, testutil::random_real(16, rng));
  const auto rep = cg_solve(g, op, WeightsMode::uniform, 40, &f0);
  CHECK(rel_err(rep.potential.values, truth.values) < 1e-8);
  CHECK(rep.history.back().residual < 1e-8 * rep.history.front().residual);
  CHECK_THROWS_AS(cg_solve(g, op, WeightsMode::uniform, 0), std::invalid_argument);
}

TEST_CASE("CG on zero data stops at once") {
  const NodeSet nodes = NodeSet::from_points(2, {0.1, 0.2, -0.3, 0.4});
  const NdftOperator op(nodes, 4, 1.0);
  const auto rep = cg_solve(FourierSamples(2, 0.0), op, WeightsMode::uniform, 5);
  CHECK(rep.iterations == 0);
  CHECK(rep.history.size() == 1);
  for (double v : rep.potential.values) CHECK(v == 0.0);
}

TEST_CASE("quadrature weights integrate the covered frequency disk") {
  // Full turn: sum w approximates (2 pi)^-2 h^2 times the area 2 pi k0^2 of the
  // disk of radius sqrt(2) k0. The integrand k0 |y'| / kappa has a square root
  // singularity at the band edge, so the deficit decays like sqrt(dy).
  auto deficit = [](int size) {
    const auto cfg = ExperimentConfig::scaled(2, size, 6.0);
    const auto nodes = build_node_set(cfg);
    double s = 0.0;
    for (double w : nodes.weights) s += w;
    const double h = cfg.object_step();
    const double area = 2.0 * std::numbers::pi * cfg.k0 * cfg.k0;
    return 1.0 - s / (area * h * h / (4.0 * std::numbers::pi * std::numbers::pi));
  };
  const double e60 = deficit(60), e240 = deficit(240);
  CHECK(e60 > 0.0);
  CHECK(e60 < 0.25);
  CHECK(e240 / e60 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("backpropagation of a point object peaks at the point") {
  const auto cfg = ExperimentConfig::scaled(2, 32, 6.0);
  const OdtModel model(cfg);
  ScatteringPotential f(2, 32);
  const std::size_t k = flatten({3, -2, 0}, 32, 2);
  f.values[k] = 1.0;
  const auto g = model.ndft().apply(f.values);
  const auto bp = backpropagation(g, model.ndft());
  const auto it = std::max_element(bp.values.begin(), bp.values.end());
  CHECK(static_cast<std::size_t>(it - bp.values.begin()) == k);
  // The phases cancel at the point itself, leaving the weight sum.
  double s = 0.0;
  for (double w : model.nodes().weights) s += w;
  CHECK(*it == doctest::Approx(s).epsilon(1e-9));
}

TEST_CASE("measurement conversion inverts the forward map") {
  std::mt19937_64 rng(23);
  const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
  const OdtModel model(cfg);
  const ScatteringPotential f(2, 16, testutil::random_real(256, rng, 0.0, 1.0));
  const auto u = dtot_apply(f, model);
  CHECK(rel_err(measurements_to_fourier(u, model), model.ndft().apply(f.values)) < 1e-10);
  auto scat = u;
  scat.kind = StackKind::scattered_field;
  for (auto& v : scat.values) v -= model.incident();
  CHECK(rel_err(measurements_to_fourier(scat, model), model.ndft().apply(f.values)) < 1e-10);
  auto mag = u;
  mag.kind = StackKind::magnitude;
  CHECK_THROWS_AS(measurements_to_fourier(mag, model), std::invalid_argument);
  MeasurementStack wrong(2, cfg.M - 1, cfg.N, StackKind::total_field);
  CHECK_THROWS_AS(measurements_to_fourier(wrong, model), std::invalid_argument);
}

TEST_CASE("Lipschitz estimate against the dense normal matrix") {
  std::mt19937_64 rng(24);
  const int K = 4;
  const double L_s = 1.5;
  const NodeSet nodes = random_node_set(40, K, L_s, rng);
  const NdftOperator op(nodes, K, L_s, NdftMethod::direct);
  const FourierSamples g(40, 0.0);
  const NdftDataTerm data(op, g, nodes.weights);
  const auto d = oracle::normal_equations(nodes, K, L_s, nodes.weights, g);
  // Largest eigenvalue by long power iteration.
  std::vector<LD> v(16, 1), Av(16);
  LD lam = 0;
  for (int it = 0; it < 5000; ++it) {
    LD nv = 0;
    for (auto x : v) nv += x * x;
    nv = std::sqrt(nv);
    for (auto& x : v) x /= nv;
    for (int a = 0; a < 16; ++a) {
      Av[a] = 0;
      for (int b = 0; b < 16; ++b) Av[a] += d.M[a][b] * v[b];
    }
    lam = 0;
    for (int a = 0; a < 16; ++a) lam += v[a] * Av[a];
    v = Av;
  }
  const double L = data.lipschitz();
  CHECK(L <= static_cast<double>(lam) * (1.0 + 1e-12));
  CHECK(L >= 0.5 * static_cast<double>(lam));
}

TEST_CASE("TV denoising matches a one-dimensional oracle on replicated rows") {
  // Rows constant along x1: the problem decouples into identical 1D problems.
  const int K = 16;
  std::vector<double> u(K);
  std::mt19937_64 rng(25);
  for (int i = 0; i < K; ++i) u[i] = (i < 6 ? 1.0 : i < 11 ? 2.5 : 1.5) + 0.3 * std::sin(1.3 * i);
  ScatteringPotential f(2, K);
  for (std::size_t k = 0; k < f.size(); ++k) f.values[k] = u[k % K];
  const double lambda = 0.4;
  const auto den = tv_denoise(f, lambda, 3000);
  const auto x = tv1d_oracle(u, lambda);
  for (std::size_t k = 0; k < f.size(); ++k)
    CHECK(den.values[k] == doctest::Approx(static_cast<double>(x[k % K])).epsilon(1e-4).scale(1.0));
}

TEST_CASE("TV denoising keeps the result nonnegative") {
  std::mt19937_64 rng(26);
  const ScatteringPotential f(2, 8, testutil::random_real(64, rng, -1.0, 1.0));
  const auto den = tv_denoise(f, 0.1, 200);
  for (double v : den.values) CHECK(v >= 0.0);
}

TEST_CASE("PD runs exactly J iterations and warm restarts are seamless") {
  std::mt19937_64 rng(27);
  const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
  const OdtModel model(cfg);
  const ScatteringPotential f(2, 16, testutil::random_real(256, rng, 0.0, 1.0));
  const auto g = model.ndft().apply(f.values);
  PdParams p;
  p.lambda = 0.01;
  p.iterations = 20;
  const auto full = pd_tv_solve(g, model.ndft(), p);
  CHECK(full.report.history.size() == 21);
  CHECK(full.report.iterations == 20);
  CHECK(full.state.iteration == 20);
  p.iterations = 10;
  const auto a = pd_tv_solve(g, model.ndft(), p);
  const auto b = pd_tv_solve(g, model.ndft(), p, &a.state);
  CHECK(b.state.iteration == 20);
  CHECK(b.report.potential.values == full.report.potential.values);
  CHECK(b.state.tau == full.state.tau);
  CHECK(b.state.sigma == full.state.sigma);
  for (double v : full.report.potential.values) CHECK(v >= 0.0);
  for (const auto& h : full.report.history) {
    REQUIRE(h.tau.has_value());
    CHECK(*h.tau > 0.0);
  }
  p.lambda = 0.0;
  CHECK_THROWS_AS(pd_tv_solve(g, model.ndft(), p), std::invalid_argument);
}

TEST_CASE("initial step sizes") {
  const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
  const OdtModel model(cfg);
  const FourierSamples g(model.nodes().node_count(), 0.0);
  const NdftDataTerm data(model.ndft(), g, model.nodes().weights);
  PdParams p;
  p.iterations = 0;
  const auto r = pd_solve(data, 2, 16, p);
  const double expect = 1.0 / std::sqrt(8.0 + data.lipschitz());
  CHECK(r.state.tau == doctest::Approx(expect));
  CHECK(r.state.sigma == doctest::Approx(expect));
  CHECK(r.report.history.size() == 1);
}

TEST_CASE("PD-TV reduces the objective on noiseless data") {
  std::mt19937_64 rng(28);
  const auto cfg = ExperimentConfig::scaled(2, 24, 4.0);
  const OdtModel model(cfg);
  ScatteringPotential f(2, 24);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto x = object_position(k, cfg);
    f.values[k] = std::hypot(x[0], x[1]) < 2.0 ? 1.0 : 0.0;
  }
  const auto g = model.ndft().apply(f.values);
  PdParams p;
  p.lambda = 1e-3;
  p.iterations = 100;
  const auto r = pd_tv_solve(g, model.ndft(), p);
  CHECK(r.report.history.back().residual < 0.1 * r.report.history.front().residual);
  CHECK(rel_err(r.report.potential.values, f.values) < 0.3);
}

TEST_CASE("reconstruct dispatch and TV post-processing") {
  std::mt19937_64 rng(29);
  const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
  const OdtModel model(cfg);
  const ScatteringPotential f(2, 16, testutil::random_real(256, rng, 0.0, 1.0));
  const auto u = dtot_apply(f, model);
  ReconstructOptions o;
  o.method = Method::bp;
  auto r = reconstruct(u, model, o);
  CHECK(r.method == "bp");
  CHECK(r.history.size() == 1);
  o.method = Method::cg;
  o.cg_iterations = 7;
  r = reconstruct(u, model, o);
  CHECK(r.method == "cg");
  CHECK(r.history.size() <= 8);
  o.tvd_lambda = 0.05;
  r = reconstruct(u, model, o);
  CHECK(r.method == "cg+tvd");
  for (double v : r.potential.values) CHECK(v >= 0.0);
  o = {};
  o.pd.iterations = 4;
  r = reconstruct(u, model, o);
  CHECK(r.method == "pdtv");
  CHECK(r.history.size() == 5);
  CHECK(method_from_string(to_string(Method::cg)) == Method::cg);
  CHECK_THROWS_AS(method_from_string("art"), std::invalid_argument);
}

TEST_CASE("PD with negligible TV reaches the nonnegative least-squares solution") {
  std::mt19937_64 rng(30);
  const int K = 4;
  const double L_s = 1.5;
  const NodeSet nodes = random_node_set(64, K, L_s, rng);
  const NdftOperator op(nodes, K, L_s, NdftMethod::direct);
  auto truth = testutil::random_real(16, rng, 0.0, 1.0);
  truth[3] = 0.0;
  truth[9] = 0.0;
  const auto g = op.apply(truth);
  // Projected gradient on the dense normal equations.
  const auto d = oracle::normal_equations(nodes, K, L_s, nodes.weights, g);
  LD L = 0;
  for (const auto& row : d.M) {
    LD s = 0;
    for (LD v : row) s += std::abs(v);
    L = std::max(L, s);
  }
  std::vector<LD> x(16, 0);
  for (int it = 0; it < 20000; ++it)
    for (int a = 0; a < 16; ++a) {
      LD gr = -d.rhs[a];
      for (int b = 0; b < 16; ++b) gr += d.M[a][b] * x[b];
      x[a] = std::max<LD>(0, x[a] - gr / L);
    }
  PdParams p;
  p.lambda = 1e-8;
  p.iterations = 3000;
  const auto r = pd_tv_solve(g, op, p);
  std::vector<double> xd(x.begin(), x.end());
  CHECK(rel_err(r.report.potential.values, xd) < 1e-4);
  CHECK(r.report.history.back().residual < 1e-4);
}
