#include <cmath>

#include "doctest.h"
#include "odt/phase_retrieval.hpp"
#include "test_util.hpp"

using namespace odt;

namespace {

MeasurementStack magnitudes(const MeasurementStack& u) {
  MeasurementStack d = u;
  d.kind = StackKind::magnitude;
  for (auto& v : d.values) v = std::abs(v);
  return d;
}

ScatteringPotential small_disk(const ExperimentConfig& cfg, double radius, double value) {
  ScatteringPotential f(cfg.dim, cfg.K);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto x = object_position(k, cfg);
    double r2 = 0.0;
    for (int a = 0; a < cfg.dim; ++a) r2 += x[a] * x[a];
    if (std::sqrt(r2) < radius) f.values[k] = value;
  }
  return f;
}

}  // namespace

TEST_CASE("complex sign") {
  CHECK(sgn_cx(0.0) == Complex(1.0));
  CHECK(std::abs(sgn_cx({3.0, 4.0}) - Complex(0.6, 0.8)) < 1e-16);
  CHECK(std::abs(sgn_cx({-2.0, 0.0}) - Complex(-1.0)) < 1e-16);
  CHECK(std::abs(sgn_cx({1e-300, -1e-300}) - std::polar(1.0, -std::numbers::pi / 4)) < 1e-15);
}

TEST_CASE("support ball and object projection") {
  const auto cfg = ExperimentConfig::scaled(2, 8, 4.0);
  const double h = cfg.object_step();
  const auto s = SupportConstraint::ball(cfg, 1.01 * h);
  // The origin and its four neighbours.
  std::size_t count = 0;
  for (auto m : s.mask) count += m;
  CHECK(count == 5);
  ScatteringPotential f(2, 8);
  for (auto& v : f.values) v = -1.0;
  f.values[flatten({0, 0, 0}, 8, 2)] = 2.0;
  f.values[flatten({1, 0, 0}, 8, 2)] = -0.5;
  f.values[flatten({2, 2, 0}, 8, 2)] = 3.0;
  const auto p = object_project(f, s);
  CHECK(p.values[flatten({0, 0, 0}, 8, 2)] == 2.0);
  CHECK(p.values[flatten({1, 0, 0}, 8, 2)] == 0.0);
  CHECK(p.values[flatten({2, 2, 0}, 8, 2)] == 0.0);
  // Projection is idempotent.
  CHECK(object_project(p, s).values == p.values);

  CHECK_THROWS_AS(SupportConstraint::ball(cfg, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SupportConstraint::ball(cfg, 1.5 * cfg.L_s), std::invalid_argument);
  CHECK_NOTHROW(SupportConstraint::ball(cfg, cfg.L_s * std::sqrt(2.0)));
  CHECK(default_support_radius(cfg) == doctest::Approx(0.8 * cfg.L_s));
}

TEST_CASE("hybrid input-output update") {
  ScatteringPotential fj(2, 2, {1.0, -1.0, 0.5, 3.0});
  ScatteringPotential ft(2, 2, {1.0, 0.0, 0.5, 0.0});
  ScatteringPotential prev(2, 2, {9.0, 2.0, 9.0, 1.0});
  const auto in = hio_input(fj, ft, prev, 0.6);
  CHECK(in.values[0] == 1.0);  // unchanged where the constraint holds
  CHECK(in.values[1] == doctest::Approx(2.0 + 0.6));
  CHECK(in.values[2] == 0.5);
  CHECK(in.values[3] == doctest::Approx(1.0 - 0.6 * 3.0));
  CHECK_THROWS_AS(hio_input(fj, ft, prev, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(hio_input(fj, ft, prev, 1.5), std::invalid_argument);
  CHECK_NOTHROW(hio_input(fj, ft, prev, 1.0));
}

TEST_CASE("variant names") {
  CHECK(variant_from_string("er") == IoVariant::er);
  CHECK(variant_from_string("hio") == IoVariant::hio);
  CHECK(variant_from_string("md") == IoVariant::md);
  CHECK_THROWS_AS(variant_from_string("raar"), std::invalid_argument);
}

TEST_CASE("unit magnitudes give a vanishing potential") {
  // k0 r_M = 8 pi, so the incident field is exactly 1 and d = 1 is consistent with f = 0.
  for (auto inner : {Method::cg, Method::pdtv}) {
    const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
    const OdtModel model(cfg);
    MeasurementStack d(2, cfg.M, cfg.N, StackKind::magnitude);
    for (auto& v : d.values) v = 1.0;
    IoOptions o;
    o.inner = inner;
    o.outer_iterations = 5;
    const auto rep = io_retrieve(d, model, SupportConstraint::ball(cfg, 0.8 * cfg.L_s), o);
    double mx = 0.0;
    for (double v : rep.potential.values) mx = std::max(mx, std::abs(v));
    CHECK(mx < 1e-6);
    CHECK(rep.history.size() == 5);
    CHECK(*rep.magnitude_violation <= 1e-14);
  }
}

TEST_CASE("error reduction keeps an exact solution fixed") {
  auto cfg = ExperimentConfig::scaled(2, 8, 4.0);
  cfg.M = 32;
  cfg.L_s *= 2.0;  // whole period inside the covered disk: F is well conditioned
  const OdtModel model(cfg);
  const auto f = small_disk(cfg, 1.2, 0.4);
  const auto u = dtot_apply(f, model);
  const auto d = magnitudes(u);
  IoOptions o;
  o.variant = IoVariant::er;
  o.inner = Method::cg;
  o.cg_iterations = 200;
  o.outer_iterations = 3;
  o.initial_field = &u;
  const auto rep = io_retrieve(d, model, SupportConstraint::ball(cfg, 0.8 * cfg.L_s), o);
  CHECK(testutil::rel_err(rep.potential.values, f.values) < 1e-8);
  for (const auto& h : rep.history) CHECK(h.residual < 1e-8);
  CHECK(rep.method == "er/cg");
}

TEST_CASE("HIO reduces the magnitude misfit and reports PD step sizes") {
  const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
  const OdtModel model(cfg);
  const auto f = small_disk(cfg, 1.5, 0.3);
  const auto d = magnitudes(dtot_apply(f, model));
  const auto support = SupportConstraint::ball(cfg, 0.8 * cfg.L_s);
  IoOptions o;
  o.outer_iterations = 8;
  const auto rep = io_retrieve(d, model, support, o);
  CHECK(rep.method == "hio/pdtv");
  CHECK(rep.history.size() == 8);
  for (const auto& h : rep.history) {
    CHECK(h.tau.has_value());
    CHECK(h.tv.has_value());
  }
  // Misfit of the initial guess f = 0.
  const double start = magnitude_misfit(dtot_apply(ScatteringPotential(2, 16), model), d);
  CHECK(rep.history.back().residual < 0.5 * start);
  CHECK(*rep.magnitude_violation <= 1e-14);
  for (double v : rep.potential.values) CHECK(v >= 0.0);

  // Cold restarts and warm restarts take different paths.
  o.warm_start = false;
  const auto cold = io_retrieve(d, model, support, o);
  CHECK(cold.potential.values != rep.potential.values);
  // Runs are reproducible.
  o.warm_start = true;
  CHECK(io_retrieve(d, model, support, o).potential.values == rep.potential.values);
}

TEST_CASE("random initial phases are seeded") {
  const auto cfg = ExperimentConfig::scaled(2, 8, 4.0);
  const OdtModel model(cfg);
  const auto d = magnitudes(dtot_apply(small_disk(cfg, 1.0, 0.3), model));
  const auto support = SupportConstraint::ball(cfg, 0.8 * cfg.L_s);
  IoOptions o;
  o.inner = Method::cg;
  o.outer_iterations = 2;
  o.seed_phase = 5;
  const auto a = io_retrieve(d, model, support, o);
  const auto b = io_retrieve(d, model, support, o);
  CHECK(a.potential.values == b.potential.values);
  o.seed_phase = 6;
  CHECK(io_retrieve(d, model, support, o).potential.values != a.potential.values);
}

TEST_CASE("input validation") {
  const auto cfg = ExperimentConfig::scaled(2, 8, 4.0);
  const OdtModel model(cfg);
  const auto support = SupportConstraint::ball(cfg, 0.8 * cfg.L_s);
  MeasurementStack d(2, cfg.M, cfg.N, StackKind::magnitude);
  for (auto& v : d.values) v = 1.0;
  IoOptions o;
  o.outer_iterations = 1;
  auto bad = d;
  bad.values[3] = Complex(1.0, 0.5);
  CHECK_THROWS_AS(io_retrieve(bad, model, support, o), std::invalid_argument);
  bad = d;
  bad.values[0] = -1.0;
  CHECK_THROWS_AS(io_retrieve(bad, model, support, o), std::invalid_argument);
  MeasurementStack shape(2, cfg.M - 1, cfg.N, StackKind::magnitude);
  CHECK_THROWS_AS(io_retrieve(shape, model, support, o), std::invalid_argument);
  auto oo = o;
  oo.variant = IoVariant::md;
  CHECK_THROWS_AS(io_retrieve(d, model, support, oo), std::invalid_argument);
  oo = o;
  oo.inner = Method::bp;
  CHECK_THROWS_AS(io_retrieve(d, model, support, oo), std::invalid_argument);
  oo = o;
  oo.beta = 0.0;
  CHECK_THROWS_AS(io_retrieve(d, model, support, oo), std::invalid_argument);
  oo = o;
  oo.outer_iterations = 0;
  CHECK_THROWS_AS(io_retrieve(d, model, support, oo), std::invalid_argument);
  const auto other = SupportConstraint::ball(ExperimentConfig::scaled(2, 16, 4.0), 1.0);
  CHECK_THROWS_AS(io_retrieve(d, model, other, o), std::invalid_argument);
  MdOptions mo;
  mo.variant = IoVariant::md;
  CHECK_THROWS_AS(md_retrieve(d, model, mo), std::invalid_argument);
}

TEST_CASE("propagation-backpropagation retrieval on unit magnitudes") {
  const auto cfg = ExperimentConfig::scaled(2, 16, 4.0);
  const OdtModel model(cfg);
  MeasurementStack d(2, cfg.M, cfg.N, StackKind::magnitude);
  for (auto& v : d.values) v = 1.0;
  for (auto variant : {IoVariant::er, IoVariant::hio}) {
    MdOptions o;
    o.variant = variant;
    o.outer_iterations = 4;
    o.stage2.pd.iterations = 10;
    const auto r = md_retrieve(d, model, o);
    CHECK(r.report.history.size() == 4);
    CHECK(r.report.method == "md/pdtv");
    for (const auto& v : r.field.values) CHECK(std::abs(v - Complex(1.0)) < 1e-12);
    for (double v : r.report.potential.values) CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("magnitude misfit") {
  MeasurementStack a(2, 1, 2, StackKind::total_field), b(2, 1, 2, StackKind::magnitude);
  a.values = {Complex(3.0, 4.0), Complex(0.0, -1.0)};
  b.values = {2.0, 1.0};
  CHECK(magnitude_misfit(a, b) == doctest::Approx(3.0));
}
