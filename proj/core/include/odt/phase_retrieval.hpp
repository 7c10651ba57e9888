#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "odt/forward.hpp"
#include "odt/inversion.hpp"

namespace odt {

/// z / |z|, and 1 at z = 0.
Complex sgn_cx(Complex z);

/// Ball support ||x_k|| <= r_s on the object grid.
struct SupportConstraint {
  double r_s = 0.0;
  int dim = 2;
  int K = 0;
  std::vector<std::uint8_t> mask;

  /// Throws std::invalid_argument if the mask is empty or r_s > L_s sqrt(dim).
  static SupportConstraint ball(const ExperimentConfig& config, double r_s);
};

/// Default support radius, 0.8 L_s.
double default_support_radius(const ExperimentConfig& config);

/// max{f_k, 0} inside the support, 0 outside.
ScatteringPotential object_project(const ScatteringPotential& f, const SupportConstraint& support);

/// Hybrid input-output rule: f_j where f_j == f_tilde, otherwise
/// f_prev_half - beta (f_j - f_tilde).
ScatteringPotential hio_input(const ScatteringPotential& f_j, const ScatteringPotential& f_tilde,
                              const ScatteringPotential& f_prev_half, double beta);

enum class IoVariant { er, hio, md };

IoVariant variant_from_string(const std::string& s);

struct IoOptions {
  IoVariant variant = IoVariant::hio;
  Method inner = Method::pdtv;  // cg or pdtv
  int outer_iterations = 20;
  double beta = 0.7;
  int cg_iterations = 5;
  PdParams pd = [] {
    PdParams p;
    p.lambda = 0.01;
    p.iterations = 5;
    return p;
  }();
  WeightsMode weights = WeightsMode::quadrature;
  /// Resume the inner solver (PD state or CG iterate) across outer iterations.
  bool warm_start = true;
  /// For a PD inner solver, start from an HIO/CG run with these budgets.
  bool init_from_cg = true;
  int init_outer_iterations = 10;
  int init_cg_iterations = 5;
  /// Random initial phase instead of g0 = d.
  std::optional<std::uint64_t> seed_phase;
  /// Explicit complex start g0; overrides seed_phase.
  const MeasurementStack* initial_field = nullptr;
};

/// Input-output phase retrieval around D^tot. The history holds one record
/// per outer iteration with the magnitude misfit || |D^tot f~| - d ||_2 of the
/// projected iterate; the potential is the last projected iterate.
ReconstructionReport io_retrieve(const MeasurementStack& d, const OdtModel& model,
                                 const SupportConstraint& support, const IoOptions& options);

struct MdOptions {
  IoVariant variant = IoVariant::hio;  // er or hio for the field stage
  int outer_iterations = 200;
  double beta = 0.7;
  double r_s = 0.0;  // <= 0 selects default_support_radius
  ReconstructOptions stage2 = [] {
    ReconstructOptions o;
    o.method = Method::pdtv;
    o.pd.lambda = 0.05;
    o.pd.iterations = 100;
    return o;
  }();
};

struct MdResult {
  ReconstructionReport report;
  /// Total field with the retrieved phase.
  MeasurementStack field;
};

/// Two-stage propagation-backpropagation retrieval: per time step recover the
/// detector phase with the free-space forward map and a support constraint on
/// the z = 0 plane, then invert the phase-completed stack.
MdResult md_retrieve(const MeasurementStack& d, const OdtModel& model, const MdOptions& options);

/// || |g| - d ||_2 over a whole stack.
double magnitude_misfit(const MeasurementStack& g, const MeasurementStack& d);

}  // namespace odt
