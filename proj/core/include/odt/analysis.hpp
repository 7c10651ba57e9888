#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "odt/geometry.hpp"
#include "odt/inversion.hpp"
#include "odt/phase_retrieval.hpp"

namespace odt {

enum class PrimitiveKind { ball, box, ellipsoid, crescent };

/// One additive shape. Lengths are absolute (same units as L_s).
///   ball:      radius = size[0]
///   box:       half-widths = size
///   ellipsoid: semi-axes = size
///   crescent:  ball(center, size[0]) minus ball(cut_center, size[1])
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::ball;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::array<double, 3> size{0.0, 0.0, 0.0};
  std::array<double, 3> cut_center{0.0, 0.0, 0.0};
  double amplitude = 0.0;
};

struct PhantomSpec {
  int dim = 2;
  std::vector<Primitive> primitives;
  double cap = 1.0;
};

/// Parses {"dim":2,"cap":0.5,"primitives":[{"type":"ball","center":[..],
/// "radius":r,"amplitude":a}, {"type":"box","center":[..],"half":[..],...},
/// {"type":"ellipsoid","center":[..],"radii":[..],...},
/// {"type":"crescent","center":[..],"radius":r,"cut_center":[..],"cut_radius":q,...}]}.
PhantomSpec phantom_from_json(const std::string& text);
std::string phantom_to_json(const PhantomSpec& spec);

/// Disk, rectangle and a concave crescent within 0.5 L_s; amplitudes up
/// to 0.5 in 2D and 1.0 in 3D.
PhantomSpec mini_shapes(int dim, double L_s);

/// One ball and one box.
PhantomSpec ball_box(int dim, double L_s);

/// "named:mini-shapes" / "named:ball-box", or JSON text.
PhantomSpec named_phantom(const std::string& name, int dim, double L_s);

/// Samples the primitives at x_k, sums overlaps and clamps to [0, cap].
/// Throws std::invalid_argument if a primitive leaves the [-L_s, L_s]^d box.
ScatteringPotential render_phantom(const PhantomSpec& spec, const ExperimentConfig& config);

/// Adds i.i.d. Gaussian noise (complex for field stacks, real for magnitude
/// stacks) rescaled so that ||eps|| / ||stack|| = level.
MeasurementStack add_noise(const MeasurementStack& stack, double level, std::uint64_t seed);

/// 10 log10(max |f|^2 / mean |f - g|^2) with f the reference; +inf if equal.
double psnr(const ScatteringPotential& ref, const ScatteringPotential& test);

/// Mean local SSIM with an 11-tap Gaussian window (sigma 1.5) over the valid
/// region, C1 = (0.01 L)^2, C2 = (0.03 L)^2, L the reference dynamic range.
double ssim(const ScatteringPotential& ref, const ScatteringPotential& test);

struct LcurvePoint {
  double lambda = 0.0;
  /// ||F f - g||^2_{2,w} for known phase, || |D f| - d ||_2^2 for magnitudes.
  double residual = 0.0;
  double tv = 0.0;
  ReconstructionReport report;
};

struct LcurveOptions {
  PdParams pd;              // lambda is overwritten per entry
  WeightsMode weights = WeightsMode::quadrature;
  IoOptions io;             // magnitude data only
  double r_s = 0.0;         // <= 0: default_support_radius
};

/// PD-TV per lambda on a field stack, or input-output retrieval on a
/// magnitude stack.
std::vector<LcurvePoint> lcurve_sweep(const MeasurementStack& data, const OdtModel& model,
                                      const std::vector<double>& lambdas,
                                      const LcurveOptions& options);

}  // namespace odt
