#pragma once

#include "odt/geometry.hpp"
#include "odt/transforms.hpp"
#include "odt/types.hpp"

namespace odt {

/// Everything derived from an ExperimentConfig that the forward map and the
/// solvers share: node set, coefficient vector and the bound NDFT.
/// Immutable after construction.
class OdtModel {
 public:
  explicit OdtModel(ExperimentConfig config, NdftMethod method = NdftMethod::automatic);

  const ExperimentConfig& config() const { return config_; }
  const NodeSet& nodes() const { return ndft_.nodes(); }
  const NdftOperator& ndft() const { return ndft_; }
  const ComplexVec& coefficients() const { return coeff_; }
  /// e^{i k0 r_M}, the incident field on the detector plane.
  Complex incident() const;

 private:
  ExperimentConfig config_;
  NdftOperator ndft_;
  ComplexVec coeff_;
};

/// Per time step c (.) g_m scattered onto the full detector grid (zero on the
/// dropped frequencies), then inverse DFT. Returns the scattered-field stack.
MeasurementStack fourier_to_scattered(const FourierSamples& g, const OdtModel& model);

/// D^tot f = F_DFT^-1 (c (.) F_NDFT f) + e^{i k0 r_M}.
MeasurementStack dtot_apply(const ScatteringPotential& f, const OdtModel& model);

/// Midpoint-rule discretization of the Born convolution restricted to the
/// detector plane, plus the incident field. Independent of the Fourier route.
MeasurementStack born_convolution_forward(const ScatteringPotential& f,
                                          const ExperimentConfig& config);

/// H_0^(1)(x) = J_0(x) + i Y_0(x) for x > 0.
Complex hankel_h1_0(double x);

/// Outgoing Green function of the Helmholtz equation at distance r > 0.
Complex green_function(int dim, double k0, double r);

/// Free-space propagation over `distance` on the detector grid: multiplies the
/// propagating band by e^{+-i kappa distance} and zeroes evanescent frequencies.
ComplexVec free_space_propagate(std::span<const Complex> v, double distance,
                                const ExperimentConfig& config, bool inverse = false);

}  // namespace odt
