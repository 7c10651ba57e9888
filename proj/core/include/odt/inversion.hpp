#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odt/forward.hpp"
#include "odt/types.hpp"

namespace odt {

// ---------------------------------------------------------------------------
// Discrete TV machinery

/// Forward differences per axis, zero in the last row k_a = K/2 - 1.
DualField grad_op(const ScatteringPotential& f);

/// Backward-difference divergence; grad_op and -div_op are adjoint.
ScatteringPotential div_op(const DualField& y);

/// ||grad f||_{1,2}.
double total_variation(const ScatteringPotential& f);

/// Per-voxel group soft shrinkage, prox of rho ||.||_{1,2}.
DualField prox_group_shrink(const DualField& y, double rho);

/// prox of sigma (lambda ||.||_{1,2})^*, via the Moreau identity
/// y - sigma prox_{(lambda/sigma)||.||_{1,2}}(y / sigma).
DualField prox_dual_tv(const DualField& y, double sigma, double lambda);

// ---------------------------------------------------------------------------
// Solvers

struct IterationRecord {
  int iter = 0;
  double residual = 0.0;
  std::optional<double> tv;
  std::optional<double> tau;
  std::optional<double> sigma;
  double wall_ms = 0.0;
};

struct ReconstructionReport {
  ScatteringPotential potential;
  std::vector<IterationRecord> history;  // iterations + 1 entries
  std::string method;
  double lambda = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  /// Largest || |g^(j+1)| - d ||_inf seen by a phase retrieval loop.
  std::optional<double> magnitude_violation;
  bool breakdown = false;
};

/// Smooth data term G(f) = 1/2 ||A f - b||^2 of the primal-dual solver.
class DataTerm {
 public:
  virtual ~DataTerm() = default;
  /// Writes grad G(f) and returns the (weighted) residual norm ||A f - b||.
  virtual double gradient(std::span<const double> f, std::span<double> grad) const = 0;
  /// Upper estimate of the Lipschitz constant of grad G.
  virtual double lipschitz() const = 0;
};

/// 1/2 ||F_NDFT f - g||^2_{2,w}.
class NdftDataTerm final : public DataTerm {
 public:
  NdftDataTerm(const NdftOperator& op, const FourierSamples& g, std::span<const double> weights);
  double gradient(std::span<const double> f, std::span<double> grad) const override;
  double lipschitz() const override;

 private:
  const NdftOperator& op_;
  const FourierSamples& g_;
  std::span<const double> w_;
  mutable std::optional<double> lipschitz_;
};

/// 1/2 ||f - f_in||^2.
class IdentityDataTerm final : public DataTerm {
 public:
  explicit IdentityDataTerm(std::span<const double> f_in) : f_in_(f_in) {}
  double gradient(std::span<const double> f, std::span<double> grad) const override;
  double lipschitz() const override { return 1.0; }

 private:
  std::span<const double> f_in_;
};

/// Primal-dual solver parameters; step-size constants follow the adaptive
/// backtracking and balancing rules.
struct PdParams {
  double lambda = 0.05;
  int iterations = 50;
  double balance_exponent = 0.005;  // rho
  double alignment = 0.9;           // c
  double growth = 1.5;              // beta
  double shrink = 0.25;             // zeta
  std::optional<double> tau0;
  std::optional<double> sigma0;
};

struct PdState {
  ScatteringPotential primal;
  DualField dual;
  double tau = 0.0;
  double sigma = 0.0;
  int iteration = 0;
};

struct PdResult {
  ReconstructionReport report;
  PdState state;
};

/// Generic nonnegative TV-regularized primal-dual iteration on a data term.
/// `warm` resumes primal, dual and step sizes; otherwise f = y = 0 and the
/// step sizes are 1 / sqrt(||grad||^2 + Lipschitz(grad G)).
PdResult pd_solve(const DataTerm& data, int dim, int K, const PdParams& params,
                  const PdState* warm = nullptr, const ScatteringPotential* initial = nullptr);

/// Weights of the data fidelity: backpropagation quadrature weights or ones.
enum class WeightsMode { quadrature, uniform };

/// Weights of a node set for the given mode.
std::vector<double> solver_weights(const NodeSet& nodes, WeightsMode mode);

FourierSamples measurements_to_fourier(const MeasurementStack& stack, const OdtModel& model);

/// Re[F*(w (.) g)].
ScatteringPotential backpropagation(const FourierSamples& g, const NdftOperator& op);

/// Weighted CGNR for min ||F f - g||_{2,w} over real f.
ReconstructionReport cg_solve(const FourierSamples& g, const NdftOperator& op,
                              WeightsMode weights, int iterations,
                              const ScatteringPotential* f0 = nullptr);

PdResult pd_tv_solve(const FourierSamples& g, const NdftOperator& op, const PdParams& params,
                     const PdState* warm = nullptr, const ScatteringPotential* initial = nullptr,
                     WeightsMode weights = WeightsMode::quadrature);

/// argmin chi_{>=0} + 1/2 ||f - f_in||^2 + lambda ||grad f||_{1,2}.
ScatteringPotential tv_denoise(const ScatteringPotential& f_in, double lambda, int iterations);

enum class Method { bp, cg, pdtv };

struct ReconstructOptions {
  Method method = Method::pdtv;
  WeightsMode weights = WeightsMode::quadrature;
  int cg_iterations = 20;
  PdParams pd;
  /// TV denoising applied after BP or CG.
  std::optional<double> tvd_lambda;
  std::optional<int> tvd_iterations;
};

/// Measurements to Fourier samples, then the chosen inverse NDFT.
ReconstructionReport reconstruct(const MeasurementStack& stack, const OdtModel& model,
                                 const ReconstructOptions& options);

/// Same as reconstruct, starting from Fourier samples.
ReconstructionReport reconstruct_fourier(const FourierSamples& g, const OdtModel& model,
                                         const ReconstructOptions& options);

std::string to_string(Method m);
Method method_from_string(const std::string& s);

}  // namespace odt
