#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odt/types.hpp"

namespace odt {

/// Physical and discretization parameters of one tomography experiment.
///
/// Lengths are in the units of 1/k0 scaled by 2*pi, i.e. with k0 = 2*pi all
/// lengths are multiples of the incident wavelength. The object rotates
/// about `rotation_axis` (3D only, 0-based, default x2) with t_m = T*m/M.
struct ExperimentConfig {
  int dim = 2;
  double k0 = 2.0 * kPi;
  double r_M = 40.0;
  double L_M = 60.0;
  double L_s = 240.0 / (4.0 * std::numbers::sqrt2);
  int K = 240;
  int N = 240;
  int M = 240;
  double T = 2.0 * kPi;
  int rotation_axis = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Non-fatal diagnostics, e.g. node set exceeding one NDFT period.
  std::vector<std::string> warnings() const;

  double object_step() const { return 2.0 * L_s / K; }
  double detector_step() const { return 2.0 * L_M / N; }
  double frequency_step() const { return kPi / L_M; }
  std::size_t object_size() const { return grid_size(K, dim); }
  std::size_t detector_size() const { return grid_size(N, dim - 1); }
  bool full_turn() const;

  /// Rotation parameter of time step m, m = 0..M-1 standing for 1..M.
  double time(int m) const { return T * (m + 1) / M; }

  /// The same geometry with K = N = M = size, L_M = N/4 and L_s = K/(4*sqrt 2),
  /// which keeps the detector band at k0 for k0 = 2*pi.
  static ExperimentConfig scaled(int dim, int size, double r_M);
};

double kappa(std::span<const double> y_prime, double k0);

/// h(y') = (y', kappa(y') - k0).
std::vector<double> h_map(std::span<const double> y_prime, double k0);

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// R_t in SO(dim); only the leading dim x dim block is meaningful.
Matrix3 rotation(double t, const ExperimentConfig& config);

/// Nonuniform Fourier nodes R_{t_m} h(y'_l) of all detector frequencies
/// strictly inside the k0 band, with backpropagation quadrature weights.
///
/// The kept detector frequencies are the same for every time step; a node's
/// flat index is m * per_step() + j where j enumerates `detector_index`.
struct NodeSet {
  int dim = 2;
  int M = 1;
  int N = 0;
  std::vector<std::size_t> detector_index;  // kept flat detector indices, ascending
  std::vector<std::uint8_t> mask;           // per flat detector index
  std::vector<double> coords;               // node_count() x dim, m-major
  std::vector<double> weights;              // node_count()

  std::size_t per_step() const { return detector_index.size(); }
  std::size_t node_count() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  /// Node set holding arbitrary points (M = 1, no detector structure).
  static NodeSet from_points(int dim, std::vector<double> coords, std::vector<double> weights = {});
};

/// Detector frequency y'_l = (pi / L_M) l of a flat detector index.
std::array<double, 2> detector_frequency(std::size_t flat, const ExperimentConfig& config);

/// True when the detector frequency is kept (|y'| < k0 and kappa >= 1e-6 k0).
bool frequency_kept(std::span<const double> y_prime, double k0);

NodeSet build_node_set(const ExperimentConfig& config);

/// c_l = i / kappa(y'_l) e^{i kappa r_M} (N / L_M)^(dim-1) (L_s / K)^dim on the kept l.
ComplexVec coefficient_vector(const ExperimentConfig& config, const NodeSet& nodes);

/// Object grid position x_k = (2 L_s / K) k of a flat object index.
std::array<double, 3> object_position(std::size_t flat, const ExperimentConfig& config);

}  // namespace odt
