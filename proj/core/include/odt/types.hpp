#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace odt {

using Complex = std::complex<double>;
using RealVec = std::vector<double>;
using ComplexVec = std::vector<Complex>;

inline constexpr double kPi = std::numbers::pi;

/// Number of samples of the symmetric grid I_K^dim.
constexpr std::size_t grid_size(int K, int dim) {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(K);
  return n;
}

/// Symmetric multi-index (each entry in [-K/2, K/2)) of a row-major flat
/// index with the last axis fastest. Unused trailing entries are zero.
inline std::array<int, 3> unflatten(std::size_t flat, int K, int dim) {
  std::array<int, 3> k{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    k[a] = static_cast<int>(flat % static_cast<std::size_t>(K)) - K / 2;
    flat /= static_cast<std::size_t>(K);
  }
  return k;
}

inline std::size_t flatten(const std::array<int, 3>& k, int K, int dim) {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a)
    flat = flat * static_cast<std::size_t>(K) + static_cast<std::size_t>(k[a] + K / 2);
  return flat;
}

/// Real scattering potential sampled on I_K^dim.
struct ScatteringPotential {
  int dim = 2;
  int K = 0;
  RealVec values;

  ScatteringPotential() = default;
  ScatteringPotential(int dim_, int K_) : dim(dim_), K(K_), values(grid_size(K_, dim_), 0.0) {}
  ScatteringPotential(int dim_, int K_, RealVec v) : dim(dim_), K(K_), values(std::move(v)) {
    if (values.size() != grid_size(K, dim))
      throw std::invalid_argument("ScatteringPotential: value count does not match K^dim");
  }

  std::size_t size() const { return values.size(); }
};

/// Discrete vector field on I_K^dim with dim components per voxel, stored
/// component-major: values[c * K^dim + k].
struct DualField {
  int dim = 2;
  int K = 0;
  RealVec values;

  DualField() = default;
  DualField(int dim_, int K_)
      : dim(dim_), K(K_), values(grid_size(K_, dim_) * static_cast<std::size_t>(dim_), 0.0) {}

  std::size_t voxels() const { return grid_size(K, dim); }
  std::span<double> component(int c) { return {values.data() + c * voxels(), voxels()}; }
  std::span<const double> component(int c) const {
    return {values.data() + c * voxels(), voxels()};
  }
};

enum class StackKind { total_field, scattered_field, magnitude };

/// Detector data for M time steps, each on I_N^(dim-1). Magnitude stacks keep
/// a zero imaginary part.
struct MeasurementStack {
  int dim = 2;
  int M = 0;
  int N = 0;
  StackKind kind = StackKind::total_field;
  ComplexVec values;

  MeasurementStack() = default;
  MeasurementStack(int dim_, int M_, int N_, StackKind kind_)
      : dim(dim_), M(M_), N(N_), kind(kind_),
        values(static_cast<std::size_t>(M_) * grid_size(N_, dim_ - 1)) {}

  std::size_t per_step() const { return grid_size(N, dim - 1); }
  std::span<Complex> step(int m) { return {values.data() + m * per_step(), per_step()}; }
  std::span<const Complex> step(int m) const {
    return {values.data() + m * per_step(), per_step()};
  }
};

/// Samples on the nodes of a NodeSet, in node order.
using FourierSamples = ComplexVec;

}  // namespace odt
