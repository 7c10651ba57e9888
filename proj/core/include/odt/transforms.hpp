#pragma once

#include <memory>

#include "odt/geometry.hpp"
#include "odt/types.hpp"

namespace odt {

/// Symmetric-index DFT on I_N^axes:
///   [F v]_l = sum_{n in I_N^axes} v_n exp(-2 pi i n.l / N).
/// axes is 1 or 2 (the detector dimension d-1).
ComplexVec dft(std::span<const Complex> v, int N, int axes);

/// Inverse of dft, including the 1/N^axes factor.
ComplexVec idft(std::span<const Complex> v, int N, int axes);

/// g_j = sum_{k in I_K^dim} f_k exp(-i x_k . nu_j), x_k = (2 L_s / K) k, by
/// direct summation.
ComplexVec ndft_direct(std::span<const Complex> f, int dim, int K, double L_s,
                       std::span<const double> nodes);
ComplexVec ndft_direct(std::span<const double> f, int dim, int K, double L_s,
                       std::span<const double> nodes);

/// (F* g)_k = sum_j exp(+i x_k . nu_j) g_j by direct summation.
ComplexVec ndft_adjoint_direct(std::span<const Complex> g, int dim, int K, double L_s,
                               std::span<const double> nodes);

/// Gridding NFFT: oversampling factor 2 with an "exponential of semicircle"
/// window. Forward and adjoint are exact transposes of each other, so the
/// adjoint identity holds to rounding even though both approximate the NDFT.
class Nfft {
 public:
  Nfft(int dim, int K, double L_s, std::span<const double> nodes, double tolerance = 1e-7);

  ComplexVec forward(std::span<const Complex> f) const;
  ComplexVec adjoint(std::span<const Complex> g) const;

  int width() const { return width_; }
  int fine_size() const { return n_; }

 private:
  int dim_;
  int K_;
  int n_;
  int width_;
  double beta_;
  std::size_t count_;
  std::vector<double> correction_;      // 1 / (n c_k) for k in I_K
  std::vector<int> start_;              // count x dim first fine-grid index (may be negative)
  std::vector<double> kernel_;          // count x dim x width window values
};

enum class NdftMethod { automatic, direct, fast };

/// F_NDFT bound to a node set and object grid. `automatic` uses the direct
/// sum for K <= 16 and the NFFT otherwise.
class NdftOperator {
 public:
  NdftOperator(NodeSet nodes, int K, double L_s, NdftMethod method = NdftMethod::automatic);

  ComplexVec apply(std::span<const double> f) const;
  ComplexVec apply(std::span<const Complex> f) const;
  ComplexVec adjoint(std::span<const Complex> g) const;
  /// Re[F* g], the adjoint for real-valued objects.
  RealVec adjoint_real(std::span<const Complex> g) const;

  const NodeSet& nodes() const { return nodes_; }
  int K() const { return K_; }
  int dim() const { return nodes_.dim; }
  double L_s() const { return L_s_; }
  bool fast() const { return static_cast<bool>(nfft_); }
  std::size_t object_size() const { return grid_size(K_, nodes_.dim); }

 private:
  NodeSet nodes_;
  int K_;
  double L_s_;
  std::shared_ptr<const Nfft> nfft_;
};

}  // namespace odt
