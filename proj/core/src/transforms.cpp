#include "odt/transforms.hpp"

#include <cmath>
#include <stdexcept>

#include "odt/fft.hpp"

namespace odt {

namespace {

double parity(int j) { return (j & 1) ? -1.0 : 1.0; }

// Applies (-1)^(sum of 0-based indices) to a row-major N^axes array.
void checkerboard(std::span<Complex> v, int N, int axes, double extra) {
  if (axes == 1) {
    for (int j = 0; j < N; ++j) v[j] *= parity(j) * extra;
  } else {
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) v[static_cast<std::size_t>(a) * N + b] *= parity(a + b) * extra;
  }
}

void check_detector(std::span<const Complex> v, int N, int axes) {
  if (axes != 1 && axes != 2) throw std::invalid_argument("dft: axes must be 1 or 2");
  if (N <= 0 || N % 2 != 0) throw std::invalid_argument("dft: N must be even and positive");
  if (v.size() != grid_size(N, axes)) throw std::invalid_argument("dft: size mismatch");
}

std::vector<int> cube(int N, int axes) { return std::vector<int>(static_cast<std::size_t>(axes), N); }

void check_ndft(std::size_t fsize, int dim, int K, std::span<const double> nodes) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("ndft: dim must be 1..3");
  if (fsize != grid_size(K, dim)) throw std::invalid_argument("ndft: object size mismatch");
  if (nodes.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("ndft: node coordinates not a multiple of dim");
}

// Per-axis phase factors exp(sign i h k nu_a), k in I_K.
void axis_phases(std::span<const double> nu, int dim, int K, double h, double sign,
                 std::vector<Complex>& out) {
  out.resize(static_cast<std::size_t>(dim) * K);
  for (int a = 0; a < dim; ++a)
    for (int k = 0; k < K; ++k)
      out[static_cast<std::size_t>(a) * K + k] = std::polar(1.0, sign * h * (k - K / 2) * nu[a]);
}

template <class T>
ComplexVec ndft_direct_impl(std::span<const T> f, int dim, int K, double L_s,
                            std::span<const double> nodes) {
  check_ndft(f.size(), dim, K, nodes);
  const double h = 2.0 * L_s / K;
  const std::size_t count = nodes.size() / dim;
  ComplexVec g(count);
  std::vector<Complex> e;
  const std::size_t Ku = static_cast<std::size_t>(K);
  for (std::size_t j = 0; j < count; ++j) {
    axis_phases(nodes.subspan(j * dim, dim), dim, K, h, -1.0, e);
    const Complex* e0 = e.data();
    Complex acc = 0.0;
    if (dim == 1) {
      for (std::size_t k = 0; k < Ku; ++k) acc += e0[k] * f[k];
    } else if (dim == 2) {
      const Complex* e1 = e0 + Ku;
      for (std::size_t a = 0; a < Ku; ++a) {
        Complex row = 0.0;
        const T* fr = f.data() + a * Ku;
        for (std::size_t b = 0; b < Ku; ++b) row += e1[b] * fr[b];
        acc += e0[a] * row;
      }
    } else {
      const Complex* e1 = e0 + Ku;
      const Complex* e2 = e1 + Ku;
      for (std::size_t a = 0; a < Ku; ++a) {
        Complex plane = 0.0;
        for (std::size_t b = 0; b < Ku; ++b) {
          Complex row = 0.0;
          const T* fr = f.data() + (a * Ku + b) * Ku;
          for (std::size_t c = 0; c < Ku; ++c) row += e2[c] * fr[c];
          plane += e1[b] * row;
        }
        acc += e0[a] * plane;
      }
    }
    g[j] = acc;
  }
  return g;
}

}  // namespace

ComplexVec dft(std::span<const Complex> v, int N, int axes) {
  check_detector(v, N, axes);
  ComplexVec out(v.begin(), v.end());
  checkerboard(out, N, axes, 1.0);
  FftPlan::cached(cube(N, axes), -1).execute(out);
  checkerboard(out, N, axes, axes == 1 ? parity(N / 2) : 1.0);
  return out;
}

ComplexVec idft(std::span<const Complex> v, int N, int axes) {
  check_detector(v, N, axes);
  ComplexVec out(v.begin(), v.end());
  checkerboard(out, N, axes, 1.0);
  FftPlan::cached(cube(N, axes), +1).execute(out);
  const double norm = 1.0 / static_cast<double>(grid_size(N, axes));
  checkerboard(out, N, axes, (axes == 1 ? parity(N / 2) : 1.0) * norm);
  return out;
}

ComplexVec ndft_direct(std::span<const Complex> f, int dim, int K, double L_s,
                       std::span<const double> nodes) {
  return ndft_direct_impl(f, dim, K, L_s, nodes);
}

ComplexVec ndft_direct(std::span<const double> f, int dim, int K, double L_s,
                       std::span<const double> nodes) {
  return ndft_direct_impl(f, dim, K, L_s, nodes);
}

ComplexVec ndft_adjoint_direct(std::span<const Complex> g, int dim, int K, double L_s,
                               std::span<const double> nodes) {
  check_ndft(grid_size(K, dim), dim, K, nodes);
  const std::size_t count = nodes.size() / dim;
  if (g.size() != count) throw std::invalid_argument("ndft_adjoint: sample count mismatch");
  const double h = 2.0 * L_s / K;
  const std::size_t Ku = static_cast<std::size_t>(K);
  ComplexVec out(grid_size(K, dim));
  std::vector<Complex> e;
  std::vector<Complex> tmp(Ku * Ku);
  for (std::size_t j = 0; j < count; ++j) {
    if (g[j] == Complex(0.0)) continue;
    axis_phases(nodes.subspan(j * dim, dim), dim, K, h, +1.0, e);
    const Complex* e0 = e.data();
    if (dim == 1) {
      for (std::size_t k = 0; k < Ku; ++k) out[k] += g[j] * e0[k];
    } else if (dim == 2) {
      const Complex* e1 = e0 + Ku;
      for (std::size_t a = 0; a < Ku; ++a) {
        const Complex s = g[j] * e0[a];
        Complex* o = out.data() + a * Ku;
        for (std::size_t b = 0; b < Ku; ++b) o[b] += s * e1[b];
      }
    } else {
      const Complex* e1 = e0 + Ku;
      const Complex* e2 = e1 + Ku;
      for (std::size_t a = 0; a < Ku; ++a)
        for (std::size_t b = 0; b < Ku; ++b) tmp[a * Ku + b] = g[j] * e0[a] * e1[b];
      for (std::size_t ab = 0; ab < Ku * Ku; ++ab) {
        Complex* o = out.data() + ab * Ku;
        const Complex s = tmp[ab];
        for (std::size_t c = 0; c < Ku; ++c) o[c] += s * e2[c];
      }
    }
  }
  return out;
}

NdftOperator::NdftOperator(NodeSet nodes, int K, double L_s, NdftMethod method)
    : nodes_(std::move(nodes)), K_(K), L_s_(L_s) {
  if (K <= 0 || K % 2 != 0) throw std::invalid_argument("NdftOperator: K must be even");
  const bool use_fast =
      method == NdftMethod::fast || (method == NdftMethod::automatic && K > 16);
  if (use_fast) nfft_ = std::make_shared<Nfft>(nodes_.dim, K, L_s, nodes_.coords);
}

ComplexVec NdftOperator::apply(std::span<const double> f) const {
  if (nfft_) {
    ComplexVec fc(f.begin(), f.end());
    return nfft_->forward(fc);
  }
  return ndft_direct(f, nodes_.dim, K_, L_s_, nodes_.coords);
}

ComplexVec NdftOperator::apply(std::span<const Complex> f) const {
  if (nfft_) return nfft_->forward(f);
  return ndft_direct(f, nodes_.dim, K_, L_s_, nodes_.coords);
}

ComplexVec NdftOperator::adjoint(std::span<const Complex> g) const {
  if (nfft_) return nfft_->adjoint(g);
  return ndft_adjoint_direct(g, nodes_.dim, K_, L_s_, nodes_.coords);
}

RealVec NdftOperator::adjoint_real(std::span<const Complex> g) const {
  const ComplexVec c = adjoint(g);
  RealVec out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

}  // namespace odt
