#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "odt/fft.hpp"
#include "odt/transforms.hpp"

namespace odt {

namespace {

double es_window(double z, double beta) {
  const double s = 1.0 - z * z;
  return s <= 0.0 ? 0.0 : std::exp(beta * (std::sqrt(s) - 1.0));
}

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int q, std::vector<double>& x, std::vector<double>& w) {
  x.resize(q);
  w.resize(q);
  for (int i = 0; i < q; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2.0 * n - 1.0) * z * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

inline int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

Nfft::Nfft(int dim, int K, double L_s, std::span<const double> nodes, double tolerance)
    : dim_(dim), K_(K) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("Nfft: dim must be 1..3");
  if (K <= 0 || K % 2 != 0) throw std::invalid_argument("Nfft: K must be even");
  if (nodes.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("Nfft: node coordinates not a multiple of dim");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("Nfft: tolerance");

  width_ = std::clamp(static_cast<int>(std::ceil(std::log10(1.0 / tolerance))) + 1, 2, 16);
  n_ = std::max(2 * K, 2 * width_);
  n_ += n_ % 2;
  beta_ = 2.30 * width_;
  count_ = nodes.size() / dim;

  // Fourier coefficients of the periodized window, by quadrature.
  std::vector<double> gx, gw;
  gauss_legendre(80, gx, gw);
  correction_.resize(K);
  for (int k = -K / 2; k < K / 2; ++k) {
    double c = 0.0;
    for (std::size_t q = 0; q < gx.size(); ++q)
      c += gw[q] * es_window(gx[q], beta_) * std::cos(kPi * width_ * k * gx[q] / n_);
    c *= width_ / (2.0 * n_);
    correction_[k + K / 2] = 1.0 / (n_ * c);
  }

  const double h = 2.0 * L_s / K;
  const double half = width_ / 2.0;
  start_.resize(count_ * dim);
  kernel_.resize(count_ * dim * width_);
  for (std::size_t j = 0; j < count_; ++j) {
    for (int a = 0; a < dim; ++a) {
      const double s = h * nodes[j * dim + a] * n_ / (2.0 * kPi);
      const int first = static_cast<int>(std::ceil(s - half));
      start_[j * dim + a] = first;
      double* kv = kernel_.data() + (j * dim + a) * width_;
      for (int i = 0; i < width_; ++i) kv[i] = es_window((first + i - s) / half, beta_);
    }
  }
}

ComplexVec Nfft::forward(std::span<const Complex> f) const {
  if (f.size() != grid_size(K_, dim_)) throw std::invalid_argument("Nfft::forward: size");
  const std::size_t n = static_cast<std::size_t>(n_);
  ComplexVec fine(grid_size(n_, dim_));
  for (std::size_t flat = 0; flat < f.size(); ++flat) {
    const auto k = unflatten(flat, K_, dim_);
    std::size_t idx = 0;
    double corr = 1.0;
    for (int a = 0; a < dim_; ++a) {
      idx = idx * n + static_cast<std::size_t>(wrap(k[a], n_));
      corr *= correction_[k[a] + K_ / 2];
    }
    fine[idx] = f[flat] * corr;
  }
  FftPlan::cached(std::vector<int>(dim_, n_), -1).execute(fine);

  ComplexVec g(count_);
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim_) * width_);
  for (std::size_t j = 0; j < count_; ++j) {
    for (int a = 0; a < dim_; ++a)
      for (int i = 0; i < width_; ++i)
        idx[a * width_ + i] = static_cast<std::size_t>(wrap(start_[j * dim_ + a] + i, n_));
    const double* kv = kernel_.data() + j * dim_ * width_;
    Complex acc = 0.0;
    if (dim_ == 1) {
      for (int i = 0; i < width_; ++i) acc += kv[i] * fine[idx[i]];
    } else if (dim_ == 2) {
      for (int i = 0; i < width_; ++i) {
        Complex row = 0.0;
        const Complex* fr = fine.data() + idx[i] * n;
        for (int l = 0; l < width_; ++l) row += kv[width_ + l] * fr[idx[width_ + l]];
        acc += kv[i] * row;
      }
    } else {
      for (int i = 0; i < width_; ++i) {
        Complex plane = 0.0;
        for (int l = 0; l < width_; ++l) {
          Complex row = 0.0;
          const Complex* fr = fine.data() + (idx[i] * n + idx[width_ + l]) * n;
          for (int m = 0; m < width_; ++m) row += kv[2 * width_ + m] * fr[idx[2 * width_ + m]];
          plane += kv[width_ + l] * row;
        }
        acc += kv[i] * plane;
      }
    }
    g[j] = acc;
  }
  return g;
}

ComplexVec Nfft::adjoint(std::span<const Complex> g) const {
  if (g.size() != count_) throw std::invalid_argument("Nfft::adjoint: size");
  const std::size_t n = static_cast<std::size_t>(n_);
  ComplexVec fine(grid_size(n_, dim_));
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim_) * width_);
  for (std::size_t j = 0; j < count_; ++j) {
    if (g[j] == Complex(0.0)) continue;
    for (int a = 0; a < dim_; ++a)
      for (int i = 0; i < width_; ++i)
        idx[a * width_ + i] = static_cast<std::size_t>(wrap(start_[j * dim_ + a] + i, n_));
    const double* kv = kernel_.data() + j * dim_ * width_;
    if (dim_ == 1) {
      for (int i = 0; i < width_; ++i) fine[idx[i]] += kv[i] * g[j];
    } else if (dim_ == 2) {
      for (int i = 0; i < width_; ++i) {
        const Complex s = kv[i] * g[j];
        Complex* fr = fine.data() + idx[i] * n;
        for (int l = 0; l < width_; ++l) fr[idx[width_ + l]] += kv[width_ + l] * s;
      }
    } else {
      for (int i = 0; i < width_; ++i) {
        for (int l = 0; l < width_; ++l) {
          const Complex s = kv[i] * kv[width_ + l] * g[j];
          Complex* fr = fine.data() + (idx[i] * n + idx[width_ + l]) * n;
          for (int m = 0; m < width_; ++m) fr[idx[2 * width_ + m]] += kv[2 * width_ + m] * s;
        }
      }
    }
  }
  FftPlan::cached(std::vector<int>(dim_, n_), +1).execute(fine);

  ComplexVec out(grid_size(K_, dim_));
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const auto k = unflatten(flat, K_, dim_);
    std::size_t idx_f = 0;
    double corr = 1.0;
    for (int a = 0; a < dim_; ++a) {
      idx_f = idx_f * n + static_cast<std::size_t>(wrap(k[a], n_));
      corr *= correction_[k[a] + K_ / 2];
    }
    out[flat] = fine[idx_f] * corr;
  }
  return out;
}

}  // namespace odt
