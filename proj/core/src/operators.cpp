#include <cmath>
#include <stdexcept>

#include "odt/inversion.hpp"

namespace odt {

namespace {

std::size_t axis_stride(int K, int dim, int axis) { return grid_size(K, dim - 1 - axis); }

}  // namespace

DualField grad_op(const ScatteringPotential& f) {
  DualField y(f.dim, f.K);
  const std::size_t n = f.size();
  for (int a = 0; a < f.dim; ++a) {
    const std::size_t stride = axis_stride(f.K, f.dim, a);
    auto comp = y.component(a);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t pos = (k / stride) % static_cast<std::size_t>(f.K);
      comp[k] = (pos + 1 < static_cast<std::size_t>(f.K)) ? f.values[k + stride] - f.values[k] : 0.0;
    }
  }
  return y;
}

ScatteringPotential div_op(const DualField& y) {
  ScatteringPotential f(y.dim, y.K);
  const std::size_t n = y.voxels();
  const std::size_t last = static_cast<std::size_t>(y.K) - 1;
  for (int a = 0; a < y.dim; ++a) {
    const std::size_t stride = axis_stride(y.K, y.dim, a);
    const auto comp = y.component(a);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t pos = (k / stride) % static_cast<std::size_t>(y.K);
      double v;
      if (pos == 0)
        v = comp[k];
      else if (pos == last)
        v = -comp[k - stride];
      else
        v = comp[k] - comp[k - stride];
      f.values[k] += v;
    }
  }
  return f;
}

double total_variation(const ScatteringPotential& f) {
  const DualField y = grad_op(f);
  double tv = 0.0;
  for (std::size_t k = 0; k < y.voxels(); ++k) {
    double s = 0.0;
    for (int a = 0; a < y.dim; ++a) s += y.component(a)[k] * y.component(a)[k];
    tv += std::sqrt(s);
  }
  return tv;
}

DualField prox_group_shrink(const DualField& y, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("prox_group_shrink: rho must be positive");
  DualField out = y;
  for (std::size_t k = 0; k < y.voxels(); ++k) {
    double s = 0.0;
    for (int a = 0; a < y.dim; ++a) s += y.component(a)[k] * y.component(a)[k];
    const double factor = 1.0 - rho / std::max(std::sqrt(s), rho);
    for (int a = 0; a < y.dim; ++a) out.component(a)[k] *= factor;
  }
  return out;
}

DualField prox_dual_tv(const DualField& y, double sigma, double lambda) {
  if (!(sigma > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("prox_dual_tv: sigma and lambda must be positive");
  DualField scaled = y;
  for (auto& v : scaled.values) v /= sigma;
  const DualField p = prox_group_shrink(scaled, lambda / sigma);
  DualField out = y;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= sigma * p.values[i];
  return out;
}

}  // namespace odt
