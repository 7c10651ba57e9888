#pragma once

#include <memory>
#include <vector>

#include "odt/types.hpp"

namespace odt {

/// Unnormalized multidimensional complex FFT over 0-based indices, row-major
/// with the last axis fastest. `sign` is -1 (forward) or +1 (backward).
///
/// Plans are created once with FFTW_ESTIMATE and cached per (shape, sign);
/// execution is safe from several threads on distinct data.
class FftPlan {
 public:
  FftPlan(std::vector<int> shape, int sign);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void execute(std::span<Complex> data) const;
  std::size_t size() const { return size_; }

  static const FftPlan& cached(const std::vector<int>& shape, int sign);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t size_ = 0;
};

}  // namespace odt
