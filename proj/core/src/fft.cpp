#include "odt/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace odt {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct FftPlan::Impl {
  fftw_plan plan = nullptr;
};

FftPlan::FftPlan(std::vector<int> shape, int sign) : impl_(std::make_unique<Impl>()) {
  if (shape.empty() || (sign != -1 && sign != 1))
    throw std::invalid_argument("FftPlan: bad shape or sign");
  size_ = 1;
  for (int n : shape) {
    if (n <= 0) throw std::invalid_argument("FftPlan: non-positive extent");
    size_ *= static_cast<std::size_t>(n);
  }
  std::lock_guard lock(planner_mutex());
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
  impl_->plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), buf, buf,
                              sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(buf);
  if (!impl_->plan) throw std::runtime_error("FftPlan: FFTW planning failed");
}

FftPlan::~FftPlan() {
  if (impl_ && impl_->plan) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(impl_->plan);
  }
}

void FftPlan::execute(std::span<Complex> data) const {
  if (data.size() != size_) throw std::invalid_argument("FftPlan::execute: size mismatch");
  // The plan was made for an in-place aligned buffer; run on a fresh aligned
  // copy so arbitrary vectors can be transformed.
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
  std::memcpy(buf, data.data(), sizeof(fftw_complex) * size_);
  fftw_execute_dft(impl_->plan, buf, buf);
  std::memcpy(static_cast<void*>(data.data()), buf, sizeof(fftw_complex) * size_);
  fftw_free(buf);
}

const FftPlan& FftPlan::cached(const std::vector<int>& shape, int sign) {
  static std::mutex cache_mutex;
  static std::map<std::pair<std::vector<int>, int>, std::unique_ptr<FftPlan>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{shape, sign}];
  if (!slot) slot = std::make_unique<FftPlan>(shape, sign);
  return *slot;
}

}  // namespace odt
