#include "core/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "core/error.hpp"

namespace kswap::fft {

namespace {

// FFTW planning is not thread safe; execution with the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rows, cols, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> scratch(rows * cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                                      sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(plan != nullptr, ErrorCode::Internal, "FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

std::vector<Complex> run(std::span<const Complex> input, std::size_t rows, std::size_t cols,
                         int sign) {
  require(rows >= 1 && cols >= 1 && input.size() == rows * cols, ErrorCode::ShapeMismatch,
          "FFT input of " + std::to_string(input.size()) + " values does not match " +
              std::to_string(rows) + "x" + std::to_string(cols));
  std::vector<Complex> out(input.begin(), input.end());
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(cache().get(rows, cols, sign), buf, buf);
  return out;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> input, std::size_t rows, std::size_t cols) {
  return run(input, rows, cols, FFTW_FORWARD);
}

std::vector<Complex> inverse(std::span<const Complex> input, std::size_t rows, std::size_t cols) {
  auto out = run(input, rows, cols, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(rows * cols);
  for (auto& c : out) c *= scale;
  return out;
}

}  // namespace kswap::fft
