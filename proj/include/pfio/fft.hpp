#pragma once

#include <mutex>
#include <vector>

#include <fftw3.h>

#include "pfio/error.hpp"
#include "pfio/types.hpp"

namespace pfio::detail {

// fftw's planner is not thread safe; execution is
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftwPlan {
 public:
  FftwPlan(const std::vector<int>& dims, Complex* data, int sign) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    auto* p = reinterpret_cast<fftw_complex*>(data);
    // UNALIGNED: the plan must not depend on where the vector landed, or reruns differ in the last bit
    plan_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), p, p,
                          sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_ == nullptr) throw Error("fftw planning failed");
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

// unnormalized in-place DFT, sum_k f_k exp(sign 2 pi i k.l / M)
inline void raw_dft(const std::vector<int>& dims, std::vector<Complex>& data, int sign) {
  FftwPlan plan(dims, data.data(), sign);
  plan.execute();
}

}  // namespace pfio::detail
