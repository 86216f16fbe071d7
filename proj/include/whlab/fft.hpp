#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "grid.hpp"

namespace whlab::fft {

namespace detail {

// FFTW planning is not thread-safe; plans are created once per (size, sign)
// under a lock and executed through the new-array interface afterwards.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    auto* buf = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& kv : plans_) fftw_destroy_plan(kv.second);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void run(CVec& data, int sign) {
  if (data.empty()) return;
  fftw_plan p = PlanCache::instance().get(data.size(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
}

}  // namespace detail

// X_k = sum_j x_j e^{-2 pi i jk/N}, in place, unnormalized.
inline void forward(CVec& data) { detail::run(data, FFTW_FORWARD); }

// x_j = sum_k X_k e^{+2 pi i jk/N}, in place, unnormalized.
inline void backward(CVec& data) { detail::run(data, FFTW_BACKWARD); }

// Full linear convolution of a and b (length |a| + |b| - 1).
inline CVec linear_convolution(const CVec& a, const CVec& b) {
  std::size_t out = a.size() + b.size() - 1;
  std::size_t n = fast_length(out);
  CVec fa(a), fb(b);
  fa.resize(n);
  fb.resize(n);
  forward(fa);
  forward(fb);
  for (std::size_t k = 0; k < n; ++k) fa[k] *= fb[k];
  backward(fa);
  fa.resize(out);
  double inv = 1.0 / static_cast<double>(n);
  for (auto& v : fa) v *= inv;
  return fa;
}

}  // namespace whlab::fft
