#pragma once

#include <thread>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace flatpq {

inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#elif defined(__aarch64__)
  asm volatile("yield" ::: "memory");
#endif
}

/// Exponential pause for short waits. After `spin_limit` doublings every call
/// yields, so an oversubscribed machine still lets the awaited thread run.
class spin_backoff {
 public:
  static constexpr unsigned spin_limit = 6;

  void pause() noexcept {
    if (rounds_ < spin_limit) {
      for (unsigned i = 0; i < (1u << rounds_); ++i) cpu_relax();
      ++rounds_;
    } else {
      std::this_thread::yield();
    }
  }

  void reset() noexcept { rounds_ = 0; }

 private:
  unsigned rounds_ = 0;
};

}  // namespace flatpq
