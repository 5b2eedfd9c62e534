#include <atomic>
#include <stdexcept>
#include <string>

#include "gedecomp/kernels.hpp"

namespace gedecomp::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(GEDECOMP_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__)) && \
    (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  }
  current().store(isa, std::memory_order_relaxed);
}

void reset_isa() noexcept { current().store(detect(), std::memory_order_relaxed); }

double sum(std::span<const double> x) noexcept {
  return active_isa() == Isa::avx2 ? avx2::sum(x) : scalar::sum(x);
}

double power_sum(std::span<const double> x, double scale, double theta) noexcept {
  return active_isa() == Isa::avx2 ? avx2::power_sum(x, scale, theta)
                                   : scalar::power_sum(x, scale, theta);
}

double log_sum(std::span<const double> x, double scale) noexcept {
  return active_isa() == Isa::avx2 ? avx2::log_sum(x, scale) : scalar::log_sum(x, scale);
}

double xlogx_sum(std::span<const double> x, double scale) noexcept {
  return active_isa() == Isa::avx2 ? avx2::xlogx_sum(x, scale) : scalar::xlogx_sum(x, scale);
}

void bracket_counts(std::span<const double> x, std::span<const double> interior,
                    std::span<double> counts) noexcept {
  if (active_isa() == Isa::avx2) {
    avx2::bracket_counts(x, interior, counts);
  } else {
    scalar::bracket_counts(x, interior, counts);
  }
}

}  // namespace gedecomp::kernels
