// AVX2 + FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; dispatch.cpp calls into it only after a CPUID check.
#include "gedecomp/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cfloat>
#include <cmath>
#include <cstdint>

namespace gedecomp::kernels::avx2 {
namespace {

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kInvLn2 = 1.44269504088896338700e+00;
constexpr double kSqrt2 = 1.41421356237309504880;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Lanes must be positive normal finite doubles (checked by the caller).
// fdlibm's reduction to m in [sqrt(2)/2, sqrt(2)) and its Remez polynomial
// for log(1+f); < 1 ulp on that range.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // biased exponent -> double via the 2^52 magic constant
  const __m256i ebits = _mm256_srli_epi64(bits, 52);
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(ebits, magic)),
                            _mm256_set1_pd(4503599627370496.0 + 1023.0));

  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  const __m256d w = _mm256_mul_pd(z, z);

  __m256d t1 = _mm256_fmadd_pd(w, _mm256_set1_pd(1.531383769920937332e-01),
                               _mm256_set1_pd(2.222219843214978396e-01));
  t1 = _mm256_fmadd_pd(w, t1, _mm256_set1_pd(3.999999999940941908e-01));
  t1 = _mm256_mul_pd(w, t1);
  __m256d t2 = _mm256_fmadd_pd(w, _mm256_set1_pd(1.479819860511658591e-01),
                               _mm256_set1_pd(1.818357216161805012e-01));
  t2 = _mm256_fmadd_pd(w, t2, _mm256_set1_pd(2.857142874366239149e-01));
  t2 = _mm256_fmadd_pd(w, t2, _mm256_set1_pd(6.666666666666735130e-01));
  t2 = _mm256_mul_pd(z, t2);
  const __m256d r = _mm256_add_pd(t1, t2);

  const __m256d hfsq = _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(f, f));
  // e*ln2_hi - ((hfsq - (s*(hfsq+R) + e*ln2_lo)) - f)
  const __m256d inner = _mm256_fmadd_pd(s, _mm256_add_pd(hfsq, r),
                                        _mm256_mul_pd(e, _mm256_set1_pd(kLn2Lo)));
  const __m256d corr = _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f);
  return _mm256_fmsub_pd(e, _mm256_set1_pd(kLn2Hi), corr);
}

// Valid for |x| <= 708; fdlibm's rational form of exp on |r| <= ln2/2.
inline __m256d exp_pd(__m256d x) {
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kInvLn2)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d hi = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Hi), x);
  const __m256d lo = _mm256_mul_pd(k, _mm256_set1_pd(kLn2Lo));
  const __m256d r = _mm256_sub_pd(hi, lo);
  const __m256d t = _mm256_mul_pd(r, r);

  __m256d p = _mm256_fmadd_pd(t, _mm256_set1_pd(4.13813679705723846039e-08),
                              _mm256_set1_pd(-1.65339022054652515390e-06));
  p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(6.61375632143793436117e-05));
  p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(-2.77777777770155933842e-03));
  p = _mm256_fmadd_pd(t, p, _mm256_set1_pd(1.66666666666666019037e-01));
  const __m256d c = _mm256_fnmadd_pd(t, p, r);

  // y = 1 - ((lo - (r*c)/(2-c)) - hi)
  const __m256d q = _mm256_div_pd(_mm256_mul_pd(r, c), _mm256_sub_pd(_mm256_set1_pd(2.0), c));
  const __m256d y = _mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_sub_pd(_mm256_sub_pd(lo, q), hi));

  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i k64 = _mm256_cvtepi32_epi64(k32);
  k64 = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(y, _mm256_castsi256_pd(k64));
}

inline bool all_normal(__m256d y) {
  const __m256d lo = _mm256_cmp_pd(y, _mm256_set1_pd(DBL_MIN), _CMP_GE_OQ);
  const __m256d hi = _mm256_cmp_pd(y, _mm256_set1_pd(DBL_MAX), _CMP_LE_OQ);
  return _mm256_movemask_pd(_mm256_and_pd(lo, hi)) == 0xF;
}

inline bool all_within(__m256d v, double bound) {
  const __m256d a = _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
  return _mm256_movemask_pd(_mm256_cmp_pd(a, _mm256_set1_pd(bound), _CMP_LE_OQ)) == 0xF;
}

template <class Lane, class Tail>
double reduce(std::span<const double> x, double scale, Lane lane, Tail tail) {
  const std::size_t n = x.size();
  const double* p = x.data();
  const __m256d vs = _mm256_set1_pd(scale);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  double rest = 0.0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d y0 = _mm256_mul_pd(_mm256_loadu_pd(p + i), vs);
    const __m256d y1 = _mm256_mul_pd(_mm256_loadu_pd(p + i + 4), vs);
    if (!lane(y0, acc0)) {
      for (std::size_t j = 0; j < 4; ++j) rest += tail(scale * p[i + j]);
    }
    if (!lane(y1, acc1)) {
      for (std::size_t j = 4; j < 8; ++j) rest += tail(scale * p[i + j]);
    }
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d y0 = _mm256_mul_pd(_mm256_loadu_pd(p + i), vs);
    if (!lane(y0, acc0)) {
      for (std::size_t j = 0; j < 4; ++j) rest += tail(scale * p[i + j]);
    }
  }
  for (; i < n; ++i) rest += tail(scale * p[i]);
  return hsum(_mm256_add_pd(acc0, acc1)) + rest;
}

}  // namespace

double sum(std::span<const double> x) noexcept {
  return reduce(
      x, 1.0,
      [](__m256d y, __m256d& acc) {
        acc = _mm256_add_pd(acc, y);
        return true;
      },
      [](double y) { return y; });
}

double power_sum(std::span<const double> x, double scale, double theta) noexcept {
  if (theta == 0.0) return static_cast<double>(x.size());
  if (theta == 1.0) {
    return reduce(
        x, scale,
        [](__m256d y, __m256d& acc) {
          acc = _mm256_add_pd(acc, y);
          return true;
        },
        [](double y) { return y; });
  }
  if (theta == 2.0) {
    return reduce(
        x, scale,
        [](__m256d y, __m256d& acc) {
          acc = _mm256_fmadd_pd(y, y, acc);
          return true;
        },
        [](double y) { return y * y; });
  }
  if (theta == -1.0) {
    return reduce(
        x, scale,
        [](__m256d y, __m256d& acc) {
          acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(1.0), y));
          return true;
        },
        [](double y) { return 1.0 / y; });
  }
  const __m256d vt = _mm256_set1_pd(theta);
  return reduce(
      x, scale,
      [vt](__m256d y, __m256d& acc) {
        if (!all_normal(y)) return false;
        const __m256d arg = _mm256_mul_pd(vt, log_pd(y));
        if (!all_within(arg, 708.0)) return false;
        acc = _mm256_add_pd(acc, exp_pd(arg));
        return true;
      },
      [theta](double y) { return std::pow(y, theta); });
}

double log_sum(std::span<const double> x, double scale) noexcept {
  return reduce(
      x, scale,
      [](__m256d y, __m256d& acc) {
        if (!all_normal(y)) return false;
        acc = _mm256_add_pd(acc, log_pd(y));
        return true;
      },
      [](double y) { return std::log(y); });
}

double xlogx_sum(std::span<const double> x, double scale) noexcept {
  return reduce(
      x, scale,
      [](__m256d y, __m256d& acc) {
        if (!all_normal(y)) return false;
        acc = _mm256_fmadd_pd(y, log_pd(y), acc);
        return true;
      },
      [](double y) { return y * std::log(y); });
}

void bracket_counts(std::span<const double> x, std::span<const double> interior,
                    std::span<double> counts) noexcept {
  const std::size_t n = x.size();
  const double* p = x.data();
  std::size_t i = 0;
  alignas(32) std::int64_t idx[4];
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    __m256i k = _mm256_setzero_si256();
    for (double c : interior) {
      // all-ones (-1) where c <= v; subtracting counts the cut points passed
      const __m256i ge = _mm256_castpd_si256(_mm256_cmp_pd(v, _mm256_set1_pd(c), _CMP_GE_OQ));
      k = _mm256_sub_epi64(k, ge);
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(idx), k);
    for (int j = 0; j < 4; ++j) counts[static_cast<std::size_t>(idx[j])] += 1.0;
  }
  scalar::bracket_counts(x.subspan(i), interior, counts);
}

}  // namespace gedecomp::kernels::avx2

#else

namespace gedecomp::kernels::avx2 {

double sum(std::span<const double> x) noexcept { return scalar::sum(x); }
double power_sum(std::span<const double> x, double scale, double theta) noexcept {
  return scalar::power_sum(x, scale, theta);
}
double log_sum(std::span<const double> x, double scale) noexcept {
  return scalar::log_sum(x, scale);
}
double xlogx_sum(std::span<const double> x, double scale) noexcept {
  return scalar::xlogx_sum(x, scale);
}
void bracket_counts(std::span<const double> x, std::span<const double> interior,
                    std::span<double> counts) noexcept {
  scalar::bracket_counts(x, interior, counts);
}

}  // namespace gedecomp::kernels::avx2

#endif
