// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check.

#include <immintrin.h>

#include "lpe/simd/kernels.hpp"

namespace lpe::simd {
namespace {

// [m0, m1] -> [m0, m0, m1, m1]
inline __m256d dup_pair(const double* m) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(m)), 0x50);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void scale_real_avx2(const cplx* in, const double* m, cplx* out, std::size_t n) {
  const auto* src = reinterpret_cast<const double*>(in);
  auto* dst = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(src + 2 * i);
    _mm256_storeu_pd(dst + 2 * i, _mm256_mul_pd(v, dup_pair(m + i)));
  }
  for (; i < n; ++i) out[i] = m[i] * in[i];
}

void scale_imag_avx2(const cplx* in, const double* m, cplx* out, std::size_t n) {
  const auto* src = reinterpret_cast<const double*>(in);
  auto* dst = reinterpret_cast<double*>(out);
  const __m256d neg_re = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(src + 2 * i), dup_pair(m + i));
    const __m256d swapped = _mm256_permute_pd(v, 0b0101);
    _mm256_storeu_pd(dst + 2 * i, _mm256_xor_pd(swapped, neg_re));
  }
  for (; i < n; ++i) out[i] = cplx(-m[i] * in[i].imag(), m[i] * in[i].real());
}

void mul_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  auto* dst = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    const __m256d re = _mm256_movedup_pd(va);
    const __m256d im = _mm256_permute_pd(va, 0b1111);
    const __m256d vb_swap = _mm256_permute_pd(vb, 0b0101);
    _mm256_storeu_pd(dst + 2 * i, _mm256_fmaddsub_pd(re, vb, _mm256_mul_pd(im, vb_swap)));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void axpy_avx2(double s, const cplx* x, cplx* y, std::size_t n) {
  const auto* px = reinterpret_cast<const double*>(x);
  auto* py = reinterpret_cast<double*>(y);
  const __m256d vs = _mm256_set1_pd(s);
  const std::size_t len = 2 * n;
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4)
    _mm256_storeu_pd(py + i, _mm256_fmadd_pd(vs, _mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i)));
  for (; i < len; ++i) py[i] += s * px[i];
}

double norm2_avx2(const cplx* z, std::size_t n) {
  const auto* p = reinterpret_cast<const double*>(z);
  const std::size_t len = 2 * n;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(p + i);
    const __m256d v1 = _mm256_loadu_pd(p + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; i + 4 <= len; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) acc += p[i] * p[i];
  return acc;
}

double dot_re_avx2(const double* w, const cplx* a, const cplx* b, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  if (w == nullptr) {
    for (; i + 2 <= n; i += 2)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i), acc);
  } else {
    for (; i + 2 <= n; i += 2) {
      const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i));
      acc = _mm256_fmadd_pd(dup_pair(w + i), prod, acc);
    }
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double term = a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    out += (w == nullptr) ? term : w[i] * term;
  }
  return out;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{scale_real_avx2, scale_imag_avx2, mul_avx2,
                                 axpy_avx2,       norm2_avx2,      dot_re_avx2};
  return &table;
}

}  // namespace lpe::simd
