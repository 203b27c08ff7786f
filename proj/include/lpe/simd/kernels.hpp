#pragma once

// Data-parallel inner loops shared by the spectral code. Every kernel has a
// scalar reference implementation; an AVX2+FMA variant is selected at runtime
// when the CPU supports it. Complex arrays are interleaved (re, im) doubles.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace lpe::simd {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

struct KernelTable {
  // out[i] = m[i] * in[i]
  void (*scale_real)(const cplx* in, const double* m, cplx* out, std::size_t n);
  // out[i] = i * m[i] * in[i]
  void (*scale_imag)(const cplx* in, const double* m, cplx* out, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*mul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // y[i] += s * x[i]
  void (*axpy)(double s, const cplx* x, cplx* y, std::size_t n);
  // sum |z[i]|^2
  double (*norm2)(const cplx* z, std::size_t n);
  // Re sum w[i] * a[i] * conj(b[i]); w == nullptr means w == 1
  double (*dot_re)(const double* w, const cplx* a, const cplx* b, std::size_t n);
};

const KernelTable& scalar_kernels();
/// Returns nullptr when the AVX2 translation unit was not built.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

/// The table in use. Chosen on first call: AVX2 when available unless the
/// environment variable LPE_SIMD=scalar is set.
const KernelTable& kernels();
Backend active_backend();
/// Forces a backend; throws ConfigurationError if AVX2 is requested but unavailable.
void set_backend(Backend b);
std::string_view backend_name(Backend b);

inline void scale_real(std::span<const cplx> in, std::span<const double> m, std::span<cplx> out) {
  kernels().scale_real(in.data(), m.data(), out.data(), in.size());
}
inline void scale_imag(std::span<const cplx> in, std::span<const double> m, std::span<cplx> out) {
  kernels().scale_imag(in.data(), m.data(), out.data(), in.size());
}
inline void mul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  kernels().mul(a.data(), b.data(), out.data(), a.size());
}
inline void axpy(double s, std::span<const cplx> x, std::span<cplx> y) {
  kernels().axpy(s, x.data(), y.data(), x.size());
}
inline double norm2(std::span<const cplx> z) { return kernels().norm2(z.data(), z.size()); }
inline double dot_re(std::span<const cplx> a, std::span<const cplx> b) {
  return kernels().dot_re(nullptr, a.data(), b.data(), a.size());
}
inline double dot_re(std::span<const double> w, std::span<const cplx> a, std::span<const cplx> b) {
  return kernels().dot_re(w.data(), a.data(), b.data(), a.size());
}

}  // namespace lpe::simd
