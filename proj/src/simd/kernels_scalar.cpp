#include "lpe/simd/kernels.hpp"

namespace lpe::simd {
namespace {

void scale_real_scalar(const cplx* in, const double* m, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = m[i] * in[i];
}

void scale_imag_scalar(const cplx* in, const double* m, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = in[i].real();
    const double im = in[i].imag();
    out[i] = cplx(-m[i] * im, m[i] * re);
  }
}

void mul_scalar(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void axpy_scalar(double s, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

double norm2_scalar(const cplx* z, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
  return acc;
}

double dot_re_scalar(const double* w, const cplx* a, const cplx* b, std::size_t n) {
  double acc = 0.0;
  if (w == nullptr) {
    for (std::size_t i = 0; i < n; ++i) acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  } else {
    for (std::size_t i = 0; i < n; ++i)
      acc += w[i] * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  }
  return acc;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{scale_real_scalar, scale_imag_scalar, mul_scalar,
                                 axpy_scalar,       norm2_scalar,      dot_re_scalar};
  return table;
}

}  // namespace lpe::simd
