#include "kernels_impl.hpp"

#include <cmath>

namespace dhs::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

double weighted_sum_squares(const double* w, const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * x[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void diag_multiply_add(const double* d, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += d[i] * x[i];
}

void block_sq_norms(const double* x, std::size_t blocks, std::size_t width, double* out) {
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* p = x + b * width;
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += p[j] * p[j];
    out[b] = s;
  }
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(a[i] - b[i]));
  return m;
}

const Table& table() {
  static const Table t{"scalar",     &dot,  &sum_squares,    &weighted_sum_squares, &axpy,
                       &diag_multiply_add, &block_sq_norms, &max_abs_diff};
  return t;
}

}  // namespace dhs::kernels::scalar
