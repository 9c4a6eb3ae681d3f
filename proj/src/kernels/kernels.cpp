#include "dhs/kernels.hpp"

#include <cassert>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace dhs::kernels {

const Table& scalar_table() { return scalar::table(); }

const Table* avx2_table() {
#if defined(DHS_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2::table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const Table& resolve() {
  const char* pin = std::getenv("DHS_SIMD");
  if (pin != nullptr && std::string_view(pin) == "scalar") return scalar_table();
  if (const Table* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const Table& active() {
  static const Table& t = resolve();
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }

double weighted_sum_squares(std::span<const double> w, std::span<const double> x) {
  assert(w.size() == x.size());
  return active().weighted_sum_squares(w.data(), x.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

void diag_multiply_add(std::span<const double> d, std::span<const double> x, std::span<double> y) {
  assert(d.size() == x.size() && x.size() == y.size());
  active().diag_multiply_add(d.data(), x.data(), y.data(), x.size());
}

void block_sq_norms(std::span<const double> x, std::size_t width, std::span<double> out) {
  assert(width > 0 && x.size() == width * out.size());
  active().block_sq_norms(x.data(), out.size(), width, out.data());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace dhs::kernels
