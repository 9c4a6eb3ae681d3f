#pragma once

// Data-parallel inner loops used by the lattice and operator code.
//
// Every kernel has a scalar reference implementation; an AVX2/FMA variant is
// compiled when the toolchain supports it and selected at runtime when the
// CPU does. The DHS_SIMD environment variable ("scalar" or "avx2") pins the
// choice. Variants agree to rounding, not bitwise: FMA contraction and the
// lane-wise reduction order differ from the scalar loop.

#include <cstddef>
#include <span>
#include <string_view>

namespace dhs::kernels {

struct Table {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // sum_i w[i] * x[i]^2
  double (*weighted_sum_squares)(const double* w, const double* x, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y += d * x (elementwise); one diagonal of a banded matvec
  void (*diag_multiply_add)(const double* d, const double* x, double* y, std::size_t n);
  // out[b] = |x[b*width .. (b+1)*width)|^2
  void (*block_sq_norms)(const double* x, std::size_t blocks, std::size_t width, double* out);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const Table& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const Table* avx2_table();

// The table chosen for this process (resolved once, then fixed).
const Table& active();

// Convenience wrappers over active(); callers guarantee equal lengths.
double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> x);
double weighted_sum_squares(std::span<const double> w, std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void diag_multiply_add(std::span<const double> d, std::span<const double> x, std::span<double> y);
void block_sq_norms(std::span<const double> x, std::size_t width, std::span<double> out);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace dhs::kernels
