// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

// Dense float64 vector kernels used by the encoder, the gradient code and the
// meta-optimizer. Each kernel has a scalar reference implementation and an
// AVX2 variant; the active backend is chosen once at startup from CPU
// features and can be overridden with AMGS_SIMD=scalar|avx2 or set_backend().
//
// axpy and adam_update perform the same IEEE operations in the same order in
// both backends and are bitwise identical. dot reassociates the sum in the
// AVX2 backend and agrees with the scalar reference to rounding error only.

#pragma once

#include <span>
#include <string_view>

namespace amgs::simd {

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend backend) noexcept;

bool backend_available(Backend backend) noexcept;
Backend active_backend() noexcept;
/// Throws ValidationError when the backend is not supported on this CPU.
void set_backend(Backend backend);

struct AdamCoefficients {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double bias1;  // 1 - beta1^t
    double bias2;  // 1 - beta2^t
};

double dot(std::span<const double> a, std::span<const double> b);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// Sum of squares.
double squared_norm(std::span<const double> x);
void adam_update(std::span<double> params, std::span<double> m, std::span<double> v,
                 std::span<const double> grad, const AdamCoefficients& c);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 const AdamCoefficients& c);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define AMGS_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 const AdamCoefficients& c);
}  // namespace avx2
#else
#define AMGS_HAVE_AVX2_KERNELS 0
#endif

}  // namespace amgs::simd
