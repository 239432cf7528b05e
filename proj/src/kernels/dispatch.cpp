// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "amgs/error.hpp"
#include "amgs/kernels.hpp"

namespace amgs::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if AMGS_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend initial_backend() noexcept {
    if (const char* env = std::getenv("AMGS_SIMD")) {
        const std::string requested(env);
        if (requested == "scalar") {
            return Backend::scalar;
        }
        if (requested == "avx2" && cpu_has_avx2()) {
            return Backend::avx2;
        }
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() noexcept {
    static std::atomic<Backend> backend{initial_backend()};
    return backend;
}

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) {
        throw ValidationError("kernel operands differ in length: " + std::to_string(a) + " vs " +
                              std::to_string(b));
    }
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend backend) noexcept {
    return backend == Backend::scalar || cpu_has_avx2();
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
    if (!backend_available(backend)) {
        throw ValidationError("SIMD backend not available on this CPU: " + std::string(to_string(backend)));
    }
    current().store(backend, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
#if AMGS_HAVE_AVX2_KERNELS
    if (active_backend() == Backend::avx2) {
        return avx2::dot(a.data(), b.data(), a.size());
    }
#endif
    return scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    check_sizes(x.size(), y.size());
#if AMGS_HAVE_AVX2_KERNELS
    if (active_backend() == Backend::avx2) {
        avx2::axpy(a, x.data(), y.data(), x.size());
        return;
    }
#endif
    scalar::axpy(a, x.data(), y.data(), x.size());
}

double squared_norm(std::span<const double> x) { return dot(x, x); }

void adam_update(std::span<double> params, std::span<double> m, std::span<double> v,
                 std::span<const double> grad, const AdamCoefficients& c) {
    check_sizes(params.size(), m.size());
    check_sizes(params.size(), v.size());
    check_sizes(params.size(), grad.size());
#if AMGS_HAVE_AVX2_KERNELS
    if (active_backend() == Backend::avx2) {
        avx2::adam_update(params.data(), m.data(), v.data(), grad.data(), params.size(), c);
        return;
    }
#endif
    scalar::adam_update(params.data(), m.data(), v.data(), grad.data(), params.size(), c);
}

}  // namespace amgs::simd
