// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "amgs/kernels.hpp"

namespace amgs::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    }
}

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 const AdamCoefficients& c) {
    const double one_minus_b1 = 1.0 - c.beta1;
    const double one_minus_b2 = 1.0 - c.beta2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = c.beta1 * m[i] + one_minus_b1 * g[i];
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g[i] * g[i]);
        const double m_hat = m[i] / c.bias1;
        const double v_hat = v[i] / c.bias2;
        p[i] = p[i] - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
}

}  // namespace amgs::simd::scalar
