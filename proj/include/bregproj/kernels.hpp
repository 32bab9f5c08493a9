#pragma once

// Dense double-precision inner loops used by the projection and tensor code.
//
// Every kernel has a portable scalar reference implementation. When the
// library is built on x86-64 an AVX2/FMA variant is compiled into a separate
// translation unit and selected at runtime if the CPU supports it. Setting
// BREGPROJ_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace bregproj::kernels {

struct KernelTable {
    std::string_view name;
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
    // x *= alpha
    void (*scale)(double* x, double alpha, std::size_t n);
    // x[j] *= y[j]
    void (*mul)(double* x, const double* y, std::size_t n);
    // acc[j] += x[j]
    void (*add)(double* acc, const double* x, std::size_t n);
    // y[j] += alpha * x[j]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_has_avx2();

/// Table chosen once per process from CPU features and BREGPROJ_SIMD.
const KernelTable& active();

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

inline void scale(std::span<double> x, double alpha) { active().scale(x.data(), alpha, x.size()); }

inline void mul(std::span<double> x, std::span<const double> y) { active().mul(x.data(), y.data(), x.size()); }

inline void add(std::span<double> acc, std::span<const double> x) {
    active().add(acc.data(), x.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

} // namespace bregproj::kernels
