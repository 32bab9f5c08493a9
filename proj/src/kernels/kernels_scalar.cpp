#include "bregproj/kernels.hpp"

#include <cmath>

namespace bregproj::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += x[j] * y[j];
    return s;
}

double sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += x[j];
    return s;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = std::abs(x[j]);
        if (a > m || std::isnan(a)) m = a;
    }
    return m;
}

void scale_scalar(double* x, double alpha, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) x[j] *= alpha;
}

void mul_scalar(double* x, const double* y, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) x[j] *= y[j];
}

void add_scalar(double* acc, const double* x, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) acc[j] += x[j];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{"scalar",   dot_scalar, sum_scalar, max_abs_scalar,
                                   scale_scalar, mul_scalar, add_scalar, axpy_scalar};
    return table;
}

} // namespace bregproj::kernels
