#include "bregproj/tensor.hpp"

#include <cmath>
#include <string>

#include "bregproj/kernels.hpp"

namespace bregproj {

TensorShape::TensorShape(std::vector<std::size_t> extents) : extents_(std::move(extents)) {
    if (extents_.empty()) throw InvalidArgument("tensor shape must have at least one axis");
    strides_.assign(extents_.size(), 1);
    size_ = 1;
    for (std::size_t a = extents_.size(); a-- > 0;) {
        if (extents_[a] == 0) throw InvalidArgument("tensor extents must be positive");
        strides_[a] = size_;
        size_ *= extents_[a];
    }
}

std::size_t TensorShape::outer(std::size_t axis) const { return size_ / (extents_.at(axis) * strides_.at(axis)); }

CouplingTensor::CouplingTensor(TensorShape shape, Vector values) : shape_(std::move(shape)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != shape_.size()) {
        throw InvalidArgument("tensor data size does not match its shape");
    }
}

double CouplingTensor::total_mass() const { return kernels::sum({values_.data(), static_cast<std::size_t>(values_.size())}); }

Vector marginal(std::span<const double> values, const TensorShape& shape, std::size_t axis) {
    if (axis >= shape.order()) throw InvalidArgument("marginal axis out of range");
    if (values.size() != shape.size()) throw InvalidArgument("tensor data size does not match its shape");
    const std::size_t n = shape.extent(axis);
    const std::size_t inner = shape.inner(axis);
    const std::size_t outer = shape.outer(axis);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(n));
    if (inner == 1) {
        // Last axis: accumulate contiguous rows.
        for (std::size_t o = 0; o < outer; ++o) kernels::add({out.data(), n}, values.subspan(o * n, n));
        return out;
    }
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t h = 0; h < n; ++h) {
            out[static_cast<Eigen::Index>(h)] += kernels::sum(values.subspan((o * n + h) * inner, inner));
        }
    }
    return out;
}

Vector marginal(const CouplingTensor& pi, std::size_t axis) {
    return marginal({pi.values().data(), static_cast<std::size_t>(pi.values().size())}, pi.shape(), axis);
}

void scale_slices(std::span<double> values, const TensorShape& shape, std::size_t axis,
                  std::span<const double> factors) {
    const std::size_t n = shape.extent(axis);
    if (factors.size() != n) throw InvalidArgument("slice scaling factors do not match the axis extent");
    const std::size_t inner = shape.inner(axis);
    const std::size_t outer = shape.outer(axis);
    if (inner == 1) {
        for (std::size_t o = 0; o < outer; ++o) kernels::mul(values.subspan(o * n, n), factors);
        return;
    }
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t h = 0; h < n; ++h) kernels::scale(values.subspan((o * n + h) * inner, inner), factors[h]);
    }
}

Matrix marginal_operator(const TensorShape& shape, std::size_t axis) {
    const std::size_t n = shape.extent(axis);
    Matrix A = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(shape.size()));
    const std::size_t inner = shape.inner(axis);
    for (std::size_t idx = 0; idx < shape.size(); ++idx) {
        const std::size_t h = (idx / inner) % n;
        A(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(idx)) = 1.0;
    }
    return A;
}

Vector kl_project_marginal(std::span<const double> values, const TensorShape& shape, std::size_t axis,
                           const Vector& target) {
    const Vector current = marginal(values, shape, axis);
    if (target.size() != current.size()) throw InvalidArgument("marginal target has the wrong length");
    Vector factors(current.size());
    for (Eigen::Index h = 0; h < current.size(); ++h) {
        if (target[h] == 0.0) {
            factors[h] = 0.0;
        } else if (current[h] > 0.0) {
            factors[h] = target[h] / current[h];
        } else {
            throw DomainError("marginal slice " + std::to_string(h) + " on axis " + std::to_string(axis) +
                              " has zero mass but a positive target");
        }
    }
    Vector out = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    scale_slices({out.data(), values.size()}, shape, axis, {factors.data(), static_cast<std::size_t>(factors.size())});
    return out;
}

CouplingTensor kl_project_marginal(const CouplingTensor& pi, std::size_t axis, const Vector& target) {
    return {pi.shape(), kl_project_marginal({pi.values().data(), static_cast<std::size_t>(pi.values().size())},
                                            pi.shape(), axis, target)};
}

CouplingTensor gibbs_kernel(const TensorShape& shape, const Vector& cost, double eta) {
    if (!(eta > 0.0)) throw InvalidArgument("entropic regularization eta must be positive");
    if (static_cast<std::size_t>(cost.size()) != shape.size()) throw InvalidArgument("cost size does not match shape");
    Vector kappa(cost.size());
    for (Eigen::Index j = 0; j < cost.size(); ++j) {
        const double r = cost[j] / eta;
        if (!(r <= 700.0)) {
            throw InvalidArgument("cost/eta = " + std::to_string(r) +
                                  " exceeds 700 and the Gibbs kernel underflows; increase eta");
        }
        kappa[j] = std::exp(-r);
    }
    return {shape, std::move(kappa)};
}

} // namespace bregproj
