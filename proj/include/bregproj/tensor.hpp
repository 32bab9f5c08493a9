#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bregproj/common.hpp"

namespace bregproj {

/// Shape of a dense row-major tensor with precomputed strides.
class TensorShape {
public:
    TensorShape() = default;
    explicit TensorShape(std::vector<std::size_t> extents);

    [[nodiscard]] std::size_t order() const noexcept { return extents_.size(); }
    [[nodiscard]] std::size_t extent(std::size_t axis) const { return extents_.at(axis); }
    [[nodiscard]] std::size_t stride(std::size_t axis) const { return strides_.at(axis); }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] const std::vector<std::size_t>& extents() const noexcept { return extents_; }

    // Number of contiguous blocks before / after the axis.
    [[nodiscard]] std::size_t outer(std::size_t axis) const;
    [[nodiscard]] std::size_t inner(std::size_t axis) const { return strides_.at(axis); }

    bool operator==(const TensorShape&) const = default;

private:
    std::vector<std::size_t> extents_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// Nonnegative dense tensor (a coupling or a Gibbs kernel).
class CouplingTensor {
public:
    CouplingTensor() = default;
    CouplingTensor(TensorShape shape, Vector values);

    [[nodiscard]] const TensorShape& shape() const noexcept { return shape_; }
    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] Vector& values() noexcept { return values_; }
    [[nodiscard]] double total_mass() const;

private:
    TensorShape shape_;
    Vector values_;
};

/// Entry h is the sum of all entries with the given axis fixed at h.
Vector marginal(std::span<const double> values, const TensorShape& shape, std::size_t axis);
Vector marginal(const CouplingTensor& pi, std::size_t axis);

/// Multiplies every slice {axis = h} by factors[h].
void scale_slices(std::span<double> values, const TensorShape& shape, std::size_t axis,
                  std::span<const double> factors);

/// Dense matrix of the marginal push-forward operator (extent x size).
Matrix marginal_operator(const TensorShape& shape, std::size_t axis);

/// KL projection onto {pi : marginal(pi, axis) = target}: rescales each
/// slice by target_h / marginal_h. Throws DomainError when a slice has zero
/// mass but positive target.
CouplingTensor kl_project_marginal(const CouplingTensor& pi, std::size_t axis, const Vector& target);
Vector kl_project_marginal(std::span<const double> values, const TensorShape& shape, std::size_t axis,
                           const Vector& target);

/// Gibbs kernel exp(-cost / eta). Rejects eta <= 0 and cost / eta > 700.
CouplingTensor gibbs_kernel(const TensorShape& shape, const Vector& cost, double eta);

} // namespace bregproj
