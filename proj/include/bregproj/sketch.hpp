#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bregproj/geometry.hpp"

namespace bregproj {

enum class SketchKind { rows, row_blocks, gaussian };

/// A finite family of sketches S_i (m x tau) of a base system A x = b.
/// Gaussian sketches are drawn once at construction.
class SketchFamily {
public:
    static SketchFamily rows(Matrix A, Vector b);
    /// Consecutive blocks of `tau` rows; the last block may be shorter.
    static SketchFamily row_blocks(Matrix A, Vector b, int tau);
    static SketchFamily gaussian(Matrix A, Vector b, int count, int tau, std::uint64_t seed);

    /// Parses "rows", "blocks:<tau>" or "gaussian:<count>,<tau>".
    static SketchFamily from_spec(const std::string& spec, Matrix A, Vector b, std::uint64_t seed = 0);

    [[nodiscard]] SketchKind kind() const noexcept { return kind_; }
    [[nodiscard]] const Matrix& A() const noexcept { return A_; }
    [[nodiscard]] const Vector& b() const noexcept { return b_; }
    [[nodiscard]] const std::vector<Matrix>& sketches() const noexcept { return sketches_; }
    [[nodiscard]] std::size_t size() const noexcept { return sketches_.size(); }

    /// C_i = {x : S_i^T A x = S_i^T b}; hyperplanes for single-column sketches.
    [[nodiscard]] std::vector<ConstraintSet> build_sets() const;

private:
    SketchFamily(SketchKind kind, Matrix A, Vector b, std::vector<Matrix> sketches);

    SketchKind kind_;
    Matrix A_;
    Vector b_;
    std::vector<Matrix> sketches_;
};

} // namespace bregproj
