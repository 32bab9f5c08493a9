#include "bregproj/sketch.hpp"

#include <algorithm>
#include <charconv>

#include "bregproj/controls.hpp"

namespace bregproj {
namespace {

void require_system(const Matrix& A, const Vector& b) {
    if (A.rows() == 0 || A.cols() == 0) throw InvalidArgument("sketch: base matrix is empty");
    if (A.rows() != b.size()) throw InvalidArgument("sketch: A and b have inconsistent sizes");
}

int parse_int(std::string_view s, const std::string& spec) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1) {
        throw InvalidArgument("malformed sketch specification '" + spec + "'");
    }
    return v;
}

} // namespace

SketchFamily::SketchFamily(SketchKind kind, Matrix A, Vector b, std::vector<Matrix> sketches)
    : kind_(kind), A_(std::move(A)), b_(std::move(b)), sketches_(std::move(sketches)) {
    for (std::size_t i = 0; i < sketches_.size(); ++i) {
        if ((sketches_[i].transpose() * A_).cwiseAbs().maxCoeff() == 0.0) {
            throw InvalidArgument("sketch " + std::to_string(i) + " annihilates A");
        }
    }
}

SketchFamily SketchFamily::rows(Matrix A, Vector b) {
    require_system(A, b);
    std::vector<Matrix> s;
    for (Eigen::Index i = 0; i < A.rows(); ++i) s.emplace_back(Matrix::Identity(A.rows(), A.rows()).col(i));
    return {SketchKind::rows, std::move(A), std::move(b), std::move(s)};
}

SketchFamily SketchFamily::row_blocks(Matrix A, Vector b, int tau) {
    require_system(A, b);
    if (tau < 1) throw InvalidArgument("sketch block size must be positive");
    const Eigen::Index m = A.rows();
    std::vector<Matrix> s;
    for (Eigen::Index start = 0; start < m; start += tau) {
        const Eigen::Index width = std::min<Eigen::Index>(tau, m - start);
        s.emplace_back(Matrix::Identity(m, m).middleCols(start, width));
    }
    return {SketchKind::row_blocks, std::move(A), std::move(b), std::move(s)};
}

SketchFamily SketchFamily::gaussian(Matrix A, Vector b, int count, int tau, std::uint64_t seed) {
    require_system(A, b);
    if (count < 1 || tau < 1) throw InvalidArgument("gaussian sketch count and width must be positive");
    Rng rng(seed);
    std::vector<Matrix> s;
    for (int i = 0; i < count; ++i) {
        Matrix S(A.rows(), tau);
        for (Eigen::Index c = 0; c < S.cols(); ++c) {
            for (Eigen::Index r = 0; r < S.rows(); ++r) S(r, c) = rng.normal();
        }
        s.push_back(std::move(S));
    }
    return {SketchKind::gaussian, std::move(A), std::move(b), std::move(s)};
}

SketchFamily SketchFamily::from_spec(const std::string& spec, Matrix A, Vector b, std::uint64_t seed) {
    if (spec == "rows") return rows(std::move(A), std::move(b));
    const std::string_view sv(spec);
    if (sv.starts_with("blocks:")) return row_blocks(std::move(A), std::move(b), parse_int(sv.substr(7), spec));
    if (sv.starts_with("gaussian:")) {
        const auto body = sv.substr(9);
        const auto comma = body.find(',');
        if (comma == std::string_view::npos) throw InvalidArgument("malformed sketch specification '" + spec + "'");
        return gaussian(std::move(A), std::move(b), parse_int(body.substr(0, comma), spec),
                        parse_int(body.substr(comma + 1), spec), seed);
    }
    throw InvalidArgument("unknown sketch specification '" + spec + "'");
}

std::vector<ConstraintSet> SketchFamily::build_sets() const {
    std::vector<ConstraintSet> sets;
    sets.reserve(sketches_.size());
    int label = 0;
    for (const auto& S : sketches_) {
        const Matrix SA = S.transpose() * A_;
        const Vector Sb = S.transpose() * b_;
        if (SA.rows() == 1) sets.emplace_back(Hyperplane{SA.row(0).transpose(), Sb[0]}, label++);
        else sets.emplace_back(GeneralAffine{SA, Sb}, label++);
    }
    return sets;
}

} // namespace bregproj
