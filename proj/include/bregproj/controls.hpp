#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "bregproj/common.hpp"

namespace bregproj {

enum class ControlKind { cyclic, greedy, random, adaptive };

std::string_view to_string(ControlKind kind);
ControlKind control_kind_from_string(std::string_view name);

/// Seeded 64-bit generator with independent streams: stream s of seed k is
/// seeded from the pair (k, s), so trial i of a batch is reproducible no
/// matter which worker runs it.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double normal();
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_;
};

/// Policy producing the set index xi_k at every step.
struct ControlScheme {
    ControlKind kind = ControlKind::cyclic;
    std::vector<double> mu; // sampling weights over the m sets (random / adaptive)
    std::uint64_t seed = 0;

    static ControlScheme cyclic();
    static ControlScheme greedy();
    static ControlScheme random(std::vector<double> mu, std::uint64_t seed);
    static ControlScheme adaptive(std::vector<double> mu, std::uint64_t seed);
    static ControlScheme uniform(ControlKind kind, std::size_t m, std::uint64_t seed);

    [[nodiscard]] bool needs_distances() const noexcept {
        return kind == ControlKind::greedy || kind == ControlKind::adaptive;
    }

    /// Checks mu against a family of m sets (random / adaptive only).
    void validate(std::size_t m) const;
};

/// Mutable per-run state of a control scheme. Indices are 0-based.
class Controller {
public:
    Controller(ControlScheme scheme, std::size_t m, std::uint64_t stream = 0);

    /// Returns xi_k and advances k. Greedy and adaptive controls require the
    /// distances D_{C_i}(x_k) of the current iterate to every set.
    std::size_t next_index(std::optional<std::span<const double>> distances = std::nullopt);

    [[nodiscard]] std::uint64_t step() const noexcept { return step_; }
    [[nodiscard]] const ControlScheme& scheme() const noexcept { return scheme_; }

private:
    ControlScheme scheme_;
    std::size_t m_;
    std::uint64_t step_ = 0;
    Rng rng_;
};

/// Inverse-CDF sample from unnormalized nonnegative weights. Entries with
/// weight zero are never returned.
std::size_t sample_categorical(std::span<const double> weights, double u);

/// Smallest index attaining the maximum.
std::size_t greedy_index(std::span<const double> distances);

/// p_i = mu_i d_i / sum_j mu_j d_j, or mu when every weighted distance is 0.
std::vector<double> adaptive_probabilities(std::span<const double> mu, std::span<const double> distances);

/// 1 + Var_mu[d_xi / E_mu d]; 1 when every weighted distance is 0.
double beta_factor(std::span<const double> mu, std::span<const double> distances);

} // namespace bregproj
