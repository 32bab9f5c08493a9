#include "bregproj/controls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bregproj {
namespace {

void require_nonnegative(std::span<const double> d) {
    for (double v : d) {
        if (!(v >= 0.0)) throw InvalidArgument("set distances must be nonnegative");
    }
}

void require_same_length(std::span<const double> mu, std::span<const double> d) {
    if (mu.size() != d.size()) throw InvalidArgument("mu and distances have different lengths");
}

} // namespace

std::string_view to_string(ControlKind kind) {
    switch (kind) {
    case ControlKind::cyclic: return "cyclic";
    case ControlKind::greedy: return "greedy";
    case ControlKind::random: return "random";
    case ControlKind::adaptive: return "adaptive";
    }
    return "unknown";
}

ControlKind control_kind_from_string(std::string_view name) {
    for (auto k : {ControlKind::cyclic, ControlKind::greedy, ControlKind::random, ControlKind::adaptive}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgument("unknown control '" + std::string(name) + "'");
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() { return gauss_(engine_); }

ControlScheme ControlScheme::cyclic() { return {ControlKind::cyclic, {}, 0}; }
ControlScheme ControlScheme::greedy() { return {ControlKind::greedy, {}, 0}; }
ControlScheme ControlScheme::random(std::vector<double> mu, std::uint64_t seed) {
    return {ControlKind::random, std::move(mu), seed};
}
ControlScheme ControlScheme::adaptive(std::vector<double> mu, std::uint64_t seed) {
    return {ControlKind::adaptive, std::move(mu), seed};
}
ControlScheme ControlScheme::uniform(ControlKind kind, std::size_t m, std::uint64_t seed) {
    return {kind, std::vector<double>(m, 1.0 / static_cast<double>(m)), seed};
}

void ControlScheme::validate(std::size_t m) const {
    if (m == 0) throw InvalidArgument("control over an empty family");
    if (kind != ControlKind::random && kind != ControlKind::adaptive) return;
    if (mu.size() != m) {
        throw InvalidArgument("mu has " + std::to_string(mu.size()) + " entries for " + std::to_string(m) + " sets");
    }
    double total = 0.0;
    for (double w : mu) {
        if (!(w >= 0.0)) throw InvalidArgument("mu entries must be nonnegative");
        total += w;
    }
    if (total == 0.0) throw InvalidArgument("mu is identically zero");
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("mu must sum to 1");
}

Controller::Controller(ControlScheme scheme, std::size_t m, std::uint64_t stream)
    : scheme_(std::move(scheme)), m_(m), rng_(scheme_.seed, stream) {
    scheme_.validate(m_);
}

std::size_t Controller::next_index(std::optional<std::span<const double>> distances) {
    if (scheme_.needs_distances()) {
        if (!distances) throw InvalidArgument(std::string(to_string(scheme_.kind)) + " control requires set distances");
        if (distances->size() != m_) throw InvalidArgument("distance vector has the wrong length");
    }
    const std::uint64_t k = step_++;
    switch (scheme_.kind) {
    case ControlKind::cyclic: return static_cast<std::size_t>(k % m_);
    case ControlKind::greedy: return greedy_index(*distances);
    case ControlKind::random: return sample_categorical(scheme_.mu, rng_.uniform());
    case ControlKind::adaptive: {
        const auto p = adaptive_probabilities(scheme_.mu, *distances);
        return sample_categorical(p, rng_.uniform());
    }
    }
    return 0;
}

std::size_t sample_categorical(std::span<const double> weights, double u) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw InvalidArgument("categorical weights are identically zero");
    const double target = u * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last = i;
        if (target < acc) return i;
    }
    return last;
}

std::size_t greedy_index(std::span<const double> distances) {
    if (distances.empty()) throw InvalidArgument("greedy control over an empty family");
    require_nonnegative(distances);
    return static_cast<std::size_t>(std::max_element(distances.begin(), distances.end()) - distances.begin());
}

std::vector<double> adaptive_probabilities(std::span<const double> mu, std::span<const double> distances) {
    require_same_length(mu, distances);
    require_nonnegative(distances);
    double mean = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) mean += mu[i] * distances[i];
    std::vector<double> p(mu.begin(), mu.end());
    if (mean > 0.0) {
        for (std::size_t i = 0; i < mu.size(); ++i) p[i] = mu[i] * distances[i] / mean;
    }
    return p;
}

double beta_factor(std::span<const double> mu, std::span<const double> distances) {
    require_same_length(mu, distances);
    require_nonnegative(distances);
    double mean = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) mean += mu[i] * distances[i];
    if (!(mean > 0.0)) return 1.0;
    double var = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double r = distances[i] / mean - 1.0;
        var += mu[i] * r * r;
    }
    return 1.0 + var;
}

} // namespace bregproj
