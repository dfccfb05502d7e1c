#include "csm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>

#include "csm/error.hpp"
#include "csm/rng.hpp"

namespace csm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > kNegligibleProbability ? std::log(p) : kNegInf; }

double entry(const TransitionMatrix &t, std::size_t row, std::size_t col) {
    return t.entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
}

void check_outcomes(const Protocol &protocol, std::span<const std::size_t> outcomes) {
    if (outcomes.size() != protocol.length()) {
        throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(protocol.length()) +
                                                   " outcomes, got " + std::to_string(outcomes.size()));
    }
    if (outcomes.front() != protocol.initial_index()) {
        throw Error(ErrorCode::InitialMismatch, "first outcome " + std::to_string(outcomes.front()) +
                                                    " differs from initial modality " +
                                                    std::to_string(protocol.initial_index()));
    }
    for (std::size_t o : outcomes) {
        if (o >= protocol.dim()) {
            throw Error(ErrorCode::IndexOutOfRange, "outcome " + std::to_string(o) + " out of range");
        }
    }
}

void check_final_dist(const Protocol &protocol, const ProbabilityDistribution &final_dist) {
    if (final_dist.size() != protocol.dim()) {
        throw Error(ErrorCode::LengthMismatch, "final distribution has " + std::to_string(final_dist.size()) +
                                                   " entries, protocol dimension is " +
                                                   std::to_string(protocol.dim()));
    }
}

// Inverse CDF over the outcomes of one conditional column; lowest index wins ties.
std::size_t draw(const TransitionMatrix &step, std::size_t from, Engine &engine) {
    const auto n = static_cast<std::size_t>(step.entries.rows());
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = entry(step, j, from);
        if (p > kNegligibleProbability) total += p;
    }
    const double target = uniform01(engine) * total;
    double cumulative = 0.0;
    std::size_t last_allowed = n;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = entry(step, j, from);
        if (p <= kNegligibleProbability) continue;
        cumulative += p;
        last_allowed = j;
        if (target < cumulative) return j;
    }
    if (last_allowed == n) {
        throw Error(ErrorCode::InternalConsistency, "conditional distribution has no support");
    }
    return last_allowed;
}

// Neumaier summation.
double compensated_sum(const std::vector<double> &values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double x : values) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

}  // namespace

Protocol::Protocol(std::vector<Context> contexts, std::size_t initial_index)
    : contexts_(std::move(contexts)), initial_index_(initial_index) {
    if (contexts_.empty()) {
        throw Error(ErrorCode::LengthMismatch, "protocol needs at least one context");
    }
    const std::size_t n = contexts_.front().dim();
    for (const Context &c : contexts_) {
        if (c.dim() != n) {
            throw Error(ErrorCode::DimensionMismatch, "protocol context '" + c.id() + "' has a different dimension");
        }
    }
    if (initial_index_ >= n) {
        throw Error(ErrorCode::IndexOutOfRange, "initial modality index " + std::to_string(initial_index_) +
                                                    " out of range");
    }
    ProbabilityDistribution marginal = ProbabilityDistribution::point_mass(n, initial_index_);
    for (std::size_t k = 0; k + 1 < contexts_.size(); ++k) {
        forward_.push_back(transition_matrix(contexts_[k], contexts_[k + 1]));
        backward_.push_back(transition_matrix(contexts_[k + 1], contexts_[k]));
        marginal = propagate(marginal, forward_.back());
    }
    final_marginal_ = std::move(marginal);
}

double forward_log_prob(const Protocol &protocol, std::span<const std::size_t> outcomes) {
    check_outcomes(protocol, outcomes);
    double total = 0.0;
    for (std::size_t k = 0; k < protocol.steps(); ++k) {
        total += safe_log(entry(protocol.forward_step(k), outcomes[k + 1], outcomes[k]));
    }
    return total;
}

double backward_log_prob(const Protocol &protocol, std::span<const std::size_t> outcomes,
                         const ProbabilityDistribution &final_dist) {
    check_outcomes(protocol, outcomes);
    check_final_dist(protocol, final_dist);
    double total = safe_log(final_dist[outcomes.back()]);
    for (std::size_t k = protocol.steps(); k-- > 0;) {
        total += safe_log(entry(protocol.backward_step(k), outcomes[k], outcomes[k + 1]));
    }
    return total;
}

double entropy_production(const Protocol &protocol, std::span<const std::size_t> outcomes,
                          const ProbabilityDistribution &final_dist) {
    const double forward = forward_log_prob(protocol, outcomes);
    const double backward = backward_log_prob(protocol, outcomes, final_dist);
    if (forward == kNegInf && backward == kNegInf) {
        throw Error(ErrorCode::InternalConsistency, "entropy production undefined on a path of zero probability");
    }
    return forward - backward;
}

double telescoped_entropy_production(const Protocol &protocol, std::span<const std::size_t> outcomes,
                                     const ProbabilityDistribution &final_dist) {
    check_outcomes(protocol, outcomes);
    check_final_dist(protocol, final_dist);
    return -safe_log(final_dist[outcomes.back()]);
}

Trajectory sample_trajectory(const Protocol &protocol, std::uint64_t seed) {
    return sample_trajectory(protocol, seed, protocol.final_marginal());
}

Trajectory sample_trajectory(const Protocol &protocol, std::uint64_t seed, const ProbabilityDistribution &final_dist) {
    Engine engine(seed);
    Trajectory trajectory;
    trajectory.outcomes.reserve(protocol.length());
    trajectory.outcomes.push_back(protocol.initial_index());
    for (std::size_t k = 0; k < protocol.steps(); ++k) {
        trajectory.outcomes.push_back(draw(protocol.forward_step(k), trajectory.outcomes.back(), engine));
    }
    trajectory.forward_log_prob = forward_log_prob(protocol, trajectory.outcomes);
    trajectory.entropy_production = entropy_production(protocol, trajectory.outcomes, final_dist);
    return trajectory;
}

TrajectoryEnsembleStats mean_entropy_production(const Protocol &protocol, std::size_t n_samples, std::uint64_t seed,
                                                std::size_t workers) {
    if (n_samples == 0) {
        throw Error(ErrorCode::LengthMismatch, "need at least one trajectory");
    }
    std::vector<double> production(n_samples);
    std::vector<std::size_t> last(n_samples);
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Trajectory t = sample_trajectory(protocol, derive_seed(seed, i));
            production[i] = t.entropy_production;
            last[i] = t.outcomes.back();
        }
    };

    workers = std::clamp<std::size_t>(workers, 1, n_samples);
    if (workers == 1) {
        run_range(0, n_samples);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_samples + workers - 1) / workers;
        for (std::size_t begin = 0; begin < n_samples; begin += chunk) {
            pool.emplace_back(run_range, begin, std::min(begin + chunk, n_samples));
        }
        for (auto &t : pool) t.join();
    }

    const double mean = compensated_sum(production) / static_cast<double>(n_samples);
    std::vector<double> deviations(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) deviations[i] = (production[i] - mean) * (production[i] - mean);
    const double squares = compensated_sum(deviations);

    TrajectoryEnsembleStats stats;
    stats.sample_count = n_samples;
    stats.mean_entropy_production = mean;
    stats.std_error =
        n_samples > 1 ? std::sqrt(squares / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples)) : 0.0;
    stats.final_distribution = protocol.final_marginal();
    stats.shannon_entropy_final = shannon_entropy(stats.final_distribution);
    stats.final_frequencies = RealVector::Zero(static_cast<Eigen::Index>(protocol.dim()));
    for (std::size_t o : last) stats.final_frequencies[static_cast<Eigen::Index>(o)] += 1.0;
    stats.final_frequencies /= static_cast<double>(n_samples);
    return stats;
}

std::vector<PathProbability> enumerate_paths(const Protocol &protocol) {
    const std::size_t n = protocol.dim();
    std::size_t count = 1;
    for (std::size_t k = 0; k < protocol.steps(); ++k) {
        if (count > kMaxEnumeratedPaths / n) {
            throw Error(ErrorCode::LengthMismatch, "too many paths to enumerate (limit " +
                                                       std::to_string(kMaxEnumeratedPaths) + ")");
        }
        count *= n;
    }

    std::vector<PathProbability> paths;
    paths.reserve(count);
    std::vector<std::size_t> outcomes(protocol.length(), 0);
    outcomes[0] = protocol.initial_index();
    for (std::size_t index = 0; index < count; ++index) {
        // Mixed-radix digits of `index` give outcomes 1..L-1, last step fastest.
        std::size_t rest = index;
        for (std::size_t k = protocol.length(); k-- > 1;) {
            outcomes[k] = rest % n;
            rest /= n;
        }
        double probability = 1.0;
        for (std::size_t k = 0; k < protocol.steps(); ++k) {
            probability *= entry(protocol.forward_step(k), outcomes[k + 1], outcomes[k]);
        }
        paths.push_back({outcomes, probability});
    }
    return paths;
}

ExactEnsembleStats exact_entropy_production(const Protocol &protocol,
                                            const std::optional<ProbabilityDistribution> &final_dist) {
    const ProbabilityDistribution &p_tilde = final_dist ? *final_dist : protocol.final_marginal();
    check_final_dist(protocol, p_tilde);
    ExactEnsembleStats stats;
    RealVector marginal = RealVector::Zero(static_cast<Eigen::Index>(protocol.dim()));
    for (const PathProbability &path : enumerate_paths(protocol)) {
        if (path.probability <= kNegligibleProbability) continue;
        ++stats.path_count;
        stats.total_probability += path.probability;
        stats.mean_entropy_production += path.probability * entropy_production(protocol, path.outcomes, p_tilde);
        marginal[static_cast<Eigen::Index>(path.outcomes.back())] += path.probability;
    }
    stats.final_distribution = ProbabilityDistribution(std::move(marginal));
    stats.shannon_entropy_final = shannon_entropy(stats.final_distribution);
    return stats;
}

double shannon_entropy(const ProbabilityDistribution &dist) {
    double entropy = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const double p = dist[i];
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return std::max(entropy, 0.0);
}

double meter_protocol_entropy(const Modality &initial, const Context &pointer, const GramMatrix &gram) {
    return von_neumann_entropy(reduced_system_state(initial, pointer, gram));
}

}  // namespace csm
