#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csm/hilbert.hpp"
#include "csm/measurement.hpp"
#include "csm/qnd.hpp"

namespace csm {

/// Transition probabilities at or below this are treated as exact zeros.
inline constexpr double kNegligibleProbability = 1e-24;

/// Largest number of paths the exhaustive enumerator will visit.
inline constexpr std::size_t kMaxEnumeratedPaths = 100000;

/// Measurements in contexts C(t_0), ..., C(t_L-1), starting from a known
/// modality of C(t_0).
class Protocol {
  public:
    Protocol(std::vector<Context> contexts, std::size_t initial_index);

    const std::vector<Context> &contexts() const noexcept { return contexts_; }
    std::size_t length() const noexcept { return contexts_.size(); }
    std::size_t steps() const noexcept { return contexts_.size() - 1; }
    std::size_t dim() const noexcept { return contexts_.front().dim(); }
    std::size_t initial_index() const noexcept { return initial_index_; }
    Modality initial() const { return Modality(contexts_.front(), initial_index_); }

    /// p(C(t_k+1) outcome | C(t_k) outcome), entries(next, prev).
    const TransitionMatrix &forward_step(std::size_t k) const { return forward_.at(k); }
    /// p(C(t_k) outcome | C(t_k+1) outcome), entries(prev, next). Computed
    /// independently of forward_step.
    const TransitionMatrix &backward_step(std::size_t k) const { return backward_.at(k); }

    /// Outcome distribution of the last measurement when nothing is read.
    const ProbabilityDistribution &final_marginal() const noexcept { return final_marginal_; }

  private:
    std::vector<Context> contexts_;
    std::size_t initial_index_;
    std::vector<TransitionMatrix> forward_;
    std::vector<TransitionMatrix> backward_;
    ProbabilityDistribution final_marginal_ = ProbabilityDistribution::uniform(1);
};

struct Trajectory {
    std::vector<std::size_t> outcomes;
    double forward_log_prob = 0.0;
    double entropy_production = 0.0;  // nats

    friend bool operator==(const Trajectory &, const Trajectory &) = default;
};

struct TrajectoryEnsembleStats {
    std::size_t sample_count = 0;
    double mean_entropy_production = 0.0;
    double std_error = 0.0;
    /// Exact unread-outcome marginal of the last measurement.
    ProbabilityDistribution final_distribution = ProbabilityDistribution::uniform(1);
    double shannon_entropy_final = 0.0;
    /// Empirical frequencies of the last outcome over the sample.
    RealVector final_frequencies;
};

struct PathProbability {
    std::vector<std::size_t> outcomes;
    double probability = 0.0;
};

struct ExactEnsembleStats {
    std::size_t path_count = 0;  // paths with non-zero probability
    double total_probability = 0.0;
    double mean_entropy_production = 0.0;
    ProbabilityDistribution final_distribution = ProbabilityDistribution::uniform(1);
    double shannon_entropy_final = 0.0;
};

/// log P[gamma] = sum_k log p(o_k+1 | o_k); -infinity for a forbidden path.
double forward_log_prob(const Protocol &protocol, std::span<const std::size_t> outcomes);

/// log p~(o_last) + sum over the time-reversed steps of log p(o_k | o_k+1).
double backward_log_prob(const Protocol &protocol, std::span<const std::size_t> outcomes,
                         const ProbabilityDistribution &final_dist);

/// log(P[gamma] / P~[gamma~]). Throws InternalConsistency when both path
/// probabilities vanish.
double entropy_production(const Protocol &protocol, std::span<const std::size_t> outcomes,
                          const ProbabilityDistribution &final_dist);

/// The same quantity after the conditional factors cancel: -log p~(o_last).
double telescoped_entropy_production(const Protocol &protocol, std::span<const std::size_t> outcomes,
                                     const ProbabilityDistribution &final_dist);

Trajectory sample_trajectory(const Protocol &protocol, std::uint64_t seed);
Trajectory sample_trajectory(const Protocol &protocol, std::uint64_t seed, const ProbabilityDistribution &final_dist);

/// Monte Carlo average of the entropy production with p~ = the final
/// marginal. Trajectory i is drawn from substream derive_seed(seed, i), so the
/// result does not depend on `workers`.
TrajectoryEnsembleStats mean_entropy_production(const Protocol &protocol, std::size_t n_samples, std::uint64_t seed,
                                                std::size_t workers = 1);

/// Every outcome sequence with its forward probability (forbidden ones included).
std::vector<PathProbability> enumerate_paths(const Protocol &protocol);

/// Exact expectation of the entropy production over all paths.
ExactEnsembleStats exact_entropy_production(const Protocol &protocol,
                                            const std::optional<ProbabilityDistribution> &final_dist = std::nullopt);

/// -sum p log p in nats, with 0 log 0 = 0.
double shannon_entropy(const ProbabilityDistribution &dist);

/// Irreversibility of a meter measurement: the Von Neumann entropy of the
/// reduced system state. log 2 for a balanced qubit with orthogonal meters,
/// 0 with indistinguishable meters.
double meter_protocol_entropy(const Modality &initial, const Context &pointer, const GramMatrix &gram);

}  // namespace csm
