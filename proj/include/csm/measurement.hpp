#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csm/hilbert.hpp"

namespace csm {

/// Outcome weights over the N modalities of one context.
class ProbabilityDistribution {
  public:
    /// Validates: each weight in [0, 1] and total 1, both within `tolerance`.
    /// Weights within tolerance of the boundary are clamped onto it.
    explicit ProbabilityDistribution(RealVector weights, double tolerance = kInputTolerance);

    static ProbabilityDistribution point_mass(std::size_t dim, std::size_t index);
    static ProbabilityDistribution uniform(std::size_t dim);

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
    const RealVector &weights() const noexcept { return weights_; }
    double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

  private:
    RealVector weights_;
};

/// entries(j, i) = p(v_j | u_i) for a change from context {u} to {v}.
/// Doubly stochastic.
struct TransitionMatrix {
    RealMatrix entries;
};

/// entries(j, i) = <v_j|u_i>.
struct TransitionAmplitudes {
    Matrix entries;
};

/// Clamps a computed probability onto [0, 1] when it is within `tolerance` of
/// the interval; anything further out is a bug and raises InternalConsistency.
double checked_probability(double value, double tolerance = kInputTolerance);

/// Born rule, Tr(P_a P_b) = |<a|b>|^2. Exactly symmetric in its arguments.
double born_probability(const Modality &a, const Modality &b);

TransitionAmplitudes transition_amplitudes(const Context &from, const Context &to);
TransitionMatrix transition_matrix(const Context &from, const Context &to);

/// p(v_j) = sum_i p(v_j|u_i) p(u_i).
ProbabilityDistribution propagate(const ProbabilityDistribution &dist, const TransitionMatrix &transition);

/// Return probability to u_k after the intermediate outcome was realized:
/// sum_j |<u_k|v_j>|^2 |<v_j|u_i>|^2.
double irreversible_return(const Modality &initial, const Context &intermediate, std::size_t final_index);

/// Return probability when no intermediate outcome is realized, from the
/// amplitude chain |sum_j <u_k|v_j><v_j|u_i>|^2. Equals delta_ki by closure.
double reversible_return(const Modality &initial, const Context &intermediate, std::size_t final_index);

/// Amplitude chain with a phase exp(i phi_j) on each intermediate path.
double interference_return(const Modality &initial, const Context &intermediate, std::span<const double> phases,
                           std::size_t final_index);

/// Full return tables indexed (k, i) over all initial and final modalities of `context`.
RealMatrix irreversible_return_matrix(const Context &context, const Context &intermediate);
RealMatrix reversible_return_matrix(const Context &context, const Context &intermediate);

}  // namespace csm
