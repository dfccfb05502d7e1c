#pragma once

#include <cstddef>

#include "csm/hilbert.hpp"
#include "csm/measurement.hpp"

// Meter-mediated (QND) measurement of a system through an ancilla.
//
// The system in modality |u_i> is entangled with a meter so that each
// pointer-basis branch |v_j> carries its own meter state |w_j>:
//
//     |u_i, x_1>  ->  |xi_i> = sum_j <v_j|u_i> |v_j, w_j>
//
// Only the overlaps G(j, j') = <w_j|w_j'> matter for system statistics.
// G = identity is a projective measurement in the pointer basis; G = all ones
// leaves the system untouched. Density matrices returned by this module are
// expressed with the system factor in the pointer basis {|v_j>}.

namespace csm {

/// Hermitian, unit-diagonal, positive-semidefinite matrix of meter overlaps
/// entries(j, j') = <w_j|w_j'>.
class GramMatrix {
  public:
    explicit GramMatrix(Matrix entries, double tolerance = kInputTolerance);

    std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    const Matrix &entries() const noexcept { return entries_; }
    Complex operator()(std::size_t j, std::size_t jp) const {
        return entries_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(jp));
    }

  private:
    Matrix entries_;
};

/// Column j of `states` is the meter state |w_j> in a meter space of
/// dimension dim_meter() (the basis |x_l> is the standard basis).
class MeterStates {
  public:
    explicit MeterStates(Matrix states);

    std::size_t dim_meter() const noexcept { return static_cast<std::size_t>(states_.rows()); }
    std::size_t branches() const noexcept { return static_cast<std::size_t>(states_.cols()); }
    const Matrix &states() const noexcept { return states_; }
    GramMatrix gram() const;

  private:
    Matrix states_;
};

/// System-meter pure state. Amplitude of |v_j, x_l> sits at j * dim_meter + l.
class CompositeState {
  public:
    CompositeState(Vector amplitudes, std::size_t dim_system, std::size_t dim_meter);

    std::size_t dim_system() const noexcept { return dim_system_; }
    std::size_t dim_meter() const noexcept { return dim_meter_; }
    const Vector &amplitudes() const noexcept { return amplitudes_; }
    Complex amplitude(std::size_t j, std::size_t l) const {
        return amplitudes_[static_cast<Eigen::Index>(j * dim_meter_ + l)];
    }

  private:
    Vector amplitudes_;
    std::size_t dim_system_;
    std::size_t dim_meter_;
};

/// Hermitian, PSD, unit-trace matrix.
class DensityMatrix {
  public:
    explicit DensityMatrix(Matrix matrix, double tolerance = kInputTolerance);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const Matrix &matrix() const noexcept { return matrix_; }
    Complex operator()(std::size_t r, std::size_t c) const {
        return matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

  private:
    Matrix matrix_;
};

/// Diagonal 1, every off-diagonal entry `strength` in [0, 1].
GramMatrix gram_uniform(std::size_t n, double strength);
GramMatrix gram_identity(std::size_t n);
GramMatrix gram_ones(std::size_t n);

/// Realizes meter states with the given overlaps: W = diag(sqrt(lambda)) V^dagger
/// over eigenpairs with lambda > 1e-10, sorted by descending eigenvalue, each
/// eigenvector's phase fixed so its largest-magnitude component is real positive.
MeterStates meter_states_from_gram(const GramMatrix &gram);

/// |xi_i> = sum_j <v_j|u_i> |v_j> (x) |w_j>.
CompositeState entangle(const Modality &initial, const Context &pointer, const MeterStates &meters);

/// Probability of finding u_k after the meter interaction, from the overlaps:
/// sum_{j,j'} <u_i|v_j><v_j|u_k> <w_j|w_j'> <u_k|v_j'><v_j'|u_i>.
double meter_return_probability(const Modality &initial, const Context &pointer, const GramMatrix &gram,
                                std::size_t final_index);

/// <xi| P_target (x) 1_meter |xi> evaluated on an explicit composite state
/// whose system factor is written in the `pointer` basis.
double composite_probability(const CompositeState &state, const Context &pointer, const Modality &target);

/// sum_j |c_j|^2 |v_j><v_j| (x) |w_j><w_j|, c_j = <v_j|u_i>. Needs orthogonal meters.
DensityMatrix post_measurement_state(const Modality &initial, const Context &pointer, const MeterStates &meters);

/// Partial trace over the meter of |xi><xi|.
DensityMatrix reduced_system_state(const CompositeState &state);

/// Reduced state from overlaps alone: rho(j, j') = c_j conj(c_j') <w_j'|w_j>.
DensityMatrix reduced_system_state(const Modality &initial, const Context &pointer, const GramMatrix &gram);

/// Reduced state after `m_count` identical meters have each recorded the
/// branch: off-diagonals scale as <w_j'|w_j>^m_count.
DensityMatrix meter_chain_reduced_state(const Modality &initial, const Context &pointer, const GramMatrix &gram,
                                        std::size_t m_count);

/// Zero every entry coupling different pointer-basis branches of a matrix over
/// the composite space (dim_system blocks of size dim_meter).
Matrix dephase_branches(const Matrix &composite, std::size_t dim_system, std::size_t dim_meter);

/// -Tr(rho log rho) in nats.
double von_neumann_entropy(const DensityMatrix &rho);

}  // namespace csm
