#include "csm/qnd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include "csm/error.hpp"

namespace csm {

namespace {

constexpr double kMeterTolerance = 1e-8;
constexpr double kRankCutoff = 1e-10;
constexpr double kEntropyCutoff = 1e-15;

std::string describe(const char *what, double value) {
    std::ostringstream msg;
    msg << what << " (" << value << ")";
    return msg.str();
}

double min_hermitian_eigenvalue(const Matrix &m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void require_system_dims(const Modality &initial, const Context &pointer) {
    if (initial.context().dim() != pointer.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "initial context and pointer context '" + pointer.id() +
                                                      "' differ in dimension");
    }
}

void require_gram_size(const GramMatrix &gram, const Context &pointer) {
    if (gram.size() != pointer.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "Gram matrix is " + std::to_string(gram.size()) +
                                                      "x" + std::to_string(gram.size()) + " but pointer '" +
                                                      pointer.id() + "' has dimension " +
                                                      std::to_string(pointer.dim()));
    }
}

// c_j = <v_j|u_i>
Vector branch_amplitudes(const Modality &initial, const Context &pointer) {
    const Vector u_i = initial.vector();
    const auto n = static_cast<Eigen::Index>(pointer.dim());
    Vector c(n);
    for (Eigen::Index j = 0; j < n; ++j) c[j] = inner(pointer.basis().col(j), u_i);
    return c;
}

Complex integer_power(Complex base, std::size_t exponent) {
    Complex result{1.0, 0.0};
    while (exponent > 0) {
        if (exponent & 1U) result *= base;
        base *= base;
        exponent >>= 1U;
    }
    return result;
}

}  // namespace

GramMatrix::GramMatrix(Matrix entries, double tolerance) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
        throw Error(ErrorCode::InvalidGram, "Gram matrix must be square and non-empty");
    }
    if (!entries_.allFinite()) {
        throw Error(ErrorCode::InvalidGram, "Gram matrix has non-finite entries");
    }
    const double hermitian = max_abs_diff(entries_, entries_.adjoint());
    if (hermitian > tolerance) {
        throw Error(ErrorCode::InvalidGram, describe("Gram matrix is not Hermitian", hermitian));
    }
    const double diagonal =
        (entries_.diagonal() - Vector::Ones(entries_.rows())).cwiseAbs().maxCoeff();
    if (diagonal > tolerance) {
        throw Error(ErrorCode::InvalidGram, describe("Gram matrix diagonal is not 1", diagonal));
    }
    const double lowest = min_hermitian_eigenvalue(entries_);
    if (lowest < -tolerance) {
        throw Error(ErrorCode::NotPositiveSemidefinite, describe("Gram matrix has a negative eigenvalue", lowest));
    }
}

MeterStates::MeterStates(Matrix states) : states_(std::move(states)) {
    if (states_.rows() == 0 || states_.cols() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "meter states must be non-empty");
    }
    for (Eigen::Index j = 0; j < states_.cols(); ++j) {
        const double deviation = std::abs(states_.col(j).norm() - 1.0);
        if (deviation > kMeterTolerance) {
            throw Error(ErrorCode::InvalidGram, describe("meter state is not unit norm", deviation));
        }
    }
}

GramMatrix MeterStates::gram() const { return GramMatrix(states_.adjoint() * states_, kMeterTolerance); }

CompositeState::CompositeState(Vector amplitudes, std::size_t dim_system, std::size_t dim_meter)
    : amplitudes_(std::move(amplitudes)), dim_system_(dim_system), dim_meter_(dim_meter) {
    if (static_cast<std::size_t>(amplitudes_.size()) != dim_system_ * dim_meter_) {
        throw Error(ErrorCode::DimensionMismatch, "composite amplitude vector has the wrong length");
    }
    const double deviation = std::abs(amplitudes_.norm() - 1.0);
    if (deviation > kInputTolerance) {
        throw Error(ErrorCode::InternalConsistency, describe("composite state is not normalized", deviation));
    }
}

DensityMatrix::DensityMatrix(Matrix matrix, double tolerance) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "density matrix must be square and non-empty");
    }
    const double hermitian = max_abs_diff(matrix_, matrix_.adjoint());
    if (hermitian > tolerance) {
        throw Error(ErrorCode::InternalConsistency, describe("density matrix is not Hermitian", hermitian));
    }
    const double trace_error = std::abs(matrix_.trace() - Complex{1.0, 0.0});
    if (trace_error > tolerance) {
        throw Error(ErrorCode::InternalConsistency, describe("density matrix trace is not 1", trace_error));
    }
    const double lowest = min_hermitian_eigenvalue(matrix_);
    if (lowest < -tolerance) {
        throw Error(ErrorCode::InternalConsistency, describe("density matrix is not PSD", lowest));
    }
}

GramMatrix gram_uniform(std::size_t n, double strength) {
    if (!(strength >= 0.0 && strength <= 1.0)) {
        throw Error(ErrorCode::StrengthOutOfRange, describe("uniform overlap must lie in [0, 1]", strength));
    }
    const auto size = static_cast<Eigen::Index>(n);
    Matrix entries = Matrix::Constant(size, size, Complex{strength, 0.0});
    entries.diagonal().setOnes();
    return GramMatrix(std::move(entries), kGeneratedTolerance);
}

GramMatrix gram_identity(std::size_t n) { return gram_uniform(n, 0.0); }

GramMatrix gram_ones(std::size_t n) { return gram_uniform(n, 1.0); }

MeterStates meter_states_from_gram(const GramMatrix &gram) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram.entries());
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::InternalConsistency, "eigendecomposition of Gram matrix failed");
    }
    const RealVector &values = solver.eigenvalues();
    const Matrix &vectors = solver.eigenvectors();
    const auto n = values.size();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

    std::vector<Eigen::Index> kept;
    for (Eigen::Index idx : order) {
        if (values[idx] < -kInputTolerance) {
            throw Error(ErrorCode::NotPositiveSemidefinite, describe("Gram eigenvalue", values[idx]));
        }
        if (values[idx] > kRankCutoff) kept.push_back(idx);
    }

    Matrix states(static_cast<Eigen::Index>(kept.size()), n);
    for (std::size_t m = 0; m < kept.size(); ++m) {
        Vector v = vectors.col(kept[m]);
        Eigen::Index pivot = 0;
        for (Eigen::Index k = 1; k < n; ++k) {
            if (std::abs(v[k]) > std::abs(v[pivot])) pivot = k;
        }
        v *= std::conj(v[pivot]) / std::abs(v[pivot]);
        v[pivot] = std::abs(v[pivot]);
        states.row(static_cast<Eigen::Index>(m)) = std::sqrt(values[kept[m]]) * v.adjoint();
    }

    const double residual = max_abs_diff(states.adjoint() * states, gram.entries());
    if (residual > kMeterTolerance) {
        throw Error(ErrorCode::InternalConsistency, describe("meter realization does not reproduce Gram", residual));
    }
    return MeterStates(std::move(states));
}

CompositeState entangle(const Modality &initial, const Context &pointer, const MeterStates &meters) {
    require_system_dims(initial, pointer);
    if (meters.branches() != pointer.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "need one meter state per pointer modality");
    }
    const Vector c = branch_amplitudes(initial, pointer);
    const std::size_t n = pointer.dim();
    const std::size_t m = meters.dim_meter();
    Vector amplitudes(static_cast<Eigen::Index>(n * m));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < m; ++l) {
            amplitudes[static_cast<Eigen::Index>(j * m + l)] =
                c[static_cast<Eigen::Index>(j)] *
                meters.states()(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j));
        }
    }
    return CompositeState(std::move(amplitudes), n, m);
}

double meter_return_probability(const Modality &initial, const Context &pointer, const GramMatrix &gram,
                                std::size_t final_index) {
    require_system_dims(initial, pointer);
    require_gram_size(gram, pointer);
    const Vector u_k = initial.context().vector(final_index);
    const Vector c = branch_amplitudes(initial, pointer);
    const auto n = c.size();
    // d_j = <u_k|v_j><v_j|u_i>; the probability is d^dagger G d.
    Vector d(n);
    for (Eigen::Index j = 0; j < n; ++j) d[j] = inner(u_k, pointer.basis().col(j)) * c[j];
    const Complex value = (d.adjoint() * gram.entries() * d)(0, 0);
    if (std::abs(value.imag()) > kInputTolerance) {
        throw Error(ErrorCode::InternalConsistency, describe("return probability has imaginary part", value.imag()));
    }
    return checked_probability(value.real());
}

double composite_probability(const CompositeState &state, const Context &pointer, const Modality &target) {
    if (state.dim_system() != pointer.dim() || target.context().dim() != pointer.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "composite state and contexts differ in dimension");
    }
    const Vector u_k = target.vector();
    const std::size_t n = state.dim_system();
    Vector overlaps(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        overlaps[static_cast<Eigen::Index>(j)] = inner(u_k, pointer.basis().col(static_cast<Eigen::Index>(j)));
    }
    double total = 0.0;
    for (std::size_t l = 0; l < state.dim_meter(); ++l) {
        Complex amplitude{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) amplitude += overlaps[static_cast<Eigen::Index>(j)] * state.amplitude(j, l);
        total += std::norm(amplitude);
    }
    return checked_probability(total);
}

DensityMatrix post_measurement_state(const Modality &initial, const Context &pointer, const MeterStates &meters) {
    require_system_dims(initial, pointer);
    if (meters.branches() != pointer.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "need one meter state per pointer modality");
    }
    const auto n = static_cast<Eigen::Index>(pointer.dim());
    const double orthogonality = max_abs_diff(meters.states().adjoint() * meters.states(), Matrix::Identity(n, n));
    if (orthogonality > kMeterTolerance) {
        throw Error(ErrorCode::MeterNotOrthogonal, describe("meter states are not orthonormal", orthogonality));
    }
    const Vector c = branch_amplitudes(initial, pointer);
    const auto m = static_cast<Eigen::Index>(meters.dim_meter());
    Matrix rho = Matrix::Zero(n * m, n * m);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vector w = meters.states().col(j);
        rho.block(j * m, j * m, m, m) = std::norm(c[j]) * (w * w.adjoint());
    }
    return DensityMatrix(std::move(rho));
}

DensityMatrix reduced_system_state(const CompositeState &state) {
    const std::size_t n = state.dim_system();
    const std::size_t m = state.dim_meter();
    const auto size = static_cast<Eigen::Index>(n);
    Matrix rho = Matrix::Zero(size, size);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t jp = 0; jp < n; ++jp) {
            Complex sum{0.0, 0.0};
            for (std::size_t l = 0; l < m; ++l) sum += state.amplitude(j, l) * std::conj(state.amplitude(jp, l));
            rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(jp)) = sum;
        }
    }
    return DensityMatrix(std::move(rho));
}

DensityMatrix reduced_system_state(const Modality &initial, const Context &pointer, const GramMatrix &gram) {
    return meter_chain_reduced_state(initial, pointer, gram, 1);
}

DensityMatrix meter_chain_reduced_state(const Modality &initial, const Context &pointer, const GramMatrix &gram,
                                        std::size_t m_count) {
    require_system_dims(initial, pointer);
    require_gram_size(gram, pointer);
    const Vector c = branch_amplitudes(initial, pointer);
    const auto n = c.size();
    Matrix rho(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index jp = 0; jp < n; ++jp) {
            const Complex coherence = c[j] * std::conj(c[jp]);
            rho(j, jp) = (j == jp) ? Complex{std::norm(c[j]), 0.0}
                                   : coherence * integer_power(gram.entries()(jp, j), m_count);
        }
    }
    return DensityMatrix(std::move(rho));
}

Matrix dephase_branches(const Matrix &composite, std::size_t dim_system, std::size_t dim_meter) {
    const auto n = static_cast<Eigen::Index>(dim_system);
    const auto m = static_cast<Eigen::Index>(dim_meter);
    if (composite.rows() != n * m || composite.cols() != n * m) {
        throw Error(ErrorCode::DimensionMismatch, "composite matrix has the wrong size");
    }
    Matrix out = Matrix::Zero(n * m, n * m);
    for (Eigen::Index j = 0; j < n; ++j) out.block(j * m, j * m, m, m) = composite.block(j * m, j * m, m, m);
    return out;
}

double von_neumann_entropy(const DensityMatrix &rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    double entropy = 0.0;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        const double lambda = solver.eigenvalues()[k];
        if (lambda > kEntropyCutoff) entropy -= lambda * std::log(lambda);
    }
    return std::max(entropy, 0.0);
}

}  // namespace csm
