#include "csm/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "csm/error.hpp"

namespace csm {

namespace {

void require_same_dim(const Context &a, const Context &b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "contexts '" + a.id() + "' (dim " + std::to_string(a.dim()) +
                                                      ") and '" + b.id() + "' (dim " + std::to_string(b.dim()) +
                                                      ") differ in dimension");
    }
}

void require_index(std::size_t index, std::size_t dim) {
    if (index >= dim) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "final index " + std::to_string(index) + " >= dimension " + std::to_string(dim));
    }
}

double squared_overlap(const Vector &a, const Vector &b) { return std::norm(inner(a, b)); }

// <u_k|v_j><v_j|u_i> for every j.
Vector path_amplitudes(const Modality &initial, const Context &intermediate, std::size_t final_index) {
    const Context &home = initial.context();
    require_same_dim(home, intermediate);
    require_index(final_index, home.dim());
    const Vector u_i = initial.vector();
    const Vector u_k = home.vector(final_index);
    const auto n = static_cast<Eigen::Index>(home.dim());
    Vector paths(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vector v_j = intermediate.basis().col(j);
        paths[j] = inner(u_k, v_j) * inner(v_j, u_i);
    }
    return paths;
}

}  // namespace

ProbabilityDistribution::ProbabilityDistribution(RealVector weights, double tolerance) : weights_(std::move(weights)) {
    if (weights_.size() == 0) {
        throw Error(ErrorCode::InvalidDistribution, "empty distribution");
    }
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        const double w = weights_[i];
        if (!std::isfinite(w) || w < -tolerance || w > 1.0 + tolerance) {
            std::ostringstream msg;
            msg << "weight " << i << " = " << w << " outside [0, 1]";
            throw Error(ErrorCode::InvalidDistribution, msg.str());
        }
        weights_[i] = std::clamp(w, 0.0, 1.0);
    }
    const double total = weights_.sum();
    if (std::abs(total - 1.0) > tolerance) {
        std::ostringstream msg;
        msg << "weights sum to " << total;
        throw Error(ErrorCode::InvalidDistribution, msg.str());
    }
}

ProbabilityDistribution ProbabilityDistribution::point_mass(std::size_t dim, std::size_t index) {
    require_index(index, dim);
    RealVector w = RealVector::Zero(static_cast<Eigen::Index>(dim));
    w[static_cast<Eigen::Index>(index)] = 1.0;
    return ProbabilityDistribution(std::move(w));
}

ProbabilityDistribution ProbabilityDistribution::uniform(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return ProbabilityDistribution(RealVector::Constant(n, 1.0 / static_cast<double>(dim)));
}

double checked_probability(double value, double tolerance) {
    if (!std::isfinite(value) || value < -tolerance || value > 1.0 + tolerance) {
        std::ostringstream msg;
        msg << "computed probability " << value << " outside [0, 1]";
        throw Error(ErrorCode::InternalConsistency, msg.str());
    }
    return std::clamp(value, 0.0, 1.0);
}

double born_probability(const Modality &a, const Modality &b) {
    require_same_dim(a.context(), b.context());
    return checked_probability(squared_overlap(a.vector(), b.vector()));
}

TransitionAmplitudes transition_amplitudes(const Context &from, const Context &to) {
    require_same_dim(from, to);
    return {to.basis().adjoint() * from.basis()};
}

TransitionMatrix transition_matrix(const Context &from, const Context &to) {
    require_same_dim(from, to);
    const auto n = static_cast<Eigen::Index>(from.dim());
    RealMatrix entries(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector u_i = from.basis().col(i);
        for (Eigen::Index j = 0; j < n; ++j) {
            entries(j, i) = checked_probability(squared_overlap(to.basis().col(j), u_i));
        }
    }
    return {std::move(entries)};
}

ProbabilityDistribution propagate(const ProbabilityDistribution &dist, const TransitionMatrix &transition) {
    const auto n = static_cast<Eigen::Index>(dist.size());
    if (transition.entries.rows() != n || transition.entries.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "distribution and transition matrix sizes differ");
    }
    RealVector out = transition.entries * dist.weights();
    for (Eigen::Index j = 0; j < n; ++j) out[j] = checked_probability(out[j]);
    return ProbabilityDistribution(std::move(out));
}

double irreversible_return(const Modality &initial, const Context &intermediate, std::size_t final_index) {
    const Context &home = initial.context();
    require_same_dim(home, intermediate);
    require_index(final_index, home.dim());
    const Vector u_i = initial.vector();
    const Vector u_k = home.vector(final_index);
    double total = 0.0;
    for (Eigen::Index j = 0; j < intermediate.basis().cols(); ++j) {
        const Vector v_j = intermediate.basis().col(j);
        total += squared_overlap(u_k, v_j) * squared_overlap(v_j, u_i);
    }
    return checked_probability(total);
}

double reversible_return(const Modality &initial, const Context &intermediate, std::size_t final_index) {
    return checked_probability(std::norm(path_amplitudes(initial, intermediate, final_index).sum()));
}

double interference_return(const Modality &initial, const Context &intermediate, std::span<const double> phases,
                           std::size_t final_index) {
    if (phases.size() != intermediate.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(intermediate.dim()) +
                                                      " phases, got " + std::to_string(phases.size()));
    }
    const Vector paths = path_amplitudes(initial, intermediate, final_index);
    Complex amplitude{0.0, 0.0};
    for (Eigen::Index j = 0; j < paths.size(); ++j) {
        amplitude += std::polar(1.0, phases[static_cast<std::size_t>(j)]) * paths[j];
    }
    return checked_probability(std::norm(amplitude));
}

RealMatrix irreversible_return_matrix(const Context &context, const Context &intermediate) {
    const auto n = static_cast<Eigen::Index>(context.dim());
    RealMatrix table(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Modality initial(context, static_cast<std::size_t>(i));
        for (Eigen::Index k = 0; k < n; ++k) {
            table(k, i) = irreversible_return(initial, intermediate, static_cast<std::size_t>(k));
        }
    }
    return table;
}

RealMatrix reversible_return_matrix(const Context &context, const Context &intermediate) {
    const auto n = static_cast<Eigen::Index>(context.dim());
    RealMatrix table(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Modality initial(context, static_cast<std::size_t>(i));
        for (Eigen::Index k = 0; k < n; ++k) {
            table(k, i) = reversible_return(initial, intermediate, static_cast<std::size_t>(k));
        }
    }
    return table;
}

}  // namespace csm
