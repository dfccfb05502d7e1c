#include "csm/hilbert.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "csm/error.hpp"
#include "csm/rng.hpp"

namespace csm {

Complex inner(const Vector &a, const Vector &b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "inner product of vectors with different lengths");
    }
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double ar = a[k].real(), ai = a[k].imag();
        const double br = b[k].real(), bi = b[k].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

double max_abs_diff(const Matrix &a, const Matrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "matrix shapes differ");
    }
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

double orthonormality_residual(const Matrix &columns) {
    const Matrix gram = columns.adjoint() * columns;
    return max_abs_diff(gram, Matrix::Identity(gram.rows(), gram.cols()));
}

Context::Context(std::string id, Matrix basis, double tolerance) : id_(std::move(id)), basis_(std::move(basis)) {
    if (basis_.rows() != basis_.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "context '" + id_ + "' basis is not square");
    }
    if (basis_.cols() < 2) {
        throw Error(ErrorCode::DimensionMismatch, "context '" + id_ + "' needs dimension >= 2");
    }
    if (!basis_.allFinite()) {
        throw Error(ErrorCode::NonOrthonormalInput, "context '" + id_ + "' has non-finite entries");
    }
    const double residual = orthonormality_residual(basis_);
    if (!(residual <= tolerance)) {
        std::ostringstream msg;
        msg << "context '" << id_ << "' columns are not orthonormal (residual " << residual << ")";
        throw Error(ErrorCode::NonOrthonormalInput, msg.str());
    }
}

Vector Context::vector(std::size_t index) const {
    if (index >= dim()) {
        throw Error(ErrorCode::IndexOutOfRange, "modality index " + std::to_string(index) + " out of range");
    }
    return basis_.col(static_cast<Eigen::Index>(index));
}

Modality::Modality(Context context, std::size_t index) : context_(std::move(context)), index_(index) {
    if (index_ >= context_.dim()) {
        throw Error(ErrorCode::IndexOutOfRange, "modality index " + std::to_string(index_) + " >= dimension " +
                                                    std::to_string(context_.dim()) + " of context '" +
                                                    context_.id() + "'");
    }
}

namespace {

Matrix fourier_basis(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix basis(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // j*k reduced mod N first.
            const auto step = static_cast<double>((j * k) % n);
            const double angle = 2.0 * std::numbers::pi * step / static_cast<double>(dim);
            basis(j, k) = std::polar(scale, angle);
        }
    }
    return basis;
}

struct BasisBuilder {
    std::size_t dim;

    Matrix operator()(const spec::Computational &) const {
        const auto n = static_cast<Eigen::Index>(dim);
        return Matrix::Identity(n, n);
    }
    Matrix operator()(const spec::Fourier &) const { return fourier_basis(dim); }
    Matrix operator()(const spec::Rotation &rotation) const {
        if (dim != 2) {
            throw Error(ErrorCode::DimensionMismatch,
                        "rotation contexts require dimension 2, got " + std::to_string(dim));
        }
        const double c = std::cos(rotation.theta / 2.0);
        const double s = std::sin(rotation.theta / 2.0);
        Matrix basis(2, 2);
        basis << c, -s, s, c;
        return basis;
    }
    Matrix operator()(const spec::Haar &haar) const { return haar_random_unitary(haar.seed, dim).matrix; }
    Matrix operator()(const spec::Explicit &expl) const {
        if (static_cast<std::size_t>(expl.matrix.rows()) != dim ||
            static_cast<std::size_t>(expl.matrix.cols()) != dim) {
            throw Error(ErrorCode::DimensionMismatch, "explicit basis is not " + std::to_string(dim) + "x" +
                                                          std::to_string(dim));
        }
        return expl.matrix;
    }
};

}  // namespace

Context build_context(std::string id, const ContextSpec &spec, std::size_t dim) {
    if (dim < 2) {
        throw Error(ErrorCode::DimensionMismatch, "context dimension must be >= 2");
    }
    Matrix basis = std::visit(BasisBuilder{dim}, spec);
    const bool generated = !std::holds_alternative<spec::Explicit>(spec);
    return Context(std::move(id), std::move(basis), generated ? kGeneratedTolerance : kInputTolerance);
}

Projector projector(const Modality &modality) {
    const Vector u = modality.vector();
    return {u * u.adjoint()};
}

UnitaryMatrix context_change_unitary(const Context &from, const Context &to) {
    if (from.dim() != to.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "contexts '" + from.id() + "' and '" + to.id() +
                                                      "' have different dimensions");
    }
    if (from == to) {
        const auto n = static_cast<Eigen::Index>(from.dim());
        return {Matrix::Identity(n, n)};
    }
    return {to.basis() * from.basis().adjoint()};
}

UnitaryMatrix compose(const UnitaryMatrix &first, const UnitaryMatrix &second) {
    if (first.matrix.rows() != second.matrix.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "cannot compose unitaries of different dimensions");
    }
    return {second.matrix * first.matrix};
}

UnitaryMatrix haar_random_unitary(std::uint64_t seed, std::size_t dim) {
    if (dim < 2) {
        throw Error(ErrorCode::DimensionMismatch, "Haar unitary dimension must be >= 2");
    }
    const auto n = static_cast<Eigen::Index>(dim);
    Engine engine(derive_seed(seed, dim));
    Matrix gaussian(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        for (Eigen::Index row = 0; row < n; ++row) {
            gaussian(row, col) = complex_normal(engine);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(gaussian);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex d = r(k, k);
        const double magnitude = std::abs(d);
        if (magnitude > 0.0) q.col(k) *= d / magnitude;
    }
    return {q};
}

}  // namespace csm
