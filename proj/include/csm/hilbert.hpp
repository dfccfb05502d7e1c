#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace csm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Tolerance for user-supplied objects (explicit bases, Gram matrices).
inline constexpr double kInputTolerance = 1e-10;
/// Tolerance for objects the library generates itself.
inline constexpr double kGeneratedTolerance = 1e-12;

/// Inner product <a|b> = sum_k conj(a_k) b_k, written out so that
/// inner(a, b) == conj(inner(b, a)) holds bit-for-bit.
Complex inner(const Vector &a, const Vector &b);

/// Largest entry of |A - B|.
double max_abs_diff(const Matrix &a, const Matrix &b);

/// Largest entry of |A^dagger A - I|.
double orthonormality_residual(const Matrix &columns);

// ---------------------------------------------------------------------------
// Context specifications

namespace spec {
struct Computational {};
/// Discrete Fourier basis, column k has entries exp(2 pi i j k / N) / sqrt(N).
struct Fourier {};
/// Qubit basis tilted by `theta` on the Bloch sphere:
/// columns (cos t/2, sin t/2) and (-sin t/2, cos t/2).
struct Rotation {
    double theta = 0.0;
};
struct Haar {
    std::uint64_t seed = 0;
};
/// Basis vectors are the columns of `matrix`.
struct Explicit {
    Matrix matrix;
};
}  // namespace spec

using ContextSpec = std::variant<spec::Computational, spec::Fourier, spec::Rotation, spec::Haar, spec::Explicit>;

// ---------------------------------------------------------------------------

/// A measurement context: an ordered orthonormal basis whose column j is the
/// modality vector |u_j>. Immutable. Two contexts are "the same context" when
/// their ids match; the basis is not compared.
class Context {
  public:
    /// Validates orthonormality at `tolerance` and dim >= 2.
    Context(std::string id, Matrix basis, double tolerance = kInputTolerance);

    const std::string &id() const noexcept { return id_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
    const Matrix &basis() const noexcept { return basis_; }
    Vector vector(std::size_t index) const;

    friend bool operator==(const Context &a, const Context &b) noexcept { return a.id_ == b.id_; }

  private:
    std::string id_;
    Matrix basis_;
};

/// One outcome of one context.
class Modality {
  public:
    Modality(Context context, std::size_t index);

    const Context &context() const noexcept { return context_; }
    std::size_t index() const noexcept { return index_; }
    Vector vector() const { return context_.vector(index_); }

  private:
    Context context_;
    std::size_t index_;
};

struct Projector {
    Matrix matrix;
};

struct UnitaryMatrix {
    Matrix matrix;
};

Context build_context(std::string id, const ContextSpec &spec, std::size_t dim);

/// |u><u| for the modality's basis vector.
Projector projector(const Modality &modality);

/// U with U |u_i> = |v_i> for every i, i.e. U = V U_from^dagger.
UnitaryMatrix context_change_unitary(const Context &from, const Context &to);

/// The change `first` followed by `second` (matrix product second * first).
UnitaryMatrix compose(const UnitaryMatrix &first, const UnitaryMatrix &second);

/// Haar-distributed unitary: complex Gaussian matrix, QR, then column phases
/// fixed so that R has a real positive diagonal.
UnitaryMatrix haar_random_unitary(std::uint64_t seed, std::size_t dim);

}  // namespace csm
