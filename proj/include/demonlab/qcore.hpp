#pragma once

// Finite-dimensional state algebra: density matrices, bipartite target/demon
// states, unitaries, entropies and projection onto the demon's energy basis.
//
// Joint basis convention: |m>_t (x) |n>_d has index m*N + n (target-major),
// where M = dim_t and N = dim_d.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace demonlab::qcore {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kNegativeEigenTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kOutcomeThreshold = 1e-12;
inline constexpr double kProbabilitySumTol = 1e-10;
inline constexpr double kAndoTol = 1e-10;
inline constexpr int kDefaultMaxJointDim = 64;

/// Hermitian, unit-trace, positive semidefinite matrix. Validated on
/// construction and immutable afterwards; the clamped spectrum is cached.
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix entries);

    static DensityMatrix from_populations(std::span<const double> populations);
    static DensityMatrix maximally_mixed(int dim);
    static DensityMatrix basis_state(int dim, int k);
    static DensityMatrix pure(const Eigen::VectorXcd& psi);

    int dim() const noexcept { return static_cast<int>(entries_.rows()); }
    const Matrix& matrix() const noexcept { return entries_; }

    /// Ascending eigenvalues; round-off negatives in [-1e-10, 0) read out as 0.
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

    /// Real diagonal in the fixed (energy) basis.
    std::vector<double> populations() const;
    bool is_diagonal(double tol = kHermitianTol) const;

private:
    Matrix entries_;
    std::vector<double> eigenvalues_;
};

/// State on the target (x) demon space.
class JointState {
public:
    JointState(int dim_t, int dim_d, DensityMatrix matrix, int max_joint_dim = kDefaultMaxJointDim);

    int dim_t() const noexcept { return dim_t_; }
    int dim_d() const noexcept { return dim_d_; }
    int dim() const noexcept { return dim_t_ * dim_d_; }
    int index(int m, int n) const noexcept { return m * dim_d_ + n; }
    const DensityMatrix& state() const noexcept { return state_; }
    const Matrix& matrix() const noexcept { return state_.matrix(); }

private:
    int dim_t_;
    int dim_d_;
    DensityMatrix state_;
};

class UnitaryMatrix {
public:
    explicit UnitaryMatrix(Matrix entries);
    static UnitaryMatrix identity(int dim);

    int dim() const noexcept { return static_cast<int>(entries_.rows()); }
    const Matrix& matrix() const noexcept { return entries_; }

private:
    Matrix entries_;
};

struct Outcome {
    int demon_index;
    double probability;
    DensityMatrix state;
};

/// Conditional target states after a projection onto the demon's basis.
/// `delta_I` is measured against the supplied prior target entropy.
class OutcomeEnsemble {
public:
    OutcomeEnsemble(std::vector<Outcome> outcomes, double prior_target_entropy);

    const std::vector<Outcome>& outcomes() const noexcept { return outcomes_; }
    double prior_target_entropy() const noexcept { return prior_entropy_; }
    /// sum_n p_n S(rho_n)
    double average_conditional_entropy() const noexcept { return avg_conditional_entropy_; }
    /// -sum_n p_n ln p_n
    double demon_record_entropy() const noexcept { return record_entropy_; }
    double delta_I() const noexcept { return prior_entropy_ - avg_conditional_entropy_; }

private:
    std::vector<Outcome> outcomes_;
    double prior_entropy_;
    double avg_conditional_entropy_;
    double record_entropy_;
};

/// -sum p ln p with 0 ln 0 = 0.
double shannon_entropy(std::span<const double> probabilities);

double von_neumann_entropy(const DensityMatrix& rho);

/// I(rho) = ln(dim) - S(rho).
double information_content(const DensityMatrix& rho);

JointState tensor_product(const DensityMatrix& rho_t, const DensityMatrix& rho_d,
                          int max_joint_dim = kDefaultMaxJointDim);

DensityMatrix reduced_target(const JointState& sigma);
DensityMatrix reduced_demon(const JointState& sigma);

/// Conditions sigma on each demon basis state. Prior entropy for delta_I is
/// that of the reduced target state of sigma.
OutcomeEnsemble project_onto_demon_basis(const JointState& sigma);
OutcomeEnsemble project_onto_demon_basis(const JointState& sigma, double prior_target_entropy);

/// Removes every coherence between distinct demon indices. Throws
/// TheoremViolation if the entropy decreases by more than 1e-10.
JointState average_over_projection(const JointState& sigma);

/// Haar-distributed unitary, deterministic in `seed`.
UnitaryMatrix haar_random_unitary(int dim, std::uint64_t seed);

JointState apply_unitary(const JointState& sigma, const UnitaryMatrix& u);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

} // namespace demonlab::qcore
