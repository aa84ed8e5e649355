#include "demonlab/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "demonlab/errors.hpp"

namespace demonlab::qcore {

namespace {

Matrix hermitian_part(const Matrix& a) {
    Matrix h = (a + a.adjoint()) * 0.5;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        h(i, i) = Complex(h(i, i).real(), 0.0);
    }
    return h;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Matrix entries) {
    if (entries.rows() == 0 || entries.rows() != entries.cols()) {
        throw InvariantError("density matrix must be square with dim >= 1");
    }
    const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermitianTol) {
        throw InvariantError("density matrix not Hermitian (max |A - A^dag| = " + fmt_double(asym) + ")");
    }
    const double trace_err = std::abs(entries.trace() - Complex(1.0, 0.0));
    if (trace_err > kTraceTol) {
        throw InvariantError("density matrix trace deviates from 1 by " + fmt_double(trace_err));
    }
    entries_ = hermitian_part(entries);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    eigenvalues_.resize(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double lambda = ev(i);
        if (lambda < -kNegativeEigenTol) {
            throw InvariantError("density matrix not positive semidefinite (eigenvalue " + fmt_double(lambda) + ")");
        }
        eigenvalues_[static_cast<std::size_t>(i)] = std::max(lambda, 0.0);
    }
}

DensityMatrix DensityMatrix::from_populations(std::span<const double> populations) {
    const auto n = static_cast<Eigen::Index>(populations.size());
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = populations[static_cast<std::size_t>(i)];
    }
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    if (dim < 1) {
        throw ArgumentError("dimension must be >= 1");
    }
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::basis_state(int dim, int k) {
    if (dim < 1 || k < 0 || k >= dim) {
        throw ArgumentError("basis index out of range");
    }
    Matrix m = Matrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const double norm = psi.norm();
    if (psi.size() == 0 || norm == 0.0) {
        throw ArgumentError("pure state vector must be nonzero");
    }
    Eigen::VectorXcd v = psi / norm;
    return DensityMatrix(v * v.adjoint());
}

std::vector<double> DensityMatrix::populations() const {
    std::vector<double> p(static_cast<std::size_t>(dim()));
    for (int i = 0; i < dim(); ++i) {
        p[static_cast<std::size_t>(i)] = entries_(i, i).real();
    }
    return p;
}

bool DensityMatrix::is_diagonal(double tol) const {
    for (int i = 0; i < dim(); ++i) {
        for (int j = 0; j < dim(); ++j) {
            if (i != j && std::abs(entries_(i, j)) > tol) {
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// JointState / UnitaryMatrix

JointState::JointState(int dim_t, int dim_d, DensityMatrix matrix, int max_joint_dim)
    : dim_t_(dim_t), dim_d_(dim_d), state_(std::move(matrix)) {
    if (dim_t < 1 || dim_d < 1) {
        throw ArgumentError("subsystem dimensions must be >= 1");
    }
    if (dim_t * dim_d > max_joint_dim) {
        throw SizeError("joint dimension " + std::to_string(dim_t * dim_d) + " exceeds cap " +
                        std::to_string(max_joint_dim));
    }
    if (state_.dim() != dim_t * dim_d) {
        throw ArgumentError("joint matrix dimension does not equal dim_t * dim_d");
    }
}

UnitaryMatrix::UnitaryMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        throw InvariantError("unitary must be square with dim >= 1");
    }
    const auto n = entries_.rows();
    const double err = (entries_ * entries_.adjoint() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (err > kUnitaryTol) {
        throw InvariantError("matrix is not unitary (max |UU^dag - I| = " + fmt_double(err) + ")");
    }
}

UnitaryMatrix UnitaryMatrix::identity(int dim) {
    if (dim < 1) {
        throw ArgumentError("dimension must be >= 1");
    }
    return UnitaryMatrix(Matrix::Identity(dim, dim));
}

// ---------------------------------------------------------------------------
// OutcomeEnsemble

OutcomeEnsemble::OutcomeEnsemble(std::vector<Outcome> outcomes, double prior_target_entropy)
    : outcomes_(std::move(outcomes)), prior_entropy_(prior_target_entropy) {
    double total = 0.0;
    std::vector<double> probs;
    probs.reserve(outcomes_.size());
    avg_conditional_entropy_ = 0.0;
    for (const auto& o : outcomes_) {
        total += o.probability;
        probs.push_back(o.probability);
        avg_conditional_entropy_ += o.probability * von_neumann_entropy(o.state);
    }
    if (std::abs(total - 1.0) > kProbabilitySumTol) {
        throw NumericalError("outcome probabilities sum to " + fmt_double(total));
    }
    record_entropy_ = shannon_entropy(probs);
}

// ---------------------------------------------------------------------------
// Entropies

double shannon_entropy(std::span<const double> probabilities) {
    double s = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) {
            s -= p * std::log(p);
        }
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    return shannon_entropy(rho.eigenvalues());
}

double information_content(const DensityMatrix& rho) {
    return std::log(static_cast<double>(rho.dim())) - von_neumann_entropy(rho);
}

// ---------------------------------------------------------------------------
// Composition

JointState tensor_product(const DensityMatrix& rho_t, const DensityMatrix& rho_d, int max_joint_dim) {
    const int m_dim = rho_t.dim();
    const int n_dim = rho_d.dim();
    if (m_dim * n_dim > max_joint_dim) {
        throw SizeError("joint dimension " + std::to_string(m_dim * n_dim) + " exceeds cap " +
                        std::to_string(max_joint_dim));
    }
    const int d = m_dim * n_dim;
    Matrix k(d, d);
    for (int m = 0; m < m_dim; ++m) {
        for (int mp = 0; mp < m_dim; ++mp) {
            k.block(m * n_dim, mp * n_dim, n_dim, n_dim) = rho_t.matrix()(m, mp) * rho_d.matrix();
        }
    }
    return JointState(m_dim, n_dim, DensityMatrix(std::move(k)), max_joint_dim);
}

DensityMatrix reduced_target(const JointState& sigma) {
    const int m_dim = sigma.dim_t();
    const int n_dim = sigma.dim_d();
    Matrix r = Matrix::Zero(m_dim, m_dim);
    for (int m = 0; m < m_dim; ++m) {
        for (int mp = 0; mp < m_dim; ++mp) {
            Complex acc = 0.0;
            for (int n = 0; n < n_dim; ++n) {
                acc += sigma.matrix()(sigma.index(m, n), sigma.index(mp, n));
            }
            r(m, mp) = acc;
        }
    }
    return DensityMatrix(std::move(r));
}

DensityMatrix reduced_demon(const JointState& sigma) {
    const int m_dim = sigma.dim_t();
    const int n_dim = sigma.dim_d();
    Matrix r = Matrix::Zero(n_dim, n_dim);
    for (int n = 0; n < n_dim; ++n) {
        for (int np = 0; np < n_dim; ++np) {
            Complex acc = 0.0;
            for (int m = 0; m < m_dim; ++m) {
                acc += sigma.matrix()(sigma.index(m, n), sigma.index(m, np));
            }
            r(n, np) = acc;
        }
    }
    return DensityMatrix(std::move(r));
}

// ---------------------------------------------------------------------------
// Projection measurement on the demon

OutcomeEnsemble project_onto_demon_basis(const JointState& sigma) {
    return project_onto_demon_basis(sigma, von_neumann_entropy(reduced_target(sigma)));
}

OutcomeEnsemble project_onto_demon_basis(const JointState& sigma, double prior_target_entropy) {
    const int m_dim = sigma.dim_t();
    const int n_dim = sigma.dim_d();
    std::vector<Outcome> outcomes;
    double dropped = 0.0;
    for (int n = 0; n < n_dim; ++n) {
        Matrix block(m_dim, m_dim);
        for (int m = 0; m < m_dim; ++m) {
            for (int mp = 0; mp < m_dim; ++mp) {
                block(m, mp) = sigma.matrix()(sigma.index(m, n), sigma.index(mp, n));
            }
        }
        const double p = block.trace().real();
        if (p < kOutcomeThreshold) {
            dropped += std::max(p, 0.0);
            continue;
        }
        outcomes.push_back(Outcome{n, p, DensityMatrix(block / p)});
    }
    if (dropped > kOutcomeThreshold) {
        throw NumericalError("probability mass " + fmt_double(dropped) + " lost to sub-threshold outcomes");
    }
    return OutcomeEnsemble(std::move(outcomes), prior_target_entropy);
}

JointState average_over_projection(const JointState& sigma) {
    const int d = sigma.dim();
    const int n_dim = sigma.dim_d();
    Matrix out = sigma.matrix();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i % n_dim != j % n_dim) {
                out(i, j) = 0.0;
            }
        }
    }
    JointState result(sigma.dim_t(), n_dim, DensityMatrix(std::move(out)), std::max(d, kDefaultMaxJointDim));
    const double before = von_neumann_entropy(sigma.state());
    const double after = von_neumann_entropy(result.state());
    if (after < before - kAndoTol) {
        throw TheoremViolation("projection-average entropy non-decrease",
                               "S before " + fmt_double(before) + ", after " + fmt_double(after));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Unitaries

UnitaryMatrix haar_random_unitary(int dim, std::uint64_t seed) {
    if (dim < 1) {
        throw ArgumentError("haar_random_unitary: dim must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(i, j) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    // Fix the QR phase ambiguity so that R has a positive real diagonal.
    for (int j = 0; j < dim; ++j) {
        const Complex rjj = r(j, j);
        const double mag = std::abs(rjj);
        q.col(j) *= mag > 0.0 ? rjj / mag : Complex(1.0, 0.0);
    }
    return UnitaryMatrix(std::move(q));
}

JointState apply_unitary(const JointState& sigma, const UnitaryMatrix& u) {
    if (u.dim() != sigma.dim()) {
        throw ArgumentError("apply_unitary: unitary dim " + std::to_string(u.dim()) + " != state dim " +
                            std::to_string(sigma.dim()));
    }
    Matrix rotated = hermitian_part(u.matrix() * sigma.matrix() * u.matrix().adjoint());
    // Renormalize the O(eps) trace drift of the product.
    rotated /= rotated.trace().real();
    return JointState(sigma.dim_t(), sigma.dim_d(), DensityMatrix(std::move(rotated)),
                      std::max(sigma.dim(), kDefaultMaxJointDim));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) {
        throw ArgumentError("trace_distance: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

} // namespace demonlab::qcore
