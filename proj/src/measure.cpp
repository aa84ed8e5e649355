#include "demonlab/measure.hpp"

#include <cmath>
#include <sstream>

#include "demonlab/errors.hpp"

namespace demonlab::measure {

namespace {

constexpr double kDecompositionTol = 1e-9;
constexpr double kClassicalConservationTol = 1e-10;
constexpr double kExchangeTol = 1e-9;

std::string describe(double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << a << " vs " << b;
    return os.str();
}

} // namespace

const char* to_string(MeasurementKind kind) {
    switch (kind) {
    case MeasurementKind::classical_permutation:
        return "classical_permutation";
    case MeasurementKind::general:
        return "general";
    }
    return "unknown";
}

MeasurementModel::MeasurementModel(int dim_t, int dim_d, qcore::UnitaryMatrix unitary, MeasurementKind kind)
    : dim_t_(dim_t), dim_d_(dim_d), unitary_(std::move(unitary)), kind_(kind) {
    if (dim_t < 1 || dim_d < 1) {
        throw ArgumentError("measurement dimensions must be >= 1");
    }
    if (unitary_.dim() != dim_t * dim_d) {
        throw ArgumentError("measurement unitary does not act on the joint space");
    }
    if (kind_ == MeasurementKind::classical_permutation) {
        const auto& u = unitary_.matrix();
        for (int i = 0; i < u.rows(); ++i) {
            for (int j = 0; j < u.cols(); ++j) {
                const auto v = u(i, j);
                if (!(v == qcore::Complex(0.0, 0.0) || v == qcore::Complex(1.0, 0.0))) {
                    throw ArgumentError("classical measurement unitary must be a 0/1 permutation matrix");
                }
            }
        }
    }
}

MeasurementModel classical_correlating_unitary(const CorrelationTable& table, int dim_t, int dim_d) {
    if (dim_t < 1 || dim_d < 1) {
        throw ArgumentError("measurement dimensions must be >= 1");
    }
    const int d = dim_t * dim_d;
    qcore::Matrix p = qcore::Matrix::Zero(d, d);
    std::vector<bool> hit(static_cast<std::size_t>(d), false);
    for (int m = 0; m < dim_t; ++m) {
        for (int n = 0; n < dim_d; ++n) {
            const JointIndex image = table(m, n);
            if (image.m < 0 || image.m >= dim_t || image.n < 0 || image.n >= dim_d) {
                throw ArgumentError("correlation table maps outside the joint index set");
            }
            const int to = image.m * dim_d + image.n;
            if (hit[static_cast<std::size_t>(to)]) {
                throw ArgumentError("correlation table is not a bijection");
            }
            hit[static_cast<std::size_t>(to)] = true;
            p(to, m * dim_d + n) = 1.0;
        }
    }
    return MeasurementModel(dim_t, dim_d, qcore::UnitaryMatrix(std::move(p)), MeasurementKind::classical_permutation);
}

CorrelationTable identity_table() {
    return [](int m, int n) { return JointIndex{m, n}; };
}

CorrelationTable cnot_table(int dim_d) {
    return [dim_d](int m, int n) { return JointIndex{m, (n + m) % dim_d}; };
}

CorrelationTable swap_table() {
    return [](int m, int n) { return JointIndex{n, m}; };
}

MeasurementModel haar_measurement(int dim_t, int dim_d, std::uint64_t seed) {
    return MeasurementModel(dim_t, dim_d, qcore::haar_random_unitary(dim_t * dim_d, seed), MeasurementKind::general);
}

MeasurementResult perform_measurement(const MeasurementModel& model, const qcore::DensityMatrix& rho_t,
                                      const qcore::DensityMatrix& rho_d) {
    if (rho_t.dim() != model.dim_t() || rho_d.dim() != model.dim_d()) {
        throw ArgumentError("perform_measurement: state dimensions do not match the model");
    }
    if (!rho_t.is_diagonal() || !rho_d.is_diagonal()) {
        throw PreconditionError("perform_measurement: target and demon must start diagonal in their energy bases");
    }
    const qcore::JointState sigma0 = qcore::tensor_product(rho_t, rho_d);
    qcore::JointState sigma_u = qcore::apply_unitary(sigma0, model.unitary());
    qcore::JointState sigma_tilde = qcore::average_over_projection(sigma_u);
    qcore::OutcomeEnsemble ensemble = qcore::project_onto_demon_basis(sigma_u, qcore::von_neumann_entropy(rho_t));

    const double joint = qcore::von_neumann_entropy(sigma_tilde.state());
    const double decomposed = ensemble.demon_record_entropy() + ensemble.average_conditional_entropy();
    if (std::abs(joint - decomposed) > kDecompositionTol) {
        throw TheoremViolation("block-diagonal entropy decomposition", describe(joint, decomposed));
    }
    return MeasurementResult{std::move(ensemble), std::move(sigma_u), std::move(sigma_tilde)};
}

EntropyExchangeReport entropy_exchange_report(const MeasurementModel& model, const qcore::DensityMatrix& rho_t,
                                              const qcore::DensityMatrix& rho_d) {
    const MeasurementResult result = perform_measurement(model, rho_t, rho_d);

    EntropyExchangeReport r{};
    r.S_t = qcore::von_neumann_entropy(rho_t);
    r.S_d = qcore::von_neumann_entropy(rho_d);
    r.S_0 = qcore::von_neumann_entropy(qcore::tensor_product(rho_t, rho_d).state());
    r.S_u = qcore::von_neumann_entropy(result.sigma_u.state());
    r.S_joint = qcore::von_neumann_entropy(result.sigma_tilde.state());
    r.avg_S_t_fin = result.ensemble.average_conditional_entropy();
    r.S_d_fin = qcore::von_neumann_entropy(qcore::reduced_demon(result.sigma_tilde));
    r.delta_S_d = r.S_d_fin - r.S_d;
    r.delta_S_t = r.avg_S_t_fin - r.S_t;
    r.delta_I = result.ensemble.delta_I();
    r.inequality_slack = r.delta_S_d + r.delta_S_t;

    if (std::abs(r.S_0 - (r.S_t + r.S_d)) > kClassicalConservationTol) {
        throw TheoremViolation("product-state entropy additivity", describe(r.S_0, r.S_t + r.S_d));
    }
    if (model.kind() == MeasurementKind::classical_permutation &&
        std::abs(r.S_joint - r.S_0) > kClassicalConservationTol) {
        throw TheoremViolation("classical measurement preserves joint entropy", describe(r.S_joint, r.S_0));
    }
    if (r.S_joint < r.S_0 - kClassicalConservationTol) {
        throw TheoremViolation("projection-average entropy non-decrease", describe(r.S_joint, r.S_0));
    }
    if (r.inequality_slack < -kExchangeTol) {
        throw TheoremViolation("entropy exchange dS_d >= -dS_t", "slack " + describe(r.inequality_slack, 0.0));
    }
    return r;
}

} // namespace demonlab::measure
