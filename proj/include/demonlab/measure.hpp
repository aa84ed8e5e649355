#pragma once

// Measurement of a target by a demon memory: a joint unitary followed by a
// projection onto the demon's energy basis, plus the entropy bookkeeping of
// that exchange.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "demonlab/qcore.hpp"

namespace demonlab::measure {

enum class MeasurementKind { classical_permutation, general };

const char* to_string(MeasurementKind kind);

struct JointIndex {
    int m; // target
    int n; // demon
    friend bool operator==(const JointIndex&, const JointIndex&) = default;
};

using CorrelationTable = std::function<JointIndex(int m, int n)>;

class MeasurementModel {
public:
    MeasurementModel(int dim_t, int dim_d, qcore::UnitaryMatrix unitary, MeasurementKind kind);

    int dim_t() const noexcept { return dim_t_; }
    int dim_d() const noexcept { return dim_d_; }
    const qcore::UnitaryMatrix& unitary() const noexcept { return unitary_; }
    MeasurementKind kind() const noexcept { return kind_; }

private:
    int dim_t_;
    int dim_d_;
    qcore::UnitaryMatrix unitary_;
    MeasurementKind kind_;
};

/// Permutation unitary sending |m, n> to |table(m, n)>. The table must be a
/// bijection on {0..M-1} x {0..N-1}.
MeasurementModel classical_correlating_unitary(const CorrelationTable& table, int dim_t, int dim_d);

/// Standard tables.
CorrelationTable identity_table();
/// (m, n) -> (m, (n + m) mod N); the CNOT for M = N = 2.
CorrelationTable cnot_table(int dim_d);
/// (m, n) -> (n, m); requires M == N.
CorrelationTable swap_table();

MeasurementModel haar_measurement(int dim_t, int dim_d, std::uint64_t seed);

struct MeasurementResult {
    qcore::OutcomeEnsemble ensemble;
    qcore::JointState sigma_u;     // U sigma0 U^dag
    qcore::JointState sigma_tilde; // sigma_u with demon coherences removed
};

/// Requires rho_t and rho_d diagonal in their energy bases.
MeasurementResult perform_measurement(const MeasurementModel& model, const qcore::DensityMatrix& rho_t,
                                      const qcore::DensityMatrix& rho_d);

struct EntropyExchangeReport {
    double S_t;
    double S_d;
    double S_0;
    double S_u;
    double S_joint;
    double avg_S_t_fin;
    double S_d_fin;
    double delta_S_d;
    double delta_S_t;
    double delta_I;
    double inequality_slack;
};

EntropyExchangeReport entropy_exchange_report(const MeasurementModel& model, const qcore::DensityMatrix& rho_t,
                                              const qcore::DensityMatrix& rho_d);

} // namespace demonlab::measure
