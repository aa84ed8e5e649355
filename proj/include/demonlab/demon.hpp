#pragma once

// The measure-and-extract cycle of a demon memory acting on a target:
//
//   reset      raise the memory's levels slowly from degenerate to the raised
//              spectrum at T_demon_reset (costs W_d, dumps heat to the bath)
//   quench     drop all memory levels back to zero instantly (recovers <E>)
//   measure    correlating unitary + projection onto the memory's basis
//   feedback   per outcome: rotate, quench the target to the Gibbs
//              spectrum of its conditional state, return slowly (extracts work)
//   relax      memory re-thermalizes on its degenerate spectrum
//
// The ledger checks the first law at every stage and the closure bound
// net_work_out <= 0 when the memory is reset at the target's temperature.

#include <string>
#include <vector>

#include "demonlab/measure.hpp"
#include "demonlab/qcore.hpp"
#include "demonlab/thermo.hpp"

namespace demonlab::demon {

inline constexpr double kInstantTol = 1e-9;
inline constexpr double kClosureTol = 1e-6;
/// Populations below this floor are treated as this floor when choosing
/// the matching Gibbs spectrum in feedback.
inline constexpr double kPopulationFloor = 1e-15;

struct CycleConfig {
    thermo::Spectrum target_spectrum;
    thermo::Spectrum demon_raised_spectrum;
    double T_target;
    double T_demon_reset;
    measure::MeasurementModel measurement;
    int K_steps = 10000;

    /// Throws ArgumentError / TemperatureError on inconsistent settings.
    void validate() const;
};

struct StageRecord {
    std::string stage;
    double work_in = 0.0;
    double work_out = 0.0;
    /// Net heat released to the bath; negative when heat is drawn in.
    double heat_to_bath = 0.0;
    /// Energy change of target + memory over the stage.
    double energy_change = 0.0;
    double S_demon = 0.0;
    double S_target = 0.0;

    /// energy_change - (work_in - work_out - heat_to_bath)
    double first_law_residual() const { return energy_change - (work_in - work_out - heat_to_bath); }
};

struct CycleLedger {
    std::vector<StageRecord> stages;
    double W_d = 0.0;
    double E_mean_raised = 0.0;
    double delta_S_reset = 0.0;
    double quench_recovered = 0.0;
    /// Work done by the measurement unitary (target energy change; the memory is degenerate).
    double W_measurement = 0.0;
    double W_extracted = 0.0;
    double net_work_out = 0.0;
    double delta_I = 0.0;
    double delta_S_demon = 0.0;
    double S_target_initial = 0.0;
    double S_demon_reset = 0.0;
    double total_heat_to_bath = 0.0;
    double target_return_distance = 0.0;
};

/// Allowed deviation of a K-step ramp from its quasi-static limit.
double quasistatic_budget(const thermo::Spectrum& start, const thermo::Spectrum& end, int steps);

struct ResetStage {
    thermo::GibbsState demon_state;
    thermo::IsothermalPath path;
    StageRecord entry;
};

struct QuenchStage {
    qcore::DensityMatrix demon_state;
    double recovered;
    StageRecord entry;
};

struct MeasurementStage {
    measure::MeasurementResult result;
    double delta_S_demon;
    StageRecord entry;
};

struct FeedbackStage {
    double work_extracted;
    /// sum_n p_n [F(rho_n) - F_eq], the K -> infinity value.
    double ideal_extraction;
    qcore::DensityMatrix final_target;
    StageRecord entry;
};

ResetStage run_reset_stage(const CycleConfig& config);

QuenchStage run_quench_stage(const thermo::GibbsState& demon_state, const CycleConfig& config);

/// Requires the memory to be on its degenerate spectrum (after the quench).
MeasurementStage run_measurement_stage(const qcore::DensityMatrix& demon_state, const thermo::GibbsState& target,
                                       const CycleConfig& config);

FeedbackStage run_feedback_stage(const qcore::OutcomeEnsemble& ensemble, const thermo::Spectrum& target_spectrum,
                                 double T_target, int steps);

CycleLedger run_full_cycle(const CycleConfig& config);

struct MeasurementCostReport {
    /// F(reset memory; raised, T) - F(maximally mixed; degenerate, T), T = T_target.
    double free_energy_store;
    /// Free energy change of the memory over the quench alone (= -<E>).
    double quench_free_energy_change;
    /// Free energy lost by the memory over quench + measurement.
    double demon_free_energy_drop;
    /// quench_recovered + W_extracted - W_measurement
    double extracted_work;
    double tolerance;

    // Variant without the quench: memory stays in Gibbs(raised, T_target).
    double no_quench_delta_I;
    double no_quench_delta_S_demon;
    double no_quench_heat;
    double no_quench_min_heat;
    double no_quench_T_delta_I;
};

MeasurementCostReport measurement_cost_report(const CycleConfig& config);

} // namespace demonlab::demon
