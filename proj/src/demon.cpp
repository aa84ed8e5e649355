#include "demonlab/demon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "demonlab/errors.hpp"

namespace demonlab::demon {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void check_first_law(const StageRecord& r) {
    const double scale = std::max({1.0, std::abs(r.work_in), std::abs(r.work_out), std::abs(r.heat_to_bath)});
    if (std::abs(r.first_law_residual()) > kInstantTol * scale) {
        throw NumericalError("first-law imbalance in stage '" + r.stage + "': residual " +
                             num(r.first_law_residual()));
    }
}

double ln_dim(int n) {
    return std::log(static_cast<double>(n));
}

// Mean energy of the Gibbs state of `spectrum` whose entropy is `entropy`,
// taking the T -> 0 / T -> infinity limits outside the reachable range.
double equilibrium_energy_at_entropy(const thermo::Spectrum& spectrum, double t_hint, double entropy) {
    const double s_max = ln_dim(spectrum.dim());
    if (entropy >= s_max) {
        const auto& e = spectrum.levels();
        return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
    }
    double lo = t_hint;
    for (int i = 0; i < 200 && thermo::gibbs_state(spectrum, lo).entropy() > entropy; ++i) {
        lo *= 0.5;
    }
    if (thermo::gibbs_state(spectrum, lo).entropy() > entropy) {
        return thermo::gibbs_state(spectrum, lo).mean_energy();
    }
    return thermo::gibbs_state(spectrum, thermo::temperature_for_entropy(spectrum, lo, entropy)).mean_energy();
}

} // namespace

void CycleConfig::validate() const {
    if (measurement.dim_t() != target_spectrum.dim() || measurement.dim_d() != demon_raised_spectrum.dim()) {
        throw ArgumentError("cycle config: spectra dimensions do not match the measurement model");
    }
    if (!(T_target > 0.0) || !(T_demon_reset > 0.0)) {
        throw TemperatureError("cycle config: temperatures must be positive");
    }
    if (K_steps < 1) {
        throw ArgumentError("cycle config: K_steps must be >= 1");
    }
}

double quasistatic_budget(const thermo::Spectrum& start, const thermo::Spectrum& end, int steps) {
    double span = 0.0;
    for (int k = 0; k < start.dim(); ++k) {
        span = std::max(span, std::abs(end[k] - start[k]));
    }
    return 5.0 * std::max(1.0, span) / static_cast<double>(steps);
}

// ---------------------------------------------------------------------------

ResetStage run_reset_stage(const CycleConfig& config) {
    config.validate();
    const int n = config.demon_raised_spectrum.dim();
    const double t = config.T_demon_reset;
    const thermo::Spectrum flat = thermo::Spectrum::degenerate(n);

    thermo::IsothermalPath path = thermo::quasistatic_isothermal(flat, config.demon_raised_spectrum, t, config.K_steps);
    thermo::GibbsState raised = thermo::gibbs_state(config.demon_raised_spectrum, t);

    StageRecord r;
    r.stage = "reset";
    r.work_in = path.work_in;
    r.heat_to_bath = path.heat_to_bath;
    r.energy_change = raised.mean_energy();
    r.S_demon = raised.entropy();
    r.S_target = thermo::gibbs_state(config.target_spectrum, config.T_target).entropy();
    check_first_law(r);

    const double delta_S = ln_dim(n) - raised.entropy();
    const double decomposition = raised.mean_energy() + t * delta_S;
    const double budget = quasistatic_budget(flat, config.demon_raised_spectrum, config.K_steps);
    if (std::abs(path.work_in - decomposition) > budget) {
        throw NumericalError("reset work " + num(path.work_in) + " departs from <E> + T dS = " + num(decomposition) +
                             " by more than the quasi-static budget " + num(budget));
    }
    return ResetStage{std::move(raised), std::move(path), std::move(r)};
}

QuenchStage run_quench_stage(const thermo::GibbsState& demon_state, const CycleConfig& config) {
    const thermo::Spectrum flat = thermo::Spectrum::degenerate(demon_state.spectrum().dim());
    thermo::QuenchResult q = thermo::quench(demon_state.spectrum(), flat, demon_state.state());

    const double s_before = demon_state.entropy();
    const double s_after = qcore::von_neumann_entropy(q.state);
    if (std::abs(s_after - s_before) > 1e-12) {
        throw NumericalError("quench changed the memory entropy");
    }

    StageRecord r;
    r.stage = "quench";
    r.work_out = -q.work_in;
    r.energy_change = q.work_in;
    r.S_demon = s_after;
    r.S_target = thermo::gibbs_state(config.target_spectrum, config.T_target).entropy();
    check_first_law(r);
    return QuenchStage{std::move(q.state), -q.work_in, std::move(r)};
}

MeasurementStage run_measurement_stage(const qcore::DensityMatrix& demon_state, const thermo::GibbsState& target,
                                       const CycleConfig& config) {
    const int n = config.measurement.dim_d();
    if (demon_state.dim() != n) {
        throw ArgumentError("measurement stage: memory dimension mismatch");
    }
    measure::MeasurementResult result = measure::perform_measurement(config.measurement, target.state(), demon_state);

    const qcore::DensityMatrix target_after = qcore::reduced_target(result.sigma_u);
    const double target_energy_change =
        thermo::mean_energy(target_after, target.spectrum()) - target.mean_energy();

    const double s_demon_before = qcore::von_neumann_entropy(demon_state);
    const double s_demon_after = qcore::von_neumann_entropy(qcore::reduced_demon(result.sigma_tilde));
    const double delta_S_demon = s_demon_after - s_demon_before;
    const double delta_S_reset = ln_dim(n) - s_demon_before;
    const double delta_I = result.ensemble.delta_I();

    if (delta_S_demon > delta_S_reset + kInstantTol) {
        throw TheoremViolation("memory entropy rise <= reset entropy drop",
                               num(delta_S_demon) + " > " + num(delta_S_reset));
    }
    if (delta_I > delta_S_demon + kInstantTol) {
        throw TheoremViolation("information gain <= memory entropy rise", num(delta_I) + " > " + num(delta_S_demon));
    }

    StageRecord r;
    r.stage = "measure";
    r.work_in = target_energy_change;
    r.energy_change = target_energy_change;
    r.S_demon = s_demon_after;
    r.S_target = result.ensemble.average_conditional_entropy();
    check_first_law(r);
    return MeasurementStage{std::move(result), delta_S_demon, std::move(r)};
}

FeedbackStage run_feedback_stage(const qcore::OutcomeEnsemble& ensemble, const thermo::Spectrum& target_spectrum,
                                 double T_target, int steps) {
    const int dim = target_spectrum.dim();
    const thermo::GibbsState eq = thermo::gibbs_state(target_spectrum, T_target);

    // Energy eigenbasis ordered by increasing level.
    std::vector<int> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return target_spectrum[a] < target_spectrum[b]; });
    std::vector<double> sorted_levels(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
        sorted_levels[static_cast<std::size_t>(k)] = target_spectrum[order[static_cast<std::size_t>(k)]];
    }
    const thermo::Spectrum sorted_spectrum(sorted_levels);

    double work_extracted = 0.0;
    double ideal = 0.0;
    double heat_to_bath = 0.0;
    double initial_energy = 0.0;
    for (const auto& outcome : ensemble.outcomes()) {
        const qcore::DensityMatrix& rho = outcome.state;
        if (rho.dim() != dim) {
            throw ArgumentError("feedback: outcome dimension does not match the target spectrum");
        }
        const double e0 = thermo::mean_energy(rho, target_spectrum);

        // Passive ordering: largest population on the lowest level.
        std::vector<double> lambda(rho.eigenvalues().rbegin(), rho.eigenvalues().rend());
        const double lambda_sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
        for (double& x : lambda) {
            x /= lambda_sum;
        }
        double e_rotated = 0.0;
        for (int k = 0; k < dim; ++k) {
            e_rotated += lambda[static_cast<std::size_t>(k)] * sorted_levels[static_cast<std::size_t>(k)];
        }
        const double rotation_work = e0 - e_rotated;

        // Spectrum for which the rotated state is (up to the floor) Gibbs at T.
        std::vector<double> matched(static_cast<std::size_t>(dim));
        const double top = std::max(lambda[0], kPopulationFloor);
        for (int k = 0; k < dim; ++k) {
            const double p = std::max(lambda[static_cast<std::size_t>(k)], kPopulationFloor);
            matched[static_cast<std::size_t>(k)] = -T_target * std::log(p / top);
        }
        const thermo::Spectrum matched_spectrum(matched);
        double quench_work = 0.0;
        double e_matched = 0.0;
        for (int k = 0; k < dim; ++k) {
            const auto i = static_cast<std::size_t>(k);
            quench_work += lambda[i] * (sorted_levels[i] - matched_spectrum[k]);
            e_matched += lambda[i] * matched_spectrum[k];
        }
        const thermo::GibbsState contact = thermo::gibbs_state(matched_spectrum, T_target);
        const double contact_heat_in = contact.mean_energy() - e_matched;

        const thermo::IsothermalPath ret =
            thermo::quasistatic_isothermal(matched_spectrum, sorted_spectrum, T_target, steps);
        const double w = rotation_work + quench_work - ret.work_in;
        const double w_ideal = (e0 - T_target * qcore::von_neumann_entropy(rho)) - eq.free_energy();
        // Free energy given up by not matching zero populations exactly.
        const double floor_loss = (e_matched - T_target * qcore::shannon_entropy(lambda)) - contact.free_energy();
        const double allowed = quasistatic_budget(matched_spectrum, sorted_spectrum, steps) + floor_loss + kInstantTol;
        if (w > w_ideal + kInstantTol || w_ideal - w > allowed) {
            throw NumericalError("feedback extraction " + num(w) + " inconsistent with free-energy value " +
                                 num(w_ideal));
        }

        const double p = outcome.probability;
        work_extracted += p * w;
        ideal += p * w_ideal;
        heat_to_bath += p * (ret.heat_to_bath - contact_heat_in);
        initial_energy += p * e0;
    }

    // The return ramp ends in Gibbs(sorted_spectrum); map it back to the original labels.
    const thermo::GibbsState sorted_eq = thermo::gibbs_state(sorted_spectrum, T_target);
    std::vector<double> final_pop(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
        final_pop[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] =
            sorted_eq.populations()[static_cast<std::size_t>(k)];
    }
    qcore::DensityMatrix final_target = qcore::DensityMatrix::from_populations(final_pop);

    StageRecord r;
    r.stage = "feedback";
    r.work_out = work_extracted;
    r.heat_to_bath = heat_to_bath;
    r.energy_change = thermo::mean_energy(final_target, target_spectrum) - initial_energy;
    r.S_target = qcore::von_neumann_entropy(final_target);
    check_first_law(r);
    return FeedbackStage{work_extracted, ideal, std::move(final_target), std::move(r)};
}

CycleLedger run_full_cycle(const CycleConfig& config) {
    config.validate();
    const int n = config.demon_raised_spectrum.dim();
    CycleLedger ledger;

    ResetStage reset = run_reset_stage(config);
    ledger.W_d = reset.path.work_in;
    ledger.E_mean_raised = reset.demon_state.mean_energy();
    ledger.S_demon_reset = reset.demon_state.entropy();
    ledger.delta_S_reset = ln_dim(n) - reset.demon_state.entropy();
    ledger.stages.push_back(reset.entry);

    QuenchStage quenched = run_quench_stage(reset.demon_state, config);
    ledger.quench_recovered = quenched.recovered;
    ledger.stages.push_back(quenched.entry);

    const thermo::GibbsState target = thermo::gibbs_state(config.target_spectrum, config.T_target);
    ledger.S_target_initial = target.entropy();
    MeasurementStage measured = run_measurement_stage(quenched.demon_state, target, config);
    ledger.W_measurement = measured.entry.work_in;
    ledger.delta_I = measured.result.ensemble.delta_I();
    ledger.delta_S_demon = measured.delta_S_demon;
    ledger.stages.push_back(measured.entry);

    FeedbackStage fb = run_feedback_stage(measured.result.ensemble, config.target_spectrum, config.T_target,
                                          config.K_steps);
    fb.entry.S_demon = measured.entry.S_demon;
    ledger.W_extracted = fb.work_extracted;
    ledger.target_return_distance = qcore::trace_distance(fb.final_target, target.state());
    ledger.stages.push_back(fb.entry);

    // Memory re-thermalizes on its flat spectrum: no energy moves.
    StageRecord relax;
    relax.stage = "relax";
    relax.S_demon = ln_dim(n);
    relax.S_target = target.entropy();
    ledger.stages.push_back(relax);

    ledger.net_work_out = ledger.quench_recovered + ledger.W_extracted - ledger.W_d - ledger.W_measurement;
    for (const auto& s : ledger.stages) {
        ledger.total_heat_to_bath += s.heat_to_bath;
    }

    if (ledger.target_return_distance > kInstantTol) {
        throw NumericalError("target not returned to its initial Gibbs state (trace distance " +
                             num(ledger.target_return_distance) + ")");
    }
    // Heat-engine bound; reduces to net <= 0 when both baths share a temperature.
    const double bound = (config.T_target - config.T_demon_reset) * ledger.delta_S_reset;
    if (ledger.net_work_out > bound + kClosureTol) {
        throw TheoremViolation("net work <= (T_target - T_reset) dS_reset",
                               "net " + num(ledger.net_work_out) + " > bound " + num(bound));
    }
    if (config.T_demon_reset == config.T_target && ledger.total_heat_to_bath < -kClosureTol) {
        throw TheoremViolation("cycle heat to bath >= 0", num(ledger.total_heat_to_bath));
    }
    return ledger;
}

MeasurementCostReport measurement_cost_report(const CycleConfig& config) {
    config.validate();
    const int n = config.demon_raised_spectrum.dim();
    const double t = config.T_target;
    const thermo::Spectrum flat = thermo::Spectrum::degenerate(n);
    const CycleLedger ledger = run_full_cycle(config);

    MeasurementCostReport rep{};
    const thermo::GibbsState reset = thermo::gibbs_state(config.demon_raised_spectrum, config.T_demon_reset);
    const double f_reset = thermo::free_energy(reset.state(), config.demon_raised_spectrum, t);
    const double f_flat_eq = -t * ln_dim(n);
    rep.free_energy_store = f_reset - f_flat_eq;
    rep.quench_free_energy_change = thermo::free_energy(reset.state(), flat, t) - f_reset;
    const double s_final = reset.entropy() + ledger.delta_S_demon;
    rep.demon_free_energy_drop = f_reset - (0.0 - t * s_final);
    rep.extracted_work = ledger.quench_recovered + ledger.W_extracted - ledger.W_measurement;
    rep.tolerance = quasistatic_budget(flat, config.demon_raised_spectrum, config.K_steps) + kClosureTol;
    if (rep.extracted_work > rep.demon_free_energy_drop + rep.tolerance) {
        throw TheoremViolation("extracted work <= memory free-energy loss",
                               num(rep.extracted_work) + " > " + num(rep.demon_free_energy_drop));
    }

    // No quench: a thermal memory at the target's temperature pays in heat.
    const thermo::GibbsState thermal = thermo::gibbs_state(config.demon_raised_spectrum, t);
    const thermo::GibbsState target = thermo::gibbs_state(config.target_spectrum, t);
    const measure::MeasurementResult m = measure::perform_measurement(config.measurement, target.state(), thermal.state());
    const qcore::DensityMatrix demon_after = qcore::reduced_demon(m.sigma_tilde);
    rep.no_quench_delta_I = m.ensemble.delta_I();
    rep.no_quench_delta_S_demon = qcore::von_neumann_entropy(demon_after) - thermal.entropy();
    rep.no_quench_heat = thermo::mean_energy(demon_after, config.demon_raised_spectrum) - thermal.mean_energy();
    rep.no_quench_T_delta_I = t * rep.no_quench_delta_I;

    const double headroom = ln_dim(n) - thermal.entropy();
    const double ds = rep.no_quench_delta_S_demon;
    if (ds >= 0.0 && ds < headroom) {
        rep.no_quench_min_heat = thermo::min_heat_for_entropy_increase(config.demon_raised_spectrum, t, ds);
    } else {
        rep.no_quench_min_heat =
            equilibrium_energy_at_entropy(config.demon_raised_spectrum, t, thermal.entropy() + ds) -
            thermal.mean_energy();
    }
    const double heat_tol = 1e-6 * std::max(1.0, std::abs(rep.no_quench_min_heat));
    if (rep.no_quench_heat < rep.no_quench_min_heat - heat_tol) {
        throw TheoremViolation("memory heat >= minimum equilibrium heat",
                               num(rep.no_quench_heat) + " < " + num(rep.no_quench_min_heat));
    }
    if (rep.no_quench_min_heat < t * ds - kInstantTol) {
        throw TheoremViolation("minimum heat >= T dS", num(rep.no_quench_min_heat) + " < " + num(t * ds));
    }
    if (rep.no_quench_heat < rep.no_quench_T_delta_I - kInstantTol) {
        throw TheoremViolation("memory heat >= T dI",
                               num(rep.no_quench_heat) + " < " + num(rep.no_quench_T_delta_I));
    }
    return rep;
}

} // namespace demonlab::demon
