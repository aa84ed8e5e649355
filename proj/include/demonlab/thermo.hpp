#pragma once

// Diagonal Hamiltonians, Gibbs states and slow/fast level-shifting protocols.
// Units: k_B = 1, entropy in nats, energy and temperature dimensionless.

#include <cstdint>
#include <span>
#include <vector>

#include "demonlab/qcore.hpp"

namespace demonlab::thermo {

/// Energy levels of a diagonal Hamiltonian in a fixed basis. The lowest level
/// is always shifted to zero.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> levels);
    static Spectrum degenerate(int dim);

    int dim() const noexcept { return static_cast<int>(levels_.size()); }
    const std::vector<double>& levels() const noexcept { return levels_; }
    double operator[](int k) const { return levels_[static_cast<std::size_t>(k)]; }
    bool is_degenerate() const noexcept;
    double max_level() const noexcept;

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    std::vector<double> levels_;
};

class GibbsState {
public:
    GibbsState(Spectrum spectrum, double temperature);

    const Spectrum& spectrum() const noexcept { return spectrum_; }
    double temperature() const noexcept { return temperature_; }
    const qcore::DensityMatrix& state() const noexcept { return state_; }
    const std::vector<double>& populations() const noexcept { return populations_; }
    double partition() const noexcept { return partition_; }
    double free_energy() const noexcept { return free_energy_; }
    double mean_energy() const noexcept { return mean_energy_; }
    double entropy() const noexcept { return entropy_; }

private:
    Spectrum spectrum_;
    double temperature_;
    std::vector<double> populations_;
    double partition_;
    double free_energy_;
    double mean_energy_;
    double entropy_;
    qcore::DensityMatrix state_;
};

struct IsothermalPath {
    Spectrum start;
    Spectrum end;
    double temperature;
    int steps;
    double work_in;
    double heat_to_bath;
    /// S(Gibbs(end)) - S(Gibbs(start))
    double entropy_change;
    /// <E>(end) - <E>(start) for the equilibrium endpoints
    double mean_energy_change;
    /// F(end) - F(start), the K -> infinity limit of work_in
    double free_energy_change;
};

struct QuenchResult {
    qcore::DensityMatrix state;
    double work_in;
};

GibbsState gibbs_state(const Spectrum& spectrum, double temperature);

/// Tr[rho H] for a Hamiltonian diagonal in the basis of rho.
double mean_energy(const qcore::DensityMatrix& rho, const Spectrum& spectrum);

/// Tr[rho H] - T S(rho).
double free_energy(const qcore::DensityMatrix& rho, const Spectrum& spectrum, double temperature);

/// Temperature T >= t_low at which the Gibbs entropy of `spectrum` equals
/// `target_entropy`. Doubling bracket then bisection to |residual| <= 1e-12.
double temperature_for_entropy(const Spectrum& spectrum, double t_low, double target_entropy);

/// Heat needed to raise the entropy of a Gibbs state by delta_S along the
/// equilibrium family at fixed spectrum: the integral of T dS from T_i to T_f.
/// Trapezoidal in S over a geometric temperature grid of `grid_points` nodes.
double min_heat_for_entropy_increase(const Spectrum& spectrum, double t_initial, double delta_S,
                                     int grid_points = 4001);

/// Linear level ramp start -> end in K shift-then-thermalize steps at
/// temperature T, starting from Gibbs(start, T).
IsothermalPath quasistatic_isothermal(const Spectrum& start, const Spectrum& end, double temperature, int steps);

/// Instantaneous level change; the state is untouched. Requires a state
/// diagonal in the energy basis.
QuenchResult quench(const Spectrum& from, const Spectrum& to, const qcore::DensityMatrix& state);

/// Random diagonal states with the same mean energy as Gibbs(spectrum, T).
/// Draws along random directions inside the fixed-energy slice of the
/// simplex and rejects draws that leave it.
std::vector<std::vector<double>> sample_states_at_mean_energy(const Spectrum& spectrum, double temperature,
                                                              int count, std::uint64_t seed);

} // namespace demonlab::thermo
