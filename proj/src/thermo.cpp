#include "demonlab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "demonlab/errors.hpp"

namespace demonlab::thermo {

namespace {

constexpr double kFreeEnergyConsistencyTol = 1e-10;
constexpr double kEntropyResidualTol = 1e-12;
constexpr int kMaxBisection = 200;
constexpr int kMaxDoubling = 200;

void require_temperature(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw TemperatureError("temperature must be positive and finite, got " + std::to_string(t));
    }
}

// Gibbs populations for raw (not necessarily anchored) levels.
std::vector<double> boltzmann_weights(std::span<const double> levels, double t) {
    const double e0 = *std::min_element(levels.begin(), levels.end());
    std::vector<double> p(levels.size());
    double z = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        p[k] = std::exp(-(levels[k] - e0) / t);
        z += p[k];
    }
    for (double& x : p) {
        x /= z;
    }
    return p;
}

std::vector<double> thermal_populations(const Spectrum& spectrum, double t) {
    require_temperature(t);
    return boltzmann_weights(spectrum.levels(), t);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double gibbs_entropy(const Spectrum& spectrum, double t) {
    const auto p = boltzmann_weights(spectrum.levels(), t);
    return qcore::shannon_entropy(p);
}

} // namespace

// ---------------------------------------------------------------------------
// Spectrum

Spectrum::Spectrum(std::vector<double> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) {
        throw ArgumentError("spectrum must have at least one level");
    }
    for (double e : levels_) {
        if (!std::isfinite(e)) {
            throw ArgumentError("spectrum levels must be finite");
        }
    }
    const double e0 = *std::min_element(levels_.begin(), levels_.end());
    for (double& e : levels_) {
        e -= e0;
    }
}

Spectrum Spectrum::degenerate(int dim) {
    if (dim < 1) {
        throw ArgumentError("spectrum dimension must be >= 1");
    }
    return Spectrum(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
}

bool Spectrum::is_degenerate() const noexcept {
    return max_level() == 0.0;
}

double Spectrum::max_level() const noexcept {
    return *std::max_element(levels_.begin(), levels_.end());
}

// ---------------------------------------------------------------------------
// Gibbs states

GibbsState::GibbsState(Spectrum spectrum, double temperature)
    : spectrum_(std::move(spectrum)),
      temperature_(temperature),
      populations_(thermal_populations(spectrum_, temperature)),
      state_(qcore::DensityMatrix::from_populations(populations_)) {
    partition_ = 0.0;
    for (double e : spectrum_.levels()) {
        partition_ += std::exp(-e / temperature_);
    }
    free_energy_ = -temperature_ * std::log(partition_);
    mean_energy_ = dot(populations_, spectrum_.levels());
    entropy_ = qcore::shannon_entropy(populations_);
    const double mismatch = std::abs(free_energy_ - (mean_energy_ - temperature_ * entropy_));
    if (mismatch > kFreeEnergyConsistencyTol * std::max(1.0, std::abs(free_energy_))) {
        throw NumericalError("Gibbs state F != <E> - T S (mismatch " + std::to_string(mismatch) + ")");
    }
}

GibbsState gibbs_state(const Spectrum& spectrum, double temperature) {
    return GibbsState(spectrum, temperature);
}

double mean_energy(const qcore::DensityMatrix& rho, const Spectrum& spectrum) {
    if (rho.dim() != spectrum.dim()) {
        throw ArgumentError("mean_energy: dimension mismatch");
    }
    return dot(rho.populations(), spectrum.levels());
}

double free_energy(const qcore::DensityMatrix& rho, const Spectrum& spectrum, double temperature) {
    require_temperature(temperature);
    return mean_energy(rho, spectrum) - temperature * qcore::von_neumann_entropy(rho);
}

// ---------------------------------------------------------------------------
// Heat along the equilibrium family

double temperature_for_entropy(const Spectrum& spectrum, double t_low, double target_entropy) {
    require_temperature(t_low);
    double s_low = gibbs_entropy(spectrum, t_low);
    if (target_entropy <= s_low) {
        return t_low;
    }
    if (target_entropy >= std::log(static_cast<double>(spectrum.dim()))) {
        throw DomainError("entropy " + std::to_string(target_entropy) +
                          " is not reachable by a finite-temperature Gibbs state");
    }
    double lo = t_low;
    double hi = t_low;
    int doublings = 0;
    while (gibbs_entropy(spectrum, hi) < target_entropy) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kMaxDoubling) {
            throw NumericalError("temperature bracket search did not converge");
        }
    }
    for (int iter = 0; iter < kMaxBisection; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double residual = gibbs_entropy(spectrum, mid) - target_entropy;
        if (std::abs(residual) <= kEntropyResidualTol) {
            return mid;
        }
        if (residual < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw NumericalError("entropy bisection did not converge within 200 iterations");
}

double min_heat_for_entropy_increase(const Spectrum& spectrum, double t_initial, double delta_S, int grid_points) {
    require_temperature(t_initial);
    if (delta_S < 0.0) {
        throw DomainError("entropy increase must be nonnegative");
    }
    if (delta_S == 0.0) {
        return 0.0;
    }
    const double s_initial = gibbs_entropy(spectrum, t_initial);
    const double headroom = std::log(static_cast<double>(spectrum.dim())) - s_initial;
    if (delta_S >= headroom) {
        throw DomainError("entropy increase " + std::to_string(delta_S) + " exceeds the reachable headroom " +
                          std::to_string(headroom));
    }
    const double t_final = temperature_for_entropy(spectrum, t_initial, s_initial + delta_S);

    const int n = std::max(grid_points, 1000);
    const double log_ratio = std::log(t_final / t_initial);
    double heat = 0.0;
    double t_prev = t_initial;
    double s_prev = s_initial;
    for (int k = 1; k < n; ++k) {
        const double t = k == n - 1 ? t_final : t_initial * std::exp(log_ratio * k / (n - 1));
        const double s = gibbs_entropy(spectrum, t);
        heat += 0.5 * (t + t_prev) * (s - s_prev);
        t_prev = t;
        s_prev = s;
    }
    return heat;
}

// ---------------------------------------------------------------------------
// Level-shifting protocols

IsothermalPath quasistatic_isothermal(const Spectrum& start, const Spectrum& end, double temperature, int steps) {
    require_temperature(temperature);
    if (start.dim() != end.dim()) {
        throw ArgumentError("quasistatic_isothermal: spectra have different dimensions");
    }
    if (steps < 1) {
        throw ArgumentError("quasistatic_isothermal: steps must be >= 1");
    }
    const auto dim = static_cast<std::size_t>(start.dim());
    const auto& a = start.levels();
    const auto& b = end.levels();

    std::vector<double> levels = a;
    std::vector<double> next(dim);
    std::vector<double> pop = boltzmann_weights(levels, temperature);
    double work_in = 0.0;
    double heat_from_bath = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double lambda = static_cast<double>(k + 1) / steps;
        for (std::size_t i = 0; i < dim; ++i) {
            next[i] = a[i] + lambda * (b[i] - a[i]);
        }
        // Shift with the populations frozen.
        double shifted_energy = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            work_in += pop[i] * (next[i] - levels[i]);
            shifted_energy += pop[i] * next[i];
        }
        // Re-thermalize at the new levels.
        pop = boltzmann_weights(next, temperature);
        heat_from_bath += dot(pop, next) - shifted_energy;
        levels.swap(next);
    }

    const GibbsState g0(start, temperature);
    const GibbsState g1(end, temperature);
    return IsothermalPath{start,
                          end,
                          temperature,
                          steps,
                          work_in,
                          -heat_from_bath,
                          g1.entropy() - g0.entropy(),
                          g1.mean_energy() - g0.mean_energy(),
                          g1.free_energy() - g0.free_energy()};
}

QuenchResult quench(const Spectrum& from, const Spectrum& to, const qcore::DensityMatrix& state) {
    if (from.dim() != to.dim() || state.dim() != from.dim()) {
        throw ArgumentError("quench: dimension mismatch");
    }
    if (!state.is_diagonal()) {
        throw PreconditionError("quench: state must be diagonal in the energy basis");
    }
    const auto p = state.populations();
    double work = 0.0;
    for (int k = 0; k < from.dim(); ++k) {
        work += p[static_cast<std::size_t>(k)] * (to[k] - from[k]);
    }
    return QuenchResult{state, work};
}

// ---------------------------------------------------------------------------
// Fixed-energy sampling

std::vector<std::vector<double>> sample_states_at_mean_energy(const Spectrum& spectrum, double temperature,
                                                              int count, std::uint64_t seed) {
    const GibbsState g(spectrum, temperature);
    const auto dim = static_cast<std::size_t>(spectrum.dim());
    const std::vector<double>& center = g.populations();

    // Orthonormal basis of span{1, E}; directions are drawn orthogonal to it.
    std::vector<std::vector<double>> constraints;
    constraints.emplace_back(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    {
        std::vector<double> e = spectrum.levels();
        const double c = dot(e, constraints[0]);
        for (std::size_t i = 0; i < dim; ++i) {
            e[i] -= c * constraints[0][i];
        }
        const double nrm = std::sqrt(dot(e, e));
        if (nrm > 1e-12) {
            for (double& x : e) {
                x /= nrm;
            }
            constraints.push_back(std::move(e));
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    std::vector<std::vector<double>> samples;
    samples.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(samples.size()) < count) {
        std::vector<double> v(dim);
        for (double& x : v) {
            x = normal(rng);
        }
        for (const auto& u : constraints) {
            const double c = dot(v, u);
            for (std::size_t i = 0; i < dim; ++i) {
                v[i] -= c * u[i];
            }
        }
        const double nrm = std::sqrt(dot(v, v));
        if (nrm < 1e-12) {
            // The slice is a single point (e.g. a qubit): only the Gibbs state itself.
            samples.push_back(center);
            continue;
        }
        double t_plus = std::numeric_limits<double>::infinity();
        double t_minus = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dim; ++i) {
            v[i] /= nrm;
            if (v[i] < 0.0) {
                t_plus = std::min(t_plus, center[i] / -v[i]);
            } else if (v[i] > 0.0) {
                t_minus = std::min(t_minus, center[i] / v[i]);
            }
        }
        const double reach = std::max(t_plus, t_minus);
        const double t = reach * uniform(rng);
        if (t > t_plus || -t > t_minus) {
            continue;
        }
        std::vector<double> p(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            p[i] = std::max(center[i] + t * v[i], 0.0);
        }
        samples.push_back(std::move(p));
    }
    return samples;
}

} // namespace demonlab::thermo
