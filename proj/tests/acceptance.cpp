// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "demonlab/demon.hpp"
#include "demonlab/errors.hpp"
#include "demonlab/measure.hpp"
#include "demonlab/qcore.hpp"
#include "demonlab/runner.hpp"
#include "demonlab/thermo.hpp"
#include "test_support.hpp"

using namespace demonlab;
using qcore::DensityMatrix;
using thermo::Spectrum;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

DensityMatrix diag(const std::vector<double>& p) {
    return DensityMatrix::from_populations(p);
}

std::vector<double> random_levels(std::mt19937_64& rng, int dim, double hi) {
    std::uniform_real_distribution<double> u(0.0, hi);
    std::vector<double> e(static_cast<std::size_t>(dim));
    e[0] = 0.0;
    for (int k = 1; k < dim; ++k) {
        e[static_cast<std::size_t>(k)] = u(rng);
    }
    return e;
}

measure::CorrelationTable permutation_table(std::mt19937_64& rng, int m_dim, int n_dim) {
    std::vector<int> images(static_cast<std::size_t>(m_dim * n_dim));
    std::iota(images.begin(), images.end(), 0);
    std::shuffle(images.begin(), images.end(), rng);
    return [images, n_dim](int m, int n) {
        const int j = images[static_cast<std::size_t>(m * n_dim + n)];
        return measure::JointIndex{j / n_dim, j % n_dim};
    };
}

double bisect_temperature(const std::vector<double>& levels, double target) {
    double lo = std::log(1e-4);
    double hi = std::log(1e7);
    for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oracle::gibbs_oracle(levels, std::exp(mid)).entropy < target ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

demon::CycleConfig cycle(Spectrum target, Spectrum memory, double t, double t_r, measure::MeasurementModel m,
                         int k = 10000) {
    return demon::CycleConfig{std::move(target), std::move(memory), t, t_r, std::move(m), k};
}

// Criteria 1 and 3 share their trials.
struct HaarSweep {
    int trials = 0;
    int exchange_failures = 0;
    int ando_failures = 0;
    double worst_exchange = INFINITY;
    double worst_ando = INFINITY;
};

HaarSweep haar_sweep() {
    HaarSweep s;
    std::mt19937_64 rng(1);
    for (int m = 2; m <= 4; ++m) {
        for (int n = 2; n <= 4; ++n) {
            for (int t = 0; t < 1000; ++t) {
                ++s.trials;
                const auto model = measure::haar_measurement(m, n, rng());
                const DensityMatrix rho_t = diag(oracle::random_simplex(rng, m));
                const DensityMatrix rho_d = diag(oracle::random_simplex(rng, n));
                try {
                    const auto res = measure::perform_measurement(model, rho_t, rho_d);
                    const double s_u = oracle::entropy_oracle(res.sigma_u.matrix());
                    const double s_tilde = oracle::entropy_oracle(res.sigma_tilde.matrix());
                    const double ando = s_tilde - s_u;
                    s.worst_ando = std::min(s.worst_ando, ando);
                    s.ando_failures += ando < -1e-10;

                    const auto r = measure::entropy_exchange_report(model, rho_t, rho_d);
                    const double slack = r.delta_S_d + r.delta_S_t;
                    s.worst_exchange = std::min(s.worst_exchange, slack);
                    s.exchange_failures += slack < -1e-9;
                } catch (const TheoremViolation&) {
                    ++s.exchange_failures;
                    ++s.ando_failures;
                }
            }
        }
    }
    return s;
}

Outcome criterion_classical_equality() {
    Outcome o;
    std::mt19937_64 rng(2);
    double worst = 0.0;
    int trials = 0;
    for (int t = 0; t < 180; ++t) {
        const int m = 2 + t % 3;
        const int n = 2 + (t / 3) % 3;
        const auto model = measure::classical_correlating_unitary(permutation_table(rng, m, n), m, n);
        std::uniform_int_distribution<int> pick(0, n - 1);
        const auto r = measure::entropy_exchange_report(model, diag(oracle::random_simplex(rng, m)),
                                                        DensityMatrix::basis_state(n, pick(rng)));
        worst = std::max(worst, std::abs(r.S_0 - (r.avg_S_t_fin + r.S_d_fin)));
        ++trials;
    }
    o.pass = worst <= 1e-9;
    o.detail = std::to_string(trials) + " permutations, max |S_0 - (<S_t_fin> + S_d_fin)| = " + fmt("%.3g", worst);
    return o;
}

Outcome criterion_min_heat_bound() {
    Outcome o;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> temp(0.2, 4.0);
    std::uniform_real_distribution<double> frac(0.02, 0.9);
    double worst_bound = INFINITY;
    double worst_rel = 0.0;
    int cells = 0;
    for (int spectrum = 0; spectrum < 8; ++spectrum) {
        const auto levels = random_levels(rng, 2 + spectrum % 2, 3.0);
        for (int cell = 0; cell < 8; ++cell) {
            const double t_i = temp(rng);
            const auto g = oracle::gibbs_oracle(levels, t_i);
            const double ds = frac(rng) * (std::log(static_cast<double>(levels.size())) - g.entropy);
            const double q = thermo::min_heat_for_entropy_increase(Spectrum(levels), t_i, ds);
            const double t_f = bisect_temperature(levels, g.entropy + ds);
            const double oracle_q = oracle::gibbs_oracle(levels, t_f).mean - g.mean;
            worst_bound = std::min(worst_bound, q - t_i * ds);
            worst_rel = std::max(worst_rel, std::abs(q - oracle_q) / std::max(std::abs(oracle_q), 1e-300));
            ++cells;
        }
    }
    o.pass = worst_bound >= -1e-9 && worst_rel <= 1e-6;
    o.detail = std::to_string(cells) + " cells, min(Q - T_i dS) = " + fmt("%.3g", worst_bound) +
               ", max rel |Q - d<E>| = " + fmt("%.3g", worst_rel);
    return o;
}

Outcome criterion_reset_work() {
    Outcome o;
    const double t = 1.0;
    const std::vector<std::vector<double>> spectra{{0.0, 1.0}, {0.0, 2.0}, {0.0, 0.5, 1.5}, {0.0, 1.0, 1.0, 2.0}};
    double worst_df = 0.0;
    double worst_split = 0.0;
    double min_order = INFINITY;
    double max_order = -INFINITY;
    for (const auto& e : spectra) {
        const Spectrum raised(e);
        const Spectrum flat = Spectrum::degenerate(raised.dim());
        const auto path = thermo::quasistatic_isothermal(flat, raised, t, 10000);
        const auto g = oracle::gibbs_oracle(e, t);
        const double df = g.free_energy + t * std::log(static_cast<double>(e.size()));
        worst_df = std::max(worst_df, std::abs(path.work_in - df) / std::abs(df));

        const auto model = measure::classical_correlating_unitary(measure::identity_table(), 2, raised.dim());
        const auto reset = demon::run_reset_stage(cycle(Spectrum::degenerate(2), raised, t, t, model));
        const double split = g.mean + t * (std::log(static_cast<double>(e.size())) - g.entropy);
        worst_split = std::max(worst_split, std::abs(reset.path.work_in - split) / std::abs(split));

        const double e1 = thermo::quasistatic_isothermal(flat, raised, t, 2500).work_in - df;
        const double e2 = thermo::quasistatic_isothermal(flat, raised, t, 5000).work_in - df;
        const double e3 = thermo::quasistatic_isothermal(flat, raised, t, 10000).work_in - df;
        for (double order : {std::log2(e1 / e2), std::log2(e2 / e3)}) {
            min_order = std::min(min_order, order);
            max_order = std::max(max_order, order);
        }
    }
    o.pass = worst_df <= 1e-4 && worst_split <= 1e-4 && min_order >= 0.8 && max_order <= 1.2;
    o.detail = "max rel |W - dF| = " + fmt("%.3g", worst_df) + ", max rel |W_d - (<E> + T dS)| = " +
               fmt("%.3g", worst_split) + ", order in [" + fmt("%.3f", min_order) + ", " + fmt("%.3f", max_order) + "]";
    return o;
}

Outcome criterion_extraction_value() {
    Outcome o;
    double worst = 0.0;
    std::ostringstream cases;
    for (int d : {2, 4}) {
        std::vector<double> memory(static_cast<std::size_t>(d));
        std::iota(memory.begin(), memory.end(), 0.0);
        for (const char* name : {"cnot", "swap"}) {
            const auto table = std::string(name) == "cnot" ? measure::cnot_table(d) : measure::swap_table();
            const auto model = measure::classical_correlating_unitary(table, d, d);
            const auto l = demon::run_full_cycle(cycle(Spectrum::degenerate(d), Spectrum(memory), 1.0, 1.0, model));
            const double t_di = 1.0 * l.delta_I;
            const double err = std::abs(l.W_extracted - t_di) / std::max(1.0, t_di);
            worst = std::max(worst, err);
            o.pass = o.pass && err <= 1e-4;
        }
    }
    o.detail = "(2,2),(4,4) x {cnot, swap}, max |W_ext - T dI| / max(1, T dI) = " + fmt("%.3g", worst);
    return o;
}

Outcome criterion_closure() {
    Outcome o;
    std::mt19937_64 rng(7);
    double max_net = -INFINITY;
    int configs = 0;
    int failures = 0;
    auto check = [&](const demon::CycleConfig& c) {
        ++configs;
        try {
            const auto l = demon::run_full_cycle(c);
            max_net = std::max(max_net, l.net_work_out);
            failures += l.net_work_out > 1e-6;
        } catch (const Error&) {
            ++failures;
        }
    };
    const std::vector<std::pair<int, int>> dims{{2, 2}, {2, 3}, {3, 2}, {2, 4}, {4, 2}, {3, 3}, {4, 4}};
    for (int i = 0; i < 100; ++i) {
        const auto [m, n] = dims[static_cast<std::size_t>(i) % dims.size()];
        check(cycle(Spectrum(random_levels(rng, m, 2.0)), Spectrum(random_levels(rng, n, 4.0)), 1.0, 1.0,
                    measure::haar_measurement(m, n, rng())));
    }
    for (int d : {2, 3}) {
        for (const auto& table : {measure::identity_table(), measure::cnot_table(d), measure::swap_table()}) {
            check(cycle(Spectrum::degenerate(d), Spectrum(random_levels(rng, d, 3.0)), 1.0, 1.0,
                        measure::classical_correlating_unitary(table, d, d)));
        }
    }
    const auto tight = demon::run_full_cycle(cycle(Spectrum::degenerate(2), Spectrum({0.0, 20.0}), 1.0, 1.0,
                                                   measure::classical_correlating_unitary(measure::swap_table(), 2, 2)));
    const bool tight_ok = tight.net_work_out >= -0.01 * tight.W_d && tight.net_work_out <= 1e-6;
    o.pass = failures == 0 && tight_ok;
    o.detail = std::to_string(configs) + " configs, max net = " + fmt("%.3g", max_net) +
               ", swap gap 20T net = " + fmt("%.3g", tight.net_work_out) + " (>= " + fmt("%.3g", -0.01 * tight.W_d) + ")";
    return o;
}

Outcome criterion_cold_bath() {
    Outcome o;
    const double t = 1.0;
    std::vector<double> nets;
    for (double t_r : {t / 4, t / 2, t}) {
        const auto l = demon::run_full_cycle(cycle(Spectrum::degenerate(2), Spectrum({0.0, 20.0}), t, t_r,
                                                   measure::classical_correlating_unitary(measure::swap_table(), 2, 2)));
        nets.push_back(l.net_work_out);
    }
    o.pass = nets[0] > 0 && nets[1] > 0 && nets[0] >= nets[1] && nets[1] >= nets[2] && nets[2] <= 1e-6;
    o.detail = "net at T_r = T/4, T/2, T: " + fmt("%.6g", nets[0]) + ", " + fmt("%.6g", nets[1]) + ", " +
               fmt("%.3g", nets[2]);
    return o;
}

Outcome criterion_boltzmann() {
    Outcome o;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> temp(0.3, 3.0);
    double worst = INFINITY;
    int total = 0;
    for (int s = 0; s < 10; ++s) {
        const auto levels = random_levels(rng, 3 + s % 3, 3.0);
        const double t = temp(rng);
        const double s_gibbs = oracle::gibbs_oracle(levels, t).entropy;
        const auto samples = thermo::sample_states_at_mean_energy(Spectrum(levels), t, 1000, rng());
        for (const auto& p : samples) {
            double s_p = 0.0;
            for (double x : p) {
                if (x > 0) {
                    s_p -= x * std::log(x);
                }
            }
            worst = std::min(worst, s_gibbs - s_p);
            ++total;
        }
    }
    o.pass = worst >= -1e-9 && total >= 10000;
    o.detail = std::to_string(total) + " samples over 10 spectra, min(S_Gibbs - S) = " + fmt("%.3g", worst);
    return o;
}

Outcome criterion_determinism() {
    Outcome o;
    const char* configs[] = {
        R"({"scenario": "entropy_exchange_sweep", "dims": [3, 4], "measurement": {"type": "haar"}, "trials": 40, "seed": 5})",
        R"({"scenario": "eq1_bound_grid", "dims": [3, 2], "trials": 20, "seed": 6})",
        R"({"scenario": "full_cycle", "measurement": {"type": "haar"}, "target_spectrum": [0, 1.2],
            "demon_spectrum": [0, 2.5], "trials": 4, "k_steps": 2000, "seed": 7})",
        R"({"scenario": "cold_bath_cycle", "temperatures": [1, 0.5], "demon_spectrum": [0, 20],
            "measurement": {"type": "classical", "table": "swap"}, "trials": 2, "k_steps": 2000, "seed": 8})",
        R"({"scenario": "boltzmann_maximality", "dims": [4, 2], "trials": 3, "samples": 300, "seed": 9})"};
    int mismatches = 0;
    for (const char* text : configs) {
        const auto c = runner::parse_config(text);
        std::ostringstream a;
        std::ostringstream b;
        std::ostringstream threaded;
        runner::write_csv(a, runner::run_scenario(c).records);
        runner::write_csv(b, runner::run_scenario(c).records);
        runner::write_csv(threaded, runner::run_scenario(c, 4).records);
        mismatches += a.str() != b.str() || a.str() != threaded.str();
    }
    o.pass = mismatches == 0;
    o.detail = "5 scenarios re-run serially and on 4 threads, " + std::to_string(mismatches) + " CSV mismatches";
    return o;
}

Outcome guarded(const std::function<Outcome()>& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return Outcome{false, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    };

    HaarSweep sweep;
    const Outcome sweep_error = guarded([&] {
        sweep = haar_sweep();
        return Outcome{};
    });
    Outcome c1 = sweep_error;
    Outcome c3 = sweep_error;
    if (sweep_error.pass) {
        c1 = {sweep.exchange_failures == 0 && sweep.trials >= 9000,
              std::to_string(sweep.trials) + " Haar trials over (M,N) in {2,3,4}^2, " +
                  std::to_string(sweep.exchange_failures) + " failures, min slack = " + fmt("%.3g", sweep.worst_exchange)};
        c3 = {sweep.ando_failures == 0,
              std::to_string(sweep.ando_failures) + " failures, min S(avg) - S(U) = " + fmt("%.3g", sweep.worst_ando)};
    }
    report(1, "entropy exchange", c1);
    report(2, "classical equality", guarded(criterion_classical_equality));
    report(3, "projection non-decrease", c3);
    report(4, "minimum heat bound", guarded(criterion_min_heat_bound));
    report(5, "reset work", guarded(criterion_reset_work));
    report(6, "extraction value", guarded(criterion_extraction_value));
    report(7, "cycle closure", guarded(criterion_closure));
    report(8, "cold bath", guarded(criterion_cold_bath));
    report(9, "Boltzmann maximality", guarded(criterion_boltzmann));
    report(10, "determinism", guarded(criterion_determinism));

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of 10 criteria passed in %.1f s\n", 10 - failures, secs);
    return failures == 0 ? 0 : 1;
}
