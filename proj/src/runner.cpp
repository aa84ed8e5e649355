#include "demonlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "demonlab/demon.hpp"
#include "demonlab/measure.hpp"
#include "demonlab/qcore.hpp"
#include "demonlab/thermo.hpp"

namespace demonlab::runner {

using json = nlohmann::json;

namespace {

constexpr std::pair<Scenario, const char*> kScenarioNames[] = {
    {Scenario::entropy_exchange_sweep, "entropy_exchange_sweep"},
    {Scenario::eq1_bound_grid, "eq1_bound_grid"},
    {Scenario::full_cycle, "full_cycle"},
    {Scenario::cold_bath_cycle, "cold_bath_cycle"},
    {Scenario::boltzmann_maximality, "boltzmann_maximality"},
};

Scenario scenario_from_string(const std::string& name) {
    for (const auto& [s, n] : kScenarioNames) {
        if (name == n) {
            return s;
        }
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

std::vector<double> random_populations(std::mt19937_64& rng, int dim) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(static_cast<std::size_t>(dim));
    double total = 0.0;
    for (double& x : p) {
        x = expo(rng);
        total += x;
    }
    for (double& x : p) {
        x /= total;
    }
    return p;
}

std::vector<double> random_levels(std::mt19937_64& rng, int dim, double max_level) {
    std::uniform_real_distribution<double> u(0.0, max_level);
    std::vector<double> e(static_cast<std::size_t>(dim));
    for (double& x : e) {
        x = u(rng);
    }
    return e;
}

measure::MeasurementModel build_measurement(const ScenarioConfig& c, std::uint64_t haar_seed) {
    if (c.measurement.kind == MeasurementSpec::Kind::haar) {
        return measure::haar_measurement(c.M, c.N, haar_seed);
    }
    const std::string& t = c.measurement.table;
    if (t == "identity") {
        return measure::classical_correlating_unitary(measure::identity_table(), c.M, c.N);
    }
    if (t == "cnot") {
        return measure::classical_correlating_unitary(measure::cnot_table(c.N), c.M, c.N);
    }
    if (t == "swap") {
        return measure::classical_correlating_unitary(measure::swap_table(), c.M, c.N);
    }
    const auto images = c.measurement.explicit_images;
    const int n_dim = c.N;
    return measure::classical_correlating_unitary(
        [&images, n_dim](int m, int n) {
            const auto& im = images[static_cast<std::size_t>(m * n_dim + n)];
            return measure::JointIndex{im.first, im.second};
        },
        c.M, c.N);
}

std::vector<double> target_levels(const ScenarioConfig& c) {
    return c.target_spectrum.empty() ? std::vector<double>(static_cast<std::size_t>(c.M), 0.0) : c.target_spectrum;
}

std::vector<double> demon_levels(const ScenarioConfig& c) {
    if (!c.demon_spectrum.empty()) {
        return c.demon_spectrum;
    }
    std::vector<double> e(static_cast<std::size_t>(c.N), 2.0);
    e[0] = 0.0;
    return e;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

const char* to_string(Scenario s) {
    for (const auto& [sc, n] : kScenarioNames) {
        if (sc == s) {
            return n;
        }
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Configuration

ScenarioConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    reject_unknown_keys(doc,
                        {"scenario", "dims", "temperatures", "target_spectrum", "demon_spectrum", "measurement",
                         "trials", "k_steps", "seed", "samples", "tolerances"},
                        "config");

    ScenarioConfig c;
    try {
        if (!doc.contains("scenario")) {
            throw ConfigError("missing required key 'scenario'");
        }
        c.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
        if (doc.contains("dims")) {
            const auto dims = doc.at("dims").get<std::vector<int>>();
            if (dims.size() != 2) {
                throw ConfigError("'dims' must be [M, N]");
            }
            c.M = dims[0];
            c.N = dims[1];
        }
        if (doc.contains("temperatures")) {
            const auto temps = doc.at("temperatures").get<std::vector<double>>();
            if (temps.size() != 2) {
                throw ConfigError("'temperatures' must be [T_target, T_demon_reset]");
            }
            c.T_target = temps[0];
            c.T_demon_reset = temps[1];
        }
        if (doc.contains("target_spectrum")) {
            c.target_spectrum = doc.at("target_spectrum").get<std::vector<double>>();
        }
        if (doc.contains("demon_spectrum")) {
            c.demon_spectrum = doc.at("demon_spectrum").get<std::vector<double>>();
        }
        if (doc.contains("measurement")) {
            const json& m = doc.at("measurement");
            if (!m.is_object()) {
                throw ConfigError("'measurement' must be an object");
            }
            reject_unknown_keys(m, {"type", "table"}, "measurement");
            const std::string type = m.value("type", std::string("classical"));
            if (type == "haar") {
                c.measurement.kind = MeasurementSpec::Kind::haar;
                if (m.contains("table")) {
                    throw ConfigError("haar measurement takes no table");
                }
            } else if (type == "classical") {
                c.measurement.kind = MeasurementSpec::Kind::classical;
                if (m.contains("table")) {
                    const json& t = m.at("table");
                    if (t.is_string()) {
                        c.measurement.table = t.get<std::string>();
                    } else {
                        c.measurement.table = "explicit";
                        for (const auto& pair : t) {
                            const auto v = pair.get<std::vector<int>>();
                            if (v.size() != 2) {
                                throw ConfigError("explicit table entries must be [m, n]");
                            }
                            c.measurement.explicit_images.emplace_back(v[0], v[1]);
                        }
                    }
                }
            } else {
                throw ConfigError("unknown measurement type '" + type + "'");
            }
        }
        if (doc.contains("trials")) {
            c.trials = doc.at("trials").get<int>();
        }
        if (doc.contains("k_steps")) {
            c.k_steps = doc.at("k_steps").get<int>();
        }
        if (doc.contains("samples")) {
            c.samples = doc.at("samples").get<int>();
        }
        if (doc.contains("seed")) {
            const json& s = doc.at("seed");
            if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
                throw ConfigError("'seed' must be a nonnegative integer");
            }
            c.seed = s.get<std::uint64_t>();
        }
        if (doc.contains("tolerances")) {
            const json& t = doc.at("tolerances");
            reject_unknown_keys(t, {"exchange", "closure", "eq1_bound", "eq1_oracle_rel", "boltzmann"}, "tolerances");
            c.tolerances.exchange = t.value("exchange", c.tolerances.exchange);
            c.tolerances.closure = t.value("closure", c.tolerances.closure);
            c.tolerances.eq1_bound = t.value("eq1_bound", c.tolerances.eq1_bound);
            c.tolerances.eq1_oracle_rel = t.value("eq1_oracle_rel", c.tolerances.eq1_oracle_rel);
            c.tolerances.boltzmann = t.value("boltzmann", c.tolerances.boltzmann);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    validate(c);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ScenarioConfig& c) {
    if (c.M < 2 || c.N < 2) {
        throw ConfigError("dims must be >= 2 each");
    }
    if (c.M * c.N > qcore::kDefaultMaxJointDim) {
        throw ConfigError("joint dimension M*N = " + std::to_string(c.M * c.N) + " exceeds cap 64");
    }
    if (c.trials < 1) {
        throw ConfigError("trials must be >= 1");
    }
    if (c.k_steps < 1) {
        throw ConfigError("k_steps must be >= 1");
    }
    if (c.samples < 1) {
        throw ConfigError("samples must be >= 1");
    }
    if (!(c.T_target > 0.0) || !(c.T_demon_reset > 0.0) || !std::isfinite(c.T_target) ||
        !std::isfinite(c.T_demon_reset)) {
        throw ConfigError("temperatures must be positive and finite (zero-temperature baths are not supported)");
    }
    if (!c.target_spectrum.empty() && static_cast<int>(c.target_spectrum.size()) != c.M) {
        throw ConfigError("target_spectrum length must equal M");
    }
    if (!c.demon_spectrum.empty() && static_cast<int>(c.demon_spectrum.size()) != c.N) {
        throw ConfigError("demon_spectrum length must equal N");
    }
    for (const auto* levels : {&c.target_spectrum, &c.demon_spectrum}) {
        for (double e : *levels) {
            if (!std::isfinite(e)) {
                throw ConfigError("spectrum levels must be finite");
            }
        }
    }
    if (c.measurement.kind == MeasurementSpec::Kind::classical) {
        const std::string& t = c.measurement.table;
        if (t == "swap" && c.M != c.N) {
            throw ConfigError("swap table requires M == N");
        }
        if (t == "explicit") {
            if (static_cast<int>(c.measurement.explicit_images.size()) != c.M * c.N) {
                throw ConfigError("explicit table must list M*N images");
            }
            try {
                build_measurement(c, 0);
            } catch (const Error& e) {
                throw ConfigError(std::string("explicit table: ") + e.what());
            }
        } else if (t != "identity" && t != "cnot" && t != "swap") {
            throw ConfigError("unknown classical table '" + t + "'");
        }
    }
    if (c.scenario == Scenario::cold_bath_cycle && !(c.T_demon_reset < c.T_target)) {
        throw ConfigError("cold_bath_cycle requires T_demon_reset < T_target");
    }
    if (c.tolerances.exchange < 0 || c.tolerances.closure < 0 || c.tolerances.eq1_bound < 0 ||
        c.tolerances.eq1_oracle_rel < 0 || c.tolerances.boltzmann < 0) {
        throw ConfigError("tolerances must be nonnegative");
    }
}

// ---------------------------------------------------------------------------
// Trials

bool judge(const TrialRecord& r, const Tolerances& tol) {
    auto has = [](const std::optional<double>& v) { return v.has_value() && std::isfinite(*v); };
    switch (r.scenario) {
    case Scenario::entropy_exchange_sweep:
        return has(r.slack_exchange) && *r.slack_exchange >= -tol.exchange;
    case Scenario::eq1_bound_grid: {
        if (!has(r.slack_exchange) || !has(r.W_d) || !has(r.E_mean_raised)) {
            return false;
        }
        const double oracle = *r.E_mean_raised;
        const bool bound = *r.slack_exchange >= -tol.eq1_bound;
        const bool agree = std::abs(*r.W_d - oracle) <= tol.eq1_oracle_rel * std::max(std::abs(oracle), 1e-12);
        return bound && agree;
    }
    case Scenario::full_cycle:
    case Scenario::cold_bath_cycle: {
        if (!has(r.slack_exchange) || !has(r.net_work_out) || !has(r.S_d) || !has(r.T_target) ||
            !has(r.T_demon_reset)) {
            return false;
        }
        const double ds_reset = std::log(static_cast<double>(r.N)) - *r.S_d;
        const double bound = (*r.T_target - *r.T_demon_reset) * ds_reset;
        bool ok = *r.slack_exchange >= -tol.exchange && *r.net_work_out <= bound + tol.closure;
        if (r.scenario == Scenario::cold_bath_cycle) {
            ok = ok && *r.net_work_out > 0.0;
        }
        return ok;
    }
    case Scenario::boltzmann_maximality:
        return has(r.slack_exchange) && *r.slack_exchange >= -tol.boltzmann;
    }
    return false;
}

TrialRecord run_trial(const ScenarioConfig& c, int trial) {
    TrialRecord r;
    r.trial = trial;
    r.seed = c.seed + static_cast<std::uint64_t>(trial);
    r.scenario = c.scenario;
    r.M = c.M;
    r.N = c.N;
    std::mt19937_64 rng(r.seed);
    const std::uint64_t haar_seed = rng();

    try {
        switch (c.scenario) {
        case Scenario::entropy_exchange_sweep: {
            const auto model = build_measurement(c, haar_seed);
            const auto pt = random_populations(rng, c.M);
            const auto pd = random_populations(rng, c.N);
            const auto rep = measure::entropy_exchange_report(model, qcore::DensityMatrix::from_populations(pt),
                                                              qcore::DensityMatrix::from_populations(pd));
            r.S_t = rep.S_t;
            r.S_d = rep.S_d;
            r.delta_I = rep.delta_I;
            r.delta_S_d = rep.delta_S_d;
            r.slack_exchange = rep.inequality_slack;
            break;
        }
        case Scenario::eq1_bound_grid: {
            const thermo::Spectrum spectrum(random_levels(rng, c.M, 3.0));
            std::uniform_real_distribution<double> t_dist(0.2, 2.0);
            std::uniform_real_distribution<double> frac(0.05, 0.95);
            const double t_i = t_dist(rng);
            const thermo::GibbsState g = thermo::gibbs_state(spectrum, t_i);
            const double headroom = std::log(static_cast<double>(c.M)) - g.entropy();
            const double ds = frac(rng) * headroom;
            const double heat = thermo::min_heat_for_entropy_increase(spectrum, t_i, ds);
            const double t_f = thermo::temperature_for_entropy(spectrum, t_i, g.entropy() + ds);
            r.T_target = t_i;
            r.S_t = g.entropy();
            r.delta_S_d = ds;
            r.W_d = heat;
            r.E_mean_raised = thermo::gibbs_state(spectrum, t_f).mean_energy() - g.mean_energy();
            r.slack_exchange = heat - t_i * ds;
            break;
        }
        case Scenario::full_cycle:
        case Scenario::cold_bath_cycle: {
            demon::CycleConfig cc{thermo::Spectrum(target_levels(c)), thermo::Spectrum(demon_levels(c)), c.T_target,
                                  c.T_demon_reset, build_measurement(c, haar_seed), c.k_steps};
            const demon::CycleLedger ledger = demon::run_full_cycle(cc);
            r.T_target = c.T_target;
            r.T_demon_reset = c.T_demon_reset;
            r.S_t = ledger.S_target_initial;
            r.S_d = ledger.S_demon_reset;
            r.delta_I = ledger.delta_I;
            r.delta_S_d = ledger.delta_S_demon;
            r.slack_exchange = ledger.delta_S_demon - ledger.delta_I;
            r.W_d = ledger.W_d;
            r.E_mean_raised = ledger.E_mean_raised;
            r.quench_recovered = ledger.quench_recovered;
            r.W_extracted = ledger.W_extracted;
            r.net_work_out = ledger.net_work_out;
            break;
        }
        case Scenario::boltzmann_maximality: {
            const int dim = std::max(c.M, 3);
            const thermo::Spectrum spectrum(random_levels(rng, dim, 3.0));
            std::uniform_real_distribution<double> t_dist(0.3, 3.0);
            const double t = t_dist(rng);
            const thermo::GibbsState g = thermo::gibbs_state(spectrum, t);
            const auto samples = thermo::sample_states_at_mean_energy(spectrum, t, c.samples, rng());
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& p : samples) {
                best = std::max(best, qcore::shannon_entropy(p));
            }
            r.T_target = t;
            r.S_t = g.entropy();
            r.S_d = best;
            r.E_mean_raised = g.mean_energy();
            r.slack_exchange = g.entropy() - best;
            break;
        }
        }
    } catch (const TheoremViolation& e) {
        throw TheoremViolation(e.inequality(),
                               std::string(e.what()) + " [trial " + std::to_string(trial) + ", seed " +
                                   std::to_string(r.seed) + "]");
    }
    r.pass = judge(r, c.tolerances);
    return r;
}

ScenarioResult run_scenario(const ScenarioConfig& config, int threads) {
    validate(config);
    const auto n = static_cast<std::size_t>(config.trials);
    std::vector<TrialRecord> records(n);
    std::vector<std::exception_ptr> errors(n);

    auto work = [&](std::atomic<std::size_t>& next) {
        for (std::size_t t = next++; t < n; t = next++) {
            try {
                records[t] = run_trial(config, static_cast<int>(t));
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    std::atomic<std::size_t> next{0};
    const int workers = std::clamp(threads, 1, static_cast<int>(n));
    if (workers == 1) {
        work(next);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] { work(next); });
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    Summary summary = summarize(records, config.tolerances);
    return ScenarioResult{std::move(records), std::move(summary)};
}

// ---------------------------------------------------------------------------
// Summary

Summary summarize(const std::vector<TrialRecord>& records, const Tolerances& tol) {
    Summary s;
    if (!records.empty()) {
        s.scenario = records.front().scenario;
    }
    s.trials = static_cast<int>(records.size());
    auto worst = [&s](const std::string& key, double v) {
        auto [it, inserted] = s.worst_slack.emplace(key, v);
        if (!inserted) {
            it->second = std::min(it->second, v);
        }
    };
    for (const auto& r : records) {
        if (!judge(r, tol)) {
            ++s.failures;
        }
        switch (r.scenario) {
        case Scenario::entropy_exchange_sweep:
            if (r.slack_exchange) worst("entropy_exchange", *r.slack_exchange);
            break;
        case Scenario::eq1_bound_grid:
            if (r.slack_exchange) worst("eq1_bound", *r.slack_exchange);
            if (r.W_d && r.E_mean_raised) {
                const double rel = std::abs(*r.W_d - *r.E_mean_raised) / std::max(std::abs(*r.E_mean_raised), 1e-12);
                worst("eq1_oracle_agreement", tol.eq1_oracle_rel - rel);
            }
            break;
        case Scenario::full_cycle:
        case Scenario::cold_bath_cycle:
            if (r.slack_exchange) worst("information_vs_memory_entropy", *r.slack_exchange);
            if (r.net_work_out && r.S_d && r.T_target && r.T_demon_reset) {
                const double bound =
                    (*r.T_target - *r.T_demon_reset) * (std::log(static_cast<double>(r.N)) - *r.S_d);
                worst("net_work_bound", bound - *r.net_work_out);
                s.max_net_work_out = std::max(s.max_net_work_out.value_or(*r.net_work_out), *r.net_work_out);
                s.min_net_work_out = std::min(s.min_net_work_out.value_or(*r.net_work_out), *r.net_work_out);
            }
            break;
        case Scenario::boltzmann_maximality:
            if (r.slack_exchange) worst("boltzmann_maximality", *r.slack_exchange);
            break;
        }
    }
    return s;
}

void print_summary(std::ostream& os, const Summary& s) {
    os << "scenario: " << to_string(s.scenario) << '\n';
    os << "trials: " << s.trials << '\n';
    os << "failures: " << s.failures << '\n';
    for (const auto& [key, v] : s.worst_slack) {
        os << "worst_slack_" << key << ": " << format_number(v) << '\n';
    }
    if (s.max_net_work_out) {
        os << "max_net_work_out: " << format_number(*s.max_net_work_out) << '\n';
        os << "min_net_work_out: " << format_number(*s.min_net_work_out) << '\n';
    }
    os << "status: " << (s.failures == 0 ? "PASS" : "FAIL") << '\n';
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        os << (i ? "," : "") << cols[i];
    }
    os << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    for (const auto& r : records) {
        os << r.trial << ',' << r.seed << ',' << to_string(r.scenario) << ',' << r.M << ',' << r.N << ','
           << opt(r.T_target) << ',' << opt(r.T_demon_reset) << ',' << opt(r.S_t) << ',' << opt(r.S_d) << ','
           << opt(r.delta_I) << ',' << opt(r.delta_S_d) << ',' << opt(r.slack_exchange) << ',' << opt(r.W_d) << ','
           << opt(r.E_mean_raised) << ',' << opt(r.quench_recovered) << ',' << opt(r.W_extracted) << ','
           << opt(r.net_work_out) << ',' << (r.pass ? 1 : 0) << '\n';
    }
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    write_csv(out, records);
    out.flush();
    if (!out) {
        throw Error("write to '" + path + "' failed");
    }
}

std::vector<TrialRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw Error("empty CSV");
    }
    std::vector<TrialRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (line.back() == ',') {
            f.emplace_back();
        }
        if (f.size() != csv_columns().size()) {
            throw Error("CSV row has " + std::to_string(f.size()) + " fields");
        }
        auto opt = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::strtod(s.c_str(), nullptr);
        };
        TrialRecord r;
        r.trial = std::stoi(f[0]);
        r.seed = std::stoull(f[1]);
        r.scenario = scenario_from_string(f[2]);
        r.M = std::stoi(f[3]);
        r.N = std::stoi(f[4]);
        r.T_target = opt(f[5]);
        r.T_demon_reset = opt(f[6]);
        r.S_t = opt(f[7]);
        r.S_d = opt(f[8]);
        r.delta_I = opt(f[9]);
        r.delta_S_d = opt(f[10]);
        r.slack_exchange = opt(f[11]);
        r.W_d = opt(f[12]);
        r.E_mean_raised = opt(f[13]);
        r.quench_recovered = opt(f[14]);
        r.W_extracted = opt(f[15]);
        r.net_work_out = opt(f[16]);
        r.pass = f[17] == "1";
        records.push_back(r);
    }
    return records;
}

} // namespace demonlab::runner
