#pragma once

// Batch driver: JSON scenario config -> seeded trials -> CSV rows + summary.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "demonlab/errors.hpp"

namespace demonlab::runner {

/// Malformed or invalid configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class Scenario { entropy_exchange_sweep, eq1_bound_grid, full_cycle, cold_bath_cycle, boltzmann_maximality };

const char* to_string(Scenario s);

struct MeasurementSpec {
    enum class Kind { classical, haar };
    Kind kind = Kind::classical;
    /// "identity", "cnot", "swap" or "explicit".
    std::string table = "cnot";
    /// For table == "explicit": images of (m, n) listed in joint-index order m*N + n.
    std::vector<std::pair<int, int>> explicit_images;
};

struct Tolerances {
    double exchange = 1e-9;
    double closure = 1e-6;
    double eq1_bound = 1e-9;
    double eq1_oracle_rel = 1e-6;
    double boltzmann = 1e-9;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::full_cycle;
    int M = 2;
    int N = 2;
    double T_target = 1.0;
    double T_demon_reset = 1.0;
    std::vector<double> target_spectrum;
    std::vector<double> demon_spectrum;
    MeasurementSpec measurement;
    int trials = 1;
    int k_steps = 10000;
    std::uint64_t seed = 0;
    /// Fixed-energy samples per boltzmann_maximality trial.
    int samples = 1000;
    Tolerances tolerances;
};

/// Parses and validates a JSON document. Unknown keys are rejected.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
void validate(const ScenarioConfig& config);

/// One CSV row. Columns that do not apply to a scenario are empty.
struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    Scenario scenario = Scenario::full_cycle;
    int M = 0;
    int N = 0;
    std::optional<double> T_target, T_demon_reset;
    std::optional<double> S_t, S_d, delta_I, delta_S_d, slack_exchange;
    std::optional<double> W_d, E_mean_raised, quench_recovered, W_extracted, net_work_out;
    bool pass = false;
};

/// Pass/fail of a record, recomputed from its columns only.
bool judge(const TrialRecord& record, const Tolerances& tol);

struct Summary {
    Scenario scenario = Scenario::full_cycle;
    int trials = 0;
    int failures = 0;
    /// Worst (smallest) slack per asserted inequality.
    std::map<std::string, double> worst_slack;
    /// Largest net work over cycle trials, if any.
    std::optional<double> max_net_work_out;
    std::optional<double> min_net_work_out;
};

Summary summarize(const std::vector<TrialRecord>& records, const Tolerances& tol);
void print_summary(std::ostream& os, const Summary& summary);

struct ScenarioResult {
    std::vector<TrialRecord> records;
    Summary summary;
};

/// Runs every trial; trial t uses sub-seed seed + t. With threads > 1 the
/// trials are distributed across workers; results are still ordered by index.
ScenarioResult run_scenario(const ScenarioConfig& config, int threads = 1);

/// Single trial, as run_scenario would run trial `trial`.
TrialRecord run_trial(const ScenarioConfig& config, int trial);

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> columns = {
        "trial",  "seed",          "scenario",         "M",           "N",           "T_target",
        "T_demon_reset", "S_t",    "S_d",              "delta_I",     "delta_S_d",   "slack_exchange",
        "W_d",    "E_mean_raised", "quench_recovered", "W_extracted", "net_work_out", "pass"};
    return columns;
}

void write_csv(std::ostream& os, const std::vector<TrialRecord>& records);
/// Throws Error on I/O failure.
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_csv(std::istream& is);

} // namespace demonlab::runner
