#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mlsg/errors.hpp"
#include "mlsg/estimators.hpp"
#include "mlsg/rates.hpp"

namespace mlsg {

enum class RunMode { SingleLevel, Multilevel };
enum class CostMetric { Model, Wall };

struct ExperimentConfig {
    // spatial discretisation
    int dim = 1;
    double h0 = 0.125;
    int refinement = 4;
    int degree = 1;
    // random field
    int stochastic_dim = 5;
    double correlation_length = 0.25;
    double field_amplitude = 1.0;
    // method
    double epsilon = 1e-3;
    Sampler sampler = Sampler::Collocation;
    RunMode mode = RunMode::Multilevel;
    Mu1Model mu1_model = Mu1Model::Analytic;
    int mixed_order = 0;
    CostMetric cost_metric = CostMetric::Model;
    // budgets
    int max_levels = 8;
    long dof_limit = 200000;
    int max_nu = 8;
    int realloc_iterations = 4;
    // pilots
    int pilot_nu = 3;            // level-0 pilot uses nu = 1 .. pilot_nu
    int correction_pilot_nu = 1; // correction pilots use nu = 0 .. this
    long mc_pilot = 64;
    long mc_correction_pilot = 32;
    /// Spatial error assumed before any correction has been measured.
    double e0_space = 1.0;
    // execution
    std::uint64_t seed = 1;
    int workers = 1;
    bool record_wall_clock = true;

    void validate() const;
    FieldConfig field() const;
    DiscretizationConfig discretization() const;
    double mu1() const;
};

/// Builds a configuration from key/value pairs (config-file keys). Keys not
/// given keep their defaults; for dim = 2 the defaults of h0 and s become
/// 0.25 and 2. Unknown keys and malformed values throw InvalidArgument.
ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs);

/// Reads a flat "key = value" file; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Default worker count: MLSG_WORKERS if set and positive, else 1.
int default_worker_count();

std::string to_string(Sampler s);
std::string to_string(RunMode m);
std::string to_string(CostMetric m);
std::string to_string(Mu1Model m);

struct ConfigEntry {
    std::string key;
    std::string value;
    bool is_text = false; // quoted in JSON
};

/// Canonical echo of a configuration in a fixed key order. The worker count
/// is left out because results do not depend on it.
std::vector<ConfigEntry> config_echo(const ExperimentConfig& cfg);

struct LevelRow {
    int level = 0;
    double h = 0.0;
    long samples = 0;
    int nu = 0; // quadrature level (collocation); 0 for Monte Carlo
    double cost_wall_s = 0.0; // per-sample cost of this level's term
    double cost_model = 0.0;
    double err_space = 0.0;   // spatial estimate when this level was the finest
    double err_sample = 0.0;  // this level's sampling-error contribution
};

struct RunReport {
    ExperimentConfig config;
    std::vector<LevelRow> rows;
    GridFunction estimate;
    RateParameters rates;
    int finest_level = 0;
    double err_space = 0.0;
    double err_sample = 0.0;
    /// sum_l M_l C_l of the final plan (multilevel) or M C_L (single level).
    double eps_cost_model = 0.0;
    double eps_cost_wall_s = 0.0;
    /// Work of everything solved, including pilots, in model units.
    double total_work_model = 0.0;
    long total_solves = 0;
    bool converged = false;
    std::string status;
};

/// Thrown when the level or DOF budget runs out; carries the partial report.
class LevelBudgetExhausted : public ToleranceUnreachable {
public:
    LevelBudgetExhausted(const std::string& what, RunReport partial)
        : ToleranceUnreachable(what), report_(std::make_shared<RunReport>(std::move(partial)))
    {
    }
    const RunReport& report() const { return *report_; }

private:
    std::shared_ptr<RunReport> report_;
};

RunReport run_multilevel(const ExperimentConfig& cfg);
RunReport run_single_level(const ExperimentConfig& cfg);
/// Dispatches on cfg.mode.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Text of the three report files; byte-deterministic for a given report.
std::string levels_csv(const RunReport& report);
std::string summary_json(const RunReport& report);
std::string estimate_csv(const RunReport& report);

/// Writes levels.csv, summary.json and estimate.csv into out_dir (created
/// if missing). Throws IoError naming the failing path.
void emit_report(const RunReport& report, const std::filesystem::path& out_dir);

/// Text of a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

} // namespace mlsg
