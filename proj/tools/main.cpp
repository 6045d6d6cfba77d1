// mlsg: run multilevel / single-level sampling experiments and inspect results.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mlsg/driver.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::string epsilon;
    std::string sampler;
    std::string mode;
    std::string seed;
    std::string cost_metric;
    int workers = 0;
    std::vector<std::string> overrides;
    std::string out = "mlsg-out";
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "Configuration file (key = value lines)")->check(CLI::ExistingFile);
    cmd->add_option("--epsilon", o.epsilon, "Total error tolerance in (0, 1)");
    cmd->add_option("--sampler", o.sampler, "Sampler: sc (collocation) or mc (Monte Carlo)")
        ->check(CLI::IsMember({"sc", "mc"}));
    cmd->add_option("--mode", o.mode, "multilevel or single")->check(CLI::IsMember({"multilevel", "single"}));
    cmd->add_option("--seed", o.seed, "Base seed for Monte Carlo streams");
    cmd->add_option("--workers", o.workers, "Worker threads (default: $MLSG_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--cost-metric", o.cost_metric, "Cost used for allocation: model or wall")
        ->check(CLI::IsMember({"model", "wall"}));
    cmd->add_option("--set", o.overrides, "Extra key=value overrides, repeatable");
}

std::map<std::string, std::string> gather_pairs(const CommonOptions& o)
{
    std::map<std::string, std::string> pairs;
    if (!o.config.empty())
        pairs = mlsg::read_config_file(o.config);
    for (const std::string& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw mlsg::InvalidArgument("--set expects key=value, got '" + kv + "'");
        pairs[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    auto put = [&](const char* key, const std::string& v) {
        if (!v.empty())
            pairs[key] = v;
    };
    put("epsilon", o.epsilon);
    put("sampler", o.sampler);
    put("mode", o.mode);
    put("seed", o.seed);
    put("cost_metric", o.cost_metric);
    pairs["workers"] = std::to_string(o.workers > 0 ? o.workers : mlsg::default_worker_count());
    return pairs;
}

void print_summary(const mlsg::RunReport& r, const fs::path& out)
{
    std::printf("%s %s: finest level %d, err_space %.3e, err_sample %.3e, eps-cost %.6g (model)  [%s]\n",
                mlsg::to_string(r.config.mode).c_str(), mlsg::to_string(r.config.sampler).c_str(), r.finest_level,
                r.err_space, r.err_sample, r.eps_cost_model, r.status.c_str());
    std::printf("report written to %s\n", out.string().c_str());
}

/// Runs one experiment and writes its report. Returns the process exit code.
int run_one(const mlsg::ExperimentConfig& cfg, const fs::path& out, mlsg::RunReport* result = nullptr)
{
    try {
        mlsg::RunReport report = mlsg::run_experiment(cfg);
        mlsg::emit_report(report, out);
        print_summary(report, out);
        if (result)
            *result = std::move(report);
        return 0;
    } catch (const mlsg::LevelBudgetExhausted& e) {
        mlsg::emit_report(e.report(), out);
        std::fprintf(stderr, "tolerance unreachable: %s\n", e.what());
        print_summary(e.report(), out);
        if (result)
            *result = e.report();
        return 3;
    }
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            items.push_back(item);
    return items;
}

int cmd_report(const fs::path& dir)
{
    const fs::path summary_path = dir / "summary.json";
    std::ifstream in(summary_path);
    if (!in)
        throw mlsg::IoError("cannot open " + summary_path.string());
    const nlohmann::json summary = nlohmann::json::parse(in);
    const auto& c = summary.at("config");
    std::cout << "mode " << c.at("mode").get<std::string>() << ", sampler " << c.at("sampler").get<std::string>()
              << ", dim " << c.at("dim") << ", epsilon " << c.at("epsilon") << "\n";
    std::cout << "status: " << summary.at("status").get<std::string>() << "\n";
    std::cout << "finest level " << summary.at("finest_level") << ", err_space " << summary.at("err_space")
              << ", err_sample " << summary.at("err_sample") << "\n";
    std::cout << "eps-cost: model " << summary.at("eps_cost_model") << ", wall " << summary.at("eps_cost_wall_s")
              << " s; total work " << summary.at("total_work_model") << " in " << summary.at("total_solves")
              << " solves\n";
    const auto& rates = summary.at("rates");
    std::cout << "rates: alpha " << rates.at("alpha") << ", beta " << rates.at("beta") << ", gamma "
              << rates.at("gamma") << ", mu2 " << rates.at("mu2") << ", mu1 " << rates.at("mu1") << "\n\n";

    const fs::path levels_path = dir / "levels.csv";
    std::ifstream lv(levels_path);
    if (!lv)
        throw mlsg::IoError("cannot open " + levels_path.string());
    std::string line;
    std::getline(lv, line);
    std::printf("%5s %12s %9s %4s %12s %12s %12s\n", "level", "h", "M", "nu", "cost_model", "err_space",
                "err_sample");
    while (std::getline(lv, line)) {
        std::vector<std::string> f = split_list(line);
        if (f.size() != 8)
            throw mlsg::IoError("malformed row in " + levels_path.string() + ": " + line);
        std::printf("%5s %12.5g %9s %4s %12.5g %12.4e %12.4e\n", f[0].c_str(), std::stod(f[1]), f[2].c_str(),
                    f[3].c_str(), std::stod(f[5]), std::stod(f[6]), std::stod(f[7]));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multilevel sparse-grid collocation and Monte Carlo for elliptic PDEs with random coefficients"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "Run one experiment and write levels.csv, summary.json, estimate.csv");
    add_common(run, run_opts);

    CommonOptions sweep_opts;
    std::string sweep_param;
    std::string sweep_values;
    CLI::App* sweep = app.add_subcommand("sweep", "Repeat an experiment over values of one configuration key");
    add_common(sweep, sweep_opts);
    sweep->add_option("--param", sweep_param, "Configuration key to vary (e.g. s, epsilon, degree)")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "Print a readable summary of a written report");
    report->add_option("--out", report_dir, "Report directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const mlsg::ExperimentConfig cfg = mlsg::config_from_pairs(gather_pairs(run_opts));
            return run_one(cfg, run_opts.out);
        }
        if (*sweep) {
            const auto values = split_list(sweep_values);
            if (values.empty())
                throw mlsg::InvalidArgument("--values is empty");
            const fs::path out = sweep_opts.out;
            std::string table = "value,finest_level,M_total,eps_cost_model,eps_cost_wall_s,err_space,err_sample,status\n";
            int code = 0;
            for (const std::string& v : values) {
                auto pairs = gather_pairs(sweep_opts);
                pairs[sweep_param] = v;
                const mlsg::ExperimentConfig cfg = mlsg::config_from_pairs(pairs);
                mlsg::RunReport r;
                const int rc = run_one(cfg, out / (sweep_param + "=" + v), &r);
                code = std::max(code, rc);
                long total = 0;
                for (const auto& row : r.rows)
                    total += row.samples;
                table += v + ',' + std::to_string(r.finest_level) + ',' + std::to_string(total) + ',' +
                         mlsg::format_double(r.eps_cost_model) + ',' +
                         mlsg::format_double(cfg.record_wall_clock ? r.eps_cost_wall_s : 0.0) + ',' +
                         mlsg::format_double(r.err_space) + ',' + mlsg::format_double(r.err_sample) + ',' +
                         r.status + '\n';
            }
            std::ofstream f(out / "sweep.csv", std::ios::binary);
            if (!f)
                throw mlsg::IoError("cannot write " + (out / "sweep.csv").string());
            f << table;
            std::cout << table;
            return code;
        }
        if (*report)
            return cmd_report(report_dir);
    } catch (const mlsg::InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
