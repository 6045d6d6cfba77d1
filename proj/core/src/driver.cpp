#include "mlsg/driver.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mlsg/allocation.hpp"

namespace mlsg {

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw InvalidArgument("epsilon must lie in (0, 1)");
    discretization().validate();
    field().validate();
    if (max_levels < 0 || max_levels >= kMaxLevels)
        throw InvalidArgument("max_levels must lie in [0, " + std::to_string(kMaxLevels - 1) + "]");
    if (dof_limit < 1)
        throw InvalidArgument("dof_limit must be positive");
    if (pilot_nu < 2)
        throw InvalidArgument("pilot_nu must be >= 2 so that mu2 can be fitted");
    if (correction_pilot_nu < 1)
        throw InvalidArgument("correction_pilot_nu must be >= 1");
    if (max_nu < pilot_nu || max_nu + 1 > kMaxRuleLevel)
        throw InvalidArgument("max_nu must lie in [pilot_nu, " + std::to_string(kMaxRuleLevel - 1) + "]");
    if (mc_pilot < 32)
        throw InvalidArgument("mc_pilot must be >= 32");
    if (mc_correction_pilot < 2)
        throw InvalidArgument("mc_correction_pilot must be >= 2");
    if (realloc_iterations < 0)
        throw InvalidArgument("realloc_iterations must be >= 0");
    if (!(e0_space > 0.0))
        throw InvalidArgument("e0_space must be positive");
    if (workers < 1)
        throw InvalidArgument("workers must be >= 1");
    if (mixed_order < 0)
        throw InvalidArgument("mixed_order must be >= 0");
    if (cost_metric == CostMetric::Wall && !record_wall_clock)
        throw InvalidArgument("cost_metric = wall needs record_wall_clock = true");
}

FieldConfig ExperimentConfig::field() const
{
    FieldConfig f;
    f.correlation_length = correlation_length;
    f.dimension = stochastic_dim;
    f.amplitude = field_amplitude;
    return f;
}

DiscretizationConfig ExperimentConfig::discretization() const
{
    return {dim, h0, refinement, degree};
}

double ExperimentConfig::mu1() const
{
    return mu1_for_model(mu1_model, stochastic_dim, mixed_order);
}

std::string to_string(Sampler s)
{
    return s == Sampler::MonteCarlo ? "mc" : "sc";
}

std::string to_string(RunMode m)
{
    return m == RunMode::SingleLevel ? "single" : "multilevel";
}

std::string to_string(CostMetric m)
{
    return m == CostMetric::Model ? "model" : "wall";
}

std::string to_string(Mu1Model m)
{
    return m == Mu1Model::Analytic ? "analytic" : "mixed";
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text)
{
    auto parse_one = [&](const std::string& part) {
        double v = 0.0;
        const char* first = part.data();
        const char* last = part.data() + part.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || part.empty())
            throw InvalidArgument("invalid number for " + key + ": '" + text + "'");
        return v;
    };
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const double num = parse_one(trim(text.substr(0, slash)));
        const double den = parse_one(trim(text.substr(slash + 1)));
        if (den == 0.0)
            throw InvalidArgument("zero denominator for " + key);
        return num / den;
    }
    return parse_one(text);
}

long parse_integer(const std::string& key, const std::string& text)
{
    long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw InvalidArgument("invalid integer for " + key + ": '" + text + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& text)
{
    const long v = parse_integer(key, text);
    if (v < -2147483647L || v > 2147483647L)
        throw InvalidArgument("integer out of range for " + key);
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw InvalidArgument("invalid boolean for " + key + ": '" + text + "'");
}

} // namespace

ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs)
{
    ExperimentConfig cfg;
    // dimension first: it selects the defaults of h0 and s
    if (auto it = pairs.find("dim"); it != pairs.end())
        cfg.dim = parse_int("dim", it->second);
    if (cfg.dim == 2) {
        cfg.h0 = 0.25;
        cfg.refinement = 2;
    }
    for (const auto& [key, value] : pairs) {
        if (key == "dim")
            continue;
        else if (key == "h0")
            cfg.h0 = parse_real(key, value);
        else if (key == "s")
            cfg.refinement = parse_int(key, value);
        else if (key == "degree")
            cfg.degree = parse_int(key, value);
        else if (key == "N")
            cfg.stochastic_dim = parse_int(key, value);
        else if (key == "L_corr")
            cfg.correlation_length = parse_real(key, value);
        else if (key == "field_amplitude")
            cfg.field_amplitude = parse_real(key, value);
        else if (key == "epsilon")
            cfg.epsilon = parse_real(key, value);
        else if (key == "sampler") {
            if (value == "mc")
                cfg.sampler = Sampler::MonteCarlo;
            else if (value == "sc")
                cfg.sampler = Sampler::Collocation;
            else
                throw InvalidArgument("sampler must be mc or sc, got '" + value + "'");
        } else if (key == "mode") {
            if (value == "single")
                cfg.mode = RunMode::SingleLevel;
            else if (value == "multilevel")
                cfg.mode = RunMode::Multilevel;
            else
                throw InvalidArgument("mode must be single or multilevel, got '" + value + "'");
        } else if (key == "mu1_model") {
            if (value == "analytic")
                cfg.mu1_model = Mu1Model::Analytic;
            else if (value == "mixed")
                cfg.mu1_model = Mu1Model::Mixed;
            else
                throw InvalidArgument("mu1_model must be analytic or mixed, got '" + value + "'");
        } else if (key == "mixed_order")
            cfg.mixed_order = parse_int(key, value);
        else if (key == "cost_metric") {
            if (value == "model")
                cfg.cost_metric = CostMetric::Model;
            else if (value == "wall")
                cfg.cost_metric = CostMetric::Wall;
            else
                throw InvalidArgument("cost_metric must be model or wall, got '" + value + "'");
        } else if (key == "max_levels")
            cfg.max_levels = parse_int(key, value);
        else if (key == "dof_limit")
            cfg.dof_limit = parse_integer(key, value);
        else if (key == "max_nu")
            cfg.max_nu = parse_int(key, value);
        else if (key == "realloc_iterations")
            cfg.realloc_iterations = parse_int(key, value);
        else if (key == "pilot_nu")
            cfg.pilot_nu = parse_int(key, value);
        else if (key == "correction_pilot_nu")
            cfg.correction_pilot_nu = parse_int(key, value);
        else if (key == "mc_pilot")
            cfg.mc_pilot = parse_integer(key, value);
        else if (key == "mc_correction_pilot")
            cfg.mc_correction_pilot = parse_integer(key, value);
        else if (key == "e0_space")
            cfg.e0_space = parse_real(key, value);
        else if (key == "seed") {
            unsigned long long v = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
                throw InvalidArgument("invalid seed: '" + value + "'");
            cfg.seed = v;
        } else if (key == "workers")
            cfg.workers = parse_int(key, value);
        else if (key == "record_wall_clock")
            cfg.record_wall_clock = parse_bool(key, value);
        else
            throw InvalidArgument("unknown configuration key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file " + path.string());
    std::map<std::string, std::string> pairs;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(path.string() + ":" + std::to_string(number) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw InvalidArgument(path.string() + ":" + std::to_string(number) + ": empty key");
        pairs[key] = value;
    }
    return pairs;
}

int default_worker_count()
{
    const char* env = std::getenv("MLSG_WORKERS");
    if (!env)
        return 1;
    int v = 0;
    const std::string text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || v < 1)
        return 1;
    return v;
}

std::vector<ConfigEntry> config_echo(const ExperimentConfig& cfg)
{
    auto num = [](double v) { return format_double(v); };
    auto integer = [](long v) { return std::to_string(v); };
    return {
        {"dim", integer(cfg.dim)},
        {"h0", num(cfg.h0)},
        {"s", integer(cfg.refinement)},
        {"degree", integer(cfg.degree)},
        {"N", integer(cfg.stochastic_dim)},
        {"L_corr", num(cfg.correlation_length)},
        {"field_amplitude", num(cfg.field_amplitude)},
        {"epsilon", num(cfg.epsilon)},
        {"sampler", to_string(cfg.sampler), true},
        {"mode", to_string(cfg.mode), true},
        {"mu1_model", to_string(cfg.mu1_model), true},
        {"mixed_order", integer(cfg.mixed_order)},
        {"cost_metric", to_string(cfg.cost_metric), true},
        {"max_levels", integer(cfg.max_levels)},
        {"dof_limit", integer(cfg.dof_limit)},
        {"max_nu", integer(cfg.max_nu)},
        {"realloc_iterations", integer(cfg.realloc_iterations)},
        {"pilot_nu", integer(cfg.pilot_nu)},
        {"correction_pilot_nu", integer(cfg.correction_pilot_nu)},
        {"mc_pilot", integer(cfg.mc_pilot)},
        {"mc_correction_pilot", integer(cfg.mc_correction_pilot)},
        {"e0_space", num(cfg.e0_space)},
        {"seed", std::to_string(cfg.seed)},
        {"record_wall_clock", cfg.record_wall_clock ? "true" : "false"},
    };
}

// ---------------------------------------------------------------------------
// Runs

namespace {

/// State shared by the multilevel and single-level drivers.
class Experiment {
public:
    explicit Experiment(const ExperimentConfig& cfg)
        : cfg_(cfg), problem_(cfg.discretization(), cfg.field()), mu1_(cfg.mu1())
    {
        ctx_.hierarchy = &problem_;
        ctx_.cache = &cache_;
        ctx_.workers = cfg.workers;
        ctx_.seed = cfg.seed;
        if (sc())
            admissible_ = admissible_sizes();
    }

    bool sc() const { return cfg_.sampler == Sampler::Collocation; }
    const ExperimentConfig& config() const { return cfg_; }
    const LevelHierarchy& problem() const { return problem_; }
    const RateParameters& rates() const { return rates_; }

    // -- costs -------------------------------------------------------------

    double solve_cost(int level, CostMetric metric) const
    {
        if (metric == CostMetric::Model)
            return problem_.model_cost(level);
        if (!cfg_.record_wall_clock)
            return 0.0;
        const long n = problem_.solve_count(level);
        return n > 0 ? problem_.solve_seconds(level) / static_cast<double>(n) : 0.0;
    }

    /// Cost of one sample of the level-l term (two solves for corrections).
    double term_cost(int level, CostMetric metric) const
    {
        double c = solve_cost(level, metric);
        if (level > 0)
            c += solve_cost(level - 1, metric);
        return c;
    }

    double allocation_cost(int level) const
    {
        const double c = term_cost(level, cfg_.cost_metric);
        return c > 0.0 ? c : 1e-9;
    }

    // -- pilots ------------------------------------------------------------

    void pilot_level0()
    {
        LevelPilot p;
        p.level = 0;
        p.h = problem_.h(0);
        if (sc()) {
            GridFunction prev = sc_term_estimate(ctx_, 0, TermKind::Solution, 0).value;
            for (int nu = 1; nu <= cfg_.pilot_nu; ++nu) {
                GridFunction cur = sc_term_estimate(ctx_, 0, TermKind::Solution, nu).value;
                p.sampling.emplace_back(static_cast<double>(admissible_[static_cast<std::size_t>(nu)]),
                                        norm(cur - prev));
                prev = std::move(cur);
            }
        } else {
            MonteCarloTerm& term = mc_term(0);
            term.extend(ctx_, cfg_.mc_pilot);
            const Estimate est = term.estimate();
            p.sampling.emplace_back(static_cast<double>(est.samples),
                                    est.sample_std / std::sqrt(static_cast<double>(est.samples)));
        }
        p.cost = problem_.model_cost(0);
        pilots_.assign(1, std::move(p));
        refresh_rates();
    }

    /// Pilot of the newest correction level; returns ||E[Delta u_l]||.
    double pilot_correction(int level)
    {
        LevelPilot p;
        p.level = level;
        p.h = problem_.h(level);
        if (sc()) {
            GridFunction prev = sc_term_estimate(ctx_, level, TermKind::Correction, 0).value;
            for (int nu = 1; nu <= cfg_.correction_pilot_nu; ++nu) {
                GridFunction cur = sc_term_estimate(ctx_, level, TermKind::Correction, nu).value;
                p.sampling.emplace_back(static_cast<double>(admissible_[static_cast<std::size_t>(nu)]),
                                        norm(cur - prev));
                prev = std::move(cur);
            }
            p.correction_norm = norm(prev);
        } else {
            MonteCarloTerm& term = mc_term(level);
            term.extend(ctx_, cfg_.mc_correction_pilot);
            const Estimate est = term.estimate();
            p.sampling.emplace_back(static_cast<double>(est.samples),
                                    est.sample_std / std::sqrt(static_cast<double>(est.samples)));
            p.correction_norm = norm(est.value);
        }
        p.cost = problem_.model_cost(level);
        pilots_.resize(static_cast<std::size_t>(level));
        pilots_.push_back(std::move(p));
        refresh_rates();
        return pilots_.back().correction_norm;
    }

    void refresh_rates()
    {
        RateDefaults defaults;
        defaults.alpha = cfg_.degree + 1.0;
        defaults.mu2 = 1.0;
        defaults.fixed_mu2 = sc() ? 0.0 : 0.5;
        rates_ = pilot_diagnostics(pilots_, mu1_, defaults);
        measured_phi_.resize(rates_.phi.size(), 0.0);
    }

    double phi(int level) const
    {
        const auto l = static_cast<std::size_t>(level);
        return std::max(rates_.phi[l], measured_phi_[l]);
    }

    /// Spatial error estimate from a correction-mean norm at the finest level.
    double spatial(double correction_norm) const
    {
        return spatial_error_estimate(correction_norm, rates_.alpha, static_cast<double>(cfg_.refinement));
    }

    bool can_refine(int level, std::string& why) const
    {
        if (level + 1 > cfg_.max_levels) {
            why = "maximum number of levels (" + std::to_string(cfg_.max_levels) + ") reached";
            return false;
        }
        if (problem_.dof_count(level + 1) > cfg_.dof_limit) {
            why = "level " + std::to_string(level + 1) + " would exceed the DOF limit of " +
                  std::to_string(cfg_.dof_limit);
            return false;
        }
        return true;
    }

    // -- sampling ----------------------------------------------------------

    struct LevelResult {
        long size = 0;
        int nu = 0;
        GridFunction mean;
        double err_sample = 0.0;
    };

    /// Collocation term with the successive-difference error estimate.
    LevelResult sc_term(int level, TermKind kind, int nu)
    {
        LevelResult r;
        r.nu = nu;
        r.size = admissible_[static_cast<std::size_t>(nu)];
        r.mean = sc_term_estimate(ctx_, level, kind, nu).value;
        if (nu >= 1)
            r.err_sample = norm(r.mean - sc_term_estimate(ctx_, level, kind, nu - 1).value);
        else
            r.err_sample = phi(level);
        return r;
    }

    /// Multilevel plan for levels 0..L: allocate, bin, sample, and reallocate
    /// while the measured sampling error exceeds eps/2.
    std::vector<LevelResult> sample_multilevel(int finest)
    {
        const double eps = cfg_.epsilon;
        std::vector<LevelResult> results;
        for (int iter = 0;; ++iter) {
            ErrorModel model;
            model.mu1 = sc() ? mu1_ : 0.0;
            model.mu2 = rates_.mu2;
            for (int l = 0; l <= finest; ++l) {
                model.phi.push_back(sc() ? phi(l) : std::max(kPhiFloor, mc_term(l).estimate().sample_std));
                model.cost.push_back(allocation_cost(l));
            }
            results.clear();
            if (sc()) {
                std::vector<double> real;
                if (model.mu1 == 0.0) {
                    real = optimal_sizes_algebraic(eps, model);
                } else {
                    const auto sizes = optimal_sizes_log(eps, model);
                    real.assign(sizes.begin(), sizes.end());
                }
                const BinnedSizes binned = bin(real, model);
                for (int l = 0; l <= finest; ++l)
                    results.push_back(sc_term(l, l == 0 ? TermKind::Solution : TermKind::Correction,
                                              binned.index[static_cast<std::size_t>(l)]));
            } else {
                const auto real = optimal_sizes_algebraic(eps, model);
                for (int l = 0; l <= finest; ++l) {
                    MonteCarloTerm& term = mc_term(l);
                    const long wanted = static_cast<long>(std::ceil(real[static_cast<std::size_t>(l)]));
                    term.extend(ctx_, std::max(wanted, term.count()));
                    const Estimate est = term.estimate();
                    LevelResult r;
                    r.size = est.samples;
                    r.mean = est.value;
                    r.err_sample = est.sample_std / std::sqrt(static_cast<double>(est.samples));
                    results.push_back(std::move(r));
                }
            }
            double total = 0.0;
            for (const auto& r : results)
                total += r.err_sample;
            if (total <= eps / 2.0 || iter >= cfg_.realloc_iterations)
                return results;
            if (sc()) {
                // trust the measurement where it exceeds the model
                for (int l = 0; l <= finest; ++l) {
                    const auto& r = results[static_cast<std::size_t>(l)];
                    if (r.nu >= 1 && r.size > 1 && r.err_sample > 0.0)
                        measured_phi_[static_cast<std::size_t>(l)] =
                            std::max(measured_phi_[static_cast<std::size_t>(l)],
                                     phi_from_error(r.err_sample, static_cast<double>(r.size), mu1_, rates_.mu2));
                }
            }
        }
    }

    /// Single-level sample at level L sized from the level-0 error constant.
    LevelResult sample_single(int level)
    {
        const double eps = cfg_.epsilon;
        double phi_hat = sc() ? phi(0) : std::max(kPhiFloor, mc_term(0).estimate().sample_std);
        LevelResult r;
        for (int iter = 0;; ++iter) {
            ErrorModel model;
            model.mu1 = sc() ? mu1_ : 0.0;
            model.mu2 = rates_.mu2;
            model.phi = {phi_hat};
            model.cost = {solve_cost_for_allocation(level)};
            double m = 0.0;
            if (model.mu1 == 0.0) {
                m = std::pow(2.0 * phi_hat / eps, 1.0 / model.mu2);
            } else {
                const double target = eps / (2.0 * phi_hat);
                m = target >= 1.0 ? 2.0
                                  : static_cast<double>(
                                        ceiling_sample_size(target, model.mu1, model.mu2, model.mu1, model.mu2, true));
            }
            m = std::max(1.0, m);
            if (sc()) {
                const BinnedSizes binned = bin({m}, model);
                r = sc_term(level, TermKind::Solution, binned.index[0]);
                if (r.nu == 0)
                    r.err_sample = phi_hat;
            } else {
                MonteCarloTerm& term = mc_single(level);
                term.extend(ctx_, std::max(static_cast<long>(std::ceil(m)), term.count()));
                const Estimate est = term.estimate();
                r.size = est.samples;
                r.mean = est.value;
                r.err_sample = est.sample_std / std::sqrt(static_cast<double>(est.samples));
            }
            if (r.err_sample <= eps / 2.0 || iter >= cfg_.realloc_iterations)
                return r;
            if (sc()) {
                if (r.nu >= 1 && r.err_sample > 0.0)
                    phi_hat = std::max(phi_hat,
                                       phi_from_error(r.err_sample, static_cast<double>(r.size), mu1_, rates_.mu2));
            } else {
                // 5% margin: sizing from the refreshed std alone can keep landing
                // just above eps/2
                phi_hat = std::max(kPhiFloor, 1.05 * mc_single(level).estimate().sample_std);
            }
        }
    }

    // -- reporting ---------------------------------------------------------

    RunReport report(const std::vector<LevelResult>& results, const std::vector<int>& levels,
                     const std::vector<double>& err_space_history, double err_space) const
    {
        RunReport rep;
        rep.config = cfg_;
        rep.rates = rates_;
        rep.finest_level = levels.back();
        rep.err_space = err_space;
        const bool multilevel = cfg_.mode == RunMode::Multilevel;
        for (std::size_t k = 0; k < results.size(); ++k) {
            const int l = levels[k];
            LevelRow row;
            row.level = l;
            row.h = problem_.h(l);
            row.samples = results[k].size;
            row.nu = results[k].nu;
            row.cost_model = multilevel ? term_cost(l, CostMetric::Model) : solve_cost(l, CostMetric::Model);
            row.cost_wall_s = multilevel ? term_cost(l, CostMetric::Wall) : solve_cost(l, CostMetric::Wall);
            row.err_space = err_space_history[static_cast<std::size_t>(l)];
            row.err_sample = results[k].err_sample;
            rep.err_sample += row.err_sample;
            rep.eps_cost_model += static_cast<double>(row.samples) * row.cost_model;
            rep.eps_cost_wall_s += static_cast<double>(row.samples) * row.cost_wall_s;
            rep.rows.push_back(row);
        }
        std::vector<GridFunction> means;
        for (const auto& r : results)
            means.push_back(r.mean);
        rep.estimate = multilevel ? sum_prolonged(means) : means.back();
        for (int l = 0; l < kMaxLevels; ++l) {
            const long n = problem_.solve_count(l);
            if (n > 0)
                rep.total_work_model += static_cast<double>(n) * problem_.model_cost(l);
            rep.total_solves += n;
        }
        const double eps = cfg_.epsilon;
        rep.converged = rep.err_space <= eps / 2.0 && rep.err_sample <= eps / 2.0;
        if (rep.converged)
            rep.status = "converged";
        else if (rep.err_space > eps / 2.0)
            rep.status = "spatial error above tolerance";
        else
            rep.status = "sampling error above tolerance";
        return rep;
    }

private:
    BinnedSizes bin(const std::vector<double>& sizes, const ErrorModel& model) const
    {
        const double top = static_cast<double>(admissible_.back());
        for (double m : sizes)
            if (m > top)
                throw ToleranceUnreachable("sampling tolerance needs more than " + std::to_string(admissible_.back()) +
                                           " collocation points (quadrature level above max_nu = " +
                                           std::to_string(cfg_.max_nu) + ")");
        try {
            return bin_sizes(sizes, admissible_, model, cfg_.epsilon);
        } catch (const InvalidArgument&) {
            throw ToleranceUnreachable("sampling tolerance not reachable within max_nu = " +
                                       std::to_string(cfg_.max_nu));
        }
    }

    double solve_cost_for_allocation(int level) const
    {
        const double c = solve_cost(level, cfg_.cost_metric);
        return c > 0.0 ? c : 1e-9;
    }

    std::vector<long> admissible_sizes() const
    {
        std::vector<long> sizes;
        for (int nu = 0; nu <= cfg_.max_nu; ++nu)
            sizes.push_back(grid_size(cfg_.stochastic_dim, nu));
        return sizes;
    }

    MonteCarloTerm& mc_term(int level)
    {
        while (static_cast<int>(mc_terms_.size()) <= level) {
            const int l = static_cast<int>(mc_terms_.size());
            mc_terms_.push_back(
                std::make_unique<MonteCarloTerm>(l, l == 0 ? TermKind::Solution : TermKind::Correction));
        }
        return *mc_terms_[static_cast<std::size_t>(level)];
    }

    /// Plain solution sampler on a fine level (single-level Monte Carlo).
    MonteCarloTerm& mc_single(int level)
    {
        if (level == 0)
            return mc_term(0);
        if (!mc_single_ || mc_single_->level() != level)
            mc_single_ = std::make_unique<MonteCarloTerm>(level, TermKind::Solution);
        return *mc_single_;
    }

    const ExperimentConfig& cfg_;
    LevelHierarchy problem_;
    SolutionCache cache_;
    SamplingContext ctx_;
    double mu1_;
    std::vector<long> admissible_;
    std::vector<LevelPilot> pilots_;
    RateParameters rates_;
    std::vector<double> measured_phi_;
    std::vector<std::unique_ptr<MonteCarloTerm>> mc_terms_;
    std::unique_ptr<MonteCarloTerm> mc_single_;
};

std::vector<int> level_range(int finest)
{
    std::vector<int> levels;
    for (int l = 0; l <= finest; ++l)
        levels.push_back(l);
    return levels;
}

} // namespace

RunReport run_multilevel(const ExperimentConfig& cfg_in)
{
    ExperimentConfig cfg = cfg_in;
    cfg.mode = RunMode::Multilevel;
    cfg.validate();
    Experiment ex(cfg);
    ex.pilot_level0();

    const double eps = cfg.epsilon;
    int finest = 0;
    double e_space = cfg.e0_space;
    std::vector<double> history{e_space};
    auto results = ex.sample_multilevel(finest);

    while (e_space > eps / 2.0) {
        std::string why;
        if (!ex.can_refine(finest, why)) {
            RunReport partial = ex.report(results, level_range(finest), history, e_space);
            partial.status = "tolerance unreachable: " + why;
            throw LevelBudgetExhausted("spatial error " + format_double(e_space) + " still above eps/2: " + why,
                                       std::move(partial));
        }
        ++finest;
        ex.pilot_correction(finest);
        results = ex.sample_multilevel(finest);
        e_space = ex.spatial(norm(results.back().mean));
        history.push_back(e_space);
    }
    return ex.report(results, level_range(finest), history, e_space);
}

RunReport run_single_level(const ExperimentConfig& cfg_in)
{
    ExperimentConfig cfg = cfg_in;
    cfg.mode = RunMode::SingleLevel;
    cfg.validate();
    Experiment ex(cfg);
    ex.pilot_level0();

    const double eps = cfg.epsilon;
    int level = 0;
    double e_space = cfg.e0_space;
    std::vector<double> history{e_space};
    while (e_space > eps / 2.0) {
        std::string why;
        if (!ex.can_refine(level, why)) {
            const auto r = ex.sample_single(level);
            RunReport partial = ex.report({r}, {level}, history, e_space);
            partial.status = "tolerance unreachable: " + why;
            throw LevelBudgetExhausted("spatial error " + format_double(e_space) + " still above eps/2: " + why,
                                       std::move(partial));
        }
        ++level;
        e_space = ex.spatial(ex.pilot_correction(level));
        history.push_back(e_space);
    }
    const auto r = ex.sample_single(level);
    return ex.report({r}, {level}, history, e_space);
}

RunReport run_experiment(const ExperimentConfig& cfg)
{
    return cfg.mode == RunMode::Multilevel ? run_multilevel(cfg) : run_single_level(cfg);
}

} // namespace mlsg
