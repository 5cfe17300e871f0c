// dtn_speed: propagation-speed bounds and epidemic-broadcast simulations.
//
//   dtn_speed bound    --dim 2 --nu 0.05 --v 1 --tau 0
//   dtn_speed sweep    --dim 2 --tau 0.1 --out slowness.csv
//   dtn_speed simulate --L 80 --nu 0.025 --runs 10 --out records.csv
//   dtn_speed compare  --L 40 --nu 0.1 --tau 0.1 --runs 100 --out curve.csv
//
// Exit codes: 0 success / domination holds, 1 usage, 2 domain or statistics
// error, 3 domination failure.

#include "dtnspeed/dtnspeed.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace dtnspeed;

enum Exit : int { kOk = 0, kUsage = 1, kDomain = 2, kDomination = 3 };

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string config;
    std::optional<int> dim;
    std::optional<double> nu, v, tau, box, dt, tmax, bin_width, dmin, dmax, slowness_scale;
    std::optional<int> n, runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, nu_grid, statistic, source;
};

void add_model_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "JSON experiment config; flags override it");
    cmd->add_option("--dim", f.dim, "dimension D (1, 2 or 3)");
    cmd->add_option("--nu", f.nu, "node density per unit D-volume");
    cmd->add_option("--v", f.v, "node speed");
    cmd->add_option("--tau", f.tau, "direction-change rate");
}

void add_sim_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--L", f.box, "box side length");
    cmd->add_option("--n", f.n, "node count (default round(nu * L^D))");
    cmd->add_option("--dt", f.dt, "time step");
    cmd->add_option("--tmax", f.tmax, "simulation horizon");
    cmd->add_option("--seed", f.seed, "seed of the first run; run i uses seed + i");
    cmd->add_option("--runs", f.runs, "independent runs");
    cmd->add_option("--source", f.source, "source placement: center | uniform");
    cmd->add_option("--out", f.out, "output CSV path");
}

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> g;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            g.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("--nu-grid: not a number: '" + item + "'");
        }
    }
    return g;
}

/// JSON config first, then every flag that was given.
ExperimentConfig resolve_unchecked(const Flags& f, Mode mode)
{
    ExperimentConfig cfg;
    cfg.mode = mode;
    if (!f.config.empty())
        load_config_file(cfg, f.config);
    cfg.mode = mode;

    if (f.dim) {
        cfg.model.d = Dim(*f.dim);
        cfg.sim.d = Dim(*f.dim);
    }
    if (f.v) cfg.model.v = cfg.sim.v = *f.v;
    if (f.tau) cfg.model.tau = cfg.sim.tau = *f.tau;
    if (f.nu) cfg.model.nu = *f.nu;
    if (f.box) cfg.sim.box_length = *f.box;
    if (f.dt) cfg.sim.dt = *f.dt;
    if (f.tmax) cfg.sim.t_max = *f.tmax;
    if (f.seed) cfg.sim.seed = *f.seed;
    if (f.runs) cfg.runs = *f.runs;
    if (f.out) cfg.output_path = *f.out;
    if (f.bin_width) cfg.bin_width = *f.bin_width;
    if (f.dmin) cfg.d_min = *f.dmin;
    if (f.dmax) cfg.d_max = *f.dmax;
    if (f.slowness_scale) cfg.slowness_scale = *f.slowness_scale;
    if (f.nu_grid) cfg.nu_grid = parse_grid(*f.nu_grid);
    if (f.source) {
        if (*f.source == "center") cfg.sim.source_placement = SourcePlacement::Center;
        else if (*f.source == "uniform") cfg.sim.source_placement = SourcePlacement::UniformRandom;
        else throw UsageError("--source must be center or uniform");
    }
    if (f.statistic) {
        if (*f.statistic == "first-passage") cfg.statistic = Statistic::FirstPassage;
        else if (*f.statistic == "all") cfg.statistic = Statistic::AllRecords;
        else throw UsageError("--statistic must be first-passage or all");
    }
    if (f.n)
        cfg.sim.n = *f.n;
    else if (f.nu)
        cfg.sim.n = node_count_for_density(cfg.sim.d, *f.nu, cfg.sim.box_length);
    if (cfg.runs < 1)
        throw UsageError("--runs must be >= 1");
    return cfg;
}

ExperimentConfig resolve(const Flags& f, Mode mode)
{
    try {
        return resolve_unchecked(f, mode);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

/// Opens --out, or returns nullptr to mean stdout.
std::unique_ptr<std::ofstream> open_out(const std::string& path)
{
    if (path.empty())
        return nullptr;
    auto os = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*os)
        throw IoError("cannot write " + path);
    return os;
}

std::string sibling(const std::string& path, const std::string& suffix)
{
    const auto dot = path.rfind('.');
    const auto slash = path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + suffix;
    return path.substr(0, dot) + suffix;
}

int cmd_bound(const ExperimentConfig& cfg)
{
    try {
        cfg.model.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    const auto b = speed_bound(cfg.model);
    std::cout << "dim: " << cfg.model.d.value() << "\nnu: " << format_double(cfg.model.nu)
              << "\nv: " << format_double(cfg.model.v) << "\ntau: " << format_double(cfg.model.tau)
              << "\nthreshold: " << format_double(density_threshold(cfg.model.d)) << "\nstatus: " << to_string(b.status)
              << '\n';
    switch (b.status) {
    case BoundStatus::Unbounded:
        std::cout << "speed: inf\nslowness: 0\n";
        break;
    case BoundStatus::DegenerateZeroDensity:
        std::cout << "speed: " << format_double(*b.speed) << "\nslowness: " << format_double(b.slowness)
                  << "\nnote: zero density, the minimum is a limit (rho0 -> "
                  << (cfg.model.tau == 0.0 ? "infinity" : "0") << "), no kernel point is attained\n";
        break;
    case BoundStatus::Finite:
        std::cout << "speed: " << format_double(*b.speed) << "\nslowness: " << format_double(b.slowness)
                  << "\nrho0: " << format_double(b.argmin->rho) << "\ntheta0: " << format_double(b.argmin->theta)
                  << "\nresidual: " << format_double(kernel_residual(cfg.model, *b.argmin)) << '\n';
        break;
    }
    return kOk;
}

int cmd_sweep(const ExperimentConfig& cfg)
{
    try {
        ModelParams check = cfg.model;
        check.nu = 0.0;
        check.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    auto grid = cfg.nu_grid.empty() ? default_nu_grid(cfg.model.d) : cfg.nu_grid;
    for (double nu : grid)
        if (!(nu >= 0.0))
            throw UsageError("nu grid values must be >= 0");
    const auto rows = sweep_rows(cfg.model.d, cfg.model.v, cfg.model.tau, grid);
    auto file = open_out(cfg.output_path);
    write_sweep_csv(file ? *file : std::cout, rows);
    return kOk;
}

SimConfig checked_sim(const ExperimentConfig& cfg)
{
    try {
        cfg.sim.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return cfg.sim;
}

int cmd_simulate(const ExperimentConfig& cfg)
{
    const auto sim = checked_sim(cfg);
    std::cerr << "n: " << sim.n << " (nu = n/L^D = " << format_double(sim.density()) << ")\n";
    const auto runs = simulate_runs(sim, cfg.runs);
    for (const auto& r : runs)
        std::cerr << "run seed=" << r.seed << " completion=" << format_double(r.completion) << '\n';
    auto file = open_out(cfg.output_path);
    write_records_csv(file ? *file : std::cout, runs);
    return kOk;
}

int cmd_compare(const ExperimentConfig& cfg)
{
    const auto sim = checked_sim(cfg);
    CompareOptions opt;
    opt.runs = cfg.runs;
    opt.d_min = cfg.d_min;
    opt.d_max = cfg.d_max;
    opt.bin_width = cfg.bin_width;
    opt.statistic = cfg.statistic;
    opt.slowness_scale = cfg.slowness_scale;
    const auto out = compare(sim, opt);

    std::cout << "n: " << sim.n << "\nnu: " << format_double(out.model.nu) << "\nbound status: "
              << to_string(out.bound.status) << "\ncurve R^2: " << format_double(out.curve_fit.r_squared) << '\n'
              << report_line(out.report) << '\n'
              << report_json(out.report).dump() << '\n';

    if (!cfg.output_path.empty()) {
        auto curve = open_out(cfg.output_path);
        write_curve_csv(*curve, out.curve);
        auto fit = open_out(sibling(cfg.output_path, "_fit.csv"));
        write_fit_csv(*fit, out.fit);
        auto report = open_out(sibling(cfg.output_path, "_report.json"));
        *report << report_json(out.report).dump(2) << '\n';
    } else {
        write_curve_csv(std::cout, out.curve);
    }
    return out.report.pass ? kOk : kDomination;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Information-propagation speed bounds and epidemic-broadcast simulation"};
    app.require_subcommand(1);

    Flags f;
    auto* bound = app.add_subcommand("bound", "speed upper bound for one parameter set");
    add_model_flags(bound, f);

    auto* sweep = app.add_subcommand("sweep", "slowness lower bound over a density grid");
    add_model_flags(sweep, f);
    sweep->add_option("--nu-grid", f.nu_grid, "comma-separated densities (default: 200 points up to 1/V_D)");
    sweep->add_option("--out", f.out, "output CSV path (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "epidemic broadcast runs, one record per reception");
    add_model_flags(simulate, f);
    add_sim_flags(simulate, f);

    auto* cmp = app.add_subcommand("compare", "simulate, fit the slowness and check it against the bound");
    add_model_flags(cmp, f);
    add_sim_flags(cmp, f);
    cmp->add_option("--bin-width", f.bin_width, "distance bin width");
    cmp->add_option("--dmin", f.dmin, "fit window lower edge");
    cmp->add_option("--dmax", f.dmax, "fit window upper edge (default L/2)");
    cmp->add_option("--statistic", f.statistic, "first-passage (default) | all");
    cmp->add_option("--slowness-scale", f.slowness_scale, "scale the theoretical slowness (negative control)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (bound->parsed())
            return cmd_bound(resolve(f, Mode::Bound));
        if (sweep->parsed())
            return cmd_sweep(resolve(f, Mode::Sweep));
        if (simulate->parsed())
            return cmd_simulate(resolve(f, Mode::Simulate));
        return cmd_compare(resolve(f, Mode::Compare));
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kDomain;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kDomain;
    } catch (const StatisticsError& e) {
        std::cerr << "statistics error: " << e.what() << '\n';
        return kDomain;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "usage error: config: " << e.what() << '\n';
        return kUsage;
    }
}
