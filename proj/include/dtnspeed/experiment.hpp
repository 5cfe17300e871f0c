#pragma once
/**
 * @file experiment.hpp
 * @brief Experiment harness shared by the command-line tool and the tests:
 * JSON configuration, multi-run simulation, sweeps, the compare pipeline
 * and the CSV / JSON writers.
 */

#include "dtnspeed/kernel.hpp"
#include "dtnspeed/sim.hpp"
#include "dtnspeed/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace dtnspeed {

enum class Mode { Bound, Sweep, Simulate, Compare };

/// Which records feed the curve and the slope fit.
enum class Statistic {
    FirstPassage, ///< per run, earliest reception at distance >= d for each bin center d
    AllRecords,   ///< every reception, pooled
};

struct ExperimentConfig {
    Mode mode = Mode::Bound;
    ModelParams model;
    SimConfig sim;
    int runs = 100;
    std::vector<double> nu_grid;
    std::string output_path;
    double bin_width = 1.0;
    double d_min = 5.0;
    double d_max = std::numeric_limits<double>::quiet_NaN(); ///< NaN: L/2
    Statistic statistic = Statistic::FirstPassage;
    /// Multiplies the theoretical slowness in compare; 1 except in negative-control tests.
    double slowness_scale = 1.0;
};

/// Reads the JSON mirror of ExperimentConfig; absent keys keep the values already in cfg.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j)
{
    if (j.contains("mode")) {
        const auto m = j.at("mode").get<std::string>();
        if (m == "bound") cfg.mode = Mode::Bound;
        else if (m == "sweep") cfg.mode = Mode::Sweep;
        else if (m == "simulate") cfg.mode = Mode::Simulate;
        else if (m == "compare") cfg.mode = Mode::Compare;
        else throw ConfigError("config: unknown mode '" + m + "'");
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        if (m.contains("dim")) cfg.model.d = Dim(m.at("dim").get<int>());
        if (m.contains("nu")) cfg.model.nu = m.at("nu").get<double>();
        if (m.contains("v")) cfg.model.v = m.at("v").get<double>();
        if (m.contains("tau")) cfg.model.tau = m.at("tau").get<double>();
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        if (s.contains("dim")) cfg.sim.d = Dim(s.at("dim").get<int>());
        if (s.contains("L")) cfg.sim.box_length = s.at("L").get<double>();
        if (s.contains("n")) cfg.sim.n = s.at("n").get<int>();
        if (s.contains("v")) cfg.sim.v = s.at("v").get<double>();
        if (s.contains("tau")) cfg.sim.tau = s.at("tau").get<double>();
        if (s.contains("radio_range")) cfg.sim.radio_range = s.at("radio_range").get<double>();
        if (s.contains("dt")) cfg.sim.dt = s.at("dt").get<double>();
        if (s.contains("tmax")) cfg.sim.t_max = s.at("tmax").get<double>();
        if (s.contains("seed")) cfg.sim.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("source")) {
            const auto p = s.at("source").get<std::string>();
            if (p == "center") cfg.sim.source_placement = SourcePlacement::Center;
            else if (p == "uniform") cfg.sim.source_placement = SourcePlacement::UniformRandom;
            else throw ConfigError("config: unknown source placement '" + p + "'");
        }
    }
    if (j.contains("runs")) cfg.runs = j.at("runs").get<int>();
    if (j.contains("nu_grid")) cfg.nu_grid = j.at("nu_grid").get<std::vector<double>>();
    if (j.contains("out")) cfg.output_path = j.at("out").get<std::string>();
    if (j.contains("bin_width")) cfg.bin_width = j.at("bin_width").get<double>();
    if (j.contains("dmin")) cfg.d_min = j.at("dmin").get<double>();
    if (j.contains("dmax")) cfg.d_max = j.at("dmax").get<double>();
    if (j.contains("statistic")) {
        const auto st = j.at("statistic").get<std::string>();
        if (st == "first-passage") cfg.statistic = Statistic::FirstPassage;
        else if (st == "all") cfg.statistic = Statistic::AllRecords;
        else throw ConfigError("config: unknown statistic '" + st + "'");
    }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    apply_json(cfg, j);
}

/// Worker threads: DTN_SPEED_THREADS if set and positive, else the hardware count.
inline int worker_count()
{
    if (const char* env = std::getenv("DTN_SPEED_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<InfectionRecord> records;
    double completion = 0.0; ///< fraction of nodes infected by the end of the run
};

/**
 * Independent epidemics with seeds base.seed, base.seed + 1, ... Results are
 * returned in seed order whatever the number of workers.
 */
inline std::vector<RunResult> simulate_runs(const SimConfig& base, int runs, int threads = worker_count())
{
    base.validate();
    if (runs < 1)
        throw ConfigError("runs must be >= 1");
    std::vector<RunResult> out(static_cast<std::size_t>(runs));
    std::atomic<int> next{0};
    std::mutex error_lock;
    std::exception_ptr error;
    auto work = [&] {
        for (int i = next++; i < runs; i = next++) {
            try {
                SimConfig c = base;
                c.seed = base.seed + static_cast<std::uint64_t>(i);
                auto& r = out[static_cast<std::size_t>(i)];
                r.seed = c.seed;
                r.records = run_epidemic(c);
                r.completion = static_cast<double>(r.records.size()) / c.n;
            } catch (...) {
                std::lock_guard lock(error_lock);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(threads, 1, runs);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back(work);
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

inline std::vector<InfectionRecord> pooled_records(const std::vector<RunResult>& runs)
{
    std::vector<InfectionRecord> all;
    for (const auto& r : runs)
        all.insert(all.end(), r.records.begin(), r.records.end());
    return all;
}

/// %.17g; round-trips every double.
inline std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_records_csv(std::ostream& os, const std::vector<RunResult>& runs)
{
    os << "run_seed,node_id,infection_time,distance\n";
    for (const auto& run : runs)
        for (const auto& r : run.records)
            os << run.seed << ',' << r.node_id << ',' << format_double(r.infection_time) << ','
               << format_double(r.distance) << '\n';
}

// --- sweep ------------------------------------------------------------------

struct SweepRow {
    double nu = 0.0;
    SpeedBound bound;
    double residual = 0.0; ///< kernel residual at the argmin (Finite rows)
};

/// n evenly spaced densities in (0, 1/V_D], threshold included.
inline std::vector<double> default_nu_grid(Dim d, int points = 200)
{
    std::vector<double> g;
    const double top = density_threshold(d);
    for (int i = 1; i <= points; ++i)
        g.push_back(top * i / points);
    g.back() = top;
    return g;
}

inline std::vector<SweepRow> sweep_rows(Dim d, double v, double tau, const std::vector<double>& nu_grid)
{
    std::vector<SweepRow> rows;
    rows.reserve(nu_grid.size());
    for (double nu : nu_grid) {
        const ModelParams p{d, nu, v, tau};
        SweepRow row{nu, speed_bound(p), 0.0};
        if (row.bound.finite())
            row.residual = kernel_residual(p, *row.bound.argmin);
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << "nu,slowness,speed,rho0,theta0,status\n";
    for (const auto& r : rows) {
        const auto& b = r.bound;
        os << format_double(r.nu) << ',' << format_double(b.slowness) << ','
           << (b.speed ? format_double(*b.speed) : std::string("inf")) << ','
           << (b.argmin ? format_double(b.argmin->rho) : std::string("nan")) << ','
           << (b.argmin ? format_double(b.argmin->theta) : std::string("nan")) << ',' << to_string(b.status)
           << '\n';
    }
}

// --- compare ----------------------------------------------------------------

struct CompareOptions {
    int runs = 100;
    double d_min = 5.0;
    double d_max = std::numeric_limits<double>::quiet_NaN(); ///< NaN: L/2
    double bin_width = 1.0;
    Statistic statistic = Statistic::FirstPassage;
    double slowness_scale = 1.0;
    int threads = worker_count();
};

struct CompareOutcome {
    ModelParams model;
    std::vector<RunResult> runs;
    std::vector<InfectionRecord> samples;
    PropagationCurve curve;
    SlopeFit fit;
    SlopeFit curve_fit;
    SpeedBound bound;
    DominationReport report;
};

/// Model parameters matching a simulation: nu = n / L^D exactly.
inline ModelParams model_for(const SimConfig& sim) { return ModelParams{sim.d, sim.density(), sim.v, sim.tau}; }

/// Curve / fit input drawn from the runs, restricted to distance <= d_max.
inline std::vector<InfectionRecord> fit_samples(const std::vector<RunResult>& runs, Statistic statistic,
                                                double bin_width, double d_max)
{
    std::vector<InfectionRecord> out;
    for (const auto& run : runs) {
        if (statistic == Statistic::FirstPassage) {
            const auto fp = first_passage_samples(run.records, bin_width, d_max);
            out.insert(out.end(), fp.begin(), fp.end());
        } else {
            for (const auto& r : run.records)
                if (r.distance <= d_max)
                    out.push_back(r);
        }
    }
    return out;
}

/**
 * Simulates, bins, fits the slope over [d_min, d_max] and checks it against
 * the speed bound of the matching model.
 */
inline CompareOutcome compare(const SimConfig& sim, const CompareOptions& opt = {})
{
    CompareOutcome out;
    out.model = model_for(sim);
    out.runs = simulate_runs(sim, opt.runs, opt.threads);
    const double d_max = std::isnan(opt.d_max) ? 0.5 * sim.box_length : opt.d_max;
    out.samples = fit_samples(out.runs, opt.statistic, opt.bin_width, d_max);
    out.curve = build_curve(out.samples, opt.bin_width);
    out.fit = fit_slope(out.samples, opt.d_min);
    out.curve_fit = fit_curve(out.curve, opt.d_min);
    out.bound = speed_bound(out.model);
    auto scaled = out.bound;
    scaled.slowness *= opt.slowness_scale;
    out.report = check_bound(out.fit, scaled);
    return out;
}

inline void write_curve_csv(std::ostream& os, const PropagationCurve& curve)
{
    os << "distance,mean_time,std_error,count\n";
    for (const auto& b : curve.bins)
        os << format_double(b.distance_center) << ',' << format_double(b.mean_time) << ','
           << format_double(b.std_error) << ',' << b.count << '\n';
}

inline void write_fit_csv(std::ostream& os, const SlopeFit& fit)
{
    os << "slope,intercept,slope_std_error,d_min,d_max,samples,r_squared\n"
       << format_double(fit.slope) << ',' << format_double(fit.intercept) << ','
       << format_double(fit.slope_std_error) << ',' << format_double(fit.d_min) << ','
       << format_double(fit.d_max) << ',' << fit.samples << ',' << format_double(fit.r_squared) << '\n';
}

inline nlohmann::json report_json(const DominationReport& r)
{
    return {{"theoretical_slowness", r.theoretical_slowness},
            {"fitted_slowness", r.fitted_slowness},
            {"stderr", r.std_error},
            {"margin", r.margin},
            {"pass", r.pass}};
}

inline std::string report_line(const DominationReport& r)
{
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << ": fitted slowness " << r.fitted_slowness << " +/- " << r.std_error
       << " vs theoretical " << r.theoretical_slowness << " (margin " << r.margin << ")";
    return os.str();
}

} // namespace dtnspeed
