#pragma once
/**
 * @file stats.hpp
 * @brief Propagation-time curves, slope fits and the domination check.
 */

#include "dtnspeed/kernel.hpp"
#include "dtnspeed/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtnspeed {

class StatisticsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CurveBin {
    double distance_center = 0.0;
    double mean_time = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

struct PropagationCurve {
    std::vector<CurveBin> bins;
    double bin_width = 1.0;

    std::size_t total_count() const
    {
        std::size_t s = 0;
        for (const auto& b : bins)
            s += b.count;
        return s;
    }
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
    double d_min = 0.0;
    double d_max = 0.0;
    std::size_t samples = 0;
    double r_squared = 0.0;
};

struct DominationReport {
    double theoretical_slowness = 0.0;
    double fitted_slowness = 0.0;
    double std_error = 0.0;
    double margin = 0.0;
    bool pass = false;
};

/// Bins records by floor(distance / bin_width); standard error uses the n-1 sample deviation.
inline PropagationCurve build_curve(std::span<const InfectionRecord> records, double bin_width)
{
    if (!(bin_width > 0.0))
        throw StatisticsError("build_curve: bin_width must be > 0");
    struct Acc {
        std::size_t n = 0;
        double mean = 0.0;
        double m2 = 0.0;
    };
    std::map<long long, Acc> acc;
    for (const auto& r : records) {
        auto& a = acc[static_cast<long long>(std::floor(r.distance / bin_width))];
        ++a.n;
        const double delta = r.infection_time - a.mean;
        a.mean += delta / static_cast<double>(a.n);
        a.m2 += delta * (r.infection_time - a.mean);
    }
    PropagationCurve curve;
    curve.bin_width = bin_width;
    curve.bins.reserve(acc.size());
    for (const auto& [key, a] : acc) {
        CurveBin b;
        b.distance_center = (static_cast<double>(key) + 0.5) * bin_width;
        b.mean_time = a.mean;
        b.count = a.n;
        b.std_error = a.n > 1 ? std::sqrt(a.m2 / static_cast<double>(a.n - 1) / static_cast<double>(a.n)) : 0.0;
        curve.bins.push_back(b);
    }
    return curve;
}

namespace detail {

// Two-pass ordinary least squares of y on x.
inline SlopeFit ols(std::span<const double> x, std::span<const double> y)
{
    const auto n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0))
        throw StatisticsError("fit: degenerate design, all distances are equal");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ssr += e * e;
    }
    f.slope_std_error = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
    f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    f.samples = n;
    return f;
}

} // namespace detail

inline constexpr std::size_t kMinFitRecords = 10;

/// OLS of infection_time on distance over records with distance >= d_min.
inline SlopeFit fit_slope(std::span<const InfectionRecord> records, double d_min)
{
    std::vector<double> x, y;
    for (const auto& r : records)
        if (r.distance >= d_min) {
            x.push_back(r.distance);
            y.push_back(r.infection_time);
        }
    if (x.size() < kMinFitRecords)
        throw StatisticsError("fit_slope: need at least " + std::to_string(kMinFitRecords) +
                              " records with distance >= " + std::to_string(d_min) + ", have " +
                              std::to_string(x.size()) + " (short by " +
                              std::to_string(kMinFitRecords - x.size()) + ")");
    auto f = detail::ols(x, y);
    f.d_min = d_min;
    f.d_max = *std::max_element(x.begin(), x.end());
    return f;
}

/**
 * First-passage samples of one run: for each bin center d = (k + 1/2) w up to
 * d_max, the earliest record whose distance is >= d, reported at distance d.
 * Records must be sorted by infection_time (as run_epidemic returns them).
 * Distances the run never reached produce no sample.
 */
inline std::vector<InfectionRecord> first_passage_samples(std::span<const InfectionRecord> run_records,
                                                          double bin_width, double d_max)
{
    if (!(bin_width > 0.0))
        throw StatisticsError("first_passage_samples: bin_width must be > 0");
    std::vector<InfectionRecord> out;
    std::size_t next = 0;
    double reach = -1.0;
    for (int k = 0;; ++k) {
        const double d = (k + 0.5) * bin_width;
        if (d > d_max)
            break;
        while (next < run_records.size() && reach < d) {
            if (run_records[next].distance >= d) {
                reach = run_records[next].distance;
                break;
            }
            ++next;
        }
        if (next == run_records.size())
            break;
        out.push_back({run_records[next].node_id, run_records[next].infection_time, d});
    }
    return out;
}

/// Straight-line fit of bin means against bin centers for bins centered at or past d_min.
inline SlopeFit fit_curve(const PropagationCurve& curve, double d_min)
{
    std::vector<double> x, y;
    for (const auto& b : curve.bins)
        if (b.distance_center >= d_min) {
            x.push_back(b.distance_center);
            y.push_back(b.mean_time);
        }
    if (x.size() < 3)
        throw StatisticsError("fit_curve: need at least 3 bins past d_min, have " + std::to_string(x.size()));
    auto f = detail::ols(x, y);
    f.d_min = d_min;
    f.d_max = x.back();
    return f;
}

/**
 * Compares a fitted slowness with the theoretical lower bound 1/speed.
 * Passes when fitted + 2 stderr >= theoretical; an unbounded bound always passes.
 */
inline DominationReport check_bound(const SlopeFit& fit, const SpeedBound& bound)
{
    DominationReport r;
    r.fitted_slowness = fit.slope;
    r.std_error = fit.slope_std_error;
    r.theoretical_slowness = bound.status == BoundStatus::Unbounded ? 0.0 : bound.slowness;
    r.margin = r.fitted_slowness - r.theoretical_slowness;
    r.pass = r.fitted_slowness + 2.0 * r.std_error >= r.theoretical_slowness;
    return r;
}

} // namespace dtnspeed
