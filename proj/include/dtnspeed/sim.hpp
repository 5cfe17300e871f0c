#pragma once
/**
 * @file sim.hpp
 * @brief Epidemic broadcast among billiard / random-walk nodes in [0, L]^D.
 *
 * Nodes move at constant speed v, reflect specularly on the box faces and
 * redraw an isotropic direction at the arrival times of a Poisson process of
 * rate tau (exact turn instants, independent of dt). Every dt the unit-disk
 * graph is rebuilt and each connected component that holds an infected node
 * is infected at once.
 *
 * Each node draws from its own random stream, seeded from (seed, node id),
 * so trajectories do not depend on dt or on the number of nodes processed
 * before it. Uniform and exponential variates are derived from raw 64-bit
 * engine output, which keeps runs bit-reproducible across standard libraries.
 */

#include "dtnspeed/disjoint_set.hpp"
#include "dtnspeed/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtnspeed {

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class SourcePlacement { Center, UniformRandom };

struct SimConfig {
    Dim d{2};
    double box_length = 40.0;
    int n = 160;
    double v = 1.0;
    double tau = 0.0;
    double radio_range = 1.0;
    double dt = 0.05;
    double t_max = 2000.0;
    std::uint64_t seed = 1;
    SourcePlacement source_placement = SourcePlacement::Center;

    double volume() const { return std::pow(box_length, d.value()); }
    double density() const { return n / volume(); }

    /// Throws ConfigError listing every violated invariant.
    void validate() const
    {
        std::ostringstream bad;
        if (!(box_length > 2.0 * radio_range) || !std::isfinite(box_length))
            bad << " box_length must exceed 2*radio_range;";
        if (!(radio_range > 0.0))
            bad << " radio_range must be > 0;";
        if (n < 2)
            bad << " n must be >= 2;";
        if (!(v > 0.0) || !std::isfinite(v))
            bad << " v must be > 0;";
        if (!(tau >= 0.0) || !std::isfinite(tau))
            bad << " tau must be >= 0;";
        if (!(dt > 0.0))
            bad << " dt must be > 0;";
        else if (v > 0.0 && dt > 0.1 * radio_range / v * (1.0 + 1e-12))
            bad << " dt must be <= 0.1*radio_range/v;";
        if (!(t_max > 0.0) || !std::isfinite(t_max))
            bad << " t_max must be > 0;";
        const auto msg = bad.str();
        if (!msg.empty())
            throw ConfigError("invalid simulation config:" + msg);
    }
};

/// Node count round(nu * L^D) for a density/box pair.
inline int node_count_for_density(Dim d, double nu, double box_length)
{
    return static_cast<int>(std::lround(nu * std::pow(box_length, d.value())));
}

using Vec = std::array<double, 3>;

struct NodeState {
    Vec position{};
    Vec direction{};
    double next_turn_time = std::numeric_limits<double>::infinity();
    bool infected = false;
    std::optional<double> infection_time;
    std::uint64_t turns = 0;
};

struct InfectionRecord {
    int node_id = 0;
    double infection_time = 0.0;
    double distance = 0.0;

    friend bool operator==(const InfectionRecord&, const InfectionRecord&) = default;
};

/// Per-node random stream.
class NodeStream {
  public:
    NodeStream(std::uint64_t seed, std::uint32_t node)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), node};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    Vec isotropic_direction(Dim d)
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        switch (d.value()) {
        case 1: return {uniform() < 0.5 ? -1.0 : 1.0, 0.0, 0.0};
        case 2: {
            const double a = two_pi * uniform();
            return {std::cos(a), std::sin(a), 0.0};
        }
        default: {
            const double z = 2.0 * uniform() - 1.0;
            const double a = two_pi * uniform();
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            return {r * std::cos(a), r * std::sin(a), z};
        }
        }
    }

  private:
    std::mt19937_64 engine_;
};

struct World {
    SimConfig config;
    std::uint64_t step = 0;
    double time = 0.0;
    std::vector<NodeState> nodes;
    std::vector<NodeStream> streams;
    int source_index = 0;
    Vec source_origin{};
    int infected_count = 0;

    bool all_infected() const noexcept { return infected_count == static_cast<int>(nodes.size()); }
};

namespace detail {

inline double distance(const Vec& a, const Vec& b, int dim)
{
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double t = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
        s += t * t;
    }
    return std::sqrt(s);
}

/**
 * Moves coordinate x by dx inside [0, L] with specular reflection: the
 * unfolded coordinate is mapped back by the 2L-periodic folding map and the
 * direction flips once per crossed face.
 */
inline void fold_move(double& x, double& dir, double dx, double L)
{
    const double u = x + dx;
    if (u >= 0.0 && u <= L) {
        x = u;
        return;
    }
    const double k = std::floor(u / L);
    const bool odd = std::fmod(std::fabs(k), 2.0) == 1.0;
    double pos = odd ? (k + 1.0) * L - u : u - k * L;
    x = std::clamp(pos, 0.0, L);
    if (odd)
        dir = -dir;
}

inline void move_node(NodeState& node, double duration, double v, double L, int dim)
{
    const double step = v * duration;
    for (int k = 0; k < dim; ++k) {
        const auto i = static_cast<std::size_t>(k);
        fold_move(node.position[i], node.direction[i], step * node.direction[i], L);
    }
}

} // namespace detail

/// Folding map of an unconstrained coordinate into [0, L].
inline double fold_coordinate(double u, double L)
{
    double x = 0.0;
    double dir = 1.0;
    detail::fold_move(x, dir, u, L);
    return x;
}

/// Initial state: uniform positions, isotropic directions, source infected at t = 0.
inline World init_world(const SimConfig& config)
{
    config.validate();
    World w;
    w.config = config;
    const auto n = static_cast<std::size_t>(config.n);
    const int dim = config.d.value();
    w.nodes.resize(n);
    w.streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& rng = w.streams.emplace_back(config.seed, static_cast<std::uint32_t>(i));
        auto& node = w.nodes[i];
        for (int k = 0; k < dim; ++k)
            node.position[static_cast<std::size_t>(k)] = config.box_length * rng.uniform();
        node.direction = rng.isotropic_direction(config.d);
        node.next_turn_time = config.tau > 0.0 ? rng.exponential(config.tau)
                                               : std::numeric_limits<double>::infinity();
    }
    w.source_index = 0;
    auto& src = w.nodes[0];
    if (config.source_placement == SourcePlacement::Center)
        for (int k = 0; k < dim; ++k)
            src.position[static_cast<std::size_t>(k)] = 0.5 * config.box_length;
    src.infected = true;
    src.infection_time = 0.0;
    w.infected_count = 1;
    w.source_origin = src.position;
    return w;
}

/// Advances every node by one time step dt.
inline void advance(World& w)
{
    const auto& c = w.config;
    if (w.time + c.dt > c.t_max * (1.0 + 1e-12))
        throw std::logic_error("advance: step would pass t_max");
    const int dim = c.d.value();
    const double t0 = w.time;
    const double t1 = static_cast<double>(w.step + 1) * c.dt;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
        auto& node = w.nodes[i];
        double t = t0;
        while (node.next_turn_time <= t1) {
            detail::move_node(node, node.next_turn_time - t, c.v, c.box_length, dim);
            t = node.next_turn_time;
            node.direction = w.streams[i].isotropic_direction(c.d);
            node.next_turn_time += w.streams[i].exponential(c.tau);
            ++node.turns;
        }
        detail::move_node(node, t1 - t, c.v, c.box_length, dim);
    }
    ++w.step;
    w.time = t1;
}

/**
 * Infects every connected component of the unit-disk graph that contains an
 * infected node. Returns one record per newly infected node.
 */
inline std::vector<InfectionRecord> flood(World& w)
{
    std::vector<InfectionRecord> fresh;
    if (w.all_infected())
        return fresh;

    const auto& c = w.config;
    const int dim = c.d.value();
    const auto n = w.nodes.size();
    const double r2 = c.radio_range * c.radio_range;

    // uniform cell grid, cell side >= radio_range
    const int max_cells = std::max(64, 4 * static_cast<int>(n));
    const int cap = std::max(1, static_cast<int>(std::floor(std::pow(max_cells, 1.0 / dim))));
    const int m = std::max(1, std::min(static_cast<int>(std::floor(c.box_length / c.radio_range)), cap));
    const double inv_cell = m / c.box_length;
    int total = 1;
    for (int k = 0; k < dim; ++k)
        total *= m;

    std::array<int, 3> stride{1, m, m * m};
    std::vector<int> cell_of(n);
    std::vector<int> start(static_cast<std::size_t>(total) + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int idx = 0;
        for (int k = 0; k < dim; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            const int ci = std::min(m - 1, static_cast<int>(w.nodes[i].position[kk] * inv_cell));
            idx += ci * stride[kk];
        }
        cell_of[i] = idx;
        ++start[static_cast<std::size_t>(idx) + 1];
    }
    for (int k = 0; k < total; ++k)
        start[static_cast<std::size_t>(k) + 1] += start[static_cast<std::size_t>(k)];
    std::vector<std::uint32_t> members(n);
    {
        auto fill = start;
        for (std::size_t i = 0; i < n; ++i)
            members[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[i])]++)] =
                static_cast<std::uint32_t>(i);
    }

    DisjointSet sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pi = w.nodes[i].position;
        std::array<int, 3> ci{0, 0, 0};
        for (int k = 0; k < dim; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            ci[kk] = (cell_of[i] / stride[kk]) % m;
        }
        const int oz = dim > 2 ? 1 : 0;
        const int oy = dim > 1 ? 1 : 0;
        for (int dz = -oz; dz <= oz; ++dz)
            for (int dy = -oy; dy <= oy; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = ci[0] + dx;
                    const int yy = ci[1] + dy;
                    const int z = ci[2] + dz;
                    if (x < 0 || x >= m || yy < 0 || (dim > 1 && yy >= m) || z < 0 || (dim > 2 && z >= m))
                        continue;
                    const auto cell = static_cast<std::size_t>(x + yy * stride[1] + z * stride[2]);
                    for (int s = start[cell]; s < start[cell + 1]; ++s) {
                        const auto j = members[static_cast<std::size_t>(s)];
                        if (j <= i)
                            continue;
                        const auto& pj = w.nodes[j].position;
                        double d2 = 0.0;
                        for (int k = 0; k < dim; ++k) {
                            const double t = pi[static_cast<std::size_t>(k)] - pj[static_cast<std::size_t>(k)];
                            d2 += t * t;
                        }
                        if (d2 <= r2)
                            sets.unite(static_cast<std::uint32_t>(i), j);
                    }
                }
    }

    std::vector<char> hot(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (w.nodes[i].infected)
            hot[sets.find(static_cast<std::uint32_t>(i))] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = w.nodes[i];
        if (node.infected || !hot[sets.find(static_cast<std::uint32_t>(i))])
            continue;
        node.infected = true;
        node.infection_time = w.time;
        ++w.infected_count;
        fresh.push_back({static_cast<int>(i), w.time, detail::distance(w.source_origin, node.position, dim)});
    }
    return fresh;
}

/**
 * Full broadcast: flood, advance, flood, ... until every node is infected
 * or t_max is reached. Records are sorted by (infection_time, node_id); the
 * source record comes first with time 0.
 */
inline std::vector<InfectionRecord> run_epidemic(const SimConfig& config)
{
    World w = init_world(config);
    std::vector<InfectionRecord> records;
    records.reserve(static_cast<std::size_t>(config.n));
    records.push_back({w.source_index, 0.0, 0.0});
    for (;;) {
        auto fresh = flood(w);
        records.insert(records.end(), fresh.begin(), fresh.end());
        if (w.all_infected() || w.time + config.dt > config.t_max * (1.0 + 1e-12))
            break;
        advance(w);
    }
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.infection_time < b.infection_time ||
               (a.infection_time == b.infection_time && a.node_id < b.node_id);
    });
    return records;
}

} // namespace dtnspeed
