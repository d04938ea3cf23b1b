#include "mrta/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mrta/geometry.hpp"

namespace mrta {

namespace {

constexpr int kRetryCap = 1000;
constexpr double kClearance = 1.0;

double round_to(double v, double step) {
    const double inv = std::round(1.0 / step);
    return std::round(v * inv) / inv;
}

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    Point free_point(const WorldModel& world) {
        const auto& b = world.bounds;
        for (int i = 0; i < kRetryCap; ++i) {
            const Point p{round_to(uniform(b.min.x + kClearance, b.max.x - kClearance), 0.01),
                          round_to(uniform(b.min.y + kClearance, b.max.y - kClearance), 0.01)};
            if (geometry::point_free(world, p)) return p;
        }
        throw Error("could not sample a free point");
    }

    std::vector<double> trait_row(std::size_t traits) {
        std::vector<double> row(traits, 0.0);
        while (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
            for (auto& v : row) v = chance(0.6) ? round_to(uniform(1.0, 5.0), 0.1) : 0.0;
        }
        return row;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

std::vector<Obstacle> place_obstacles(Sampler& s, const WorldParams& p) {
    std::vector<Circle> placed;
    for (int attempt = 0; attempt < kRetryCap && placed.size() < p.obstacles; ++attempt) {
        const double r = round_to(s.uniform(p.min_radius, p.max_radius), 0.1);
        const double margin = r + 2.0 * kClearance;
        if (2.0 * margin >= p.width || 2.0 * margin >= p.height) continue;
        const Circle c{{round_to(s.uniform(margin, p.width - margin), 0.1),
                        round_to(s.uniform(margin, p.height - margin), 0.1)},
                       r};
        const bool clear = std::all_of(placed.begin(), placed.end(), [&](const Circle& o) {
            return distance(o.center, c.center) > o.radius + c.radius + 2.0 * kClearance;
        });
        if (clear) placed.push_back(c);
    }
    return {placed.begin(), placed.end()};
}

Eigen::RowVectorXd row_of(const std::vector<double>& v) {
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

std::vector<double> to_vector(const Eigen::RowVectorXd& row) {
    return {row.data(), row.data() + row.size()};
}

// Requirement row: a scaled-down sum of a random coalition of 1 to 3 robots.
std::vector<double> coalition_requirement(Sampler& s, const Eigen::MatrixXd& team) {
    const auto robots = static_cast<std::size_t>(team.rows());
    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
        std::vector<std::size_t> order(robots);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), s.engine());
        const std::size_t size = 1 + s.index(std::min<std::size_t>(3, robots));
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(team.cols());
        for (std::size_t i = 0; i < size; ++i) sum += team.row(static_cast<Eigen::Index>(order[i]));
        std::vector<double> req(static_cast<std::size_t>(team.cols()), 0.0);
        for (Eigen::Index u = 0; u < team.cols(); ++u) {
            if (sum(u) <= 0.0 || s.chance(0.3)) continue;
            req[static_cast<std::size_t>(u)] = std::floor(sum(u) * s.uniform(0.4, 1.0) * 10.0) / 10.0;
        }
        if (std::any_of(req.begin(), req.end(), [](double v) { return v > 0.0; })) return req;
    }
    throw Error("could not sample a satisfiable requirement row");
}

}  // namespace

ProblemDomain generate_problem(std::uint64_t seed, const GeneratorParams& p) {
    if (p.robots < 1 || p.tasks < 1 || p.traits < 1) throw Error("generator counts must be at least 1");
    Sampler s(seed);
    ProblemDomain d;
    d.world.bounds = {{0.0, 0.0}, {p.world.width, p.world.height}};
    d.world.obstacles = place_obstacles(s, p.world);

    for (std::size_t u = 0; u < p.traits; ++u) d.team.trait_names.push_back("trait" + std::to_string(u));
    d.team.entries.resize(static_cast<Eigen::Index>(p.robots), static_cast<Eigen::Index>(p.traits));
    for (std::size_t r = 0; r < p.robots; ++r) {
        const std::string id = "r" + std::to_string(r);
        d.team.robot_ids.push_back(id);
        d.team.entries.row(static_cast<Eigen::Index>(r)) = row_of(s.trait_row(p.traits));
        d.world.robot_start_configs[id] = s.free_point(d.world);
        d.world.robot_speeds[id] = round_to(s.uniform(0.5, 2.0), 0.01);
    }

    d.requirements.entries.resize(static_cast<Eigen::Index>(p.tasks), static_cast<Eigen::Index>(p.traits));
    for (std::size_t m = 0; m < p.tasks; ++m) {
        TaskSpec t;
        t.id = "t" + std::to_string(m);
        t.duration = round_to(s.uniform(5.0, 30.0), 0.1);
        t.initial_config = s.free_point(d.world);
        t.terminal_config = s.chance(0.5) ? t.initial_config : s.free_point(d.world);
        d.network.tasks.push_back(t);
        d.requirements.entries.row(static_cast<Eigen::Index>(m)) =
            row_of(coalition_requirement(s, d.team.entries));
    }

    for (std::size_t i = 0; i < p.tasks; ++i) {
        for (std::size_t j = i + 1; j < p.tasks; ++j) {
            if (s.chance(p.precedence_probability)) d.network.precedence_edges.push_back({i, j});
        }
    }
    const auto closure = precedence_closure(p.tasks, d.network.precedence_edges);
    for (std::size_t i = 0; i < p.tasks; ++i) {
        for (std::size_t j = i + 1; j < p.tasks; ++j) {
            if (closure[i][j] || closure[j][i]) continue;
            if (s.chance(p.mutex_probability)) d.network.mutex_edges.push_back({i, j});
        }
    }

    if (!validate_problem(d).ok() || !requirements_satisfiable(d.team, d.requirements)) {
        throw Error("generated problem failed validation");
    }
    return d;
}

DynamicEvent generate_event(std::uint64_t seed, const ProblemDomain& d, EventKind kind, double time) {
    Sampler s(seed);
    const auto robots = d.num_robots();
    const auto tasks = d.num_tasks();
    const auto traits = d.num_traits();
    auto team_row = [&](std::size_t r) { return to_vector(d.team.entries.row(static_cast<Eigen::Index>(r))); };
    auto req_row = [&](std::size_t m) { return to_vector(d.requirements.entries.row(static_cast<Eigen::Index>(m))); };

    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
        DynamicEvent e;
        e.time = time;
        switch (kind) {
            case EventKind::AgentLost: {
                if (robots < 2) throw Error("cannot lose the only agent");
                e.payload = AgentLost{d.team.robot_ids[s.index(robots)]};
                break;
            }
            case EventKind::TaskLost: {
                if (tasks < 2) throw Error("cannot lose the only task");
                e.payload = TaskLost{d.network.tasks[s.index(tasks)].id};
                break;
            }
            case EventKind::TraitsReduced: {
                const auto r = s.index(robots);
                auto row = team_row(r);
                for (auto& v : row) {
                    if (v > 0.0 && s.chance(0.6)) v = round_to(v * s.uniform(0.0, 0.8), 0.1);
                }
                if (row == team_row(r)) continue;
                e.payload = TraitsReduced{d.team.robot_ids[r], row};
                break;
            }
            case EventKind::TraitsIncreased: {
                const auto r = s.index(robots);
                auto row = team_row(r);
                for (auto& v : row) {
                    if (s.chance(0.6)) v = round_to(v + s.uniform(0.5, 3.0), 0.1);
                }
                if (row == team_row(r)) continue;
                e.payload = TraitsIncreased{d.team.robot_ids[r], row};
                break;
            }
            case EventKind::RequirementsIncreased: {
                const auto m = s.index(tasks);
                auto row = req_row(m);
                for (auto& v : row) {
                    if (s.chance(0.6)) v = round_to(v + s.uniform(0.2, 2.0), 0.1);
                }
                if (row == req_row(m)) continue;
                e.payload = RequirementsIncreased{d.network.tasks[m].id, row};
                break;
            }
            case EventKind::RequirementsReduced: {
                const auto m = s.index(tasks);
                auto row = req_row(m);
                for (auto& v : row) {
                    if (v > 0.0 && s.chance(0.6)) v = round_to(v * s.uniform(0.0, 0.8), 0.1);
                }
                if (row == req_row(m)) continue;
                e.payload = RequirementsReduced{d.network.tasks[m].id, row};
                break;
            }
            case EventKind::DurationChanged: {
                const auto m = s.index(tasks);
                e.payload = DurationChanged{d.network.tasks[m].id, round_to(s.uniform(5.0, 30.0), 0.1)};
                break;
            }
            case EventKind::NewAgent: {
                std::string id;
                for (std::size_t k = robots;; ++k) {
                    id = "r" + std::to_string(k);
                    if (!d.robot_index(id)) break;
                }
                e.payload = NewAgent{id, s.trait_row(traits), s.free_point(d.world),
                                     round_to(s.uniform(0.5, 2.0), 0.01)};
                break;
            }
        }
        const auto next = apply_event(d, e);
        if (requirements_satisfiable(next.team, next.requirements)) return e;
    }
    throw Error("no satisfiable " + std::string(to_string(kind)) + " event found");
}

std::vector<DynamicEvent> generate_mixed_trait_change(std::uint64_t seed, const ProblemDomain& d,
                                                      double time) {
    if (d.num_traits() < 2) throw Error("a mixed trait change needs at least two traits");
    Sampler s(seed);
    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
        const auto r = s.index(d.num_robots());
        auto row = to_vector(d.team.entries.row(static_cast<Eigen::Index>(r)));
        std::vector<std::size_t> positive;
        for (std::size_t u = 0; u < row.size(); ++u) {
            if (row[u] > 0.0) positive.push_back(u);
        }
        if (positive.empty()) continue;
        const auto down = positive[s.index(positive.size())];
        auto up = s.index(row.size());
        if (up == down) up = (up + 1) % row.size();
        row[down] = round_to(row[down] * s.uniform(0.0, 0.7), 0.1);
        row[up] = round_to(row[up] + s.uniform(0.5, 3.0), 0.1);
        auto events = decompose_trait_change(d, d.team.robot_ids[r], row, time);
        if (events.size() != 2) continue;
        ProblemDomain next = d;
        for (const auto& e : events) next = apply_event(next, e);
        if (requirements_satisfiable(next.team, next.requirements)) return events;
    }
    throw Error("no satisfiable mixed trait change found");
}

std::vector<DynamicEvent> generate_event_sequence(std::uint64_t seed, const ProblemDomain& domain,
                                                  std::size_t count) {
    Sampler s(seed);
    std::vector<DynamicEvent> out;
    ProblemDomain current = domain;
    for (std::size_t i = 0; i < count; ++i) {
        const double time = static_cast<double>(i + 1);
        for (int attempt = 0;; ++attempt) {
            if (attempt >= kRetryCap) throw Error("could not extend the event sequence");
            const auto kind = kAllEventKinds[s.index(std::size(kAllEventKinds))];
            try {
                const auto e = generate_event(s.engine()(), current, kind, time);
                current = apply_event(current, e);
                out.push_back(e);
                break;
            } catch (const Error&) {
                continue;
            }
        }
    }
    return out;
}

}  // namespace mrta
