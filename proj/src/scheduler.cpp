#include "mrta/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

namespace mrta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneSlack = 1e-12;

struct Arc {
    std::size_t from;
    std::size_t to;
    double weight;
};

// Longest paths from a virtual source whose arcs carry the initial arrivals.
class ConstraintGraph {
public:
    explicit ConstraintGraph(const SchedulingProblem& p) : p_(p), n_(p.num_tasks()) {
        for (const auto& [i, j] : p.precedence) base_.push_back({i, j, p.durations[i] + p.x(i, j)});
        base_feasible_ = std::all_of(p.initial_arrival.begin(), p.initial_arrival.end(),
                                     [](double v) { return std::isfinite(v); }) &&
                         std::all_of(base_.begin(), base_.end(),
                                     [](const Arc& a) { return std::isfinite(a.weight); });
    }

    [[nodiscard]] Arc oriented(std::size_t pair, Ordering o) const {
        const auto [i, j] = p_.mutex_reduced[pair];
        if (o == Ordering::FirstBeforeSecond) return {i, j, p_.durations[i] + p_.x(i, j)};
        return {j, i, p_.durations[j] + p_.x(j, i)};
    }

    /// Fills `dist`; false on infeasibility.
    bool solve(std::span<const Ordering> orderings, std::optional<std::pair<std::size_t, Ordering>> extra,
               std::vector<double>& dist) {
        if (!base_feasible_) return false;
        arcs_.assign(base_.begin(), base_.end());
        for (std::size_t k = 0; k < orderings.size(); ++k) {
            if (orderings[k] != Ordering::Undecided) arcs_.push_back(oriented(k, orderings[k]));
        }
        if (extra) arcs_.push_back(oriented(extra->first, extra->second));
        for (const auto& a : arcs_) {
            if (!std::isfinite(a.weight)) return false;
        }

        dist.assign(p_.initial_arrival.begin(), p_.initial_arrival.end());
        indegree_.assign(n_, 0);
        head_.assign(n_ + 1, 0);
        for (const auto& a : arcs_) {
            ++indegree_[a.to];
            ++head_[a.from + 1];
        }
        for (std::size_t v = 0; v < n_; ++v) head_[v + 1] += head_[v];
        adj_.resize(arcs_.size());
        fill_.assign(head_.begin(), head_.end() - 1);
        for (std::size_t k = 0; k < arcs_.size(); ++k) adj_[fill_[arcs_[k].from]++] = k;

        order_.clear();
        for (std::size_t v = 0; v < n_; ++v) {
            if (indegree_[v] == 0) order_.push_back(v);
        }
        for (std::size_t q = 0; q < order_.size(); ++q) {
            const auto v = order_[q];
            for (auto e = head_[v]; e < head_[v + 1]; ++e) {
                const auto& a = arcs_[adj_[e]];
                dist[a.to] = std::max(dist[a.to], dist[v] + a.weight);
                if (--indegree_[a.to] == 0) order_.push_back(a.to);
            }
        }
        acyclic_ = order_.size() == n_;
        if (acyclic_) return true;

        // A cycle exists; Bellman-Ford separates zero-weight cycles from positive ones.
        dist.assign(p_.initial_arrival.begin(), p_.initial_arrival.end());
        for (std::size_t round = 0; round <= n_; ++round) {
            bool changed = false;
            for (const auto& a : arcs_) {
                if (dist[a.from] + a.weight > dist[a.to] + 1e-12) {
                    dist[a.to] = dist[a.from] + a.weight;
                    changed = true;
                }
            }
            if (!changed) return true;
        }
        return false;
    }

    /// Longest path from each task's start to the end of the schedule, duration included.
    /// Only valid after a successful solve on an acyclic graph.
    [[nodiscard]] bool acyclic() const { return acyclic_; }
    void tails(std::vector<double>& out) const {
        out.assign(p_.durations.begin(), p_.durations.end());
        for (auto q = order_.size(); q-- > 0;) {
            const auto v = order_[q];
            for (auto e = head_[v]; e < head_[v + 1]; ++e) {
                const auto& a = arcs_[adj_[e]];
                out[v] = std::max(out[v], a.weight + out[a.to]);
            }
        }
    }

private:
    const SchedulingProblem& p_;
    std::size_t n_;
    bool acyclic_ = false;
    std::vector<Arc> base_;
    bool base_feasible_ = true;
    std::vector<Arc> arcs_;
    std::vector<std::size_t> indegree_, head_, adj_, fill_, order_;
};

bool satisfied(const SchedulingProblem& p, std::span<const double> s, std::size_t i, std::size_t j) {
    return s[j] >= s[i] + p.durations[i] + p.x(i, j) - 1e-12;
}

constexpr std::size_t kNoPair = static_cast<std::size_t>(-1);

// A possible immediate predecessor u of v inside a group. `pair` is the mutex pair that must
// be oriented u-first for the link to remain usable, or kNoPair when precedence fixes it.
struct Link {
    std::size_t from;
    std::size_t to;
    double travel;
    std::size_t pair;
    Ordering needed;
};

struct ExclusiveGroup {
    std::vector<std::size_t> tasks;
    std::vector<Link> links;
};

// Groups of tasks that pairwise cannot overlap (mutex or ordered by precedence), each holding
// at least one mutex pair. Greedy, one maximal group grown from every task.
std::vector<ExclusiveGroup> exclusive_groups(const SchedulingProblem& p) {
    const std::size_t n = p.num_tasks();
    const auto reach = precedence_closure(n, p.precedence);
    std::vector<std::vector<bool>> apart(n, std::vector<bool>(n, false));
    std::vector<std::vector<std::size_t>> pair_of(n, std::vector<std::size_t>(n, kNoPair));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) apart[i][j] = reach[i][j] || reach[j][i];
    for (std::size_t k = 0; k < p.mutex_reduced.size(); ++k) {
        const auto [i, j] = p.mutex_reduced[k];
        apart[i][j] = apart[j][i] = true;
        pair_of[i][j] = pair_of[j][i] = k;
    }
    std::vector<std::size_t> by_duration(n);
    for (std::size_t i = 0; i < n; ++i) by_duration[i] = i;
    std::stable_sort(by_duration.begin(), by_duration.end(),
                     [&](std::size_t a, std::size_t b) { return p.durations[a] > p.durations[b]; });

    std::set<std::vector<std::size_t>> groups;
    for (std::size_t seed = 0; seed < n; ++seed) {
        std::vector<std::size_t> g{seed};
        for (const auto v : by_duration) {
            if (v == seed) continue;
            if (std::all_of(g.begin(), g.end(), [&](std::size_t u) { return apart[u][v]; })) g.push_back(v);
        }
        bool has_mutex = false;
        for (std::size_t a = 0; a < g.size() && !has_mutex; ++a)
            for (std::size_t b = a + 1; b < g.size(); ++b)
                if (pair_of[g[a]][g[b]] != kNoPair) has_mutex = true;
        if (!has_mutex) continue;
        std::sort(g.begin(), g.end());
        groups.insert(std::move(g));
    }
    // Longest precedence path from each start to each later start; -inf when unordered.
    std::vector<std::vector<double>> longest(n, std::vector<double>(n, -kInf));
    for (const auto& [i, j] : p.precedence) longest[i][j] = std::max(longest[i][j], p.durations[i] + p.x(i, j));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) longest[i][j] = std::max(longest[i][j], longest[i][k] + longest[k][j]);

    std::vector<ExclusiveGroup> out;
    for (const auto& g : groups) {
        ExclusiveGroup eg{g, {}};
        for (const auto u : g) {
            for (const auto v : g) {
                if (u == v || reach[v][u]) continue;
                const auto k = pair_of[u][v];
                const Ordering needed = u < v ? Ordering::FirstBeforeSecond : Ordering::SecondBeforeFirst;
                const double gap = k != kNoPair ? p.x(u, v) : std::max(0.0, longest[u][v] - p.durations[u]);
                eg.links.push_back({u, v, gap, k, needed});
            }
        }
        out.push_back(std::move(eg));
    }
    return out;
}

// Preemptive one-machine bound: max over tasks of completion plus tail, with release times
// `head_in` and post-completion tails `tail`. Each task also occupies the machine for its least
// incoming transition (over predecessors the orientations still allow) just before it starts.
class JacksonBound {
public:
    double operator()(const ExclusiveGroup& group, std::span<const Ordering> orderings,
                      std::optional<std::pair<std::size_t, Ordering>> extra, std::span<const double> head_in,
                      std::span<const double> durations, std::span<const double> tail) {
        setup_.assign(durations.size(), kInf);
        for (const auto& l : group.links) {
            if (l.pair != kNoPair) {
                Ordering o = orderings[l.pair];
                if (extra && extra->first == l.pair) o = extra->second;
                if (o != Ordering::Undecided && o != l.needed) continue;
            }
            setup_[l.to] = std::min(setup_[l.to], l.travel);
        }
        head_.assign(durations.size(), 0.0);
        left_.assign(durations.size(), 0.0);
        for (const auto v : group.tasks) {
            const double setup = std::isfinite(setup_[v]) ? setup_[v] : 0.0;
            head_[v] = head_in[v] - setup;
            left_[v] = durations[v] + setup;
        }
        release_.assign(group.tasks.begin(), group.tasks.end());
        std::sort(release_.begin(), release_.end(),
                  [&](std::size_t a, std::size_t b) { return head_[a] < head_[b]; });
        std::priority_queue<std::pair<double, std::size_t>> ready;  // (tail, task)
        double t = -kInf;
        double best = 0.0;
        std::size_t next = 0;
        while (next < release_.size() || !ready.empty()) {
            if (ready.empty()) t = std::max(t, head_[release_[next]]);
            while (next < release_.size() && head_[release_[next]] <= t) {
                ready.push({tail[release_[next]], release_[next]});
                ++next;
            }
            const auto [q, v] = ready.top();
            const double until = next < release_.size() ? head_[release_[next]] : kInf;
            const double run = std::min(left_[v], until - t);
            t += run;
            left_[v] -= run;
            if (left_[v] <= 0.0) {
                ready.pop();
                best = std::max(best, t + q);
            }
        }
        return best;
    }

private:
    std::vector<double> setup_, head_, left_;
    std::vector<std::size_t> release_;
};

class BranchAndBound {
public:
    BranchAndBound(const SchedulingProblem& p, ScheduleStats& stats)
        : p_(p), graph_(p), stats_(stats), current_(p.mutex_reduced.size(), Ordering::Undecided),
          groups_(p.mutex_reduced.empty() ? std::vector<ExclusiveGroup>{} : exclusive_groups(p)) {}

    std::optional<Schedule> run() {
        dive();
        return best_;
    }

    double root_bound() {
        std::vector<double> dist;
        return bound(std::nullopt, dist);
    }

private:
    double bound(std::optional<std::pair<std::size_t, Ordering>> extra, std::vector<double>& dist) {
        ++stats_.stn_solves;
        if (!graph_.solve(current_, extra, dist)) return kInf;
        double lb = makespan(dist, p_.durations);
        if (groups_.empty() || !graph_.acyclic()) return lb;
        graph_.tails(tail_);
        for (std::size_t v = 0; v < tail_.size(); ++v) tail_[v] -= p_.durations[v];
        for (const auto& g : groups_) {
            lb = std::max(lb, jackson_(g, current_, extra, dist, p_.durations, tail_));
        }
        return lb;
    }

    void dive() {
        ++stats_.nodes;
        std::vector<std::size_t> fixed;  // orientations forced at this node, undone on return
        explore(fixed);
        for (const auto k : fixed) current_[k] = Ordering::Undecided;
    }

    void explore(std::vector<std::size_t>& fixed) {
        std::vector<double> relaxed;
        std::vector<double> scratch;
        for (;;) {
            const double lb = bound(std::nullopt, relaxed);
            if (lb >= incumbent_ - kPruneSlack) return;

            std::vector<std::size_t> conflicts;
            for (std::size_t k = 0; k < current_.size(); ++k) {
                if (current_[k] != Ordering::Undecided) continue;
                const auto [i, j] = p_.mutex_reduced[k];
                if (!satisfied(p_, relaxed, i, j) && !satisfied(p_, relaxed, j, i)) conflicts.push_back(k);
            }

            if (conflicts.empty()) {
                // The relaxed earliest schedule already honors every open disjunction, so it is
                // optimal for this subtree.
                Schedule s;
                s.orderings = current_;
                for (std::size_t k = 0; k < s.orderings.size(); ++k) {
                    if (s.orderings[k] != Ordering::Undecided) continue;
                    const auto [i, j] = p_.mutex_reduced[k];
                    s.orderings[k] = satisfied(p_, relaxed, i, j) ? Ordering::FirstBeforeSecond
                                                                  : Ordering::SecondBeforeFirst;
                }
                s.makespan = makespan(relaxed, p_.durations);
                s.start_times = std::move(relaxed);
                incumbent_ = s.makespan;
                best_ = std::move(s);
                return;
            }

            // Orientations that cannot beat the incumbent are ruled out for the whole subtree;
            // the strongest remaining conflict is branched on.
            bool changed = false;
            std::size_t chosen = conflicts.front();
            double chosen_score = -kInf;
            double chosen_bounds[2] = {kInf, kInf};
            for (const auto k : conflicts) {
                const double b0 = bound(std::pair{k, Ordering::FirstBeforeSecond}, scratch);
                const double b1 = bound(std::pair{k, Ordering::SecondBeforeFirst}, scratch);
                const bool dead0 = b0 >= incumbent_ - kPruneSlack;
                const bool dead1 = b1 >= incumbent_ - kPruneSlack;
                if (dead0 && dead1) return;
                if (dead0 || dead1) {
                    current_[k] = dead0 ? Ordering::SecondBeforeFirst : Ordering::FirstBeforeSecond;
                    fixed.push_back(k);
                    changed = true;
                    continue;
                }
                const double score = std::min(b0, b1) + 1e-6 * std::max(b0, b1);
                if (score > chosen_score) {
                    chosen = k;
                    chosen_score = score;
                    chosen_bounds[0] = b0;
                    chosen_bounds[1] = b1;
                }
            }
            if (changed) continue;

            const Ordering first = chosen_bounds[1] < chosen_bounds[0] ? Ordering::SecondBeforeFirst
                                                                       : Ordering::FirstBeforeSecond;
            const Ordering second =
                first == Ordering::FirstBeforeSecond ? Ordering::SecondBeforeFirst : Ordering::FirstBeforeSecond;
            for (const auto o : {first, second}) {
                if (chosen_bounds[static_cast<int>(o)] >= incumbent_ - kPruneSlack) continue;
                current_[chosen] = o;
                dive();
                current_[chosen] = Ordering::Undecided;
            }
            return;
        }
    }

    const SchedulingProblem& p_;
    ConstraintGraph graph_;
    ScheduleStats& stats_;
    std::vector<Ordering> current_;
    std::vector<ExclusiveGroup> groups_;
    std::vector<double> tail_;
    JacksonBound jackson_;
    double incumbent_ = kInf;
    std::optional<Schedule> best_;
};

}  // namespace

SchedulingProblem SchedulingProblem::with_tasks(std::size_t num_tasks) {
    SchedulingProblem p;
    p.durations.assign(num_tasks, 0.0);
    p.transition.assign(num_tasks * num_tasks, 0.0);
    p.initial_arrival.assign(num_tasks, 0.0);
    return p;
}

SchedulingProblem build_scheduling_problem(const ProblemDomain& domain, const Allocation& alloc,
                                           TravelTimeProvider& travel) {
    const std::size_t m = domain.num_tasks();
    if (alloc.num_tasks() != m || alloc.num_robots() != domain.num_robots()) {
        throw DimensionError("allocation does not match the domain");
    }
    const auto& tasks = domain.network.tasks;
    auto p = SchedulingProblem::with_tasks(m);
    for (std::size_t i = 0; i < m; ++i) p.durations[i] = tasks[i].duration;

    auto query = [&travel](std::size_t robot, Point from, Point to) {
        return travel.travel_time(robot, from, to).value_or(kInf);
    };

    std::vector<std::vector<std::size_t>> robots(m);
    for (std::size_t i = 0; i < m; ++i) {
        robots[i] = alloc.robots_of(i);
        double arrival = 0.0;
        for (const auto r : robots[i]) {
            arrival = std::max(arrival, query(r, domain.robot_start(r), tasks[i].initial_config));
        }
        p.initial_arrival[i] = arrival;
    }

    const auto reach = precedence_closure(m, domain.network.precedence_edges);
    auto shared_travel = [&](std::size_t i, std::size_t j, const std::vector<std::size_t>& shared) {
        double x = 0.0;
        for (const auto r : shared) {
            x = std::max(x, query(r, tasks[i].terminal_config, tasks[j].initial_config));
        }
        return x;
    };

    std::vector<TaskPair> precedence = domain.network.precedence_edges;
    std::vector<bool> mutex(m * m, false);
    for (const auto& [a, b] : domain.network.mutex_edges) mutex[std::min(a, b) * m + std::max(a, b)] = true;

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            std::vector<std::size_t> shared;
            std::set_intersection(robots[i].begin(), robots[i].end(), robots[j].begin(),
                                  robots[j].end(), std::back_inserter(shared));
            if (shared.empty()) continue;
            if (reach[i][j]) {
                p.set_x(i, j, shared_travel(i, j, shared));
                precedence.emplace_back(i, j);
            } else if (reach[j][i]) {
                p.set_x(j, i, shared_travel(j, i, shared));
                precedence.emplace_back(j, i);
            } else {
                p.set_x(i, j, shared_travel(i, j, shared));
                p.set_x(j, i, shared_travel(j, i, shared));
                mutex[i * m + j] = true;
            }
        }
    }
    std::sort(precedence.begin(), precedence.end());
    precedence.erase(std::unique(precedence.begin(), precedence.end()), precedence.end());
    p.precedence = std::move(precedence);

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (mutex[i * m + j] && !reach[i][j] && !reach[j][i]) p.mutex_reduced.emplace_back(i, j);
        }
    }
    return p;
}

std::optional<Schedule> stn_solve(const SchedulingProblem& problem,
                                  std::span<const Ordering> orderings) {
    if (orderings.size() != problem.mutex_reduced.size()) {
        throw DimensionError("one ordering per reduced mutex pair is required");
    }
    ConstraintGraph graph(problem);
    Schedule s;
    if (!graph.solve(orderings, std::nullopt, s.start_times)) return std::nullopt;
    s.makespan = makespan(s.start_times, problem.durations);
    s.orderings.assign(orderings.begin(), orderings.end());
    return s;
}

std::optional<Schedule> solve_schedule(const SchedulingProblem& problem, ScheduleStats* stats) {
    ScheduleStats local;
    BranchAndBound bnb(problem, stats ? *stats : local);
    return bnb.run();
}

std::optional<double> makespan_lower_bound(const SchedulingProblem& problem) {
    for (std::size_t k = 0; k < problem.mutex_reduced.size(); ++k) {
        const auto [i, j] = problem.mutex_reduced[k];
        if (!std::isfinite(problem.x(i, j)) && !std::isfinite(problem.x(j, i))) {
            return std::nullopt;
        }
    }
    ScheduleStats stats;
    BranchAndBound bnb(problem, stats);
    const double lb = bnb.root_bound();
    if (!std::isfinite(lb)) return std::nullopt;
    return lb;
}

double makespan(std::span<const double> start_times, std::span<const double> durations) {
    double c = 0.0;
    for (std::size_t i = 0; i < start_times.size(); ++i) c = std::max(c, start_times[i] + durations[i]);
    return c;
}

double schedule_upper_bound(const ProblemDomain& domain, std::optional<double> longest_path) {
    const std::size_t m = domain.num_tasks();
    if (domain.num_robots() == 0) throw Error("schedule upper bound needs at least one robot");
    if (m == 0) return 0.0;
    double slowest = kInf;
    for (std::size_t r = 0; r < domain.num_robots(); ++r) slowest = std::min(slowest, domain.robot_speed(r));
    if (!(slowest > 0.0)) throw Error("robot speeds must be positive");
    const auto& b = domain.world.bounds;
    const double z = longest_path.value_or(2.0 * ((b.max.x - b.min.x) + (b.max.y - b.min.y)) *
                                           static_cast<double>(m));
    double total = 0.0;
    for (const auto& t : domain.network.tasks) total += t.duration;
    return 2.0 * static_cast<double>(m) * z / slowest + total;
}

double schedule_lower_bound(const ProblemDomain& domain) {
    double lb = 0.0;
    for (const auto& t : domain.network.tasks) lb = std::max(lb, t.duration);
    return lb;
}

std::vector<std::string> schedule_violations(const SchedulingProblem& p, const Schedule& s,
                                             double tolerance) {
    std::vector<std::string> out;
    const auto n = p.num_tasks();
    auto report = [&out](auto&&... parts) {
        std::ostringstream msg;
        (msg << ... << parts);
        out.push_back(msg.str());
    };
    if (s.start_times.size() != n) {
        report("schedule has ", s.start_times.size(), " start times for ", n, " tasks");
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (s.makespan < s.start_times[i] + p.durations[i] - tolerance) {
            report("makespan ", s.makespan, " ends before task ", i);
        }
        if (s.start_times[i] < p.initial_arrival[i] - tolerance) {
            report("task ", i, " starts before its robots can arrive");
        }
    }
    for (const auto& [i, j] : p.precedence) {
        if (s.start_times[j] < s.start_times[i] + p.durations[i] + p.x(i, j) - tolerance) {
            report("precedence ", i, " -> ", j, " violated");
        }
    }
    for (std::size_t k = 0; k < p.mutex_reduced.size(); ++k) {
        const auto [i, j] = p.mutex_reduced[k];
        const bool fwd = s.start_times[j] >= s.start_times[i] + p.durations[i] + p.x(i, j) - tolerance;
        const bool bwd = s.start_times[i] >= s.start_times[j] + p.durations[j] + p.x(j, i) - tolerance;
        const Ordering o = k < s.orderings.size() ? s.orderings[k] : Ordering::Undecided;
        if ((o == Ordering::FirstBeforeSecond && !fwd) || (o == Ordering::SecondBeforeFirst && !bwd) ||
            (o == Ordering::Undecided && !fwd && !bwd)) {
            report("mutex {", i, ", ", j, "} violated");
        }
    }
    return out;
}

}  // namespace mrta
