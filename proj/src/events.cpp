#include "mrta/events.hpp"

#include <algorithm>
#include <map>

namespace mrta {

namespace {

constexpr std::pair<EventKind, std::string_view> kNames[] = {
    {EventKind::AgentLost, "agent_lost"},
    {EventKind::TaskLost, "task_lost"},
    {EventKind::TraitsReduced, "traits_reduced"},
    {EventKind::RequirementsIncreased, "requirements_increased"},
    {EventKind::TraitsIncreased, "traits_increased"},
    {EventKind::RequirementsReduced, "requirements_reduced"},
    {EventKind::DurationChanged, "duration_changed"},
    {EventKind::NewAgent, "new_agent"},
};

std::size_t robot_or_throw(const ProblemDomain& d, const std::string& id) {
    const auto idx = d.robot_index(id);
    if (!idx) throw Error("unknown agent '" + id + "'");
    return *idx;
}

std::size_t task_or_throw(const ProblemDomain& d, const std::string& id) {
    const auto idx = d.task_index(id);
    if (!idx) throw Error("unknown task '" + id + "'");
    return *idx;
}

void check_row(const ProblemDomain& d, const std::vector<double>& row) {
    if (row.size() != d.num_traits()) {
        throw DimensionError("event payload has " + std::to_string(row.size()) +
                             " trait values, domain has " + std::to_string(d.num_traits()));
    }
    if (std::any_of(row.begin(), row.end(), [](double v) { return !(v >= 0.0); })) {
        throw Error("event payload trait values must be non-negative");
    }
}

// sign > 0: every entry must be >= current; sign < 0: every entry <= current.
void check_direction(const Eigen::MatrixXd& m, std::size_t r, const std::vector<double>& row,
                     int sign, std::string_view kind) {
    for (std::size_t u = 0; u < row.size(); ++u) {
        const double current = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(u));
        const double delta = row[u] - current;
        if ((sign > 0 && delta < 0.0) || (sign < 0 && delta > 0.0)) {
            throw Error(std::string(kind) + " payload moves a value in the wrong direction");
        }
    }
}

void set_row(Eigen::MatrixXd& m, std::size_t r, const std::vector<double>& row) {
    for (std::size_t u = 0; u < row.size(); ++u) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(u)) = row[u];
    }
}

void erase_row(Eigen::MatrixXd& m, std::size_t r) {
    const auto rows = m.rows();
    const auto row = static_cast<Eigen::Index>(r);
    Eigen::MatrixXd out(rows - 1, m.cols());
    out.topRows(row) = m.topRows(row);
    out.bottomRows(rows - row - 1) = m.bottomRows(rows - row - 1);
    m = std::move(out);
}

std::vector<TaskPair> drop_task(const std::vector<TaskPair>& edges, std::size_t task) {
    std::vector<TaskPair> out;
    for (auto [a, b] : edges) {
        if (a == task || b == task) continue;
        if (a > task) --a;
        if (b > task) --b;
        out.emplace_back(a, b);
    }
    return out;
}

}  // namespace

std::string_view to_string(EventKind kind) {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

EventKind event_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    throw Error("unknown event kind '" + std::string(name) + "'");
}

void check_event(const ProblemDomain& d, const DynamicEvent& event) {
    if (!(event.time >= 0.0)) throw Error("event time must be non-negative");
    std::visit(
        [&d](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AgentLost>) {
                robot_or_throw(d, p.agent);
            } else if constexpr (std::is_same_v<T, TaskLost>) {
                task_or_throw(d, p.task);
            } else if constexpr (std::is_same_v<T, TraitsReduced>) {
                check_row(d, p.traits);
                check_direction(d.team.entries, robot_or_throw(d, p.agent), p.traits, -1,
                                "traits_reduced");
            } else if constexpr (std::is_same_v<T, TraitsIncreased>) {
                check_row(d, p.traits);
                check_direction(d.team.entries, robot_or_throw(d, p.agent), p.traits, +1,
                                "traits_increased");
            } else if constexpr (std::is_same_v<T, RequirementsIncreased>) {
                check_row(d, p.requirements);
                check_direction(d.requirements.entries, task_or_throw(d, p.task), p.requirements,
                                +1, "requirements_increased");
            } else if constexpr (std::is_same_v<T, RequirementsReduced>) {
                check_row(d, p.requirements);
                check_direction(d.requirements.entries, task_or_throw(d, p.task), p.requirements,
                                -1, "requirements_reduced");
            } else if constexpr (std::is_same_v<T, DurationChanged>) {
                task_or_throw(d, p.task);
                if (!(p.duration >= 0.0)) throw Error("duration must be non-negative");
            } else {
                check_row(d, p.traits);
                if (d.robot_index(p.id)) throw Error("agent '" + p.id + "' already exists");
                if (!(p.speed > 0.0)) throw Error("new agent speed must be positive");
            }
        },
        event.payload);
}

ProblemDomain apply_event(const ProblemDomain& domain, const DynamicEvent& event) {
    check_event(domain, event);
    ProblemDomain next = domain;
    next.iteration = domain.iteration + 1;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AgentLost>) {
                const auto r = *domain.robot_index(p.agent);
                erase_row(next.team.entries, r);
                next.team.robot_ids.erase(next.team.robot_ids.begin() + static_cast<std::ptrdiff_t>(r));
                next.world.robot_start_configs.erase(p.agent);
                next.world.robot_speeds.erase(p.agent);
            } else if constexpr (std::is_same_v<T, TaskLost>) {
                const auto m = *domain.task_index(p.task);
                erase_row(next.requirements.entries, m);
                next.network.tasks.erase(next.network.tasks.begin() + static_cast<std::ptrdiff_t>(m));
                next.network.precedence_edges = drop_task(domain.network.precedence_edges, m);
                next.network.mutex_edges = drop_task(domain.network.mutex_edges, m);
            } else if constexpr (std::is_same_v<T, TraitsReduced> ||
                                 std::is_same_v<T, TraitsIncreased>) {
                set_row(next.team.entries, *domain.robot_index(p.agent), p.traits);
            } else if constexpr (std::is_same_v<T, RequirementsIncreased> ||
                                 std::is_same_v<T, RequirementsReduced>) {
                set_row(next.requirements.entries, *domain.task_index(p.task), p.requirements);
            } else if constexpr (std::is_same_v<T, DurationChanged>) {
                next.network.tasks[*domain.task_index(p.task)].duration = p.duration;
            } else {
                const auto rows = next.team.entries.rows();
                next.team.entries.conservativeResize(rows + 1, Eigen::NoChange);
                set_row(next.team.entries, static_cast<std::size_t>(rows), p.traits);
                next.team.robot_ids.push_back(p.id);
                next.world.robot_start_configs[p.id] = p.start;
                next.world.robot_speeds[p.id] = p.speed;
            }
        },
        event.payload);
    return next;
}

std::vector<DynamicEvent> decompose_trait_change(const ProblemDomain& domain,
                                                 const std::string& agent,
                                                 const std::vector<double>& new_traits,
                                                 double time) {
    const auto r = robot_or_throw(domain, agent);
    check_row(domain, new_traits);
    std::vector<double> lowered(new_traits.size());
    bool any_down = false;
    bool any_up = false;
    for (std::size_t u = 0; u < new_traits.size(); ++u) {
        const double current =
            domain.team.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(u));
        lowered[u] = std::min(current, new_traits[u]);
        any_down = any_down || new_traits[u] < current;
        any_up = any_up || new_traits[u] > current;
    }
    std::vector<DynamicEvent> out;
    if (any_down) out.push_back({time, TraitsReduced{agent, lowered}});
    if (any_up) out.push_back({time, TraitsIncreased{agent, new_traits}});
    return out;
}

std::vector<std::vector<DynamicEvent>> batch_by_time(std::vector<DynamicEvent> events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const DynamicEvent& a, const DynamicEvent& b) { return a.time < b.time; });
    std::vector<std::vector<DynamicEvent>> batches;
    for (auto& ev : events) {
        if (batches.empty() || batches.back().front().time != ev.time) batches.emplace_back();
        batches.back().push_back(std::move(ev));
    }
    return batches;
}

}  // namespace mrta
