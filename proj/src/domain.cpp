#include "mrta/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mrta/geometry.hpp"

namespace mrta {

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

namespace {

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

void require_dims(const Allocation& alloc, const TeamTraitMatrix& team) {
    if (alloc.num_robots() != team.num_robots() ||
        static_cast<std::size_t>(team.entries.rows()) != team.num_robots()) {
        std::ostringstream msg;
        msg << "allocation has " << alloc.num_robots() << " robot columns but team has "
            << team.entries.rows() << " rows";
        throw DimensionError(msg.str());
    }
}

void require_dims(const Allocation& alloc, const TeamTraitMatrix& team,
                  const DesiredTraitMatrix& req) {
    require_dims(alloc, team);
    if (static_cast<std::size_t>(req.entries.rows()) != alloc.num_tasks()) {
        throw DimensionError("allocation task rows do not match the desired trait matrix");
    }
    if (req.entries.cols() != team.entries.cols()) {
        throw DimensionError("team and desired trait matrices disagree on trait count");
    }
}

}  // namespace

bool operator==(const TeamTraitMatrix& a, const TeamTraitMatrix& b) {
    return a.robot_ids == b.robot_ids && a.trait_names == b.trait_names &&
           same_matrix(a.entries, b.entries);
}

bool operator==(const DesiredTraitMatrix& a, const DesiredTraitMatrix& b) {
    return same_matrix(a.entries, b.entries);
}

std::optional<std::size_t> ProblemDomain::robot_index(const std::string& id) const {
    const auto it = std::find(team.robot_ids.begin(), team.robot_ids.end(), id);
    if (it == team.robot_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - team.robot_ids.begin());
}

std::optional<std::size_t> ProblemDomain::task_index(const std::string& id) const {
    const auto& tasks = network.tasks;
    const auto it =
        std::find_if(tasks.begin(), tasks.end(), [&](const TaskSpec& t) { return t.id == id; });
    if (it == tasks.end()) return std::nullopt;
    return static_cast<std::size_t>(it - tasks.begin());
}

Point ProblemDomain::robot_start(std::size_t robot) const {
    const auto it = world.robot_start_configs.find(team.robot_ids.at(robot));
    if (it == world.robot_start_configs.end()) {
        throw Error("no start configuration for robot '" + team.robot_ids[robot] + "'");
    }
    return it->second;
}

double ProblemDomain::robot_speed(std::size_t robot) const {
    const auto it = world.robot_speeds.find(team.robot_ids.at(robot));
    if (it == world.robot_speeds.end()) {
        throw Error("no speed for robot '" + team.robot_ids[robot] + "'");
    }
    return it->second;
}

Allocation::Allocation(std::size_t tasks, std::size_t robots)
    : tasks_(tasks), robots_(robots), cells_(tasks * robots, 0) {}

void Allocation::set(std::size_t task, std::size_t robot, bool value) {
    cells_.at(task * robots_ + robot) = value ? 1 : 0;
}

Allocation Allocation::with(std::size_t task, std::size_t robot) const {
    Allocation copy = *this;
    copy.set(task, robot, true);
    return copy;
}

std::size_t Allocation::count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> Allocation::robots_of(std::size_t task) const {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < robots_; ++n) {
        if (assigned(task, n)) out.push_back(n);
    }
    return out;
}

bool Allocation::task_uses_any(std::size_t task) const {
    for (std::size_t n = 0; n < robots_; ++n) {
        if (assigned(task, n)) return true;
    }
    return false;
}

bool Allocation::robot_used(std::size_t robot) const {
    for (std::size_t m = 0; m < tasks_; ++m) {
        if (assigned(m, robot)) return true;
    }
    return false;
}

void Allocation::erase_task(std::size_t task) {
    if (task >= tasks_) throw DimensionError("task row out of range");
    const auto first = cells_.begin() + static_cast<std::ptrdiff_t>(task * robots_);
    cells_.erase(first, first + static_cast<std::ptrdiff_t>(robots_));
    --tasks_;
}

void Allocation::erase_robot(std::size_t robot) {
    if (robot >= robots_) throw DimensionError("robot column out of range");
    std::vector<std::uint8_t> next;
    next.reserve(tasks_ * (robots_ - 1));
    for (std::size_t m = 0; m < tasks_; ++m) {
        for (std::size_t n = 0; n < robots_; ++n) {
            if (n != robot) next.push_back(cells_[m * robots_ + n]);
        }
    }
    cells_ = std::move(next);
    --robots_;
}

void Allocation::append_robot() {
    std::vector<std::uint8_t> next;
    next.reserve(tasks_ * (robots_ + 1));
    for (std::size_t m = 0; m < tasks_; ++m) {
        for (std::size_t n = 0; n < robots_; ++n) next.push_back(cells_[m * robots_ + n]);
        next.push_back(0);
    }
    cells_ = std::move(next);
    ++robots_;
}

Eigen::MatrixXd Allocation::to_matrix() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(tasks_), static_cast<Eigen::Index>(robots_));
    for (std::size_t m = 0; m < tasks_; ++m) {
        for (std::size_t n = 0; n < robots_; ++n) {
            out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
                assigned(m, n) ? 1.0 : 0.0;
        }
    }
    return out;
}

std::size_t Allocation::hash() const {
    // FNV-1a over the dimensions and cells.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    mix(tasks_);
    mix(robots_);
    for (const auto c : cells_) mix(c);
    return static_cast<std::size_t>(h);
}

Eigen::MatrixXd aggregate_traits(const Allocation& alloc, const TeamTraitMatrix& team) {
    require_dims(alloc, team);
    return alloc.to_matrix() * team.entries;
}

Eigen::MatrixXd trait_mismatch(const Allocation& alloc, const TeamTraitMatrix& team,
                               const DesiredTraitMatrix& req) {
    require_dims(alloc, team, req);
    return req.entries - alloc.to_matrix() * team.entries;
}

bool is_valid_allocation(const Allocation& alloc, const TeamTraitMatrix& team,
                         const DesiredTraitMatrix& req) {
    const Eigen::MatrixXd mismatch = trait_mismatch(alloc, team, req);
    return (mismatch.array() <= kTraitTolerance).all();
}

std::size_t resource_count(const Allocation& alloc) { return alloc.count(); }

bool requirements_satisfiable(const TeamTraitMatrix& team, const DesiredTraitMatrix& req) {
    if (req.entries.rows() == 0) return true;
    if (team.entries.rows() == 0) return (req.entries.array() <= kTraitTolerance).all();
    const Eigen::RowVectorXd total = team.entries.colwise().sum();
    for (Eigen::Index m = 0; m < req.entries.rows(); ++m) {
        if (((req.entries.row(m) - total).array() > kTraitTolerance).any()) return false;
    }
    return true;
}

std::string_view to_string(IssueCode code) {
    switch (code) {
        case IssueCode::CyclicPrecedence: return "CYCLIC_PRECEDENCE";
        case IssueCode::SelfLoop: return "SELF_LOOP";
        case IssueCode::DimensionMismatch: return "DIMENSION_MISMATCH";
        case IssueCode::NegativeDuration: return "NEGATIVE_DURATION";
        case IssueCode::NegativeTrait: return "NEGATIVE_TRAIT";
        case IssueCode::DuplicateId: return "DUPLICATE_ID";
        case IssueCode::UnknownTaskIndex: return "UNKNOWN_TASK_INDEX";
        case IssueCode::MissingRobotState: return "MISSING_ROBOT_STATE";
        case IssueCode::NonPositiveSpeed: return "NON_POSITIVE_SPEED";
        case IssueCode::StartOutOfBounds: return "START_OUT_OF_BOUNDS";
        case IssueCode::StartInObstacle: return "START_IN_OBSTACLE";
        case IssueCode::TaskConfigInvalid: return "TASK_CONFIG_INVALID";
        case IssueCode::DegenerateBounds: return "DEGENERATE_BOUNDS";
        case IssueCode::EmptyTeam: return "EMPTY_TEAM";
    }
    return "UNKNOWN";
}

bool ValidationReport::contains(IssueCode code) const {
    return std::any_of(issues.begin(), issues.end(),
                       [code](const ValidationIssue& i) { return i.code == code; });
}

std::vector<std::vector<bool>> precedence_closure(std::size_t num_tasks,
                                                  const std::vector<TaskPair>& precedence) {
    std::vector<std::vector<bool>> reach(num_tasks, std::vector<bool>(num_tasks, false));
    for (const auto& [a, b] : precedence) {
        if (a < num_tasks && b < num_tasks) reach[a][b] = true;
    }
    for (std::size_t k = 0; k < num_tasks; ++k) {
        for (std::size_t i = 0; i < num_tasks; ++i) {
            if (!reach[i][k]) continue;
            for (std::size_t j = 0; j < num_tasks; ++j) {
                if (reach[k][j]) reach[i][j] = true;
            }
        }
    }
    return reach;
}

ValidationReport validate_problem(const ProblemDomain& domain) {
    ValidationReport report;
    auto add = [&report](IssueCode code, std::string msg) {
        report.issues.push_back({code, std::move(msg)});
    };

    const auto& team = domain.team;
    const auto& net = domain.network;
    const std::size_t m = net.num_tasks();

    if (team.num_robots() == 0) add(IssueCode::EmptyTeam, "team has no robots");
    if (static_cast<std::size_t>(team.entries.rows()) != team.num_robots() ||
        static_cast<std::size_t>(team.entries.cols()) != team.num_traits()) {
        add(IssueCode::DimensionMismatch, "team trait matrix shape disagrees with its labels");
    }
    if (static_cast<std::size_t>(domain.requirements.entries.rows()) != m) {
        add(IssueCode::DimensionMismatch, "desired trait matrix row count differs from task count");
    }
    if (domain.requirements.entries.cols() != team.entries.cols()) {
        add(IssueCode::DimensionMismatch, "desired and team trait matrices disagree on trait count");
    }
    if ((team.entries.array() < 0.0).any() || (domain.requirements.entries.array() < 0.0).any()) {
        add(IssueCode::NegativeTrait, "trait values must be non-negative");
    }

    std::set<std::string> seen;
    for (const auto& id : team.robot_ids) {
        if (!seen.insert(id).second) add(IssueCode::DuplicateId, "duplicate robot id '" + id + "'");
    }
    seen.clear();
    for (const auto& task : net.tasks) {
        if (!seen.insert(task.id).second) {
            add(IssueCode::DuplicateId, "duplicate task id '" + task.id + "'");
        }
        if (task.duration < 0.0) {
            add(IssueCode::NegativeDuration, "task '" + task.id + "' has negative duration");
        }
    }

    bool indices_ok = true;
    for (const auto* edges : {&net.precedence_edges, &net.mutex_edges}) {
        for (const auto& [a, b] : *edges) {
            if (a >= m || b >= m) {
                add(IssueCode::UnknownTaskIndex, "edge references a task index out of range");
                indices_ok = false;
            } else if (a == b) {
                add(IssueCode::SelfLoop, "edge connects task '" + net.tasks[a].id + "' to itself");
            }
        }
    }
    if (indices_ok) {
        const auto reach = precedence_closure(m, net.precedence_edges);
        for (std::size_t i = 0; i < m; ++i) {
            if (reach[i][i]) {
                add(IssueCode::CyclicPrecedence,
                    "precedence cycle through task '" + net.tasks[i].id + "'");
                break;
            }
        }
    }

    const auto& world = domain.world;
    const bool bounds_ok =
        world.bounds.max.x > world.bounds.min.x && world.bounds.max.y > world.bounds.min.y;
    if (!bounds_ok) add(IssueCode::DegenerateBounds, "world bounds have zero or negative area");

    for (const auto& id : team.robot_ids) {
        const auto start = world.robot_start_configs.find(id);
        const auto speed = world.robot_speeds.find(id);
        if (start == world.robot_start_configs.end() || speed == world.robot_speeds.end()) {
            add(IssueCode::MissingRobotState, "robot '" + id + "' lacks a start or speed");
            continue;
        }
        if (!(speed->second > 0.0)) {
            add(IssueCode::NonPositiveSpeed, "robot '" + id + "' has non-positive speed");
        }
        if (!geometry::contains(world.bounds, start->second)) {
            add(IssueCode::StartOutOfBounds, "robot '" + id + "' starts outside the world bounds");
        } else if (!geometry::point_free(world, start->second)) {
            add(IssueCode::StartInObstacle, "robot '" + id + "' starts inside an obstacle");
        }
    }
    for (const auto& task : net.tasks) {
        if (!geometry::point_free(world, task.initial_config) ||
            !geometry::point_free(world, task.terminal_config)) {
            add(IssueCode::TaskConfigInvalid,
                "task '" + task.id + "' has a configuration outside free space");
        }
    }
    return report;
}

}  // namespace mrta
