#ifndef MRTA_DOMAIN_HPP
#define MRTA_DOMAIN_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mrta {

/// Absolute tolerance used whenever aggregated traits are compared against requirements.
inline constexpr double kTraitTolerance = 1e-9;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend auto operator<=>(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

struct Circle {
    Point center;
    double radius = 0.0;

    friend bool operator==(const Circle&, const Circle&) = default;
};

/// Axis-aligned rectangle, closed.
struct Rect {
    Point min;
    Point max;

    friend bool operator==(const Rect&, const Rect&) = default;
};

using Obstacle = std::variant<Circle, Rect>;

struct WorldModel {
    Rect bounds;
    std::vector<Obstacle> obstacles;
    std::map<std::string, Point> robot_start_configs;
    std::map<std::string, double> robot_speeds;

    friend bool operator==(const WorldModel&, const WorldModel&) = default;
};

/// Rows are robots, columns are traits.
struct TeamTraitMatrix {
    Eigen::MatrixXd entries;
    std::vector<std::string> robot_ids;
    std::vector<std::string> trait_names;

    [[nodiscard]] std::size_t num_robots() const { return robot_ids.size(); }
    [[nodiscard]] std::size_t num_traits() const { return trait_names.size(); }

    friend bool operator==(const TeamTraitMatrix& a, const TeamTraitMatrix& b);
};

/// Rows are tasks, columns are traits.
struct DesiredTraitMatrix {
    Eigen::MatrixXd entries;

    friend bool operator==(const DesiredTraitMatrix& a, const DesiredTraitMatrix& b);
};

struct TaskSpec {
    std::string id;
    double duration = 0.0;  // seconds
    Point initial_config;
    Point terminal_config;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

using TaskPair = std::pair<std::size_t, std::size_t>;

struct TaskNetwork {
    std::vector<TaskSpec> tasks;
    std::vector<TaskPair> precedence_edges;  // (before, after)
    std::vector<TaskPair> mutex_edges;       // stored with first < second

    [[nodiscard]] std::size_t num_tasks() const { return tasks.size(); }

    friend bool operator==(const TaskNetwork&, const TaskNetwork&) = default;
};

struct ProblemDomain {
    std::uint64_t iteration = 0;
    TaskNetwork network;
    TeamTraitMatrix team;
    DesiredTraitMatrix requirements;
    WorldModel world;

    [[nodiscard]] std::size_t num_tasks() const { return network.num_tasks(); }
    [[nodiscard]] std::size_t num_robots() const { return team.num_robots(); }
    [[nodiscard]] std::size_t num_traits() const { return team.num_traits(); }

    [[nodiscard]] std::optional<std::size_t> robot_index(const std::string& id) const;
    [[nodiscard]] std::optional<std::size_t> task_index(const std::string& id) const;

    /// Throws Error when the robot has no start configuration or speed in the world model.
    [[nodiscard]] Point robot_start(std::size_t robot) const;
    [[nodiscard]] double robot_speed(std::size_t robot) const;

    friend bool operator==(const ProblemDomain&, const ProblemDomain&) = default;
};

/// Binary task-by-robot assignment matrix.
class Allocation {
public:
    Allocation() = default;
    Allocation(std::size_t tasks, std::size_t robots);

    [[nodiscard]] std::size_t num_tasks() const { return tasks_; }
    [[nodiscard]] std::size_t num_robots() const { return robots_; }

    [[nodiscard]] bool assigned(std::size_t task, std::size_t robot) const {
        return cells_[task * robots_ + robot] != 0;
    }
    void set(std::size_t task, std::size_t robot, bool value);

    /// Copy with one extra assignment.
    [[nodiscard]] Allocation with(std::size_t task, std::size_t robot) const;

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] std::vector<std::size_t> robots_of(std::size_t task) const;
    [[nodiscard]] bool task_uses_any(std::size_t task) const;
    [[nodiscard]] bool robot_used(std::size_t robot) const;

    void erase_task(std::size_t task);
    void erase_robot(std::size_t robot);
    void append_robot();

    [[nodiscard]] Eigen::MatrixXd to_matrix() const;
    [[nodiscard]] std::size_t hash() const;

    friend bool operator==(const Allocation&, const Allocation&) = default;

private:
    std::size_t tasks_ = 0;
    std::size_t robots_ = 0;
    std::vector<std::uint8_t> cells_;
};

struct AllocationHash {
    std::size_t operator()(const Allocation& a) const { return a.hash(); }
};

/// A·Q, the traits aggregated at every task.
Eigen::MatrixXd aggregate_traits(const Allocation& alloc, const TeamTraitMatrix& team);

/// Y* − A·Q.
Eigen::MatrixXd trait_mismatch(const Allocation& alloc, const TeamTraitMatrix& team,
                               const DesiredTraitMatrix& req);

bool is_valid_allocation(const Allocation& alloc, const TeamTraitMatrix& team,
                         const DesiredTraitMatrix& req);

std::size_t resource_count(const Allocation& alloc);

/// True when summing every robot's traits meets each task's requirement, i.e. some valid
/// allocation exists (robots may serve several tasks over time).
bool requirements_satisfiable(const TeamTraitMatrix& team, const DesiredTraitMatrix& req);

enum class IssueCode {
    CyclicPrecedence,
    SelfLoop,
    DimensionMismatch,
    NegativeDuration,
    NegativeTrait,
    DuplicateId,
    UnknownTaskIndex,
    MissingRobotState,
    NonPositiveSpeed,
    StartOutOfBounds,
    StartInObstacle,
    TaskConfigInvalid,
    DegenerateBounds,
    EmptyTeam,
};

std::string_view to_string(IssueCode code);

struct ValidationIssue {
    IssueCode code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    [[nodiscard]] bool ok() const { return issues.empty(); }
    [[nodiscard]] bool contains(IssueCode code) const;
};

ValidationReport validate_problem(const ProblemDomain& domain);

/// Transitive closure of the precedence relation: reach[i][j] iff i must finish before j starts.
std::vector<std::vector<bool>> precedence_closure(std::size_t num_tasks,
                                                  const std::vector<TaskPair>& precedence);

}  // namespace mrta

#endif  // MRTA_DOMAIN_HPP
