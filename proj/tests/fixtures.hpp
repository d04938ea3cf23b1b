#ifndef MRTA_TESTS_FIXTURES_HPP
#define MRTA_TESTS_FIXTURES_HPP

#include <optional>
#include <string>
#include <vector>

#include "mrta/domain.hpp"

namespace fixture {

using mrta::Point;

// Small hand-built domains for tests.
class DomainBuilder {
public:
    explicit DomainBuilder(std::vector<std::string> traits, mrta::Rect bounds = {{0, 0}, {20, 20}}) {
        d_.team.trait_names = std::move(traits);
        d_.team.entries.resize(0, static_cast<Eigen::Index>(d_.team.trait_names.size()));
        d_.requirements.entries.resize(0, static_cast<Eigen::Index>(d_.team.trait_names.size()));
        d_.world.bounds = bounds;
    }

    DomainBuilder& robot(const std::string& id, const std::vector<double>& traits, Point start,
                         double speed = 1.0) {
        append_row(d_.team.entries, traits);
        d_.team.robot_ids.push_back(id);
        d_.world.robot_start_configs[id] = start;
        d_.world.robot_speeds[id] = speed;
        return *this;
    }

    DomainBuilder& task(const std::string& id, double duration, const std::vector<double>& requires_,
                        Point initial, std::optional<Point> terminal = std::nullopt) {
        append_row(d_.requirements.entries, requires_);
        d_.network.tasks.push_back({id, duration, initial, terminal.value_or(initial)});
        return *this;
    }

    DomainBuilder& precedence(std::size_t a, std::size_t b) {
        d_.network.precedence_edges.push_back({a, b});
        return *this;
    }

    DomainBuilder& mutex(std::size_t a, std::size_t b) {
        d_.network.mutex_edges.push_back({std::min(a, b), std::max(a, b)});
        return *this;
    }

    DomainBuilder& obstacle(mrta::Obstacle o) {
        d_.world.obstacles.push_back(o);
        return *this;
    }

    [[nodiscard]] mrta::ProblemDomain build() const { return d_; }

private:
    static void append_row(Eigen::MatrixXd& m, const std::vector<double>& row) {
        const auto r = m.rows();
        m.conservativeResize(r + 1, static_cast<Eigen::Index>(row.size()));
        for (std::size_t u = 0; u < row.size(); ++u) m(r, static_cast<Eigen::Index>(u)) = row[u];
    }

    mrta::ProblemDomain d_;
};

inline mrta::Allocation allocation(const std::vector<std::vector<int>>& rows) {
    mrta::Allocation a(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t m = 0; m < rows.size(); ++m) {
        for (std::size_t r = 0; r < rows[m].size(); ++r) a.set(m, r, rows[m][r] != 0);
    }
    return a;
}

inline mrta::TeamTraitMatrix team(const std::vector<std::vector<double>>& rows) {
    mrta::TeamTraitMatrix t;
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    t.entries.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.robot_ids.push_back("r" + std::to_string(i));
        for (std::size_t u = 0; u < cols; ++u) t.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(u)) = rows[i][u];
    }
    for (std::size_t u = 0; u < cols; ++u) t.trait_names.push_back("t" + std::to_string(u));
    return t;
}

inline mrta::DesiredTraitMatrix desired(const std::vector<std::vector<double>>& rows) {
    mrta::DesiredTraitMatrix y;
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    y.entries.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t u = 0; u < cols; ++u) y.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(u)) = rows[i][u];
    }
    return y;
}

}  // namespace fixture

#endif  // MRTA_TESTS_FIXTURES_HPP
