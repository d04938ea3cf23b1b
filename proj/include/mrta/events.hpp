#ifndef MRTA_EVENTS_HPP
#define MRTA_EVENTS_HPP

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mrta/domain.hpp"

namespace mrta {

struct AgentLost {
    std::string agent;
    friend bool operator==(const AgentLost&, const AgentLost&) = default;
};

struct TaskLost {
    std::string task;
    friend bool operator==(const TaskLost&, const TaskLost&) = default;
};

// Trait and requirement payloads carry the complete new row, ordered like the domain's traits.

struct TraitsReduced {
    std::string agent;
    std::vector<double> traits;
    friend bool operator==(const TraitsReduced&, const TraitsReduced&) = default;
};

struct TraitsIncreased {
    std::string agent;
    std::vector<double> traits;
    friend bool operator==(const TraitsIncreased&, const TraitsIncreased&) = default;
};

struct RequirementsIncreased {
    std::string task;
    std::vector<double> requirements;
    friend bool operator==(const RequirementsIncreased&, const RequirementsIncreased&) = default;
};

struct RequirementsReduced {
    std::string task;
    std::vector<double> requirements;
    friend bool operator==(const RequirementsReduced&, const RequirementsReduced&) = default;
};

struct DurationChanged {
    std::string task;
    double duration = 0.0;
    friend bool operator==(const DurationChanged&, const DurationChanged&) = default;
};

struct NewAgent {
    std::string id;
    std::vector<double> traits;
    Point start;
    double speed = 1.0;
    friend bool operator==(const NewAgent&, const NewAgent&) = default;
};

using EventPayload = std::variant<AgentLost, TaskLost, TraitsReduced, RequirementsIncreased,
                                  TraitsIncreased, RequirementsReduced, DurationChanged, NewAgent>;

enum class EventKind {
    AgentLost,
    TaskLost,
    TraitsReduced,
    RequirementsIncreased,
    TraitsIncreased,
    RequirementsReduced,
    DurationChanged,
    NewAgent,
};

inline constexpr EventKind kAllEventKinds[] = {
    EventKind::AgentLost,       EventKind::TaskLost,        EventKind::TraitsReduced,
    EventKind::RequirementsIncreased, EventKind::TraitsIncreased,
    EventKind::RequirementsReduced,   EventKind::DurationChanged, EventKind::NewAgent,
};

struct DynamicEvent {
    double time = 0.0;  // seconds
    EventPayload payload;

    [[nodiscard]] EventKind kind() const { return static_cast<EventKind>(payload.index()); }

    friend bool operator==(const DynamicEvent&, const DynamicEvent&) = default;
};

/// Wire names: agent_lost, task_lost, traits_reduced, ...
std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

/// Throws Error when the payload names an unknown agent or task, has the wrong trait
/// dimension, or changes values in the direction its kind forbids.
void check_event(const ProblemDomain& domain, const DynamicEvent& event);

/// Returns D_{k+1}: a copy of the domain with the event's mutation applied.
ProblemDomain apply_event(const ProblemDomain& domain, const DynamicEvent& event);

/// Splits a trait row change with mixed signs into a TraitsReduced followed by a
/// TraitsIncreased, both stamped with `time`. Sign-pure changes yield one event; no change
/// yields none.
std::vector<DynamicEvent> decompose_trait_change(const ProblemDomain& domain,
                                                 const std::string& agent,
                                                 const std::vector<double>& new_traits,
                                                 double time);

/// Groups events into batches of identical time, preserving order. Events in one batch are
/// repaired atomically.
std::vector<std::vector<DynamicEvent>> batch_by_time(std::vector<DynamicEvent> events);

}  // namespace mrta

#endif  // MRTA_EVENTS_HPP
