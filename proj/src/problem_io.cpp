#include "mrta/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace mrta::io {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
    if (!obj.is_object()) throw ParseError(std::string(where) + " must be an object");
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ParseError("unknown key '" + item.key() + "' in " + std::string(where));
        }
    }
}

const json& required(const json& obj, const char* key, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError("missing key '" + std::string(key) + "' in " + std::string(where));
    }
    return *it;
}

double number(const json& value, std::string_view what) {
    if (!value.is_number()) throw ParseError(std::string(what) + " must be a number");
    return value.get<double>();
}

Point point(const json& value, std::string_view what) {
    if (!value.is_array() || value.size() != 2) {
        throw ParseError(std::string(what) + " must be an [x, y] pair");
    }
    return {number(value[0], what), number(value[1], what)};
}

json point_json(Point p) { return json::array({p.x, p.y}); }

std::vector<double> trait_row(const json& obj, const std::vector<std::string>& names,
                              std::string_view what) {
    if (!obj.is_object()) throw ParseError(std::string(what) + " must be an object");
    std::vector<double> row(names.size(), 0.0);
    for (const auto& item : obj.items()) {
        const auto it = std::find(names.begin(), names.end(), item.key());
        if (it == names.end()) {
            throw ParseError("unknown trait '" + item.key() + "' in " + std::string(what));
        }
        row[static_cast<std::size_t>(it - names.begin())] = number(item.value(), what);
    }
    return row;
}

json trait_object(const std::vector<double>& row, const std::vector<std::string>& names) {
    json out = json::object();
    for (std::size_t u = 0; u < names.size(); ++u) out[names[u]] = row[u];
    return out;
}

std::vector<double> row_of(const Eigen::MatrixXd& m, std::size_t r) {
    std::vector<double> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(static_cast<Eigen::Index>(r), c);
    return out;
}

std::vector<TaskPair> pairs(const json& arr, const std::vector<TaskSpec>& tasks, bool unordered,
                            std::string_view what) {
    if (!arr.is_array()) throw ParseError(std::string(what) + " must be an array");
    auto index_of = [&](const json& v) {
        if (!v.is_string()) throw ParseError(std::string(what) + " entries must be task ids");
        const auto id = v.get<std::string>();
        const auto it = std::find_if(tasks.begin(), tasks.end(),
                                     [&](const TaskSpec& t) { return t.id == id; });
        if (it == tasks.end()) {
            throw ParseError("unknown task '" + id + "' in " + std::string(what));
        }
        return static_cast<std::size_t>(it - tasks.begin());
    };
    std::set<TaskPair> out;
    for (const auto& entry : arr) {
        if (!entry.is_array() || entry.size() != 2) {
            throw ParseError(std::string(what) + " entries must be [id, id] pairs");
        }
        TaskPair p{index_of(entry[0]), index_of(entry[1])};
        if (unordered && p.first > p.second) std::swap(p.first, p.second);
        out.insert(p);
    }
    return {out.begin(), out.end()};
}

Obstacle obstacle(const json& obj) {
    if (!obj.is_object()) throw ParseError("obstacle must be an object");
    const auto type = required(obj, "type", "obstacle");
    if (type == "circle") {
        reject_unknown_keys(obj, {"type", "c", "r"}, "circle obstacle");
        return Circle{point(required(obj, "c", "circle"), "circle center"),
                      number(required(obj, "r", "circle"), "circle radius")};
    }
    if (type == "rect") {
        reject_unknown_keys(obj, {"type", "min", "max"}, "rect obstacle");
        return Rect{point(required(obj, "min", "rect"), "rect min"),
                    point(required(obj, "max", "rect"), "rect max")};
    }
    throw ParseError("obstacle type must be 'circle' or 'rect'");
}

json obstacle_json(const Obstacle& o) {
    if (const auto* c = std::get_if<Circle>(&o)) {
        return json{{"type", "circle"}, {"c", point_json(c->center)}, {"r", c->radius}};
    }
    const auto& r = std::get<Rect>(o);
    return json{{"type", "rect"}, {"min", point_json(r.min)}, {"max", point_json(r.max)}};
}

const std::string& id_field(const json& obj, const char* key, std::string_view where) {
    const auto& v = required(obj, key, where);
    if (!v.is_string()) throw ParseError(std::string(key) + " must be a string");
    return v.get_ref<const std::string&>();
}

}  // namespace

ProblemDomain problem_from_json(const json& doc) {
    reject_unknown_keys(doc, {"robots", "traits", "tasks", "precedence", "mutex", "world"},
                        "problem");
    ProblemDomain d;

    const auto& traits = required(doc, "traits", "problem");
    if (!traits.is_array()) throw ParseError("traits must be an array of names");
    for (const auto& t : traits) {
        if (!t.is_string()) throw ParseError("trait names must be strings");
        d.team.trait_names.push_back(t.get<std::string>());
    }
    const auto& names = d.team.trait_names;
    const auto u = static_cast<Eigen::Index>(names.size());

    const auto& robots = required(doc, "robots", "problem");
    if (!robots.is_array()) throw ParseError("robots must be an array");
    d.team.entries.resize(static_cast<Eigen::Index>(robots.size()), u);
    Eigen::Index row = 0;
    for (const auto& r : robots) {
        reject_unknown_keys(r, {"id", "traits", "start", "speed"}, "robot");
        const auto& id = id_field(r, "id", "robot");
        const auto values = trait_row(r.value("traits", json::object()), names, "robot traits");
        for (Eigen::Index c = 0; c < u; ++c) d.team.entries(row, c) = values[static_cast<std::size_t>(c)];
        d.team.robot_ids.push_back(id);
        d.world.robot_start_configs[id] = point(required(r, "start", "robot"), "robot start");
        d.world.robot_speeds[id] = number(required(r, "speed", "robot"), "robot speed");
        ++row;
    }

    const auto& tasks = required(doc, "tasks", "problem");
    if (!tasks.is_array()) throw ParseError("tasks must be an array");
    d.requirements.entries.resize(static_cast<Eigen::Index>(tasks.size()), u);
    row = 0;
    for (const auto& t : tasks) {
        reject_unknown_keys(t, {"id", "duration", "requires", "initial", "terminal"}, "task");
        TaskSpec spec;
        spec.id = id_field(t, "id", "task");
        spec.duration = number(required(t, "duration", "task"), "task duration");
        spec.initial_config = point(required(t, "initial", "task"), "task initial");
        spec.terminal_config =
            t.contains("terminal") ? point(t["terminal"], "task terminal") : spec.initial_config;
        const auto req = trait_row(t.value("requires", json::object()), names, "task requires");
        for (Eigen::Index c = 0; c < u; ++c) d.requirements.entries(row, c) = req[static_cast<std::size_t>(c)];
        d.network.tasks.push_back(std::move(spec));
        ++row;
    }

    d.network.precedence_edges =
        pairs(doc.value("precedence", json::array()), d.network.tasks, false, "precedence");
    d.network.mutex_edges = pairs(doc.value("mutex", json::array()), d.network.tasks, true, "mutex");

    const auto& world = required(doc, "world", "problem");
    reject_unknown_keys(world, {"bounds", "obstacles"}, "world");
    const auto& bounds = required(world, "bounds", "world");
    if (!bounds.is_array() || bounds.size() != 4) {
        throw ParseError("world bounds must be [xmin, ymin, xmax, ymax]");
    }
    d.world.bounds = Rect{{number(bounds[0], "bounds"), number(bounds[1], "bounds")},
                          {number(bounds[2], "bounds"), number(bounds[3], "bounds")}};
    const auto obstacles = world.value("obstacles", json::array());
    if (!obstacles.is_array()) throw ParseError("world obstacles must be an array");
    for (const auto& o : obstacles) d.world.obstacles.push_back(obstacle(o));
    return d;
}

json problem_to_json(const ProblemDomain& d) {
    const auto& names = d.team.trait_names;
    json robots = json::array();
    for (std::size_t i = 0; i < d.num_robots(); ++i) {
        robots.push_back(json{{"id", d.team.robot_ids[i]},
                              {"traits", trait_object(row_of(d.team.entries, i), names)},
                              {"start", point_json(d.robot_start(i))},
                              {"speed", d.robot_speed(i)}});
    }
    json tasks = json::array();
    for (std::size_t m = 0; m < d.num_tasks(); ++m) {
        const auto& t = d.network.tasks[m];
        tasks.push_back(json{{"id", t.id},
                             {"duration", t.duration},
                             {"requires", trait_object(row_of(d.requirements.entries, m), names)},
                             {"initial", point_json(t.initial_config)},
                             {"terminal", point_json(t.terminal_config)}});
    }
    auto pair_json = [&](const std::vector<TaskPair>& edges) {
        json out = json::array();
        for (const auto& [a, b] : edges) {
            out.push_back(json::array({d.network.tasks[a].id, d.network.tasks[b].id}));
        }
        return out;
    };
    json obstacles = json::array();
    for (const auto& o : d.world.obstacles) obstacles.push_back(obstacle_json(o));
    const auto& b = d.world.bounds;
    return json{{"traits", names},
                {"robots", robots},
                {"tasks", tasks},
                {"precedence", pair_json(d.network.precedence_edges)},
                {"mutex", pair_json(d.network.mutex_edges)},
                {"world",
                 json{{"bounds", json::array({b.min.x, b.min.y, b.max.x, b.max.y})},
                      {"obstacles", obstacles}}}};
}

std::vector<DynamicEvent> scenario_from_json(const json& doc, const ProblemDomain& initial) {
    reject_unknown_keys(doc, {"events"}, "scenario");
    const auto& events = required(doc, "events", "scenario");
    if (!events.is_array()) throw ParseError("events must be an array");
    const auto& names = initial.team.trait_names;
    std::vector<DynamicEvent> out;
    for (const auto& e : events) {
        reject_unknown_keys(e, {"time", "kind", "payload"}, "event");
        DynamicEvent ev;
        ev.time = number(required(e, "time", "event"), "event time");
        if (ev.time < 0.0) throw ParseError("event time must be non-negative");
        const auto& kind_value = required(e, "kind", "event");
        if (!kind_value.is_string()) throw ParseError("event kind must be a string");
        EventKind kind{};
        try {
            kind = event_kind_from_string(kind_value.get<std::string>());
        } catch (const Error& err) {
            throw ParseError(err.what());
        }
        const auto& p = required(e, "payload", "event");
        switch (kind) {
            case EventKind::AgentLost:
                reject_unknown_keys(p, {"agent"}, "agent_lost payload");
                ev.payload = AgentLost{id_field(p, "agent", "payload")};
                break;
            case EventKind::TaskLost:
                reject_unknown_keys(p, {"task"}, "task_lost payload");
                ev.payload = TaskLost{id_field(p, "task", "payload")};
                break;
            case EventKind::TraitsReduced:
            case EventKind::TraitsIncreased: {
                reject_unknown_keys(p, {"agent", "traits"}, "trait payload");
                auto row = trait_row(required(p, "traits", "payload"), names, "payload traits");
                const auto& agent = id_field(p, "agent", "payload");
                if (kind == EventKind::TraitsReduced) {
                    ev.payload = TraitsReduced{agent, std::move(row)};
                } else {
                    ev.payload = TraitsIncreased{agent, std::move(row)};
                }
                break;
            }
            case EventKind::RequirementsIncreased:
            case EventKind::RequirementsReduced: {
                reject_unknown_keys(p, {"task", "requires"}, "requirement payload");
                auto row = trait_row(required(p, "requires", "payload"), names, "payload requires");
                const auto& task = id_field(p, "task", "payload");
                if (kind == EventKind::RequirementsIncreased) {
                    ev.payload = RequirementsIncreased{task, std::move(row)};
                } else {
                    ev.payload = RequirementsReduced{task, std::move(row)};
                }
                break;
            }
            case EventKind::DurationChanged:
                reject_unknown_keys(p, {"task", "duration"}, "duration_changed payload");
                ev.payload = DurationChanged{id_field(p, "task", "payload"),
                                             number(required(p, "duration", "payload"), "duration")};
                break;
            case EventKind::NewAgent:
                reject_unknown_keys(p, {"id", "traits", "start", "speed"}, "new_agent payload");
                ev.payload = NewAgent{id_field(p, "id", "payload"),
                                      trait_row(p.value("traits", json::object()), names, "traits"),
                                      point(required(p, "start", "payload"), "start"),
                                      number(required(p, "speed", "payload"), "speed")};
                break;
        }
        out.push_back(std::move(ev));
    }
    return out;
}

json scenario_to_json(const std::vector<DynamicEvent>& events, const ProblemDomain& initial) {
    const auto& names = initial.team.trait_names;
    json arr = json::array();
    for (const auto& ev : events) {
        json payload = std::visit(
            [&](const auto& p) -> json {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, AgentLost>) {
                    return json{{"agent", p.agent}};
                } else if constexpr (std::is_same_v<T, TaskLost>) {
                    return json{{"task", p.task}};
                } else if constexpr (std::is_same_v<T, TraitsReduced> ||
                                     std::is_same_v<T, TraitsIncreased>) {
                    return json{{"agent", p.agent}, {"traits", trait_object(p.traits, names)}};
                } else if constexpr (std::is_same_v<T, RequirementsIncreased> ||
                                     std::is_same_v<T, RequirementsReduced>) {
                    return json{{"task", p.task},
                                {"requires", trait_object(p.requirements, names)}};
                } else if constexpr (std::is_same_v<T, DurationChanged>) {
                    return json{{"task", p.task}, {"duration", p.duration}};
                } else {
                    return json{{"id", p.id},
                                {"traits", trait_object(p.traits, names)},
                                {"start", point_json(p.start)},
                                {"speed", p.speed}};
                }
            },
            ev.payload);
        arr.push_back(json{{"time", ev.time},
                           {"kind", std::string(to_string(ev.kind()))},
                           {"payload", std::move(payload)}});
    }
    return json{{"events", arr}};
}

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

ProblemDomain load_problem(const std::filesystem::path& path) {
    return problem_from_json(read_json(path));
}

void save_problem(const std::filesystem::path& path, const ProblemDomain& domain) {
    write_json(path, problem_to_json(domain));
}

std::vector<DynamicEvent> load_scenario(const std::filesystem::path& path,
                                        const ProblemDomain& initial) {
    return scenario_from_json(read_json(path), initial);
}

void save_scenario(const std::filesystem::path& path, const std::vector<DynamicEvent>& events,
                   const ProblemDomain& initial) {
    write_json(path, scenario_to_json(events, initial));
}

}  // namespace mrta::io
