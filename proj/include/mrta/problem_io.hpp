#ifndef MRTA_PROBLEM_IO_HPP
#define MRTA_PROBLEM_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrta/domain.hpp"
#include "mrta/events.hpp"

namespace mrta::io {

class ParseError : public Error {
public:
    using Error::Error;
};

ProblemDomain problem_from_json(const nlohmann::json& doc);
nlohmann::json problem_to_json(const ProblemDomain& domain);

std::vector<DynamicEvent> scenario_from_json(const nlohmann::json& doc,
                                             const ProblemDomain& initial);
nlohmann::json scenario_to_json(const std::vector<DynamicEvent>& events,
                                const ProblemDomain& initial);

ProblemDomain load_problem(const std::filesystem::path& path);
void save_problem(const std::filesystem::path& path, const ProblemDomain& domain);

std::vector<DynamicEvent> load_scenario(const std::filesystem::path& path,
                                        const ProblemDomain& initial);
void save_scenario(const std::filesystem::path& path, const std::vector<DynamicEvent>& events,
                   const ProblemDomain& initial);

/// Writes with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace mrta::io

#endif  // MRTA_PROBLEM_IO_HPP
