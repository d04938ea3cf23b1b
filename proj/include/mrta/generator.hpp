#ifndef MRTA_GENERATOR_HPP
#define MRTA_GENERATOR_HPP

#include <cstdint>
#include <vector>

#include "mrta/events.hpp"

namespace mrta {

struct WorldParams {
    double width = 40.0;
    double height = 40.0;
    std::size_t obstacles = 4;  // disjoint circles, kept clear of each other and the walls
    double min_radius = 1.5;
    double max_radius = 4.0;
};

struct GeneratorParams {
    std::size_t robots = 3;
    std::size_t tasks = 4;
    std::size_t traits = 2;
    WorldParams world;
    double precedence_probability = 0.15;
    double mutex_probability = 0.1;
};

/// Random problem with satisfiable requirements. Deterministic for a given seed.
ProblemDomain generate_problem(std::uint64_t seed, const GeneratorParams& params);

/// One random event of the given kind that keeps the requirements satisfiable.
/// Throws Error when no such event is found within the retry cap (e.g. losing the only task).
DynamicEvent generate_event(std::uint64_t seed, const ProblemDomain& domain, EventKind kind,
                            double time);

/// A trait row change where some traits rise and others fall, already decomposed into a
/// reduced and an increased event with the same time.
std::vector<DynamicEvent> generate_mixed_trait_change(std::uint64_t seed, const ProblemDomain& domain,
                                                      double time);

/// `count` events of random kinds at times 1, 2, ..., each valid for the domain produced by
/// the ones before it.
std::vector<DynamicEvent> generate_event_sequence(std::uint64_t seed, const ProblemDomain& domain,
                                                  std::size_t count);

}  // namespace mrta

#endif  // MRTA_GENERATOR_HPP
