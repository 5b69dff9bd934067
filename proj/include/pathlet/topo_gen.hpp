#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pathlet/label_stack.hpp"
#include "pathlet/scenario.hpp"
#include "pathlet/types.hpp"

namespace pathlet {

struct GenParams {
    int stack_len = 2;        // N, counting the root label
    int routers_min = 10;     // R_min
    int routers_max = 10;     // R_max
    int areas_min = 2;        // A_min
    int areas_max = 2;        // A_max
    double edge_prob = 0.1;   // P
    double border_frac = 0.5; // B
    std::uint64_t seed = 1;
    int retry_cap = 1000;

    void validate() const; // throws std::invalid_argument
};

struct GeneratedTopology {
    struct Vertex {
        VertexId id;
        LabelStack stack;
    };
    std::vector<Vertex> vertices;
    std::vector<std::pair<VertexId, VertexId>> edges;
    std::map<LabelStack, std::set<VertexId>> border_marks; // per area

    /// Scenario with [nodes]/[edges] only; link delays left for the engine.
    Scenario to_scenario() const;
};

/// Recursive hierarchical random topology: connected Erdos-Renyi areas at
/// the bottom, connected border graphs gluing sibling areas at each level
/// above. Deterministic in the parameters; each area draws from its own
/// seed stream so sibling areas do not perturb one another.
GeneratedTopology generate(const GenParams& params);

} // namespace pathlet
