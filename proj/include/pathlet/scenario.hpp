#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pathlet/label_stack.hpp"
#include "pathlet/policy.hpp"
#include "pathlet/types.hpp"

namespace pathlet {

struct ScenarioNode {
    VertexId id;
    LabelStack stack;
    DestSet dests;
    std::optional<CompositionRule> rule; // overrides the run-wide default
    std::optional<std::size_t> chain_cap;
};

struct ScenarioEdge {
    VertexId a;
    VertexId b;
    std::optional<Ms> delay; // drawn from U[10,50] under the run seed if absent
    double weight = 0.0;
};

struct ScenarioFilter {
    VertexId owner;
    Filter filter;
};

struct FailLink { VertexId a, b; };
struct AddLink { VertexId a, b; std::optional<Ms> delay; double weight = 0.0; };
struct FailNode { VertexId v; };
struct AddNode {
    VertexId v;
    LabelStack stack;
    DestSet dests;
    std::vector<AddLink> edges;
};
struct SetStack { VertexId v; LabelStack stack; };
struct SetDests { VertexId v; DestSet dests; };
struct SendProbe { VertexId from; DestinationId dest; };

using ScriptAction =
    std::variant<FailLink, AddLink, FailNode, AddNode, SetStack, SetDests, SendProbe>;

struct ScriptEntry {
    Ms at = 0;
    ScriptAction action;
};

struct Scenario {
    std::vector<ScenarioNode> nodes;
    std::vector<ScenarioEdge> edges;
    std::vector<ScenarioFilter> filters;
    std::vector<ScriptEntry> script;

    std::string text() const;
    static Scenario parse(const std::string& text); // throws std::runtime_error
    static Scenario load(const std::string& path);

    /// Structural checks: unique node ids, edges and script over known ids.
    void validate() const; // throws std::runtime_error
};

std::string action_text(const ScriptAction& a);

} // namespace pathlet
