#pragma once

#include <string>

#include "pathlet/engine.hpp"
#include "pathlet/node.hpp"
#include "pathlet/scenario.hpp"

namespace pathlet_test {

inline std::string scenario_path(const std::string& name) {
    return std::string(PATHLET_SCENARIO_DIR) + "/" + name;
}

inline pathlet::Scenario fig1() {
    return pathlet::Scenario::load(scenario_path("fig1.scn"));
}

/// A node with the example neighborhood already greeted: neighbor stacks
/// are installed directly to unit-test the pure relations.
inline pathlet::Node example_node(const pathlet::VertexId& id, const pathlet::LabelStack& stack,
                                  const std::map<pathlet::VertexId, pathlet::LabelStack>& nbrs,
                                  pathlet::NodeConfig cfg = {}) {
    pathlet::Node n(id, stack, {}, cfg);
    pathlet::NodeOutput out;
    for (const auto& [v, s] : nbrs) {
        n.link_up(v, 0.0);
        n.on_message(pathlet::Message::hello(v, s, {}, false), 0, out);
    }
    return n;
}

} // namespace pathlet_test
