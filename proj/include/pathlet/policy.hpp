#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathlet/chains.hpp"
#include "pathlet/pathlet.hpp"

namespace pathlet {

enum class CompositionRule { AllChains, ShortestByHops, ShortestByWeight, AvoidAreas };

std::optional<CompositionRule> parse_rule(const std::string& name);
const char* to_string(CompositionRule r);

/// Outbound propagation filter: suppress sending to `neighbor` every pathlet
/// whose start/end/scope match the triple; absent fields are wildcards.
struct Filter {
    VertexId neighbor;
    std::optional<VertexId> start;
    std::optional<VertexId> end;
    std::optional<LabelStack> scope;

    bool matches(const VertexId& to, const VertexId& p_start, const VertexId& p_end,
                 const LabelStack& p_scope) const {
        if (to != neighbor) return false;
        if (start && *start != p_start) return false;
        if (end && *end != p_end) return false;
        if (scope && *scope != p_scope) return false;
        return true;
    }
};

struct Policy {
    CompositionRule rule = CompositionRule::AllChains;
    std::size_t chain_cap = 16;
    std::vector<Filter> filters;

    bool filtered(const VertexId& to, const VertexId& p_start, const VertexId& p_end,
                  const LabelStack& p_scope) const {
        for (const auto& f : filters)
            if (f.matches(to, p_start, p_end, p_scope)) return true;
        return false;
    }
};

/// One composition a border vertex may materialize: the chain plus the
/// forwarding state and destination set derived from it.
struct Candidate {
    VertexId end;
    std::vector<Fid> fids; // components 2..n; the first is consumed by nh
    VertexId nh;           // end vertex of the first (atomic) component
    DestSet dests;         // empty for crossing, delta_n of the chain for final
    double weight = 0.0;   // sum over components
    std::vector<PathletKey> parts;
};

/// Chains from u to each target in E under `area`, reduced per the active
/// composition rule. For final pathlets only chains whose last component
/// carries destinations qualify.
std::vector<Candidate> select_compositions(const std::vector<Pathlet>& pool, const VertexId& u,
                                           const std::vector<VertexId>& targets,
                                           const LabelStack& area, const Policy& policy,
                                           bool final_kind);

} // namespace pathlet
