#include "pathlet/policy.hpp"

#include <algorithm>

namespace pathlet {

std::optional<CompositionRule> parse_rule(const std::string& name) {
    if (name == "all") return CompositionRule::AllChains;
    if (name == "shortest_hops") return CompositionRule::ShortestByHops;
    if (name == "shortest_weight") return CompositionRule::ShortestByWeight;
    if (name == "avoid_areas") return CompositionRule::AvoidAreas;
    return std::nullopt;
}

const char* to_string(CompositionRule r) {
    switch (r) {
    case CompositionRule::AllChains: return "all";
    case CompositionRule::ShortestByHops: return "shortest_hops";
    case CompositionRule::ShortestByWeight: return "shortest_weight";
    case CompositionRule::AvoidAreas: return "avoid_areas";
    }
    return "?";
}

namespace {

Candidate make_candidate(const Chain& chain, bool final_kind) {
    Candidate c;
    c.end = chain.back().end;
    c.nh = chain.front().end;
    for (std::size_t i = 1; i < chain.size(); ++i) c.fids.push_back(chain[i].fid);
    if (final_kind) c.dests = chain.back().dests;
    for (const auto& p : chain) {
        c.weight += p.weight;
        c.parts.push_back(p.key());
    }
    return c;
}

std::size_t crossing_count(const Chain& chain) {
    std::size_t n = 0;
    for (const auto& p : chain)
        if (!p.scope.ends_with_bottom()) ++n;
    return n;
}

} // namespace

std::vector<Candidate> select_compositions(const std::vector<Pathlet>& pool, const VertexId& u,
                                           const std::vector<VertexId>& targets,
                                           const LabelStack& area, const Policy& policy,
                                           bool final_kind) {
    std::vector<Candidate> out;
    std::set<VertexId> wanted(targets.begin(), targets.end());
    wanted.erase(u);
    auto per_target = chains_multi(pool, u, wanted, area, policy.chain_cap);

    for (const auto& w : wanted) {
        auto& found = per_target.at(w);
        std::vector<Chain> eligible;
        for (auto& ch : found) {
            if (final_kind && ch.back().dests.empty()) continue;
            eligible.push_back(std::move(ch));
        }
        if (eligible.empty()) continue;

        switch (policy.rule) {
        case CompositionRule::AllChains:
            for (const auto& ch : eligible) out.push_back(make_candidate(ch, final_kind));
            break;
        case CompositionRule::ShortestByHops:
            // chains() yields shortest-first, lexicographic within a length
            out.push_back(make_candidate(eligible.front(), final_kind));
            break;
        case CompositionRule::ShortestByWeight: {
            std::size_t best = 0;
            double best_w = 0;
            for (std::size_t i = 0; i < eligible.size(); ++i) {
                double wsum = 0;
                for (const auto& p : eligible[i]) wsum += p.weight;
                if (i == 0 || wsum < best_w) {
                    best = i;
                    best_w = wsum;
                }
            }
            out.push_back(make_candidate(eligible[best], final_kind));
            break;
        }
        case CompositionRule::AvoidAreas: {
            std::size_t best = 0;
            std::size_t best_c = 0;
            for (std::size_t i = 0; i < eligible.size(); ++i) {
                std::size_t c = crossing_count(eligible[i]);
                if (i == 0 || c < best_c) {
                    best = i;
                    best_c = c;
                }
            }
            out.push_back(make_candidate(eligible[best], final_kind));
            break;
        }
        }
    }
    return out;
}

} // namespace pathlet
