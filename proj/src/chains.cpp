#include "pathlet/chains.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace pathlet {

namespace {

// Pool entries grouped by start vertex, ordered by (start, fid) so that
// breadth-first extension yields a stable lexicographic enumeration.
std::map<VertexId, std::vector<Pathlet>> by_start(const std::vector<Pathlet>& pool) {
    std::map<VertexId, std::vector<Pathlet>> adj;
    std::set<PathletKey> seen;
    for (const auto& p : pool) {
        if (!seen.insert(p.key()).second) continue;
        adj[p.start].push_back(p);
    }
    for (auto& [_, v] : adj)
        std::sort(v.begin(), v.end(),
                  [](const Pathlet& a, const Pathlet& b) { return a.key() < b.key(); });
    return adj;
}

} // namespace

std::map<VertexId, std::vector<Chain>> chains_multi(const std::vector<Pathlet>& pool,
                                                    const VertexId& u,
                                                    const std::set<VertexId>& targets,
                                                    const LabelStack& area, std::size_t cap) {
    std::map<VertexId, std::vector<Chain>> out;
    for (const auto& t : targets)
        if (t != u) out[t] = {};
    if (out.empty() || cap == 0) return out;

    std::vector<Pathlet> usable;
    usable.reserve(pool.size());
    for (const auto& p : pool)
        if (extends(area, p.scope)) usable.push_back(p);
    auto adj = by_start(usable);

    struct Partial {
        Chain parts;
        std::set<VertexId> visited;
    };
    std::deque<Partial> queue;
    queue.push_back({{}, {u}});

    auto open = [&] {
        for (const auto& [t, cs] : out)
            if (cs.size() < cap) return true;
        return false;
    };

    // Hard bound keeps adversarial pools from exploding; enumeration is
    // deterministic either way because expansion order is fixed.
    std::size_t budget = 1u << 21;
    while (!queue.empty() && open() && budget-- > 0) {
        Partial cur = std::move(queue.front());
        queue.pop_front();
        const VertexId& tail = cur.parts.empty() ? u : cur.parts.back().end;
        auto it = adj.find(tail);
        if (it == adj.end()) continue;
        for (const auto& p : it->second) {
            if (cur.visited.count(p.end)) continue;
            Chain next = cur.parts;
            next.push_back(p);
            auto slot = out.find(p.end);
            if (slot != out.end() && slot->second.size() < cap) slot->second.push_back(next);
            std::set<VertexId> vis = cur.visited;
            vis.insert(p.end);
            // extend only while some open target remains reachable
            bool worth = false;
            for (const auto& [t, cs] : out)
                if (cs.size() < cap && !vis.count(t)) {
                    worth = true;
                    break;
                }
            if (worth) queue.push_back({std::move(next), std::move(vis)});
        }
    }
    return out;
}

std::vector<Chain> chains(const std::vector<Pathlet>& pool, const VertexId& u,
                          const VertexId& v, const LabelStack& area, std::size_t cap) {
    if (u == v || cap == 0) return {};
    auto all = chains_multi(pool, u, {v}, area, cap);
    return std::move(all.at(v));
}

std::set<VertexId> reachable_set(const std::vector<Pathlet>& pool, const VertexId& from,
                                 const std::optional<VertexId>& avoid) {
    std::map<VertexId, std::set<VertexId>> edges;
    for (const auto& p : pool) {
        if (avoid && (p.start == *avoid || p.end == *avoid)) continue;
        edges[p.start].insert(p.end);
    }
    std::set<VertexId> seen{from};
    std::deque<VertexId> queue{from};
    if (avoid && from == *avoid) return {};
    while (!queue.empty()) {
        VertexId cur = queue.front();
        queue.pop_front();
        auto it = edges.find(cur);
        if (it == edges.end()) continue;
        for (const auto& n : it->second)
            if (seen.insert(n).second) queue.push_back(n);
    }
    return seen;
}

bool reachable(const std::vector<Pathlet>& pool, const VertexId& from, const VertexId& to,
               const std::optional<VertexId>& avoid) {
    if (from == to) return !(avoid && to == *avoid);
    return reachable_set(pool, from, avoid).count(to) > 0;
}

} // namespace pathlet
