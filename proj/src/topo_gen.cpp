#include "pathlet/topo_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pathlet/rng.hpp"

namespace pathlet {

namespace {

std::uint64_t area_stream(std::uint64_t seed, const LabelStack& stack) {
    std::uint64_t h = seed;
    for (Label l : stack.labels())
        h = Rng::mix(h, static_cast<std::uint64_t>(l) + 0x517cc1b727220a95ULL);
    return h;
}

struct Builder {
    const GenParams& params;
    GeneratedTopology topo;
    std::size_t next_vertex = 0;

    VertexId fresh_vertex(const LabelStack& stack) {
        VertexId id = "r" + std::to_string(next_vertex++);
        topo.vertices.push_back({id, stack});
        return id;
    }

    bool connected(const std::vector<VertexId>& vs,
                   const std::vector<std::pair<VertexId, VertexId>>& es) const {
        if (vs.empty()) return true;
        std::map<VertexId, std::size_t> index;
        for (std::size_t i = 0; i < vs.size(); ++i) index[vs[i]] = i;
        std::vector<std::size_t> parent(vs.size());
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& [a, b] : es) {
            auto ia = index.find(a), ib = index.find(b);
            if (ia == index.end() || ib == index.end()) continue;
            parent[find(ia->second)] = find(ib->second);
        }
        std::size_t root = find(0);
        for (std::size_t i = 1; i < vs.size(); ++i)
            if (find(i) != root) return false;
        return true;
    }

    std::set<VertexId> pick_borders(std::vector<VertexId> pool, std::size_t count, Rng& rng) {
        count = std::max<std::size_t>(1, std::min(count, pool.size()));
        rng.shuffle(pool);
        return {pool.begin(), pool.begin() + static_cast<long>(count)};
    }

    // Bottom-level area: routers plus random edges until connected.
    std::set<VertexId> populate_bottom(const LabelStack& stack) {
        Rng rng(area_stream(params.seed, stack));
        std::size_t r = static_cast<std::size_t>(
            rng.uniform(static_cast<std::uint64_t>(params.routers_min),
                        static_cast<std::uint64_t>(params.routers_max)));
        std::vector<VertexId> vs;
        for (std::size_t i = 0; i < r; ++i) vs.push_back(fresh_vertex(stack));

        std::vector<std::pair<VertexId, VertexId>> es;
        std::set<std::pair<VertexId, VertexId>> have;
        int attempts = 0;
        while (!connected(vs, es)) {
            if (++attempts > params.retry_cap)
                throw std::runtime_error("area " + stack.text() + " not connected after " +
                                         std::to_string(params.retry_cap) +
                                         " passes (seed " + std::to_string(params.seed) + ")");
            for (std::size_t i = 0; i < vs.size(); ++i)
                for (std::size_t j = i + 1; j < vs.size(); ++j) {
                    if (have.count({vs[i], vs[j]})) continue;
                    if (rng.coin(params.edge_prob)) {
                        es.emplace_back(vs[i], vs[j]);
                        have.insert({vs[i], vs[j]});
                    }
                }
        }
        topo.edges.insert(topo.edges.end(), es.begin(), es.end());

        std::size_t marks = static_cast<std::size_t>(
            std::llround(static_cast<double>(r) * params.border_frac));
        auto borders = pick_borders(vs, marks, rng);
        topo.border_marks[stack] = borders;
        return borders;
    }

    std::set<VertexId> populate(const LabelStack& stack, int level) {
        if (level == params.stack_len) return populate_bottom(stack);

        Rng rng(area_stream(params.seed, stack));
        std::size_t a = static_cast<std::size_t>(
            rng.uniform(static_cast<std::uint64_t>(params.areas_min),
                        static_cast<std::uint64_t>(params.areas_max)));
        std::vector<VertexId> pooled;
        for (std::size_t i = 1; i <= a; ++i) {
            auto child = populate(stack.appended(static_cast<Label>(i)), level + 1);
            pooled.insert(pooled.end(), child.begin(), child.end());
        }
        std::sort(pooled.begin(), pooled.end());

        // Border graph over the children's marked borders; each retry
        // discards the previous batch and flips every pair again.
        std::vector<std::pair<VertexId, VertexId>> batch;
        int attempts = 0;
        do {
            if (++attempts > params.retry_cap)
                throw std::runtime_error("border graph of " + stack.text() +
                                         " not connected after " +
                                         std::to_string(params.retry_cap) +
                                         " passes (seed " + std::to_string(params.seed) + ")");
            batch.clear();
            for (std::size_t i = 0; i < pooled.size(); ++i)
                for (std::size_t j = i + 1; j < pooled.size(); ++j)
                    if (rng.coin(params.edge_prob)) batch.emplace_back(pooled[i], pooled[j]);
        } while (!connected(pooled, batch));
        topo.edges.insert(topo.edges.end(), batch.begin(), batch.end());

        std::size_t marks = static_cast<std::size_t>(
            std::llround(static_cast<double>(pooled.size()) * params.border_frac));
        auto borders = pick_borders(pooled, marks, rng);
        topo.border_marks[stack] = borders;
        return borders;
    }
};

} // namespace

void GenParams::validate() const {
    if (stack_len < 1) throw std::invalid_argument("stack_len must be >= 1");
    if (routers_min < 1 || routers_min > routers_max)
        throw std::invalid_argument("need 1 <= routers_min <= routers_max");
    if (areas_min < 1 || areas_min > areas_max)
        throw std::invalid_argument("need 1 <= areas_min <= areas_max");
    if (!(edge_prob > 0.0) || edge_prob > 1.0)
        throw std::invalid_argument("edge_prob must be in (0, 1]");
    if (!(border_frac > 0.0) || border_frac > 1.0)
        throw std::invalid_argument("border_frac must be in (0, 1]");
}

GeneratedTopology generate(const GenParams& params) {
    params.validate();
    Builder b{params, {}, 0};
    b.populate(LabelStack{kRootLabel}, 1);

    // Dedupe edges: a bottom pair can also be flipped at an upper level.
    std::set<std::pair<VertexId, VertexId>> seen;
    std::vector<std::pair<VertexId, VertexId>> uniq;
    for (const auto& [a, c] : b.topo.edges) {
        auto key = a < c ? std::make_pair(a, c) : std::make_pair(c, a);
        if (seen.insert(key).second) uniq.push_back(key);
    }
    std::sort(uniq.begin(), uniq.end());
    b.topo.edges = std::move(uniq);
    return std::move(b.topo);
}

Scenario GeneratedTopology::to_scenario() const {
    Scenario sc;
    for (const auto& v : vertices) sc.nodes.push_back({v.id, v.stack, {}, {}, {}});
    for (const auto& [a, b] : edges) sc.edges.push_back({a, b, std::nullopt, 0.0});
    return sc;
}

} // namespace pathlet
