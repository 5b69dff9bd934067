#include "pathlet/data_plane.hpp"

#include <algorithm>
#include <deque>

namespace pathlet {

namespace {

std::optional<Pathlet> lookup(const Node& n, const PathletKey& key) {
    auto it = n.known().find(key);
    if (it != n.known().end()) return it->second.p;
    if (key.start == n.id()) return n.find_own_pathlet(key.fid);
    return std::nullopt;
}

} // namespace

std::optional<std::vector<Fid>> build_header(const Node& source, const RouteChoice& choice,
                                             std::string* error) {
    std::vector<Fid> header;
    VertexId at = source.id();
    for (const auto& key : choice.parts) {
        auto p = lookup(source, key);
        if (!p) {
            if (error) *error = "unknown pathlet " + key.start + "/" + std::to_string(key.fid);
            return std::nullopt;
        }
        if (p->start != at) {
            if (error) *error = "broken chain at " + at + ": " + p->text();
            return std::nullopt;
        }
        header.push_back(p->fid);
        at = p->end;
    }
    return header;
}

std::optional<std::pair<VertexId, Packet>> forward_step(const Node& u, Packet p,
                                                        std::string* error) {
    if (p.header.empty()) {
        if (error) *error = "empty header at " + u.id();
        return std::nullopt;
    }
    Fid f = p.header.front();
    auto expansion = u.fids_of(f);
    auto next = u.nh_of(f);
    if (!expansion || !next) {
        if (error) *error = "unknown fid " + std::to_string(f) + " at " + u.id();
        return std::nullopt;
    }
    std::vector<Fid> header(expansion->begin(), expansion->end());
    header.insert(header.end(), p.header.begin() + 1, p.header.end());
    p.header = std::move(header);
    p.hops.push_back(u.id());
    return std::make_pair(*next, std::move(p));
}

WalkResult walk_packet(const NodeTable& nodes, const LinkCheck& link_ok, const VertexId& at,
                       Packet p) {
    WalkResult r;
    VertexId cur = at;
    std::size_t budget = 4 * (nodes.size() + 2) * (nodes.size() + 2) + p.header.size();
    while (!p.header.empty()) {
        if (budget-- == 0) {
            r.error = "hop budget exceeded (forwarding loop?)";
            r.final_vertex = cur;
            r.final_header = p.header;
            r.hops = p.hops;
            return r;
        }
        auto it = nodes.find(cur);
        if (it == nodes.end()) {
            r.error = "no such vertex " + cur;
            r.final_vertex = cur;
            return r;
        }
        std::string err;
        auto step = forward_step(it->second, std::move(p), &err);
        if (!step) {
            r.error = err;
            r.final_vertex = cur;
            return r;
        }
        if (!link_ok(cur, step->first)) {
            r.error = "packet lost on dead link " + cur + "-" + step->first;
            r.final_vertex = cur;
            r.hops = step->second.hops;
            return r;
        }
        cur = step->first;
        p = std::move(step->second);
    }
    r.delivered = true;
    r.final_vertex = cur;
    r.hops = p.hops;
    r.final_header = p.header;
    return r;
}

namespace {

std::optional<std::vector<std::pair<VertexId, Fid>>>
expand_impl(const NodeTable& nodes, const VertexId& u, Fid f, bool live_only,
            std::string* error) {
    std::vector<std::pair<VertexId, Fid>> steps;
    std::set<std::pair<VertexId, Fid>> seen;
    Packet p;
    p.header = {f};
    VertexId cur = u;
    while (!p.header.empty()) {
        std::pair<VertexId, Fid> site{cur, p.header.front()};
        if (!seen.insert(site).second) {
            if (error)
                *error = "expansion cycle at " + cur + "/" + std::to_string(p.header.front());
            return std::nullopt;
        }
        auto it = nodes.find(cur);
        if (it == nodes.end()) {
            if (error) *error = "no such vertex " + cur;
            return std::nullopt;
        }
        Fid here = p.header.front();
        if (live_only && it->second.forwarding_stale(here)) break;
        std::string err;
        auto step = forward_step(it->second, std::move(p), &err);
        if (!step) {
            if (error) *error = err;
            return std::nullopt;
        }
        steps.emplace_back(cur, here);
        cur = step->first;
        p = std::move(step->second);
    }
    return steps;
}

} // namespace

std::optional<std::vector<std::pair<VertexId, Fid>>> expand_fid(const NodeTable& nodes,
                                                                const VertexId& u, Fid f,
                                                                std::string* error) {
    return expand_impl(nodes, u, f, false, error);
}

std::optional<std::vector<std::pair<VertexId, Fid>>>
expand_fid_live(const NodeTable& nodes, const VertexId& u, Fid f, std::string* error) {
    return expand_impl(nodes, u, f, true, error);
}

std::vector<RouteChoice> enumerate_routes(const Node& source, const DestinationId& dest,
                                          std::size_t cap) {
    std::vector<RouteChoice> out;
    if (cap == 0) return out;
    std::vector<Pathlet> pool = source.pool_with_composed();
    std::map<VertexId, std::vector<Pathlet>> adj;
    {
        std::set<PathletKey> dedup;
        for (const auto& p : pool)
            if (dedup.insert(p.key()).second) adj[p.start].push_back(p);
        for (auto& [_, v] : adj)
            std::sort(v.begin(), v.end(),
                      [](const Pathlet& a, const Pathlet& b) { return a.key() < b.key(); });
    }

    struct Partial {
        std::vector<PathletKey> parts;
        std::set<VertexId> visited;
        VertexId tail;
    };
    std::deque<Partial> queue;
    queue.push_back({{}, {source.id()}, source.id()});
    std::size_t budget = 1u << 20;
    while (!queue.empty() && out.size() < cap && budget-- > 0) {
        Partial cur = std::move(queue.front());
        queue.pop_front();
        auto it = adj.find(cur.tail);
        if (it == adj.end()) continue;
        for (const auto& p : it->second) {
            if (cur.visited.count(p.end)) continue;
            std::vector<PathletKey> parts = cur.parts;
            parts.push_back(p.key());
            if (p.dests.count(dest)) {
                out.push_back({parts});
                if (out.size() >= cap) break;
            }
            std::set<VertexId> vis = cur.visited;
            vis.insert(p.end);
            queue.push_back({std::move(parts), std::move(vis), p.end});
        }
    }
    return out;
}

} // namespace pathlet
