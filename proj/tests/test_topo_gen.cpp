#include <doctest.h>

#include <map>
#include <set>

#include "pathlet/topo_gen.hpp"

using namespace pathlet;

TEST_CASE("P=1 over one area gives a complete graph") {
    GenParams p;
    p.stack_len = 1;
    p.routers_min = p.routers_max = 5;
    p.edge_prob = 1.0;
    p.border_frac = 0.5;
    p.seed = 3;
    auto t = generate(p);
    CHECK(t.vertices.size() == 5);
    CHECK(t.edges.size() == 10);
    for (const auto& v : t.vertices) CHECK(v.stack == LabelStack{0});
}

TEST_CASE("two sibling areas under the root") {
    GenParams p;
    p.stack_len = 2;
    p.routers_min = p.routers_max = 10;
    p.areas_min = p.areas_max = 2;
    p.edge_prob = 0.1;
    p.border_frac = 0.5;
    p.seed = 11;
    auto t = generate(p);
    CHECK(t.vertices.size() == 20);
    std::map<LabelStack, std::size_t> per_area;
    for (const auto& v : t.vertices) {
        CHECK(v.stack.size() == 2);
        CHECK(v.stack[0] == kRootLabel);
        ++per_area[v.stack];
    }
    CHECK(per_area.size() == 2);
    for (const auto& [_, n] : per_area) CHECK(n == 10);
    // bottom areas marked half their routers as borders
    CHECK(t.border_marks.at(LabelStack{0, 1}).size() == 5);
    CHECK(t.border_marks.at(LabelStack{0, 2}).size() == 5);
}

TEST_CASE("generation is deterministic in params and seed") {
    GenParams p;
    p.stack_len = 3;
    p.routers_min = 2;
    p.routers_max = 4;
    p.areas_min = 2;
    p.areas_max = 3;
    p.edge_prob = 0.4;
    p.border_frac = 0.5;
    p.seed = 99;
    auto a = generate(p);
    auto b = generate(p);
    CHECK(a.edges == b.edges);
    REQUIRE(a.vertices.size() == b.vertices.size());
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
        CHECK(a.vertices[i].id == b.vertices[i].id);
        CHECK(a.vertices[i].stack == b.vertices[i].stack);
    }
}

TEST_CASE("sibling areas are vertex-disjoint and stacks have uniform length") {
    GenParams p;
    p.stack_len = 3;
    p.routers_min = 3;
    p.routers_max = 5;
    p.areas_min = 2;
    p.areas_max = 2;
    p.edge_prob = 0.5;
    p.border_frac = 0.4;
    p.seed = 5;
    auto t = generate(p);
    std::map<LabelStack, std::set<VertexId>> members;
    for (const auto& v : t.vertices) {
        CHECK(v.stack.size() == 3);
        LabelStack a = v.stack;
        while (!a.empty()) {
            members[a].insert(v.id);
            a = a.parent();
        }
    }
    for (const auto& [a1, m1] : members) {
        for (const auto& [a2, m2] : members) {
            if (a1.size() != a2.size() || a1 == a2) continue;
            std::set<VertexId> inter;
            for (const auto& v : m1)
                if (m2.count(v)) inter.insert(v);
            CHECK(inter.empty()); // siblings never share vertices
        }
    }
}

TEST_CASE("every area's induced subgraph is connected") {
    GenParams p;
    p.stack_len = 2;
    p.routers_min = 4;
    p.routers_max = 6;
    p.areas_min = 2;
    p.areas_max = 3;
    p.edge_prob = 0.3;
    p.border_frac = 0.5;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        p.seed = seed;
        auto t = generate(p);
        std::map<VertexId, LabelStack> stacks;
        for (const auto& v : t.vertices) stacks[v.id] = v.stack;
        std::set<LabelStack> areas;
        for (const auto& v : t.vertices) {
            LabelStack a = v.stack;
            while (!a.empty()) {
                areas.insert(a);
                a = a.parent();
            }
        }
        for (const auto& area : areas) {
            std::set<VertexId> inside;
            for (const auto& v : t.vertices)
                if (in_area(v.stack, area)) inside.insert(v.id);
            // BFS within the induced subgraph
            std::set<VertexId> seen{*inside.begin()};
            std::vector<VertexId> queue{*inside.begin()};
            while (!queue.empty()) {
                VertexId cur = queue.back();
                queue.pop_back();
                for (const auto& [a, b] : t.edges) {
                    VertexId other;
                    if (a == cur) other = b;
                    else if (b == cur) other = a;
                    else continue;
                    if (inside.count(other) && seen.insert(other).second)
                        queue.push_back(other);
                }
            }
            CHECK(seen == inside);
        }
    }
}

TEST_CASE("invalid parameters are rejected") {
    GenParams p;
    p.edge_prob = 0.0;
    CHECK_THROWS(generate(p));
    p = {};
    p.routers_min = 5;
    p.routers_max = 2;
    CHECK_THROWS(generate(p));
    p = {};
    p.border_frac = 1.5;
    CHECK_THROWS(generate(p));
}

TEST_CASE("scenario emission carries nodes and edges only") {
    GenParams p;
    p.stack_len = 2;
    p.routers_min = p.routers_max = 3;
    p.areas_min = p.areas_max = 2;
    p.edge_prob = 0.6;
    p.border_frac = 0.5;
    p.seed = 2;
    auto sc = generate(p).to_scenario();
    sc.validate();
    CHECK(sc.nodes.size() == 6);
    for (const auto& e : sc.edges) CHECK_FALSE(e.delay.has_value());
    // round trip through text form
    auto again = Scenario::parse(sc.text());
    CHECK(again.nodes.size() == sc.nodes.size());
    CHECK(again.edges.size() == sc.edges.size());
}
