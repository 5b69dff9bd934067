#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "pathlet/node.hpp"

using namespace pathlet;
using pathlet_test::example_node;

namespace {

const std::map<VertexId, LabelStack> kStacks = {
    {"v1", {0, 1, 3}}, {"v2", {0, 1, 3}}, {"v3", {0, 1, 3}}, {"v4", {0, 1}},
    {"v5", {0, 1}},    {"v6", {0}},       {"v7", {0, 2, 1}}};

std::map<VertexId, LabelStack> neighbors_of(const VertexId& id,
                                            const std::vector<VertexId>& nbrs) {
    std::map<VertexId, LabelStack> out;
    for (const auto& n : nbrs) out[n] = kStacks.at(n);
    return out;
}

bool contains(const std::vector<VertexId>& v, const VertexId& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

Pathlet mk(Fid fid, VertexId start, VertexId end, LabelStack scope, DestSet dests = {}) {
    Pathlet p;
    p.fid = fid;
    p.start = std::move(start);
    p.end = std::move(end);
    p.scope = std::move(scope);
    p.dests = std::move(dests);
    return p;
}

} // namespace

TEST_CASE("propagation targets for the worked examples") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    // atomic pathlet toward v4, scope (0 1 B)
    auto t = v2.propagation_targets(v2.stack(), {0, 1, kBottom}, VertexId("v2"),
                                    VertexId("v4"), std::nullopt, true);
    CHECK(t == std::vector<VertexId>{"v1", "v3"});

    Node v5 = example_node("v5", {0, 1}, neighbors_of("v5", {"v3", "v4", "v7"}));
    auto t2 = v5.propagation_targets(v5.stack(), {0, 1}, VertexId("v5"), VertexId("v4"),
                                     std::nullopt, true);
    CHECK(t2 == std::vector<VertexId>{"v7"});

    CHECK(v5.propagation_targets(v5.stack(), {}, std::nullopt, std::nullopt, std::nullopt,
                                 true)
              .empty());
}

TEST_CASE("split horizon and origin exception") {
    Node v5 = example_node("v5", {0, 1}, neighbors_of("v5", {"v3", "v4", "v7"}));
    auto t = v5.propagation_targets(v5.stack(), {0, 1, kBottom}, VertexId("v2"),
                                    VertexId("v4"), VertexId("v3"), true);
    CHECK_FALSE(contains(t, "v3"));
    // v4 is the end vertex, yet as the origin it would always be admitted
    auto t2 = v5.propagation_targets(v5.stack(), {0, 1, kBottom}, VertexId("v4"),
                                     VertexId("v4"), std::nullopt, true);
    CHECK(contains(t2, "v4"));
}

TEST_CASE("filters prune outbound pathlets") {
    NodeConfig cfg;
    Filter f;
    f.neighbor = "v1";
    f.end = VertexId("v4");
    cfg.policy.filters.push_back(f);
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}), cfg);
    auto t = v2.propagation_targets(v2.stack(), {0, 1, kBottom}, VertexId("v2"),
                                    VertexId("v4"), std::nullopt, true);
    CHECK(t == std::vector<VertexId>{"v3"});
}

TEST_CASE("border vertex predicate") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    CHECK(v2.is_border_vertex({0, 1, 3}));
    CHECK(v2.is_border_vertex({0, 1}));
    CHECK_FALSE(v2.is_border_vertex({0})); // no border vertex for the root area

    Node v6 = example_node("v6", {0}, neighbors_of("v6", {"v2", "v4"}));
    CHECK_FALSE(v6.is_border_vertex({0}));

    Node v1 = example_node("v1", {0, 1, 3}, neighbors_of("v1", {"v2", "v3"}));
    CHECK_FALSE(v1.is_border_vertex({0, 1, 3}));
    CHECK_FALSE(v1.is_border_vertex({0, 1}));
}

TEST_CASE("border discovery from pathlet pairs") {
    Node v5 = example_node("v5", {0, 1}, neighbors_of("v5", {"v3", "v4", "v7"}));
    std::vector<Pathlet> pool = {mk(1, "v2", "v4", {0, 1, kBottom}),
                                 mk(3, "v4", "v6", {0, kBottom})};
    CHECK(v5.discover_border_vertices({0, 1}, pool) == std::vector<VertexId>{"v4"});
    CHECK(v5.discover_border_vertices({0, 1}, {}).empty());
    // second pathlet not shallower than the area: lemma precondition unmet
    std::vector<Pathlet> pool2 = {mk(1, "v2", "v4", {0, 1, kBottom}),
                                  mk(3, "v4", "v5", {0, 1, kBottom})};
    CHECK(v5.discover_border_vertices({0, 1}, pool2).empty());
}

TEST_CASE("hello with unchanged content is a no-op") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput out;
    v2.on_message(Message::hello("v4", {0, 1}, {}, false), 5, out);
    CHECK(out.sends.empty());
    CHECK_FALSE(out.changed);
}

TEST_CASE("hello from a non-neighbor is dropped") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1"}));
    NodeOutput out;
    v2.on_message(Message::hello("v9", {0, 2}, {}, false), 5, out);
    CHECK(out.sends.empty());
    REQUIRE(out.diags.size() == 1);
    CHECK(out.diags[0].find("non-adjacent") != std::string::npos);
}

TEST_CASE("activation greets every neighbor and arms the period timer") {
    Node n("v4", {0, 1}, {}, {});
    n.link_up("v2", 0.0);
    n.link_up("v5", 0.0);
    n.link_up("v6", 0.0);
    NodeOutput out;
    n.on_activate(0, out);
    CHECK(out.sends.size() == 3);
    for (const auto& s : out.sends) {
        CHECK(s.msg.kind == MsgKind::Hello);
        CHECK(s.msg.a);
    }
    REQUIRE(out.timers.size() == 1);
    CHECK(out.timers[0].kind == TimerKind::HelloPeriod);

    Node isolated("x", {0}, {}, {});
    NodeOutput out2;
    isolated.on_activate(0, out2);
    CHECK(out2.sends.empty());
    CHECK(out2.timers.size() == 1);
}

TEST_CASE("atomic pathlet creation on first hello") {
    Node v4("v4", {0, 1}, {}, {});
    v4.link_up("v5", 0.0);
    v4.link_up("v6", 0.0);
    NodeOutput out;
    v4.on_message(Message::hello("v5", {0, 1}, {}, false), 3, out);
    REQUIRE(v4.known().size() == 1);
    const Pathlet& atom = v4.known().begin()->second.p;
    CHECK(atom.start == "v4");
    CHECK(atom.end == "v5");
    CHECK(atom.scope == LabelStack{0, 1, kBottom});
    CHECK(v4.fids_of(atom.fid).has_value());
    CHECK(v4.fids_of(atom.fid)->empty());
    CHECK(v4.nh_of(atom.fid) == VertexId("v5"));

    NodeOutput out2;
    v4.on_message(Message::hello("v6", {0}, {"d"}, false), 4, out2);
    auto key = [&]() {
        for (const auto& [k, kp] : v4.known())
            if (kp.p.end == "v6") return k;
        return PathletKey{};
    }();
    CHECK(v4.known().at(key).p.scope == LabelStack{0, kBottom});
    CHECK(v4.known().at(key).p.dests == DestSet{"d"});
}

TEST_CASE("rebooted neighbor gets a full dump with original stamps") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    // feed one remote pathlet so the dump has something beyond the atomics
    NodeOutput tmp;
    v2.on_message(
        Message::pathlet_msg("v4", "v4", 7, mk(9, "v4", "v5", {0, 1, kBottom})), 8, tmp);
    NodeOutput out;
    v2.on_message(Message::hello("v1", {0, 1, 3}, {}, true), 20, out);
    bool saw_remote = false;
    for (const auto& s : out.sends) {
        if (s.to != "v1" || s.msg.kind != MsgKind::Pathlet) continue;
        if (s.msg.p.key() == PathletKey{"v4", 9}) {
            saw_remote = true;
            CHECK(s.msg.t == 7);      // history timestamp preserved
            CHECK(s.msg.origin == "v4"); // original origin preserved
        }
    }
    CHECK(saw_remote);
}

TEST_CASE("fresh pathlet is stored, forwarded and composed against") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput out;
    Pathlet p = mk(9, "v4", "v5", {0, 1, kBottom});
    v2.on_message(Message::pathlet_msg("v4", "v4", 7, p), 8, out);
    CHECK(v2.known().count(PathletKey{"v4", 9}) == 1);
    REQUIRE(v2.history().count(PathletKey{"v4", 9}) == 1);
    CHECK(v2.history().at(PathletKey{"v4", 9}).t == 7);
    CHECK(v2.history().at(PathletKey{"v4", 9}).positive);
    bool forwarded = false;
    for (const auto& s : out.sends)
        if (s.msg.kind == MsgKind::Pathlet && s.msg.p.key() == p.key() && s.to != "v4") {
            forwarded = true;
            CHECK(s.msg.t == 7);
            CHECK(s.msg.origin == "v4");
        }
    CHECK(forwarded);
}

TEST_CASE("stale pathlet triggers a corrective reply with the stored stamp") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    Pathlet p = mk(9, "v4", "v5", {0, 1, kBottom});
    v2.on_message(Message::pathlet_msg("v4", "v4", 7, p), 8, tmp);

    Pathlet older = p;
    older.dests = {"zzz"};
    NodeOutput out;
    v2.on_message(Message::pathlet_msg("v4", "v3", 5, older), 9, out);
    REQUIRE(out.sends.size() == 1);
    CHECK(out.sends[0].to == "v3");
    CHECK(out.sends[0].msg.kind == MsgKind::Pathlet);
    CHECK(out.sends[0].msg.t == 7);
    CHECK(out.sends[0].msg.p == p);
    CHECK_FALSE(out.changed);
}

TEST_CASE("exact duplicate is dropped silently") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    Pathlet p = mk(9, "v4", "v5", {0, 1, kBottom});
    v2.on_message(Message::pathlet_msg("v4", "v4", 7, p), 8, tmp);
    NodeOutput out;
    v2.on_message(Message::pathlet_msg("v4", "v1", 7, p), 9, out);
    CHECK(out.sends.empty());
    CHECK_FALSE(out.changed);
}

TEST_CASE("originator answers zombies about its own pathlets") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    // unknown fid: a withdrawlet kills the zombie
    NodeOutput out;
    v2.on_message(Message::pathlet_msg("v2", "v1", 3, mk(77, "v2", "v5", {0, 1})), 50, out);
    REQUIRE(out.sends.size() == 1);
    CHECK(out.sends[0].msg.kind == MsgKind::Withdrawlet);
    CHECK(out.sends[0].msg.f == 77);
    CHECK(out.sends[0].to == "v1");
    CHECK(out.sends[0].msg.t > 3);

    // differing content: corrective pathlet with the current version
    auto key = [&]() {
        for (const auto& [k, kp] : v2.known())
            if (kp.p.end == "v4") return k;
        return PathletKey{};
    }();
    Pathlet stale = v2.known().at(key).p;
    stale.dests = {"ghost"};
    NodeOutput out2;
    v2.on_message(Message::pathlet_msg("v2", "v3", 3, stale), 51, out2);
    REQUIRE(out2.sends.size() == 1);
    CHECK(out2.sends[0].msg.kind == MsgKind::Pathlet);
    CHECK(out2.sends[0].msg.p == v2.known().at(key).p);
}

TEST_CASE("withdrawlet of an unknown pathlet is remembered and forwarded") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput out;
    v2.on_message(Message::withdrawlet("v4", "v4", 9, 42, {0, 1, kBottom}), 10, out);
    PathletKey key{"v4", 42};
    REQUIRE(v2.history().count(key) == 1);
    CHECK_FALSE(v2.history().at(key).positive);
    bool forwarded = false;
    for (const auto& s : out.sends)
        if (s.msg.kind == MsgKind::Withdrawlet && s.msg.f == 42) forwarded = true;
    CHECK(forwarded);
}

TEST_CASE("stale withdrawlet gets a corrective pathlet back") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    Pathlet p = mk(9, "v4", "v5", {0, 1, kBottom});
    v2.on_message(Message::pathlet_msg("v4", "v4", 7, p), 8, tmp);
    NodeOutput out;
    v2.on_message(Message::withdrawlet("v4", "v3", 5, 9, {0, 1, kBottom}), 9, out);
    REQUIRE(out.sends.size() == 1);
    CHECK(out.sends[0].msg.kind == MsgKind::Pathlet);
    CHECK(out.sends[0].msg.t == 7);
    CHECK(v2.known().count(p.key()) == 1);
}

TEST_CASE("fresh withdrawlet removes the pathlet") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    Pathlet p = mk(9, "v4", "v5", {0, 1, kBottom});
    v2.on_message(Message::pathlet_msg("v4", "v4", 7, p), 8, tmp);
    NodeOutput out;
    v2.on_message(Message::withdrawlet("v4", "v4", 11, 9, {0, 1, kBottom}), 12, out);
    CHECK(v2.known().count(p.key()) == 0);
    REQUIRE(v2.history().count(p.key()) == 1);
    CHECK_FALSE(v2.history().at(p.key()).positive);
}

TEST_CASE("withdraw covers every pathlet of the scope in one message") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    v2.on_message(Message::pathlet_msg("v5", "v4", 5, mk(1, "v5", "v4", {0, 1})), 6, tmp);
    v2.on_message(Message::pathlet_msg("v5", "v4", 5, mk(9, "v5", "v4", {0, 1})), 6, tmp);
    REQUIRE(v2.known().count(PathletKey{"v5", 1}) == 1);
    REQUIRE(v2.known().count(PathletKey{"v5", 9}) == 1);

    NodeOutput out;
    v2.on_message(Message::withdraw("v5", "v4", 20, {0, 1}), 21, out);
    CHECK(v2.known().count(PathletKey{"v5", 1}) == 0);
    CHECK(v2.known().count(PathletKey{"v5", 9}) == 0);
    std::size_t bulk = 0, single = 0;
    for (const auto& s : out.sends) {
        if (s.msg.kind == MsgKind::Withdraw) ++bulk;
        if (s.msg.kind == MsgKind::Withdrawlet) ++single;
    }
    CHECK(bulk >= 1);
    CHECK(single == 0);
    // a replay of the same withdraw is dropped
    NodeOutput out2;
    v2.on_message(Message::withdraw("v5", "v1", 20, {0, 1}), 22, out2);
    CHECK(out2.sends.empty());
}

TEST_CASE("withdraw with mixed freshness decomposes into withdrawlets") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    v2.on_message(Message::pathlet_msg("v5", "v4", 5, mk(1, "v5", "v4", {0, 1})), 6, tmp);
    v2.on_message(Message::pathlet_msg("v5", "v4", 30, mk(9, "v5", "v4", {0, 1})), 31, tmp);
    NodeOutput out;
    v2.on_message(Message::withdraw("v5", "v4", 20, {0, 1}), 32, out);
    CHECK(v2.known().count(PathletKey{"v5", 1}) == 0); // fresher than 5
    CHECK(v2.known().count(PathletKey{"v5", 9}) == 1); // stale against 30
    bool corrective = false;
    for (const auto& s : out.sends)
        if (s.msg.kind == MsgKind::Pathlet && s.to == "v4" && s.msg.p.fid == 9)
            corrective = true;
    CHECK(corrective);
}

TEST_CASE("neighbor death removes the atomic pathlet and recomposes") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    REQUIRE(v2.own_atomic_count() == 4);
    NodeOutput out;
    v2.on_message(Message::hello("v6", {}, {}, false), 40, out);
    CHECK(v2.own_atomic_count() == 3);
    bool withdrew = false;
    for (const auto& s : out.sends)
        if (s.msg.kind == MsgKind::Withdrawlet) withdrew = true;
    CHECK(withdrew);
}

TEST_CASE("stack change is atomic and updates only affected atomics") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput out;
    v2.on_stack_change({0, 2, 1}, 100, out);
    CHECK(v2.stack() == LabelStack{0, 2, 1});
    // every neighbor is greeted with the new stack
    std::size_t hellos = 0;
    for (const auto& s : out.sends)
        if (s.msg.kind == MsgKind::Hello) {
            ++hellos;
            CHECK(s.msg.s == LabelStack{0, 2, 1});
            CHECK_FALSE(s.msg.a);
        }
    CHECK(hellos == 4);
    // atomics toward v1/v3 now live in (0), toward v4 in (0), toward v6 in (0)
    for (const auto& [k, kp] : v2.known()) {
        if (kp.p.start != "v2") continue;
        CHECK(kp.p.scope == LabelStack{0, kBottom});
    }
    // no crossing pathlets may remain for (0 1 3) or (0 1)
    CHECK(v2.crossing().count(LabelStack{0, 1, 3}) == 0);
    CHECK(v2.crossing().count(LabelStack{0, 1}) == 0);

    NodeOutput out2;
    v2.on_stack_change({0, 2, 1}, 101, out2);
    for (const auto& s : out2.sends) CHECK(s.msg.kind == MsgKind::Hello);
}

TEST_CASE("destination change sends plain hellos") {
    Node v6 = example_node("v6", {0}, neighbors_of("v6", {"v2", "v4"}));
    NodeOutput out;
    v6.on_destination_change({"d", "d2"}, 50, out);
    CHECK(v6.own_dests() == DestSet{"d", "d2"});
    CHECK(out.sends.size() == 2);
    for (const auto& s : out.sends) {
        CHECK(s.msg.kind == MsgKind::Hello);
        CHECK(s.msg.d == DestSet{"d", "d2"});
        CHECK_FALSE(s.msg.a);
    }
}

TEST_CASE("hello destination branch refreshes pathlets ending at the neighbor") {
    Node v4 = example_node("v4", {0, 1}, neighbors_of("v4", {"v2", "v5", "v6"}));
    // remote atomic ending at v6 with the old destination set
    NodeOutput tmp;
    v4.on_message(Message::pathlet_msg("v2", "v2", 5, mk(8, "v2", "v6", {0, kBottom}, {})), 6,
                  tmp);
    NodeOutput out;
    v4.on_message(Message::hello("v6", {0}, {"d"}, false), 60, out);
    CHECK(v4.known().at(PathletKey{"v2", 8}).p.dests == DestSet{"d"});
    bool reannounced = false;
    for (const auto& s : out.sends)
        if (s.msg.kind == MsgKind::Pathlet && s.msg.p.key() == PathletKey{"v2", 8}) {
            reannounced = true;
            CHECK(s.msg.p.dests == DestSet{"d"});
            CHECK(s.msg.origin == "v2");
            CHECK(s.msg.t > 5);
        }
    CHECK(reannounced);
}

TEST_CASE("pathlet expiry timer is armed only for unusable pathlets") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    // start vertex v9 is unreachable from v2 via any concatenation
    Pathlet orphan = mk(5, "v9", "v1", {0, 1, 3, kBottom});
    v2.on_message(Message::pathlet_msg("v9", "v1", 9, orphan), 10, tmp);
    REQUIRE(v2.known().count(orphan.key()) == 1);
    CHECK(v2.known().at(orphan.key()).expiry.has_value());

    // reachable starts never expire
    Pathlet fine = mk(7, "v4", "v5", {0, 1, kBottom});
    v2.on_message(Message::pathlet_msg("v4", "v4", 9, fine), 11, tmp);
    CHECK_FALSE(v2.known().at(fine.key()).expiry.has_value());

    // expiry fires: pathlet and history entry are gone, nothing is sent
    TimerReq t{TimerKind::PathletExpiry, 0, orphan.key(), {}, {}, 0};
    NodeOutput out;
    v2.on_timer(t, 10 + v2.config().pathlet_timeout, out);
    CHECK(v2.known().count(orphan.key()) == 0);
    CHECK(v2.history().count(orphan.key()) == 0);
    for (const auto& s : out.sends) CHECK(s.msg.kind != MsgKind::Withdrawlet);
}

TEST_CASE("negative history entries purge after the history timeout") {
    Node v2 = example_node("v2", {0, 1, 3}, neighbors_of("v2", {"v1", "v3", "v4", "v6"}));
    NodeOutput tmp;
    v2.on_message(Message::withdrawlet("v4", "v4", 9, 42, {0, 1, kBottom}), 10, tmp);
    PathletKey key{"v4", 42};
    REQUIRE(v2.history().count(key) == 1);
    TimerReq t{TimerKind::HistoryPurge, 0, key, {}, {}, 0};
    NodeOutput out;
    v2.on_timer(t, 10 + v2.config().history_timeout, out);
    CHECK(v2.history().count(key) == 0);
    // firing again is a no-op
    NodeOutput out2;
    v2.on_timer(t, 10 + 2 * v2.config().history_timeout, out2);
    CHECK_FALSE(out2.changed);
}

TEST_CASE("three missed hellos declare the neighbor dead") {
    NodeConfig cfg;
    Node v4("v4", {0, 1}, {}, cfg);
    v4.link_up("v5", 0.0);
    NodeOutput tmp;
    v4.on_message(Message::hello("v5", {0, 1}, {}, false), 0, tmp);
    v4.note_heard("v5", 0);
    REQUIRE(v4.own_atomic_count() == 1);

    TimerReq t{TimerKind::HelloPeriod, 0, {}, {}, {}, 0};
    NodeOutput out1;
    v4.on_timer(t, cfg.hello_interval, out1); // 1000: still alive
    CHECK(v4.own_atomic_count() == 1);
    NodeOutput out3;
    v4.on_timer(t, cfg.dead_interval, out3); // 3000: declared dead
    CHECK(v4.own_atomic_count() == 0);
    CHECK(v4.neighbor_stacks().at("v5").empty());
}
