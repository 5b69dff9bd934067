#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pathlet/message.hpp"
#include "pathlet/pathlet.hpp"
#include "pathlet/policy.hpp"
#include "pathlet/types.hpp"

namespace pathlet {

struct NodeConfig {
    Ms hello_interval = 1000;
    Ms dead_interval = 3000;     // silent neighbors are declared dead after this
    Ms forwarding_grace = 2000;  // T_f: withdrawn fids keep forwarding this long
    Ms pathlet_timeout = 30000;  // T_p: unreachable pathlets expire after this
    Ms history_timeout = 60000;  // negative history entries purge after this
    Policy policy;
};

enum class TimerKind { HelloPeriod, PathletExpiry, HistoryPurge, WithdrawPurge, ForwardingClear };

struct TimerReq {
    TimerKind kind = TimerKind::HelloPeriod;
    Ms delay = 0;
    PathletKey key;      // PathletExpiry / HistoryPurge
    VertexId worigin;    // WithdrawPurge
    LabelStack wscope;   // WithdrawPurge
    Fid fid = 0;         // ForwardingClear
};

struct Send {
    VertexId to;
    Message msg;
    bool periodic = false; // periodic greeting, ignored by convergence tracking
};

struct NodeOutput {
    std::vector<Send> sends;
    std::vector<TimerReq> timers;
    std::vector<std::string> diags;
    bool changed = false; // protocol-visible state was mutated
};

struct HistoryEntry {
    LabelStack scope;
    Ms t = 0;
    bool positive = true;
    std::optional<Ms> purge_at; // armed for negative entries only
};

struct KnownPathlet {
    Pathlet p;
    std::optional<Ms> expiry; // T_p deadline, absent = never expires
};

/// One router's control plane: neighbor tables, known and composed pathlet
/// sets, history with freshness, forwarding state, and the event handlers.
/// Handlers are deterministic single-threaded transitions; the simulation
/// engine owns the instance and delivers messages, timers and changes.
class Node {
public:
    Node(VertexId id, LabelStack stack, DestSet dests, NodeConfig cfg, Fid first_fid = 0);

    // -- engine wiring ------------------------------------------------------
    void link_up(const VertexId& peer, double weight);
    void link_down(const VertexId& peer);
    void note_heard(const VertexId& peer, Ms now) { last_heard_[peer] = now; }

    // -- event handlers -----------------------------------------------------
    void on_activate(Ms now, NodeOutput& out);
    void on_message(const Message& m, Ms now, NodeOutput& out);
    void on_stack_change(const LabelStack& s_new, Ms now, NodeOutput& out);
    void on_destination_change(const DestSet& dests, Ms now, NodeOutput& out);
    void on_timer(const TimerReq& t, Ms now, NodeOutput& out);

    // -- pure protocol relations (also used directly by tests) --------------

    /// Neighbors eligible to receive a message with this scope, per the four
    /// propagation conditions. The pathlet origin is always admitted; the
    /// end vertex and the message source are never admitted; filters prune
    /// last. Conditions 1-3 are evaluated from `sender_stack`.
    std::vector<VertexId> propagation_targets(const LabelStack& sender_stack,
                                              const LabelStack& scope,
                                              const std::optional<VertexId>& origin,
                                              const std::optional<VertexId>& end,
                                              const std::optional<VertexId>& exclude,
                                              bool apply_filters) const;

    bool is_border_vertex(const LabelStack& area) const;

    /// Remote border vertices for `area` witnessed by pathlet pairs in `pool`.
    std::vector<VertexId> discover_border_vertices(const LabelStack& area,
                                                   const std::vector<Pathlet>& pool) const;

    /// Destination vertices inside `area` evidenced by pathlets in `pool`.
    std::vector<VertexId> dest_vertices(const LabelStack& area,
                                        const std::vector<Pathlet>& pool) const;

    // -- inspection ---------------------------------------------------------
    const VertexId& id() const { return id_; }
    const LabelStack& stack() const { return stack_; }
    const DestSet& own_dests() const { return own_dests_; }
    const NodeConfig& config() const { return cfg_; }
    const std::map<VertexId, LabelStack>& neighbor_stacks() const { return neighbor_stacks_; }
    const std::map<VertexId, DestSet>& neighbor_dests() const { return neighbor_dests_; }
    const std::map<PathletKey, KnownPathlet>& known() const { return known_; }
    const std::map<LabelStack, std::map<Fid, Pathlet>>& crossing() const { return crossing_; }
    const std::map<LabelStack, std::map<Fid, Pathlet>>& finals() const { return final_; }
    const std::map<LabelStack, std::set<VertexId>>& borders() const { return borders_; }
    const std::map<PathletKey, HistoryEntry>& history() const { return history_; }
    const std::set<VertexId>& live_links() const { return live_links_; }

    std::optional<std::vector<Fid>> fids_of(Fid f) const;
    std::optional<VertexId> nh_of(Fid f) const;
    const std::map<Fid, std::vector<Fid>>& forwarding_fids() const { return fids_; }
    /// Withdrawn but retained for the T_f grace window.
    bool forwarding_stale(Fid f) const { return pending_clear_.count(f) > 0; }

    std::vector<Pathlet> pool() const;               // known pathlets
    std::vector<Pathlet> pool_with_composed() const; // known + crossing + final
    std::size_t stored_pathlets() const;
    std::size_t own_atomic_count() const {
        std::size_t n = 0;
        for (const auto& [k, kp] : known_)
            if (kp.p.start == id_) ++n;
        return n;
    }
    std::optional<Pathlet> find_own_pathlet(Fid f) const; // atomics + composed
    Fid fid_counter() const { return next_fid_; }

    // Test support: direct state injection, bypassing the protocol path.
    void test_set_forwarding(Fid f, std::vector<Fid> expansion, VertexId nh) {
        fids_[f] = std::move(expansion);
        nh_[f] = std::move(nh);
    }
    void test_add_known(const Pathlet& p) {
        known_[p.key()] = {p, std::nullopt};
        history_[p.key()] = {p.scope, 0, true, std::nullopt};
    }
    void test_add_own_atomic(const Pathlet& p) {
        test_add_known(p);
        fids_[p.fid] = {};
        nh_[p.fid] = p.end;
    }

private:
    void handle_hello(const Message& m, Ms now, NodeOutput& out);
    void handle_pathlet(const Message& m, Ms now, NodeOutput& out);
    void handle_withdrawlet(const Message& m, Ms now, NodeOutput& out);
    void handle_withdraw(const Message& m, Ms now, NodeOutput& out);

    /// Replaces the known set, announcing and withdrawing own pathlets per
    /// the diff, re-arming expiry timers, and refreshing compositions.
    void update_known_pathlets(const LabelStack& s_old, const LabelStack& s_new,
                               const std::map<PathletKey, Pathlet>& pi_new, Ms now,
                               NodeOutput& out);
    void update_composed_pathlets(const LabelStack& s_old, const LabelStack& s_new, Ms now,
                                  NodeOutput& out);

    void send(NodeOutput& out, const VertexId& to, Message m, bool periodic = false) const;

    /// Timestamp for information this node originates about `key`: the
    /// global clock, bumped to stay strictly increasing per key.
    Ms stamp_own(const PathletKey& key, Ms now) const;
    void record_positive(const PathletKey& key, const LabelStack& scope, Ms t, NodeOutput& out);
    void record_negative(const PathletKey& key, const LabelStack& scope, Ms t, Ms now,
                         NodeOutput& out);

    std::optional<PathletKey> own_atomic_to(const VertexId& peer) const;
    Fid fresh_fid() { return next_fid_++; }
    void schedule_forwarding_clear(Fid f, Ms now, NodeOutput& out);
    bool property4_ok(const Pathlet& p) const;

    VertexId id_;
    LabelStack stack_;
    DestSet own_dests_;
    NodeConfig cfg_;

    std::set<VertexId> live_links_;
    std::map<VertexId, double> link_weight_;
    std::map<VertexId, LabelStack> neighbor_stacks_; // S_u(v); () marks a dead neighbor
    std::map<VertexId, DestSet> neighbor_dests_;     // D_u(v)
    std::map<VertexId, Ms> last_heard_;

    std::map<PathletKey, KnownPathlet> known_;                // Pi_u
    std::map<LabelStack, std::map<Fid, Pathlet>> crossing_;   // C_u(sigma)
    std::map<LabelStack, std::map<Fid, Pathlet>> final_;      // F_u(sigma)
    std::map<LabelStack, std::set<VertexId>> borders_;        // B_u(sigma)
    std::map<PathletKey, HistoryEntry> history_;              // H_u
    std::map<std::pair<VertexId, LabelStack>, std::pair<Ms, Ms>> withdraw_seen_; // t, purge_at

    std::map<Fid, std::vector<Fid>> fids_; // forwarding state, own fids only
    std::map<Fid, VertexId> nh_;
    std::map<Fid, Ms> pending_clear_;

    // recomposition skip cache: last seen (pool slice digest, border flag)
    std::map<LabelStack, std::pair<std::uint64_t, bool>> area_state_;

    Fid next_fid_ = 0;
};

} // namespace pathlet
