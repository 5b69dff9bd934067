#pragma once

#include <map>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "pathlet/data_plane.hpp"
#include "pathlet/message.hpp"
#include "pathlet/node.hpp"
#include "pathlet/scenario.hpp"

namespace pathlet {

struct EngineConfig {
    NodeConfig node;
    Ms horizon = 300000;
    bool assert_invariants = false;
    bool collect_trace = false;
    std::size_t route_cap = 8; // probe enumeration bound
};

struct ProbeReport {
    Ms at = 0;
    VertexId from;
    DestinationId dest;
    std::size_t routes = 0;
    std::size_t delivered = 0;
    std::vector<WalkResult> walks;
    std::vector<std::vector<Fid>> headers;
};

struct Metrics {
    std::map<VertexId, std::size_t> messages_sent;
    std::map<VertexId, std::size_t> pathlets_stored;
    std::size_t deliveries_scheduled = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t max_pathlets = 0;
    double avg_pathlets = 0.0;
    std::size_t max_msgs = 0;
    double avg_msgs = 0.0;
    Ms convergence_ms = 0;
    bool converged = false;
};

/// Deterministic discrete-event simulator: delivers control messages over
/// fixed-delay FIFO links, fires timers, applies scripted changes, detects
/// quiescence and collects the metrics reported by the experiments.
class Engine {
public:
    Engine(Scenario scenario, std::uint64_t seed, EngineConfig cfg = {});

    /// Processes events until quiescence or the horizon. Returns true when
    /// the run converged.
    bool run();

    const Metrics& metrics() const { return metrics_; }
    const std::string& trace() const { return trace_; }
    const std::vector<ProbeReport>& probes() const { return probes_; }
    const std::vector<std::string>& invariant_violations() const { return violations_; }

    const NodeTable& nodes() const { return nodes_; }
    Ms now() const { return now_; }
    bool link_alive(const VertexId& a, const VertexId& b) const;
    Ms link_delay(const VertexId& a, const VertexId& b) const;
    std::vector<std::pair<VertexId, VertexId>> live_edges() const;
    bool node_alive(const VertexId& v) const;

    /// Read-only data-plane probe over current forwarding state.
    ProbeReport probe(const VertexId& from, const DestinationId& dest);

    /// Runs every engine-level invariant check once, collecting violations.
    void check_invariants();

private:
    struct Event {
        Ms at = 0;
        std::uint64_t seq = 0;
        enum class Type { Activate, Deliver, Timer, Script } type = Type::Activate;
        VertexId node;
        VertexId from;
        Message msg;
        TimerReq timer;
        ScriptAction action;
    };
    struct EventOrder {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };
    struct Link {
        Ms delay = 0;
        double weight = 0.0;
        bool alive = true;
    };

    static std::pair<VertexId, VertexId> link_key(const VertexId& a, const VertexId& b) {
        return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    }

    void schedule(Event e, Ms at);
    void dispatch(const Event& e);
    void consume(const VertexId& node, NodeOutput&& out);
    void apply_script(const ScriptAction& a);
    bool significant_pending() const;
    void note_activity() { last_activity_ = now_; }
    void trace_event(const Event& e, const NodeOutput& out);
    void make_node(const VertexId& id, const LabelStack& stack, const DestSet& dests,
                   std::optional<CompositionRule> rule, std::optional<std::size_t> cap);

    Scenario scenario_;
    EngineConfig cfg_;
    NodeTable nodes_;
    std::map<VertexId, bool> alive_;
    std::map<VertexId, Fid> fid_base_; // fid counters survive reboots
    std::map<std::pair<VertexId, VertexId>, Link> links_;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
    std::uint64_t next_seq_ = 0;
    Ms now_ = 0;
    Ms last_activity_ = 0;
    Ms quiet_window_ = 0;
    std::size_t pending_significant_ = 0;
    Metrics metrics_;
    std::string trace_;
    std::vector<ProbeReport> probes_;
    std::vector<std::string> violations_;
    bool converged_ = false;
};

} // namespace pathlet
