#include "pathlet/engine.hpp"

#include <algorithm>
#include <sstream>

#include "pathlet/rng.hpp"

namespace pathlet {

namespace {

const char* timer_name(TimerKind k) {
    switch (k) {
    case TimerKind::HelloPeriod: return "hello";
    case TimerKind::PathletExpiry: return "pathlet_expiry";
    case TimerKind::HistoryPurge: return "history_purge";
    case TimerKind::WithdrawPurge: return "withdraw_purge";
    case TimerKind::ForwardingClear: return "forwarding_clear";
    }
    return "?";
}

} // namespace

Engine::Engine(Scenario scenario, std::uint64_t seed, EngineConfig cfg)
    : scenario_(std::move(scenario)), cfg_(cfg) {
    scenario_.validate();
    quiet_window_ = cfg_.node.dead_interval + 2 * cfg_.node.hello_interval;

    Rng rng(seed);
    for (const auto& n : scenario_.nodes)
        make_node(n.id, n.stack, n.dests, n.rule, n.chain_cap);
    for (const auto& e : scenario_.edges) {
        Ms delay = e.delay ? *e.delay : static_cast<Ms>(rng.uniform(10, 50));
        links_[link_key(e.a, e.b)] = Link{delay, e.weight, true};
        nodes_.at(e.a).link_up(e.b, e.weight);
        nodes_.at(e.b).link_up(e.a, e.weight);
    }
    metrics_.nodes = scenario_.nodes.size();
    metrics_.edges = scenario_.edges.size();

    for (const auto& n : scenario_.nodes) {
        Event ev;
        ev.type = Event::Type::Activate;
        ev.node = n.id;
        schedule(std::move(ev), 0);
    }
    for (const auto& s : scenario_.script) {
        Event ev;
        ev.type = Event::Type::Script;
        ev.action = s.action;
        schedule(std::move(ev), s.at);
    }
}

void Engine::make_node(const VertexId& id, const LabelStack& stack, const DestSet& dests,
                       std::optional<CompositionRule> rule, std::optional<std::size_t> cap) {
    NodeConfig nc = cfg_.node;
    if (rule) nc.policy.rule = *rule;
    if (cap) nc.policy.chain_cap = *cap;
    nc.policy.filters.clear();
    for (const auto& f : scenario_.filters)
        if (f.owner == id) nc.policy.filters.push_back(f.filter);
    Fid base = 0;
    if (auto it = fid_base_.find(id); it != fid_base_.end()) base = it->second;
    nodes_.insert_or_assign(id, Node(id, stack, dests, nc, base));
    alive_[id] = true;
}

void Engine::schedule(Event e, Ms at) {
    e.at = at;
    e.seq = next_seq_++;
    bool significant = true;
    if (e.type == Event::Type::Deliver && e.msg.kind == MsgKind::Hello) significant = false;
    if (e.type == Event::Type::Timer && e.timer.kind == TimerKind::HelloPeriod)
        significant = false;
    if (significant) ++pending_significant_;
    queue_.push(std::move(e));
}

bool Engine::link_alive(const VertexId& a, const VertexId& b) const {
    auto it = links_.find(link_key(a, b));
    return it != links_.end() && it->second.alive;
}

Ms Engine::link_delay(const VertexId& a, const VertexId& b) const {
    auto it = links_.find(link_key(a, b));
    return it != links_.end() ? it->second.delay : 0;
}

std::vector<std::pair<VertexId, VertexId>> Engine::live_edges() const {
    std::vector<std::pair<VertexId, VertexId>> out;
    for (const auto& [k, l] : links_)
        if (l.alive) out.push_back(k);
    return out;
}

bool Engine::node_alive(const VertexId& v) const {
    auto it = alive_.find(v);
    return it != alive_.end() && it->second;
}

void Engine::consume(const VertexId& node, NodeOutput&& out) {
    bool activity = out.changed;
    for (auto& s : out.sends) {
        auto lk = links_.find(link_key(node, s.to));
        if (lk == links_.end() || !lk->second.alive) {
            if (cfg_.collect_trace)
                trace_ += "t=" + std::to_string(now_) + " drop " + s.msg.text() + " to " +
                          s.to + " (link down)\n";
            continue;
        }
        if (!s.periodic) activity = true;
        Event ev;
        ev.type = Event::Type::Deliver;
        ev.node = s.to;
        ev.from = node;
        ev.msg = std::move(s.msg);
        schedule(std::move(ev), now_ + lk->second.delay);
        ++metrics_.messages_sent[node];
        ++metrics_.deliveries_scheduled;
    }
    for (const auto& t : out.timers) {
        Event ev;
        ev.type = Event::Type::Timer;
        ev.node = node;
        ev.timer = t;
        schedule(std::move(ev), now_ + t.delay);
    }
    if (cfg_.collect_trace)
        for (const auto& d : out.diags)
            trace_ += "t=" + std::to_string(now_) + " node=" + node + " note: " + d + "\n";
    if (activity) note_activity();
}

void Engine::trace_event(const Event& e, const NodeOutput& out) {
    if (!cfg_.collect_trace) return;
    std::ostringstream line;
    line << "t=" << now_ << ' ';
    switch (e.type) {
    case Event::Type::Activate: line << "node=" << e.node << " activate"; break;
    case Event::Type::Deliver:
        line << "node=" << e.node << " recv " << e.msg.text() << " from " << e.from;
        break;
    case Event::Type::Timer:
        line << "node=" << e.node << " timer " << timer_name(e.timer.kind);
        break;
    case Event::Type::Script: line << "script " << action_text(e.action); break;
    }
    line << " → sends=[";
    for (std::size_t i = 0; i < out.sends.size(); ++i) {
        if (i) line << ", ";
        line << out.sends[i].to << ':' << out.sends[i].msg.text();
    }
    line << "]\n";
    trace_ += line.str();
}

void Engine::dispatch(const Event& e) {
    NodeOutput out;
    switch (e.type) {
    case Event::Type::Activate: {
        auto it = nodes_.find(e.node);
        if (it == nodes_.end() || !node_alive(e.node)) break;
        it->second.on_activate(now_, out);
        note_activity();
        break;
    }
    case Event::Type::Deliver: {
        auto it = nodes_.find(e.node);
        if (it == nodes_.end() || !node_alive(e.node)) {
            if (cfg_.collect_trace)
                trace_ += "t=" + std::to_string(now_) + " drop " + e.msg.text() + " to " +
                          e.node + " (node dead)\n";
            return;
        }
        if (!link_alive(e.from, e.node)) {
            if (cfg_.collect_trace)
                trace_ += "t=" + std::to_string(now_) + " drop " + e.msg.text() + " to " +
                          e.node + " (link down)\n";
            return;
        }
        it->second.note_heard(e.from, now_);
        it->second.on_message(e.msg, now_, out);
        break;
    }
    case Event::Type::Timer: {
        auto it = nodes_.find(e.node);
        if (it == nodes_.end() || !node_alive(e.node)) break;
        it->second.on_timer(e.timer, now_, out);
        break;
    }
    case Event::Type::Script:
        trace_event(e, out);
        apply_script(e.action);
        note_activity();
        if (cfg_.assert_invariants) check_invariants();
        return;
    }
    trace_event(e, out);
    consume(e.node, std::move(out));
    if (cfg_.assert_invariants) check_invariants();
}

void Engine::apply_script(const ScriptAction& a) {
    Rng rng(Rng::mix(static_cast<std::uint64_t>(now_), next_seq_));
    auto synth_death = [&](const VertexId& at, const VertexId& gone) {
        if (!node_alive(at)) return;
        NodeOutput out;
        nodes_.at(at).on_message(Message::hello(gone, {}, {}, false), now_, out);
        consume(at, std::move(out));
    };
    auto greet = [&](const VertexId& from, const VertexId& to) {
        if (!node_alive(from) || !node_alive(to)) return;
        const Node& n = nodes_.at(from);
        Event ev;
        ev.type = Event::Type::Deliver;
        ev.node = to;
        ev.from = from;
        ev.msg = Message::hello(from, n.stack(), n.own_dests(), true);
        schedule(std::move(ev), now_ + link_delay(from, to));
        ++metrics_.messages_sent[from];
        ++metrics_.deliveries_scheduled;
    };

    if (auto* x = std::get_if<FailLink>(&a)) {
        auto it = links_.find(link_key(x->a, x->b));
        if (it == links_.end()) return;
        it->second.alive = false;
        if (nodes_.count(x->a)) nodes_.at(x->a).link_down(x->b);
        if (nodes_.count(x->b)) nodes_.at(x->b).link_down(x->a);
        synth_death(x->a, x->b);
        synth_death(x->b, x->a);
    } else if (auto* x = std::get_if<AddLink>(&a)) {
        auto key = link_key(x->a, x->b);
        auto it = links_.find(key);
        Ms delay = x->delay ? *x->delay
                            : (it != links_.end() ? it->second.delay
                                                  : static_cast<Ms>(rng.uniform(10, 50)));
        links_[key] = Link{delay, x->weight, true};
        if (nodes_.count(x->a)) nodes_.at(x->a).link_up(x->b, x->weight);
        if (nodes_.count(x->b)) nodes_.at(x->b).link_up(x->a, x->weight);
        greet(x->a, x->b);
        greet(x->b, x->a);
    } else if (auto* x = std::get_if<FailNode>(&a)) {
        alive_[x->v] = false;
        for (auto& [k, l] : links_)
            if (k.first == x->v || k.second == x->v) l.alive = false;
    } else if (auto* x = std::get_if<AddNode>(&a)) {
        if (nodes_.count(x->v)) fid_base_[x->v] = nodes_.at(x->v).fid_counter();
        make_node(x->v, x->stack, x->dests, std::nullopt, std::nullopt);
        for (const auto& e : x->edges) {
            if (!nodes_.count(e.b)) continue;
            auto key = link_key(x->v, e.b);
            Ms delay = e.delay ? *e.delay : static_cast<Ms>(rng.uniform(10, 50));
            links_[key] = Link{delay, e.weight, true};
            nodes_.at(x->v).link_up(e.b, e.weight);
            nodes_.at(e.b).link_up(x->v, e.weight);
        }
        NodeOutput out;
        nodes_.at(x->v).on_activate(now_, out);
        consume(x->v, std::move(out));
    } else if (auto* x = std::get_if<SetStack>(&a)) {
        if (!node_alive(x->v)) return;
        NodeOutput out;
        nodes_.at(x->v).on_stack_change(x->stack, now_, out);
        consume(x->v, std::move(out));
    } else if (auto* x = std::get_if<SetDests>(&a)) {
        if (!node_alive(x->v)) return;
        NodeOutput out;
        nodes_.at(x->v).on_destination_change(x->dests, now_, out);
        consume(x->v, std::move(out));
    } else if (auto* x = std::get_if<SendProbe>(&a)) {
        ProbeReport r = probe(x->from, x->dest);
        if (cfg_.collect_trace) {
            trace_ += "t=" + std::to_string(now_) + " probe " + x->from + "->" + x->dest +
                      " routes=" + std::to_string(r.routes) +
                      " delivered=" + std::to_string(r.delivered) + "\n";
        }
    }
}

ProbeReport Engine::probe(const VertexId& from, const DestinationId& dest) {
    ProbeReport r;
    r.at = now_;
    r.from = from;
    r.dest = dest;
    auto it = nodes_.find(from);
    if (it == nodes_.end() || !node_alive(from)) {
        probes_.push_back(r);
        return r;
    }
    auto routes = enumerate_routes(it->second, dest, cfg_.route_cap);
    r.routes = routes.size();
    LinkCheck ok = [this](const VertexId& a, const VertexId& b) {
        return link_alive(a, b) && node_alive(b);
    };
    for (const auto& rc : routes) {
        auto header = build_header(it->second, rc);
        if (!header) continue;
        Packet p;
        p.header = *header;
        p.dest = dest;
        WalkResult w = walk_packet(nodes_, ok, from, std::move(p));
        if (w.delivered) ++r.delivered;
        r.headers.push_back(*header);
        r.walks.push_back(std::move(w));
    }
    probes_.push_back(r);
    return probes_.back();
}

void Engine::check_invariants() {
    for (const auto& [id, node] : nodes_) {
        if (!node_alive(id)) continue;
        for (const auto& [key, kp] : node.known()) {
            if (kp.p.start != id && !extends(kp.p.scope.parent(), node.stack()))
                violations_.push_back("t=" + std::to_string(now_) + " scope confinement: " +
                                      kp.p.text() + " stored at " + id + " with stack " +
                                      node.stack().text());
            auto h = node.history().find(key);
            if (h == node.history().end() || !h->second.positive)
                violations_.push_back("t=" + std::to_string(now_) +
                                      " stored pathlet without positive history: " +
                                      kp.p.text() + " at " + id);
        }
        // Acyclicity is claimed for live bindings; entries inside their T_f
        // grace window are withdrawn state kept only to drain in-flight
        // packets and are skipped here (walks across them stop benignly).
        for (const auto& [f, _] : node.forwarding_fids()) {
            if (node.forwarding_stale(f)) continue;
            std::string err;
            if (!expand_fid_live(nodes_, id, f, &err) &&
                err.find("cycle") != std::string::npos)
                violations_.push_back("t=" + std::to_string(now_) + " " + err);
        }
    }
}

bool Engine::run() {
    while (!queue_.empty()) {
        const Event& top = queue_.top();
        if (pending_significant_ == 0 && top.at >= last_activity_ + quiet_window_) {
            converged_ = true;
            break;
        }
        if (top.at > cfg_.horizon) {
            converged_ = false;
            break;
        }
        Event e = top;
        queue_.pop();
        bool significant = true;
        if (e.type == Event::Type::Deliver && e.msg.kind == MsgKind::Hello) significant = false;
        if (e.type == Event::Type::Timer && e.timer.kind == TimerKind::HelloPeriod)
            significant = false;
        if (significant) --pending_significant_;
        now_ = e.at;
        dispatch(e);
    }
    if (queue_.empty()) converged_ = true;

    metrics_.converged = converged_;
    metrics_.convergence_ms = last_activity_;
    std::size_t total = 0, alive_count = 0, max_p = 0;
    for (const auto& [id, node] : nodes_) {
        if (!node_alive(id)) continue;
        std::size_t s = node.stored_pathlets();
        metrics_.pathlets_stored[id] = s;
        total += s;
        max_p = std::max(max_p, s);
        ++alive_count;
    }
    metrics_.max_pathlets = max_p;
    metrics_.avg_pathlets = alive_count ? static_cast<double>(total) / alive_count : 0.0;
    std::size_t msg_total = 0, msg_max = 0;
    for (const auto& [_, c] : metrics_.messages_sent) {
        msg_total += c;
        msg_max = std::max(msg_max, c);
    }
    metrics_.max_msgs = msg_max;
    metrics_.avg_msgs = alive_count ? static_cast<double>(msg_total) / alive_count : 0.0;
    return converged_;
}

} // namespace pathlet
