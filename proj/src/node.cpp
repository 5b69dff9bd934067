#include "pathlet/node.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

#include "pathlet/chains.hpp"

namespace pathlet {

Node::Node(VertexId id, LabelStack stack, DestSet dests, NodeConfig cfg, Fid first_fid)
    : id_(std::move(id)), stack_(std::move(stack)), own_dests_(std::move(dests)),
      cfg_(std::move(cfg)), next_fid_(first_fid) {}

void Node::link_up(const VertexId& peer, double weight) {
    live_links_.insert(peer);
    link_weight_[peer] = weight;
}

void Node::link_down(const VertexId& peer) { live_links_.erase(peer); }

void Node::send(NodeOutput& out, const VertexId& to, Message m, bool periodic) const {
    if (m.kind != MsgKind::Hello) m.source = id_;
    out.sends.push_back({to, std::move(m), periodic});
}

Ms Node::stamp_own(const PathletKey& key, Ms now) const {
    auto it = history_.find(key);
    if (it != history_.end() && it->second.t >= now) return it->second.t + 1;
    return now;
}

void Node::record_positive(const PathletKey& key, const LabelStack& scope, Ms t,
                           NodeOutput& out) {
    history_[key] = HistoryEntry{scope, t, true, std::nullopt};
    out.changed = true;
}

void Node::record_negative(const PathletKey& key, const LabelStack& scope, Ms t, Ms now,
                           NodeOutput& out) {
    history_[key] = HistoryEntry{scope, t, false, now + cfg_.history_timeout};
    out.timers.push_back({TimerKind::HistoryPurge, cfg_.history_timeout, key, {}, {}, 0});
    out.changed = true;
}

std::optional<PathletKey> Node::own_atomic_to(const VertexId& peer) const {
    for (const auto& [key, kp] : known_)
        if (kp.p.start == id_ && kp.p.end == peer && kp.p.scope.ends_with_bottom())
            return key;
    return std::nullopt;
}

std::optional<Pathlet> Node::find_own_pathlet(Fid f) const {
    auto it = known_.find({id_, f});
    if (it != known_.end()) return it->second.p;
    for (const auto& [_, byfid] : crossing_) {
        auto jt = byfid.find(f);
        if (jt != byfid.end()) return jt->second;
    }
    for (const auto& [_, byfid] : final_) {
        auto jt = byfid.find(f);
        if (jt != byfid.end()) return jt->second;
    }
    return std::nullopt;
}

std::optional<std::vector<Fid>> Node::fids_of(Fid f) const {
    auto it = fids_.find(f);
    if (it == fids_.end()) return std::nullopt;
    return it->second;
}

std::optional<VertexId> Node::nh_of(Fid f) const {
    auto it = nh_.find(f);
    if (it == nh_.end()) return std::nullopt;
    return it->second;
}

std::vector<Pathlet> Node::pool() const {
    std::vector<Pathlet> v;
    v.reserve(known_.size());
    for (const auto& [_, kp] : known_) v.push_back(kp.p);
    return v;
}

std::vector<Pathlet> Node::pool_with_composed() const {
    std::vector<Pathlet> v = pool();
    for (const auto& [_, byfid] : crossing_)
        for (const auto& [_, p] : byfid) v.push_back(p);
    for (const auto& [_, byfid] : final_)
        for (const auto& [_, p] : byfid) v.push_back(p);
    return v;
}

std::size_t Node::stored_pathlets() const {
    std::size_t n = known_.size();
    for (const auto& [_, byfid] : crossing_) n += byfid.size();
    for (const auto& [_, byfid] : final_) n += byfid.size();
    return n;
}

bool Node::property4_ok(const Pathlet& p) const {
    return extends(p.scope.parent(), stack_);
}

// ---------------------------------------------------------------------------
// Propagation conditions
// ---------------------------------------------------------------------------

std::vector<VertexId> Node::propagation_targets(const LabelStack& sender_stack,
                                                const LabelStack& scope,
                                                const std::optional<VertexId>& origin,
                                                const std::optional<VertexId>& end,
                                                const std::optional<VertexId>& exclude,
                                                bool apply_filters) const {
    std::vector<VertexId> out;
    if (scope.empty()) return out;
    LabelStack sigma_bar = scope.parent();
    for (const auto& [n, sn] : neighbor_stacks_) {
        if (sn.empty()) continue; // dead or unknown neighbor
        if (exclude && n == *exclude) continue;
        bool admitted = false;
        if (origin && n == *origin) {
            admitted = true; // the origin may always be told, so it can purge zombies
        } else {
            LabelStack j = join(sender_stack, sn);
            bool c1 = strictly_extends(j, sigma_bar);
            bool c2 = extends(scope, j);
            bool c3 = scope == project(sn, sender_stack);
            bool c4 = end && n == *end;
            admitted = !(c1 || c2 || c3 || c4);
        }
        if (!admitted) continue;
        if (apply_filters && origin && end &&
            cfg_.policy.filtered(n, *origin, *end, scope))
            continue;
        out.push_back(n);
    }
    return out;
}

bool Node::is_border_vertex(const LabelStack& area) const {
    if (area.empty()) return false;
    if (!in_area(stack_, area)) return false;
    for (const auto& [n, sn] : neighbor_stacks_) {
        if (sn.empty()) continue;
        if (!in_area(sn, area)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Border discovery
// ---------------------------------------------------------------------------

std::vector<VertexId> Node::discover_border_vertices(const LabelStack& area,
                                                     const std::vector<Pathlet>& pool) const {
    // Witness pairs per the discovery lemma: pi1 scoped exactly over `area`
    // (one label deeper, any last label), pi2 an atomic reaching shallower.
    std::vector<const Pathlet*> deep, shallow;
    for (const auto& p : pool) {
        if (p.scope.size() < 2) continue;
        if (p.scope.parent() == area) deep.push_back(&p);
        if (p.scope.ends_with_bottom() && strictly_extends(p.scope.parent(), area))
            shallow.push_back(&p);
    }
    std::set<VertexId> found;
    for (const Pathlet* p1 : deep) {
        for (const Pathlet* p2 : shallow) {
            if (p1->start == p2->start && p1->end == p2->end) continue;
            std::set<VertexId> e1{p1->start, p1->end};
            std::set<VertexId> common;
            if (e1.count(p2->start)) common.insert(p2->start);
            if (e1.count(p2->end)) common.insert(p2->end);
            if (common.size() != 1) continue;
            const VertexId& v = *common.begin();
            if (v != id_) found.insert(v);
        }
    }
    return {found.begin(), found.end()};
}

std::vector<VertexId> Node::dest_vertices(const LabelStack& area,
                                          const std::vector<Pathlet>& pool) const {
    std::set<VertexId> found;
    for (const auto& p : pool)
        if (!p.dests.empty() && p.end != id_ && extends(area, p.scope)) found.insert(p.end);
    return {found.begin(), found.end()};
}

// ---------------------------------------------------------------------------
// Known-pathlet update
// ---------------------------------------------------------------------------

void Node::schedule_forwarding_clear(Fid f, Ms now, NodeOutput& out) {
    pending_clear_[f] = now + cfg_.forwarding_grace;
    out.timers.push_back({TimerKind::ForwardingClear, cfg_.forwarding_grace, {}, {}, {}, f});
}

void Node::update_known_pathlets(const LabelStack& s_old, const LabelStack& s_new,
                                 const std::map<PathletKey, Pathlet>& pi_new, Ms now,
                                 NodeOutput& out) {
    // Reachability and compositions depend only on the known set and the
    // stacks involved; an unchanged pool with an unchanged stack leaves
    // nothing to re-derive.
    bool pool_changed = pi_new.size() != known_.size();
    if (!pool_changed) {
        for (const auto& [key, p] : pi_new) {
            auto it = known_.find(key);
            if (it == known_.end() || it->second.p != p) {
                pool_changed = true;
                break;
            }
        }
    }
    if (!pool_changed && s_old == s_new) return;
    // Withdrawals first: their stamps must precede the stamps of updated
    // instances so that a receiver seeing both keeps the new instance.
    for (const auto& [key, kp] : known_) {
        if (kp.p.start != id_) continue;
        auto it = pi_new.find(key);
        if (it != pi_new.end() && it->second == kp.p) continue;
        Ms t = stamp_own(key, now);
        record_negative(key, kp.p.scope, t, now, out);
        Message w = Message::withdrawlet(id_, id_, t, key.fid, kp.p.scope);
        if (it != pi_new.end()) {
            // Updated instance: withdraw only from neighbors the new
            // instance cannot reach.
            auto old_t = propagation_targets(s_old, kp.p.scope, std::nullopt, std::nullopt,
                                             std::nullopt, false);
            auto new_t = propagation_targets(s_new, it->second.scope, std::nullopt,
                                             std::nullopt, std::nullopt, false);
            std::set<VertexId> keep(new_t.begin(), new_t.end());
            for (const auto& n : old_t)
                if (!keep.count(n)) send(out, n, w);
        } else {
            for (const auto& n : propagation_targets(s_old, kp.p.scope, std::nullopt,
                                                     std::nullopt, std::nullopt, false))
                send(out, n, w);
            schedule_forwarding_clear(key.fid, now, out);
        }
        out.changed = true;
    }

    // Announcements of new or updated own pathlets.
    for (const auto& [key, p] : pi_new) {
        if (p.start != id_) continue;
        auto it = known_.find(key);
        if (it != known_.end() && it->second.p == p) continue;
        fids_[key.fid] = {};
        nh_[key.fid] = p.end;
        pending_clear_.erase(key.fid);
        Ms t = stamp_own(key, now);
        record_positive(key, p.scope, t, out);
        Message m = Message::pathlet_msg(id_, id_, t, p);
        for (const auto& n :
             propagation_targets(s_new, p.scope, p.start, p.end, std::nullopt, true))
            send(out, n, m);
        out.changed = true;
    }

    // Install the new set, preserving expiry deadlines of surviving entries.
    std::map<PathletKey, KnownPathlet> next;
    for (const auto& [key, p] : pi_new) {
        auto it = known_.find(key);
        std::optional<Ms> expiry;
        if (it != known_.end() && it->second.p == p) expiry = it->second.expiry;
        next.emplace(key, KnownPathlet{p, expiry});
    }
    if (next.size() != known_.size()) out.changed = true;
    known_ = std::move(next);

    // Re-derive expiry timers. A remote pathlet stays alive only while a
    // withdrawal about it could still arrive: there must be a cycle-free
    // concatenation toward its start vertex whose components can relay
    // messages with the pathlet's scope, meaning each component lives
    // under the pathlet's parent area but not inside the pathlet's own
    // area. Anything else can never be refreshed or withdrawn here and is
    // scheduled for automatic deletion.
    std::vector<Pathlet> pl = pool();
    std::map<LabelStack, std::vector<Pathlet>> relay_pools;
    auto relay_pool = [&](const LabelStack& scope) -> const std::vector<Pathlet>& {
        auto it = relay_pools.find(scope);
        if (it != relay_pools.end()) return it->second;
        LabelStack sigma_bar = scope.parent();
        std::vector<Pathlet> filtered;
        for (const auto& c : pl) {
            LabelStack rs = c.scope.ends_with_bottom() ? c.scope.parent() : c.scope;
            if (!extends(sigma_bar, rs) || extends(scope, rs)) continue;
            if (c.start == id_) {
                // First hop: this node must itself still be an admissible
                // receiver of the scope from that neighbor (condition 3).
                auto sn = neighbor_stacks_.find(c.end);
                if (sn == neighbor_stacks_.end() || sn->second.empty()) continue;
                if (scope == project(stack_, sn->second)) continue;
            }
            filtered.push_back(c);
        }
        return relay_pools.emplace(scope, std::move(filtered)).first->second;
    };
    std::map<std::pair<LabelStack, VertexId>, std::set<VertexId>> reach_cache;
    auto reach = [&](const LabelStack& scope, const VertexId& avoid) -> const std::set<VertexId>& {
        auto key = std::make_pair(scope, avoid);
        auto it = reach_cache.find(key);
        if (it != reach_cache.end()) return it->second;
        return reach_cache.emplace(key, reachable_set(relay_pool(scope), id_, avoid))
            .first->second;
    };
    for (auto& [key, kp] : known_) {
        bool usable =
            kp.p.start == id_ || reach(kp.p.scope, kp.p.end).count(kp.p.start) > 0;
        if (usable) {
            if (kp.expiry) out.changed = true;
            kp.expiry = std::nullopt;
        } else if (!kp.expiry) {
            kp.expiry = now + cfg_.pathlet_timeout;
            out.timers.push_back({TimerKind::PathletExpiry, cfg_.pathlet_timeout, key, {}, {}, 0});
            out.changed = true;
        }
    }

    update_composed_pathlets(s_old, s_new, now, out);
}

// ---------------------------------------------------------------------------
// Crossing/final refresh
// ---------------------------------------------------------------------------

void Node::update_composed_pathlets(const LabelStack& s_old, const LabelStack& s_new, Ms now,
                                    NodeOutput& out) {
    // Only neighbors outside A_S(u) consume summaries: each such neighbor n
    // sees this vertex as a member of A_{S(u) >-> S(n)}.
    std::set<LabelStack> areas;
    for (const auto& [n, sn] : neighbor_stacks_) {
        if (sn.empty() || in_area(sn, stack_)) continue;
        LabelStack a = project(stack_, sn);
        if (!a.empty()) areas.insert(a);
    }
    for (const auto& [a, byfid] : crossing_)
        if (!byfid.empty()) areas.insert(a);
    for (const auto& [a, byfid] : final_)
        if (!byfid.empty()) areas.insert(a);

    std::vector<Pathlet> pl = pool();

    // Per-pathlet digests let unchanged areas be skipped: everything the
    // refresh below derives for an area is a function of the pathlets it
    // can see plus the border flag.
    std::vector<std::uint64_t> digest(pl.size());
    for (std::size_t i = 0; i < pl.size(); ++i) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto fold = [&h](const std::string& s) {
            for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
        };
        fold(pl[i].text());
        std::uint64_t w;
        static_assert(sizeof(w) == sizeof(double));
        std::memcpy(&w, &pl[i].weight, sizeof(w));
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        digest[i] = h;
    }
    std::set<LabelStack> stale_areas;
    for (const auto& [a, st] : area_state_)
        if (!areas.count(a)) stale_areas.insert(a);
    for (const auto& a : stale_areas) area_state_.erase(a);

    for (const LabelStack& area : areas) {
        bool border = is_border_vertex(area);
        std::uint64_t sig = border ? 0x9e3779b97f4a7c15ULL : 0x2545f4914f6cdd1dULL;
        for (std::size_t i = 0; i < pl.size(); ++i) {
            bool in_slice =
                extends(area, pl[i].scope) ||
                (pl[i].scope.ends_with_bottom() &&
                 strictly_extends(pl[i].scope.parent(), area));
            if (in_slice) sig = sig * 0x100000001b3ULL + digest[i];
        }
        auto cached = area_state_.find(area);
        if (cached != area_state_.end() && cached->second.first == sig &&
            cached->second.second == border)
            continue;
        area_state_[area] = {sig, border};

        for (int pass = 0; pass < 2; ++pass) {
            bool final_kind = pass == 1;
            auto& table = final_kind ? final_ : crossing_;
            std::map<Fid, Pathlet> cur =
                table.count(area) ? table.at(area) : std::map<Fid, Pathlet>{};

            std::vector<Candidate> cands;
            std::set<VertexId> ends;
            if (border) {
                std::vector<VertexId> targets = final_kind
                                                    ? dest_vertices(area, pl)
                                                    : discover_border_vertices(area, pl);
                if (!final_kind) {
                    std::set<VertexId> bset(targets.begin(), targets.end());
                    if (borders_[area] != bset) {
                        borders_[area] = bset;
                        out.changed = true;
                    }
                }
                ends.insert(targets.begin(), targets.end());
                cands = select_compositions(pl, id_, targets, area, cfg_.policy, final_kind);
            } else if (!final_kind) {
                if (borders_.erase(area)) out.changed = true;
            }

            // A stored pathlet survives when its recorded chain is still one
            // of the rule-selected compositions toward a valid end vertex.
            std::vector<bool> consumed(cands.size(), false);
            std::map<Fid, Pathlet> survivors;
            std::vector<Pathlet> dropped;
            for (const auto& [f, p] : cur) {
                bool ok = false;
                if (ends.count(p.end)) {
                    for (std::size_t i = 0; i < cands.size(); ++i) {
                        if (consumed[i]) continue;
                        const Candidate& c = cands[i];
                        if (c.end != p.end) continue;
                        auto ff = fids_.find(f);
                        auto nn = nh_.find(f);
                        if (ff == fids_.end() || nn == nh_.end()) continue;
                        if (ff->second != c.fids || nn->second != c.nh) continue;
                        if (final_kind && c.dests != p.dests) continue;
                        consumed[i] = true;
                        ok = true;
                        break;
                    }
                }
                if (ok)
                    survivors.emplace(f, p);
                else
                    dropped.push_back(p);
            }

            // Transparent replacement: rebind the old fid onto an equivalent
            // fresh chain, no messages. For final pathlets a chain to the
            // same end with changed destinations keeps the fid too but must
            // be re-announced.
            std::vector<Pathlet> gone;
            std::vector<Pathlet> refreshed;
            for (auto& p : dropped) {
                int exact = -1, dest_change = -1;
                for (std::size_t i = 0; i < cands.size(); ++i) {
                    if (consumed[i] || cands[i].end != p.end) continue;
                    if (!final_kind || cands[i].dests == p.dests) {
                        exact = static_cast<int>(i);
                        break;
                    }
                    if (dest_change < 0) dest_change = static_cast<int>(i);
                }
                int pick = exact >= 0 ? exact : dest_change;
                if (pick < 0) {
                    gone.push_back(p);
                    continue;
                }
                const Candidate& c = cands[static_cast<std::size_t>(pick)];
                consumed[static_cast<std::size_t>(pick)] = true;
                fids_[p.fid] = c.fids;
                nh_[p.fid] = c.nh;
                out.changed = true;
                if (exact < 0) {
                    p.dests = c.dests;
                    p.weight = c.weight;
                    refreshed.push_back(p);
                }
                survivors.emplace(p.fid, p);
            }

            // Withdraw what could not be replaced; one Withdraw covers the
            // case where every pathlet for the area disappeared at once.
            if (!cur.empty() && gone.size() == cur.size()) {
                Ms t = now;
                for (const auto& p : gone) {
                    Ms s = stamp_own(p.key(), now);
                    if (s > t) t = s;
                }
                for (const auto& p : gone) {
                    record_negative(p.key(), p.scope, t, now, out);
                    schedule_forwarding_clear(p.fid, now, out);
                }
                withdraw_seen_[{id_, area}] = {t, now + cfg_.history_timeout};
                out.timers.push_back({TimerKind::WithdrawPurge, cfg_.history_timeout, {}, id_,
                                      area, 0});
                Message w = Message::withdraw(id_, id_, t, area);
                for (const auto& n : propagation_targets(s_old, area, std::nullopt,
                                                         std::nullopt, std::nullopt, false))
                    send(out, n, w);
            } else {
                for (const auto& p : gone) {
                    Ms t = stamp_own(p.key(), now);
                    record_negative(p.key(), p.scope, t, now, out);
                    schedule_forwarding_clear(p.fid, now, out);
                    Message w = Message::withdrawlet(id_, id_, t, p.fid, p.scope);
                    for (const auto& n : propagation_targets(s_old, p.scope, std::nullopt,
                                                             std::nullopt, std::nullopt, false))
                        send(out, n, w);
                }
            }

            // Announce refreshed and newly composed pathlets.
            for (const auto& p : refreshed) {
                Ms t = stamp_own(p.key(), now);
                record_positive(p.key(), p.scope, t, out);
                Message m = Message::pathlet_msg(id_, id_, t, p);
                for (const auto& n :
                     propagation_targets(s_new, p.scope, p.start, p.end, std::nullopt, true))
                    send(out, n, m);
            }
            for (std::size_t i = 0; i < cands.size(); ++i) {
                if (consumed[i]) continue;
                const Candidate& c = cands[i];
                Pathlet p;
                p.fid = fresh_fid();
                p.start = id_;
                p.end = c.end;
                p.scope = area;
                p.dests = c.dests;
                p.weight = c.weight;
                fids_[p.fid] = c.fids;
                nh_[p.fid] = c.nh;
                Ms t = stamp_own(p.key(), now);
                record_positive(p.key(), p.scope, t, out);
                Message m = Message::pathlet_msg(id_, id_, t, p);
                for (const auto& n :
                     propagation_targets(s_new, p.scope, p.start, p.end, std::nullopt, true))
                    send(out, n, m);
                Fid pf = p.fid;
                survivors.emplace(pf, std::move(p));
                out.changed = true;
            }

            if (!gone.empty()) out.changed = true;
            if (survivors.empty())
                table.erase(area);
            else
                table[area] = std::move(survivors);
        }
    }
}

// ---------------------------------------------------------------------------
// Activation, hello and neighbor death
// ---------------------------------------------------------------------------

void Node::on_activate(Ms now, NodeOutput& out) {
    Message m = Message::hello(id_, stack_, own_dests_, true);
    for (const auto& n : live_links_) send(out, n, m);
    out.timers.push_back({TimerKind::HelloPeriod, cfg_.hello_interval, {}, {}, {}, 0});
    if (!live_links_.empty()) out.changed = true;
}

void Node::on_message(const Message& m, Ms now, NodeOutput& out) {
    switch (m.kind) {
    case MsgKind::Hello: return handle_hello(m, now, out);
    case MsgKind::Pathlet: return handle_pathlet(m, now, out);
    case MsgKind::Withdrawlet: return handle_withdrawlet(m, now, out);
    case MsgKind::Withdraw: return handle_withdraw(m, now, out);
    }
}

void Node::handle_hello(const Message& m, Ms now, NodeOutput& out) {
    const VertexId& o = m.origin;
    if (!link_weight_.count(o)) {
        out.diags.push_back("drop Hello from non-adjacent " + o);
        return;
    }

    auto prev_s_it = neighbor_stacks_.find(o);
    std::optional<LabelStack> prev_s;
    if (prev_s_it != neighbor_stacks_.end()) prev_s = prev_s_it->second;

    if (m.s.empty()) {
        // Neighbor death (or link removal): the stack becomes ().
        if (prev_s && prev_s->empty()) return; // already known dead
        neighbor_stacks_[o] = {};
        neighbor_dests_[o] = {};
        out.changed = true;
        std::map<PathletKey, Pathlet> pi_new;
        for (const auto& [key, kp] : known_) pi_new.emplace(key, kp.p);
        if (auto key = own_atomic_to(o)) pi_new.erase(*key);
        update_known_pathlets(stack_, stack_, pi_new, now, out);
        return;
    }

    // No-op greeting: unchanged join and destinations touch nothing.
    if (!m.a && prev_s && !prev_s->empty() && join(stack_, *prev_s) == join(stack_, m.s) &&
        neighbor_dests_[o] == m.d) {
        if (auto key = own_atomic_to(o)) {
            const Pathlet& atom = known_.at(*key).p;
            if (atom.dests == m.d && atom.scope == concat(join(stack_, m.s), {kBottom})) {
                if (neighbor_stacks_[o] != m.s) {
                    neighbor_stacks_[o] = m.s;
                    out.changed = true;
                }
                return;
            }
        }
    }

    if (neighbor_stacks_[o] != m.s || neighbor_dests_[o] != m.d) out.changed = true;
    neighbor_stacks_[o] = m.s;
    neighbor_dests_[o] = m.d;

    // A rebooted neighbor, one heard over a just-appeared link, and one
    // whose join with us deepened (it moved into our branch, widening what
    // it may see) all get a full dump, with the original origins and
    // timestamps preserved from the history.
    bool new_contact = !prev_s || prev_s->empty();
    bool deepened =
        !new_contact && strictly_extends(join(stack_, *prev_s), join(stack_, m.s));
    if (m.a || new_contact || deepened) {
        for (const auto& p : pool_with_composed()) {
            auto targets =
                propagation_targets(stack_, p.scope, p.start, p.end, std::nullopt, true);
            if (std::find(targets.begin(), targets.end(), o) == targets.end()) continue;
            auto h = history_.find(p.key());
            if (h == history_.end()) continue; // stored pathlets always have an entry
            send(out, o, Message::pathlet_msg(p.start, id_, h->second.t, p));
        }
        for (const auto& [key, h] : history_) {
            if (h.positive) continue;
            auto targets = propagation_targets(stack_, h.scope, key.start, std::nullopt,
                                               std::nullopt, false);
            if (std::find(targets.begin(), targets.end(), o) == targets.end()) continue;
            send(out, o, Message::withdrawlet(key.start, id_, h.t, key.fid, h.scope));
        }
    }

    // Refresh the atomic pathlet toward the neighbor. A narrowed scope
    // becomes a new pathlet identity: the withdrawal of the old instance
    // must flood its whole former region, which a same-key update would
    // suppress wherever the fresher announcement arrives first.
    std::map<PathletKey, Pathlet> pi_new;
    for (const auto& [key, kp] : known_) pi_new.emplace(key, kp.p);

    LabelStack scope_new = concat(join(stack_, m.s), {kBottom});
    Pathlet atom;
    if (auto key = own_atomic_to(o)) {
        atom = known_.at(*key).p;
        if (strictly_extends(atom.scope.parent(), scope_new.parent())) {
            pi_new.erase(*key);
            atom.fid = fresh_fid();
        }
    } else {
        atom.fid = fresh_fid();
        atom.start = id_;
        atom.end = o;
    }
    atom.scope = scope_new;
    atom.dests = m.d;
    atom.weight = link_weight_.at(o);
    pi_new[atom.key()] = atom;

    // Destination change on the neighbor: remote pathlets ending there are
    // refreshed in place and re-announced with a fresh timestamp.
    for (auto& [key, p] : pi_new) {
        if (p.end != o || p.start == id_ || p.dests == m.d) continue;
        p.dests = m.d;
        Ms t = now;
        auto h = history_.find(key);
        if (h != history_.end() && h->second.t >= t) t = h->second.t + 1;
        record_positive(key, p.scope, t, out);
        Message upd = Message::pathlet_msg(p.start, id_, t, p);
        for (const auto& n :
             propagation_targets(stack_, p.scope, p.start, p.end, std::nullopt, true))
            send(out, n, upd);
    }

    update_known_pathlets(stack_, stack_, pi_new, now, out);
}

// ---------------------------------------------------------------------------
// Pathlet message
// ---------------------------------------------------------------------------

void Node::handle_pathlet(const Message& m, Ms now, NodeOutput& out) {
    const Pathlet& pm = m.p;
    if (validate(pm) != PathletError::None) {
        out.diags.push_back("drop invalid pathlet " + pm.text() + ": " +
                            to_string(validate(pm)));
        return;
    }

    if (pm.start == id_) {
        // We are the originator: our own knowledge is always fresher.
        auto own = find_own_pathlet(pm.fid);
        if (!own) {
            Ms t = stamp_own(pm.key(), now);
            record_negative(pm.key(), pm.scope, t, now, out);
            send(out, m.source, Message::withdrawlet(id_, id_, t, pm.fid, pm.scope));
        } else if (*own != pm) {
            Ms t = stamp_own(pm.key(), now);
            record_positive(pm.key(), own->scope, t, out);
            send(out, m.source, Message::pathlet_msg(id_, id_, t, *own));
        }
        return;
    }

    if (!property4_ok(pm)) {
        out.diags.push_back("drop out-of-scope pathlet " + pm.text() + " at " + id_);
        return;
    }

    bool fresh = false;
    auto h = history_.find(pm.key());
    if (h == history_.end()) {
        fresh = true;
    } else if (h->second.t < m.t) {
        fresh = true;
    } else if (h->second.t == m.t) {
        if (!h->second.positive) {
            fresh = true; // positive information wins a stamp tie
        } else {
            auto it = known_.find(pm.key());
            if (it == known_.end()) return;
            if (it->second.p == pm) return; // plain duplicate
            // Conflicting content at an equal stamp: the greater rendering
            // wins on both sides, so the exchange terminates.
            if (pm.text() > it->second.p.text()) {
                fresh = true;
            } else {
                send(out, m.source,
                     Message::pathlet_msg(pm.start, id_, h->second.t, it->second.p));
                return;
            }
        }
    } else {
        // Strictly stale: reply with the newer information we hold.
        if (h->second.positive) {
            auto it = known_.find(pm.key());
            if (it != known_.end())
                send(out, m.source,
                     Message::pathlet_msg(pm.start, id_, h->second.t, it->second.p));
        } else {
            send(out, m.source, Message::withdrawlet(pm.start, id_, h->second.t, pm.fid,
                                                     h->second.scope));
        }
        return;
    }

    record_positive(pm.key(), pm.scope, m.t, out);
    Message fwd = m;
    for (const auto& n :
         propagation_targets(stack_, pm.scope, pm.start, pm.end, m.source, true))
        send(out, n, fwd);

    std::map<PathletKey, Pathlet> pi_new;
    for (const auto& [key, kp] : known_) pi_new.emplace(key, kp.p);
    pi_new[pm.key()] = pm;
    update_known_pathlets(stack_, stack_, pi_new, now, out);
}

// ---------------------------------------------------------------------------
// Withdrawlet / Withdraw
// ---------------------------------------------------------------------------

void Node::handle_withdrawlet(const Message& m, Ms now, NodeOutput& out) {
    PathletKey key{m.origin, m.f};
    bool fresh = false;
    auto h = history_.find(key);
    if (h == history_.end()) {
        // Nothing known about this pathlet; remember the withdrawal and
        // still forward it.
        record_negative(key, m.s, m.t, now, out);
        Message fwd = m;
        for (const auto& n : propagation_targets(stack_, m.s, m.origin, std::nullopt,
                                                 m.source, false))
            send(out, n, fwd);
        return;
    }
    if (h->second.t < m.t) {
        fresh = true;
    } else if (h->second.t == m.t) {
        if (!h->second.positive) return; // duplicate withdrawal
        // Positive information wins the tie: answer with the live pathlet.
        auto it = known_.find(key);
        std::optional<Pathlet> p =
            it != known_.end() ? std::optional<Pathlet>(it->second.p) : find_own_pathlet(m.f);
        if (p) send(out, m.source, Message::pathlet_msg(key.start, id_, h->second.t, *p));
        return;
    } else {
        if (h->second.positive) {
            auto it = known_.find(key);
            std::optional<Pathlet> p = it != known_.end() ? std::optional<Pathlet>(it->second.p)
                                                          : find_own_pathlet(m.f);
            if (p) send(out, m.source, Message::pathlet_msg(key.start, id_, h->second.t, *p));
        } else {
            send(out, m.source, Message::withdrawlet(key.start, id_, h->second.t, m.f,
                                                     h->second.scope));
        }
        return;
    }

    record_negative(key, m.s, m.t, now, out);
    Message fwd = m;
    for (const auto& n :
         propagation_targets(stack_, m.s, m.origin, std::nullopt, m.source, false))
        send(out, n, fwd);

    if (known_.count(key)) {
        std::map<PathletKey, Pathlet> pi_new;
        for (const auto& [k, kp] : known_)
            if (k != key) pi_new.emplace(k, kp.p);
        update_known_pathlets(stack_, stack_, pi_new, now, out);
    }
}

void Node::handle_withdraw(const Message& m, Ms now, NodeOutput& out) {
    auto seen = withdraw_seen_.find({m.origin, m.s});
    if (seen != withdraw_seen_.end() && seen->second.first >= m.t) return;

    std::vector<Pathlet> matching;
    for (const auto& [key, kp] : known_)
        if (kp.p.start == m.origin && kp.p.scope == m.s) matching.push_back(kp.p);

    bool all_fresh = true;
    for (const auto& p : matching) {
        auto h = history_.find(p.key());
        if (h != history_.end() && h->second.t >= m.t) all_fresh = false;
    }

    withdraw_seen_[{m.origin, m.s}] = {m.t, now + cfg_.history_timeout};
    out.timers.push_back({TimerKind::WithdrawPurge, cfg_.history_timeout, {}, m.origin, m.s, 0});
    out.changed = true;

    if (all_fresh) {
        for (const auto& p : matching) record_negative(p.key(), p.scope, m.t, now, out);
        Message fwd = m;
        for (const auto& n :
             propagation_targets(stack_, m.s, m.origin, std::nullopt, m.source, false))
            send(out, n, fwd);
        if (!matching.empty()) {
            std::map<PathletKey, Pathlet> pi_new;
            std::set<PathletKey> drop;
            for (const auto& p : matching) drop.insert(p.key());
            for (const auto& [k, kp] : known_)
                if (!drop.count(k)) pi_new.emplace(k, kp.p);
            update_known_pathlets(stack_, stack_, pi_new, now, out);
        }
        return;
    }

    // Mixed freshness: fall back to per-pathlet withdrawlet handling.
    for (const auto& p : matching) {
        Message single = Message::withdrawlet(m.origin, m.source, m.t, p.fid, m.s);
        handle_withdrawlet(single, now, out);
    }
}

// ---------------------------------------------------------------------------
// Stack and destination changes
// ---------------------------------------------------------------------------

void Node::on_stack_change(const LabelStack& s_new, Ms now, NodeOutput& out) {
    LabelStack s_old = stack_;
    Message hello = Message::hello(id_, s_new, own_dests_, false);
    for (const auto& n : live_links_) send(out, n, hello);
    if (s_new == s_old) return;

    stack_ = s_new;
    out.changed = true;

    std::map<PathletKey, Pathlet> pi_new;
    for (const auto& [key, kp] : known_) pi_new.emplace(key, kp.p);

    for (const auto& [n, sn] : neighbor_stacks_) {
        if (sn.empty()) continue;
        LabelStack j_old = join(s_old, sn);
        LabelStack j_new = join(s_new, sn);
        if (j_old == j_new) continue;
        if (auto key = own_atomic_to(n)) {
            Pathlet p = pi_new.at(*key);
            if (strictly_extends(j_old, j_new)) { // narrowed: new identity
                pi_new.erase(*key);
                p.fid = fresh_fid();
            }
            p.scope = concat(j_new, {kBottom});
            pi_new[p.key()] = p;
        }
    }

    // Remote pathlets whose scope no longer fits the new stack are out of
    // this node's visibility and are dropped without messages.
    for (auto it = pi_new.begin(); it != pi_new.end();) {
        if (it->second.start != id_ && !extends(it->second.scope.parent(), s_new)) {
            history_.erase(it->first);
            it = pi_new.erase(it);
            out.changed = true;
        } else {
            ++it;
        }
    }

    update_known_pathlets(s_old, s_new, pi_new, now, out);
}

void Node::on_destination_change(const DestSet& dests, Ms now, NodeOutput& out) {
    if (dests != own_dests_) out.changed = true;
    own_dests_ = dests;
    Message hello = Message::hello(id_, stack_, own_dests_, false);
    for (const auto& n : live_links_) send(out, n, hello);
}

// ---------------------------------------------------------------------------
// Timers
// ---------------------------------------------------------------------------

void Node::on_timer(const TimerReq& t, Ms now, NodeOutput& out) {
    switch (t.kind) {
    case TimerKind::HelloPeriod: {
        Message hello = Message::hello(id_, stack_, own_dests_, false);
        for (const auto& n : live_links_) send(out, n, hello, true);
        out.timers.push_back({TimerKind::HelloPeriod, cfg_.hello_interval, {}, {}, {}, 0});
        // Declare silent neighbors dead.
        std::vector<VertexId> dead;
        for (const auto& [n, sn] : neighbor_stacks_) {
            if (sn.empty()) continue;
            auto heard = last_heard_.find(n);
            if (heard != last_heard_.end() && now - heard->second >= cfg_.dead_interval)
                dead.push_back(n);
        }
        for (const auto& n : dead) {
            out.diags.push_back("neighbor " + n + " declared dead");
            handle_hello(Message::hello(n, {}, {}, false), now, out);
        }
        break;
    }
    case TimerKind::PathletExpiry: {
        auto it = known_.find(t.key);
        if (it == known_.end() || !it->second.expiry || *it->second.expiry > now) break;
        history_.erase(t.key); // forget entirely so the pathlet can be relearned
        std::map<PathletKey, Pathlet> pi_new;
        for (const auto& [k, kp] : known_)
            if (k != t.key) pi_new.emplace(k, kp.p);
        update_known_pathlets(stack_, stack_, pi_new, now, out);
        out.changed = true;
        break;
    }
    case TimerKind::HistoryPurge: {
        auto it = history_.find(t.key);
        if (it != history_.end() && !it->second.positive && it->second.purge_at &&
            *it->second.purge_at <= now) {
            history_.erase(it);
            out.changed = true;
        }
        break;
    }
    case TimerKind::WithdrawPurge: {
        auto it = withdraw_seen_.find({t.worigin, t.wscope});
        if (it != withdraw_seen_.end() && it->second.second <= now) {
            withdraw_seen_.erase(it);
            out.changed = true;
        }
        break;
    }
    case TimerKind::ForwardingClear: {
        auto it = pending_clear_.find(t.fid);
        if (it != pending_clear_.end() && it->second <= now) {
            pending_clear_.erase(it);
            fids_.erase(t.fid);
            nh_.erase(t.fid);
            out.changed = true;
        }
        break;
    }
    }
}

} // namespace pathlet
