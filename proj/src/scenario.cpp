#include "pathlet/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pathlet {

namespace {

std::string dests_text(const DestSet& d) {
    std::string out;
    bool first = true;
    for (const auto& x : d) {
        if (!first) out += ',';
        first = false;
        out += x;
    }
    return out;
}

DestSet parse_dests(const std::string& s) {
    DestSet out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.insert(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.insert(cur);
    return out;
}

// Tokens on a line; "(0 1 3)" stays one token.
std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : line) {
        if (c == '#') break;
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if ((c == ' ' || c == '\t') && depth == 0) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& why) {
    throw std::runtime_error("scenario line " + std::to_string(line_no) + ": " + why);
}

LabelStack need_stack(const std::string& tok, std::size_t line_no) {
    auto s = LabelStack::parse(tok);
    if (!s) fail(line_no, "bad label stack '" + tok + "'");
    return *s;
}

std::optional<std::string> key_value(const std::string& tok, const std::string& key) {
    std::string pref = key + "=";
    if (tok.rfind(pref, 0) == 0) return tok.substr(pref.size());
    return std::nullopt;
}

} // namespace

std::string action_text(const ScriptAction& a) {
    std::ostringstream out;
    if (auto* x = std::get_if<FailLink>(&a)) {
        out << "fail_link " << x->a << ' ' << x->b;
    } else if (auto* x = std::get_if<AddLink>(&a)) {
        out << "add_link " << x->a << ' ' << x->b;
        if (x->delay) out << " delay=" << *x->delay;
        if (x->weight != 0.0) out << " weight=" << x->weight;
    } else if (auto* x = std::get_if<FailNode>(&a)) {
        out << "fail_node " << x->v;
    } else if (auto* x = std::get_if<AddNode>(&a)) {
        out << "add_node " << x->v << " stack=" << x->stack.text()
            << " dests=" << dests_text(x->dests) << " edges=";
        bool first = true;
        for (const auto& e : x->edges) {
            if (!first) out << ',';
            first = false;
            out << e.b;
            if (e.delay) out << ':' << *e.delay;
        }
    } else if (auto* x = std::get_if<SetStack>(&a)) {
        out << "set_stack " << x->v << ' ' << x->stack.text();
    } else if (auto* x = std::get_if<SetDests>(&a)) {
        out << "set_dests " << x->v << ' ' << dests_text(x->dests);
    } else if (auto* x = std::get_if<SendProbe>(&a)) {
        out << "send_probe " << x->from << ' ' << x->dest;
    }
    return out.str();
}

std::string Scenario::text() const {
    std::ostringstream out;
    out << "[nodes]\n";
    for (const auto& n : nodes) {
        out << n.id << " stack=" << n.stack.text();
        if (!n.dests.empty()) out << " dests=" << dests_text(n.dests);
        if (n.rule) out << " policy=" << to_string(*n.rule);
        if (n.chain_cap) out << " cap=" << *n.chain_cap;
        out << '\n';
    }
    out << "[edges]\n";
    for (const auto& e : edges) {
        out << e.a << ' ' << e.b;
        if (e.delay) out << " delay=" << *e.delay;
        if (e.weight != 0.0) out << " weight=" << e.weight;
        out << '\n';
    }
    if (!filters.empty()) {
        out << "[filters]\n";
        for (const auto& f : filters) {
            out << f.owner << ' ' << f.filter.neighbor << ' '
                << (f.filter.start ? *f.filter.start : "*") << ' '
                << (f.filter.end ? *f.filter.end : "*") << ' '
                << (f.filter.scope ? f.filter.scope->text() : "*") << '\n';
        }
    }
    if (!script.empty()) {
        out << "[script]\n";
        for (const auto& s : script) out << s.at << ' ' << action_text(s.action) << '\n';
    }
    return out.str();
}

Scenario Scenario::parse(const std::string& text) {
    Scenario sc;
    std::istringstream in(text);
    std::string line;
    enum class Section { None, Nodes, Edges, Filters, Script } section = Section::None;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0] == "[nodes]") { section = Section::Nodes; continue; }
        if (toks[0] == "[edges]") { section = Section::Edges; continue; }
        if (toks[0] == "[filters]") { section = Section::Filters; continue; }
        if (toks[0] == "[script]") { section = Section::Script; continue; }
        switch (section) {
        case Section::None:
            fail(line_no, "content before any [section]");
        case Section::Nodes: {
            ScenarioNode n;
            n.id = toks[0];
            bool have_stack = false;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                if (auto v = key_value(toks[i], "stack")) {
                    n.stack = need_stack(*v, line_no);
                    have_stack = true;
                } else if (auto v = key_value(toks[i], "dests")) {
                    n.dests = parse_dests(*v);
                } else if (auto v = key_value(toks[i], "policy")) {
                    auto r = parse_rule(*v);
                    if (!r) fail(line_no, "unknown policy '" + *v + "'");
                    n.rule = *r;
                } else if (auto v = key_value(toks[i], "cap")) {
                    n.chain_cap = static_cast<std::size_t>(std::stoul(*v));
                } else {
                    fail(line_no, "unknown node attribute '" + toks[i] + "'");
                }
            }
            if (!have_stack) fail(line_no, "node without stack=");
            sc.nodes.push_back(std::move(n));
            break;
        }
        case Section::Edges: {
            if (toks.size() < 2) fail(line_no, "edge needs two endpoints");
            ScenarioEdge e;
            e.a = toks[0];
            e.b = toks[1];
            for (std::size_t i = 2; i < toks.size(); ++i) {
                if (auto v = key_value(toks[i], "delay"))
                    e.delay = std::stoll(*v);
                else if (auto v = key_value(toks[i], "weight"))
                    e.weight = std::stod(*v);
                else
                    fail(line_no, "unknown edge attribute '" + toks[i] + "'");
            }
            sc.edges.push_back(std::move(e));
            break;
        }
        case Section::Filters: {
            if (toks.size() != 5) fail(line_no, "filter needs: owner neighbor start end scope");
            ScenarioFilter f;
            f.owner = toks[0];
            f.filter.neighbor = toks[1];
            if (toks[2] != "*") f.filter.start = toks[2];
            if (toks[3] != "*") f.filter.end = toks[3];
            if (toks[4] != "*") f.filter.scope = need_stack(toks[4], line_no);
            sc.filters.push_back(std::move(f));
            break;
        }
        case Section::Script: {
            if (toks.size() < 2) fail(line_no, "script entry needs: at action ...");
            ScriptEntry entry;
            entry.at = std::stoll(toks[0]);
            const std::string& verb = toks[1];
            auto arg = [&](std::size_t i) -> const std::string& {
                if (1 + i >= toks.size()) fail(line_no, "missing argument for " + verb);
                return toks[1 + i];
            };
            if (verb == "fail_link") {
                entry.action = FailLink{arg(1), arg(2)};
            } else if (verb == "add_link") {
                AddLink a{arg(1), arg(2), std::nullopt, 0.0};
                for (std::size_t i = 4; i < toks.size(); ++i) {
                    if (auto v = key_value(toks[i], "delay"))
                        a.delay = std::stoll(*v);
                    else if (auto v = key_value(toks[i], "weight"))
                        a.weight = std::stod(*v);
                    else
                        fail(line_no, "unknown add_link attribute '" + toks[i] + "'");
                }
                entry.action = std::move(a);
            } else if (verb == "fail_node") {
                entry.action = FailNode{arg(1)};
            } else if (verb == "add_node") {
                AddNode a;
                a.v = arg(1);
                for (std::size_t i = 3; i < toks.size(); ++i) {
                    if (auto v = key_value(toks[i], "stack")) {
                        a.stack = need_stack(*v, line_no);
                    } else if (auto v = key_value(toks[i], "dests")) {
                        a.dests = parse_dests(*v);
                    } else if (auto v = key_value(toks[i], "edges")) {
                        std::istringstream es(*v);
                        std::string part;
                        while (std::getline(es, part, ',')) {
                            if (part.empty()) continue;
                            AddLink l;
                            l.a = a.v;
                            auto colon = part.find(':');
                            if (colon == std::string::npos) {
                                l.b = part;
                            } else {
                                l.b = part.substr(0, colon);
                                l.delay = std::stoll(part.substr(colon + 1));
                            }
                            a.edges.push_back(std::move(l));
                        }
                    } else {
                        fail(line_no, "unknown add_node attribute '" + toks[i] + "'");
                    }
                }
                if (a.stack.empty()) fail(line_no, "add_node without stack=");
                entry.action = std::move(a);
            } else if (verb == "set_stack") {
                entry.action = SetStack{arg(1), need_stack(arg(2), line_no)};
            } else if (verb == "set_dests") {
                SetDests a{arg(1), {}};
                if (toks.size() > 3) a.dests = parse_dests(arg(2));
                entry.action = std::move(a);
            } else if (verb == "send_probe") {
                entry.action = SendProbe{arg(1), arg(2)};
            } else {
                fail(line_no, "unknown action '" + verb + "'");
            }
            sc.script.push_back(std::move(entry));
            break;
        }
        }
    }
    sc.validate();
    return sc;
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void Scenario::validate() const {
    std::set<VertexId> ids;
    for (const auto& n : nodes) {
        if (!ids.insert(n.id).second)
            throw std::runtime_error("duplicate node id " + n.id);
        if (n.stack.empty() || n.stack[0] != kRootLabel)
            throw std::runtime_error("node " + n.id + " stack must begin with the root label");
        if (n.stack.contains_bottom())
            throw std::runtime_error("node " + n.id + " stack contains the bottom label");
    }
    auto known = [&](const VertexId& v) { return ids.count(v) > 0; };
    std::set<std::pair<VertexId, VertexId>> seen_edges;
    for (const auto& e : edges) {
        if (!known(e.a) || !known(e.b))
            throw std::runtime_error("edge over unknown vertex: " + e.a + " " + e.b);
        if (e.a == e.b) throw std::runtime_error("self loop on " + e.a);
        auto k = std::minmax(e.a, e.b);
        if (!seen_edges.insert({k.first, k.second}).second)
            throw std::runtime_error("duplicate edge " + e.a + " " + e.b);
    }
    for (const auto& f : filters)
        if (!known(f.owner))
            throw std::runtime_error("filter on unknown vertex " + f.owner);
    for (const auto& s : script) {
        // add_node introduces ids, so later references may name them
        if (auto* x = std::get_if<AddNode>(&s.action)) ids.insert(x->v);
    }
    for (const auto& s : script) {
        std::vector<VertexId> refs;
        if (auto* x = std::get_if<FailLink>(&s.action)) refs = {x->a, x->b};
        if (auto* x = std::get_if<AddLink>(&s.action)) refs = {x->a, x->b};
        if (auto* x = std::get_if<FailNode>(&s.action)) refs = {x->v};
        if (auto* x = std::get_if<SetStack>(&s.action)) refs = {x->v};
        if (auto* x = std::get_if<SetDests>(&s.action)) refs = {x->v};
        if (auto* x = std::get_if<SendProbe>(&s.action)) refs = {x->from};
        for (const auto& v : refs)
            if (!known(v)) throw std::runtime_error("script references unknown vertex " + v);
    }
}

} // namespace pathlet
