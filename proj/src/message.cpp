#include "pathlet/message.hpp"

namespace pathlet {

const char* to_string(MsgKind k) {
    switch (k) {
    case MsgKind::Hello: return "Hello";
    case MsgKind::Pathlet: return "Pathlet";
    case MsgKind::Withdrawlet: return "Withdrawlet";
    case MsgKind::Withdraw: return "Withdraw";
    }
    return "?";
}

std::string Message::text() const {
    std::string out = to_string(kind);
    out += "{o=";
    out += origin;
    switch (kind) {
    case MsgKind::Hello: {
        out += ",s=" + s.text() + ",d={";
        bool first = true;
        for (const auto& x : d) {
            if (!first) out += ',';
            first = false;
            out += x;
        }
        out += "},a=";
        out += a ? '1' : '0';
        break;
    }
    case MsgKind::Pathlet:
        out += ",t=" + std::to_string(t) + ",p=" + p.text();
        break;
    case MsgKind::Withdrawlet:
        out += ",t=" + std::to_string(t) + ",f=" + std::to_string(f) + ",s=" + s.text();
        break;
    case MsgKind::Withdraw:
        out += ",t=" + std::to_string(t) + ",s=" + s.text();
        break;
    }
    out += '}';
    return out;
}

Message Message::hello(VertexId origin, LabelStack s, DestSet d, bool a) {
    Message m;
    m.kind = MsgKind::Hello;
    m.origin = std::move(origin);
    m.s = std::move(s);
    m.d = std::move(d);
    m.a = a;
    return m;
}

Message Message::pathlet_msg(VertexId origin, VertexId source, Ms t, Pathlet p) {
    Message m;
    m.kind = MsgKind::Pathlet;
    m.origin = std::move(origin);
    m.source = std::move(source);
    m.t = t;
    m.p = std::move(p);
    return m;
}

Message Message::withdrawlet(VertexId origin, VertexId source, Ms t, Fid f, LabelStack s) {
    Message m;
    m.kind = MsgKind::Withdrawlet;
    m.origin = std::move(origin);
    m.source = std::move(source);
    m.t = t;
    m.f = f;
    m.s = std::move(s);
    return m;
}

Message Message::withdraw(VertexId origin, VertexId source, Ms t, LabelStack s) {
    Message m;
    m.kind = MsgKind::Withdraw;
    m.origin = std::move(origin);
    m.source = std::move(source);
    m.t = t;
    m.s = std::move(s);
    return m;
}

} // namespace pathlet
