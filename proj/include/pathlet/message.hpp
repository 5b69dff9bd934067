#pragma once

#include <string>

#include "pathlet/label_stack.hpp"
#include "pathlet/pathlet.hpp"
#include "pathlet/types.hpp"

namespace pathlet {

enum class MsgKind { Hello, Pathlet, Withdrawlet, Withdraw };

const char* to_string(MsgKind k);

/// Control-plane message. Hello carries only the origin plus {s, d, a};
/// every other kind also has a timestamp and a per-hop source field.
struct Message {
    MsgKind kind = MsgKind::Hello;
    VertexId origin;
    VertexId source; // rewritten at each hop; empty on Hello
    Ms t = 0;        // unused on Hello

    LabelStack s;    // Hello: sender stack; Withdrawlet/Withdraw: scope
    DestSet d;       // Hello only
    bool a = false;  // Hello only: first message since activation
    pathlet::Pathlet p; // Pathlet only
    Fid f = 0;       // Withdrawlet only

    std::string text() const;

    static Message hello(VertexId origin, LabelStack s, DestSet d, bool a);
    static Message pathlet_msg(VertexId origin, VertexId source, Ms t, Pathlet p);
    static Message withdrawlet(VertexId origin, VertexId source, Ms t, Fid f, LabelStack s);
    static Message withdraw(VertexId origin, VertexId source, Ms t, LabelStack s);
};

} // namespace pathlet
