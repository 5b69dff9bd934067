#include "pathlet/pathlet.hpp"

namespace pathlet {

const char* to_string(PathletError e) {
    switch (e) {
    case PathletError::None: return "ok";
    case PathletError::StartEqualsEnd: return "start vertex equals end vertex";
    case PathletError::EmptyScope: return "empty scope stack";
    case PathletError::ScopeTooShort: return "scope stack has fewer than two labels";
    case PathletError::MissingRoot: return "scope stack does not begin with the root label";
    case PathletError::InteriorBottom: return "bottom label not in last position";
    case PathletError::CrossingWithDests: return "crossing pathlet with nonempty destinations";
    }
    return "?";
}

const char* to_string(PathletKind k) {
    switch (k) {
    case PathletKind::Atomic: return "atomic";
    case PathletKind::Crossing: return "crossing";
    case PathletKind::Final: return "final";
    }
    return "?";
}

PathletError validate(const Pathlet& p) {
    if (p.start == p.end) return PathletError::StartEqualsEnd;
    if (p.scope.empty()) return PathletError::EmptyScope;
    if (p.scope.size() < 2) return PathletError::ScopeTooShort;
    if (p.scope[0] != kRootLabel) return PathletError::MissingRoot;
    for (std::size_t i = 0; i + 1 < p.scope.size(); ++i)
        if (is_bottom(p.scope[i])) return PathletError::InteriorBottom;
    return PathletError::None;
}

PathletKind classify(const Pathlet& p) {
    if (p.scope.ends_with_bottom()) return PathletKind::Atomic;
    return p.dests.empty() ? PathletKind::Crossing : PathletKind::Final;
}

std::string Pathlet::text() const {
    std::string out = "<";
    out += std::to_string(fid);
    out += ',';
    out += start;
    out += ',';
    out += end;
    out += ',';
    out += scope.text();
    out += ",{";
    bool first = true;
    for (const auto& d : dests) {
        if (!first) out += ',';
        first = false;
        out += d;
    }
    out += "}>";
    return out;
}

} // namespace pathlet
