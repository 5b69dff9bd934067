#pragma once

#include <compare>
#include <optional>
#include <string>

#include "pathlet/label_stack.hpp"
#include "pathlet/types.hpp"

namespace pathlet {

/// Network-wide pathlet identity: FIDs are unique only at their start vertex.
struct PathletKey {
    VertexId start;
    Fid fid = 0;

    auto operator<=>(const PathletKey&) const = default;
};

enum class PathletKind { Atomic, Crossing, Final };

enum class PathletError {
    None,
    StartEqualsEnd,
    EmptyScope,
    ScopeTooShort,    // scope must be (l0) followed by at least one label
    MissingRoot,      // scope does not begin with l0
    InteriorBottom,   // bottom label somewhere other than the last position
    CrossingWithDests // reserved: a crossing pathlet may never carry destinations
};

const char* to_string(PathletError e);

/// The unit of routing information: <FID, start, end, scope, dests> plus a
/// static weight used by the weighted composition rules.
struct Pathlet {
    Fid fid = 0;
    VertexId start;
    VertexId end;
    LabelStack scope;
    DestSet dests;
    double weight = 0.0;

    PathletKey key() const { return {start, fid}; }

    bool operator==(const Pathlet&) const = default;

    /// Text form "<fid,start,end,(scope),{dests}>".
    std::string text() const;
};

PathletError validate(const Pathlet& p);

/// Kind is a pure function of the scope (bottom-terminated?) and the
/// destination set (empty?). Requires a valid pathlet.
PathletKind classify(const Pathlet& p);

const char* to_string(PathletKind k);

} // namespace pathlet
