#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathlet/node.hpp"

namespace pathlet {

using NodeTable = std::map<VertexId, Node>;

/// FID-stack packet: the header names the pathlets the packet rides along.
struct Packet {
    std::vector<Fid> header;
    DestinationId dest;
    std::vector<VertexId> hops; // visited vertices, diagnostic
};

/// A concatenation of pathlets chosen at the source, identified by key.
struct RouteChoice {
    std::vector<PathletKey> parts;
};

struct WalkResult {
    bool delivered = false;
    VertexId final_vertex;
    std::vector<VertexId> hops;
    std::vector<Fid> final_header;
    std::string error;
};

/// Header for a route choice: the FIDs of the chosen pathlets in order.
/// Fails when the parts do not chain end-to-start from the source or name
/// pathlets the source does not know.
std::optional<std::vector<Fid>> build_header(const Node& source, const RouteChoice& choice,
                                             std::string* error = nullptr);

/// One forwarding step: pop the first FID, splice in its expansion, move to
/// the recorded next hop. Empty result models a drop on unknown FID.
std::optional<std::pair<VertexId, Packet>> forward_step(const Node& u, Packet p,
                                                        std::string* error = nullptr);

using LinkCheck = std::function<bool(const VertexId&, const VertexId&)>;

/// Walks a packet hop by hop over current forwarding state until the header
/// empties (delivery) or the packet is dropped.
WalkResult walk_packet(const NodeTable& nodes, const LinkCheck& link_ok, const VertexId& at,
                       Packet p);

/// Fully expands a FID into the sequence of atomic (vertex, fid) steps it
/// forwards along. Empty result signals an expansion cycle or a dangling
/// reference.
std::optional<std::vector<std::pair<VertexId, Fid>>> expand_fid(const NodeTable& nodes,
                                                                const VertexId& u, Fid f,
                                                                std::string* error = nullptr);

/// expand_fid over live bindings only: stepping into an entry inside its
/// T_f grace window stops the expansion as if it were already cleared.
std::optional<std::vector<std::pair<VertexId, Fid>>>
expand_fid_live(const NodeTable& nodes, const VertexId& u, Fid f, std::string* error = nullptr);

/// Route choices from `source` toward a destination token, shortest first,
/// lexicographic within a length; at most `cap` choices.
std::vector<RouteChoice> enumerate_routes(const Node& source, const DestinationId& dest,
                                          std::size_t cap);

} // namespace pathlet
