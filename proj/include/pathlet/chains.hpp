#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pathlet/pathlet.hpp"

namespace pathlet {

using Chain = std::vector<Pathlet>;

/// All concatenations of pathlets from `pool` that start at u, end at v,
/// visit no vertex twice, and whose every component scope extends `area`.
/// Enumeration is breadth-first, so shorter chains come first; within one
/// length the order is lexicographic by (start, fid) of the components.
/// At most `cap` chains are returned.
std::vector<Chain> chains(const std::vector<Pathlet>& pool, const VertexId& u,
                          const VertexId& v, const LabelStack& area, std::size_t cap);

/// chains() toward several end vertices in a single traversal; per-target
/// results are identical to per-target chains() calls.
std::map<VertexId, std::vector<Chain>> chains_multi(const std::vector<Pathlet>& pool,
                                                    const VertexId& u,
                                                    const std::set<VertexId>& targets,
                                                    const LabelStack& area, std::size_t cap);

/// True when some concatenation of pathlets from `pool` (scopes ignored)
/// leads from `from` to `to` without ever visiting `avoid`.
bool reachable(const std::vector<Pathlet>& pool, const VertexId& from, const VertexId& to,
               const std::optional<VertexId>& avoid = std::nullopt);

/// Vertices reachable from `from` via pathlet concatenation, `avoid` excluded.
std::set<VertexId> reachable_set(const std::vector<Pathlet>& pool, const VertexId& from,
                                 const std::optional<VertexId>& avoid = std::nullopt);

} // namespace pathlet
