#pragma once

#include <cstdint>
#include <set>
#include <string>

namespace pathlet {

using VertexId = std::string;
using DestinationId = std::string;
using DestSet = std::set<DestinationId>;
using Fid = std::uint32_t;
using Ms = std::int64_t; // simulated milliseconds

} // namespace pathlet
