#pragma once

#include <string>

#include "ecgunc/network.hpp"

namespace ecgunc {

// "ECGM" binary checkpoint: magic, format version u32, serialized
// NetworkConfig, then every state buffer as (name length + UTF-8 name, rank,
// dims as u64, f64 little-endian values). Round-trips are bit-exact.

void save_checkpoint(Network& network, const std::string& path);
Network load_checkpoint(const std::string& path);

} // namespace ecgunc
