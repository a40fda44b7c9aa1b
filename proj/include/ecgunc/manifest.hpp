#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ecgunc {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility sidecar written next to every command's outputs: the
/// command, its full flag snapshot, the seed, and FNV-1a hashes of the
/// artifacts it read or wrote. Re-running the command with the recorded
/// flags reproduces the outputs byte for byte.
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;  // flag -> value
    std::vector<std::pair<std::string, std::string>> hashes;  // artifact -> fnv1a64 hex

    void add_config(const std::string& key, const std::string& value) {
        config.emplace_back(key, value);
    }
    void add_file_hash(const std::string& label, const std::string& path);

    void save(const std::string& path) const;
};

std::uint64_t fnv1a64_file(const std::string& path);

} // namespace ecgunc
