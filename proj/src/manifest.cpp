#include "ecgunc/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "ecgunc/errors.hpp"

namespace ecgunc {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void RunManifest::add_file_hash(const std::string& label, const std::string& path) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << fnv1a64_file(path);
    hashes.emplace_back(label, os.str());
}

void RunManifest::save(const std::string& path) const {
    nlohmann::ordered_json j;
    j["tool"] = "ecgunc";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["seed"] = seed;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::ordered_json hs = nlohmann::ordered_json::object();
    for (const auto& [k, v] : hashes) hs[k] = v;
    j["artifact_hashes"] = hs;

    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
    if (!os) throw IoError("write failed: " + path);
}

} // namespace ecgunc
