#include "ecgunc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "ecgunc/errors.hpp"

namespace ecgunc {

namespace {

constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ofstream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ofstream& os, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    }
    put_bytes(os, buf, sizeof(T));
}

void put_f64_le(std::ofstream& os, double v) {
    put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
}

struct Reader {
    std::ifstream is;
    std::size_t offset = 0;
    std::string path;

    void read(void* p, std::size_t n, const char* what) {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is.gcount()) != n) {
            throw IoError(path + ": truncated while reading " + std::string(what) +
                          " at offset " + std::to_string(offset));
        }
        offset += n;
    }

    template <typename T>
    T get_le(const char* what) {
        unsigned char buf[sizeof(T)];
        read(buf, sizeof(T), what);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        }
        return static_cast<T>(v);
    }

    double get_f64_le(const char* what) {
        return std::bit_cast<double>(get_le<std::uint64_t>(what));
    }
};

void write_config(std::ofstream& os, const NetworkConfig& c) {
    for (int b : c.blocks_per_stage) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b));
    for (int ch : c.stage_channels) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ch));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.kernel_size));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.groups));
    put_f64_le(os, c.dropout_p);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.se_reduction));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.num_classes));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.input_leads));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.input_length));
    put_le<std::uint32_t>(os, c.width_scale.num);
    put_le<std::uint32_t>(os, c.width_scale.den);
}

NetworkConfig read_config(Reader& r) {
    NetworkConfig c;
    for (int& b : c.blocks_per_stage) b = static_cast<int>(r.get_le<std::uint32_t>("blocks"));
    for (int& ch : c.stage_channels) ch = static_cast<int>(r.get_le<std::uint32_t>("channels"));
    c.kernel_size = static_cast<int>(r.get_le<std::uint32_t>("kernel_size"));
    c.groups = static_cast<int>(r.get_le<std::uint32_t>("groups"));
    c.dropout_p = r.get_f64_le("dropout_p");
    c.se_reduction = static_cast<int>(r.get_le<std::uint32_t>("se_reduction"));
    c.num_classes = static_cast<int>(r.get_le<std::uint32_t>("num_classes"));
    c.input_leads = static_cast<int>(r.get_le<std::uint32_t>("input_leads"));
    c.input_length = static_cast<int>(r.get_le<std::uint32_t>("input_length"));
    c.width_scale.num = r.get_le<std::uint32_t>("width_scale.num");
    c.width_scale.den = r.get_le<std::uint32_t>("width_scale.den");
    return c;
}

} // namespace

void save_checkpoint(Network& network, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    put_bytes(os, "ECGM", 4);
    put_le<std::uint32_t>(os, kVersion);
    write_config(os, network.config);

    const auto buffers = network.state_buffers();
    put_le<std::uint64_t>(os, buffers.size());
    for (const auto& b : buffers) {
        put_le<std::uint16_t>(os, static_cast<std::uint16_t>(b.name.size()));
        put_bytes(os, b.name.data(), b.name.size());
        put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.tensor.rank()));
        for (std::int64_t d : b.tensor.shape()) {
            put_le<std::uint64_t>(os, static_cast<std::uint64_t>(d));
        }
        for (double v : b.tensor.values()) put_f64_le(os, v);
    }
    if (!os) throw IoError("write failed: " + path);
}

Network load_checkpoint(const std::string& path) {
    Reader r;
    r.path = path;
    r.is.open(path, std::ios::binary);
    if (!r.is) throw IoError("cannot open: " + path);

    char magic[4];
    r.is.read(magic, 4);
    if (r.is.gcount() != 4 || std::memcmp(magic, "ECGM", 4) != 0) {
        throw IoError(path + ": bad magic at offset 0");
    }
    r.offset = 4;
    const auto version = r.get_le<std::uint32_t>("version");
    if (version != kVersion) {
        throw IoError(path + ": unsupported ECGM version " + std::to_string(version));
    }
    const NetworkConfig config = read_config(r);

    Rng init_rng(0); // every weight is overwritten below
    Network net = build_network(config, init_rng);

    auto buffers = net.state_buffers();
    std::map<std::string, Tensor*> by_name;
    for (auto& b : buffers) by_name[b.name] = &b.tensor;

    const auto count = r.get_le<std::uint64_t>("buffer count");
    if (count != buffers.size()) {
        throw IoError(path + ": checkpoint has " + std::to_string(count) +
                      " buffers, network expects " + std::to_string(buffers.size()));
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = r.get_le<std::uint16_t>("name length");
        std::string name(name_len, '\0');
        if (name_len > 0) r.read(name.data(), name_len, "name");
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            throw IoError(path + ": unknown buffer \"" + name + "\"");
        }
        Tensor& t = *it->second;
        const auto rank = r.get_le<std::uint32_t>("rank");
        if (static_cast<std::int64_t>(rank) != t.rank()) {
            throw IoError(path + ": buffer \"" + name + "\" rank mismatch");
        }
        std::int64_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const auto dim = static_cast<std::int64_t>(r.get_le<std::uint64_t>("dim"));
            if (dim != t.dim(static_cast<int>(d))) {
                throw IoError(path + ": buffer \"" + name + "\" dim " + std::to_string(d) +
                              " is " + std::to_string(dim) + ", expected " +
                              std::to_string(t.dim(static_cast<int>(d))));
            }
            numel *= dim;
        }
        auto vals = t.values();
        for (std::int64_t j = 0; j < numel; ++j) {
            vals[static_cast<std::size_t>(j)] = r.get_f64_le("values");
        }
    }
    return net;
}

} // namespace ecgunc
