#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <vector>

#include "ecgunc/data_io.hpp"
#include "ecgunc/errors.hpp"
#include "ecgunc/manifest.hpp"

using namespace ecgunc;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/ecgunc_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

bool records_equal(const EcgRecord& a, const EcgRecord& b) {
    return a.id == b.id && a.label == b.label && a.length == b.length && a.leads == b.leads;
}

double mean_power(const EcgRecord& rec) {
    double s = 0.0;
    for (float v : rec.leads) s += static_cast<double>(v) * static_cast<double>(v);
    return s / static_cast<double>(rec.leads.size());
}

} // namespace

TEST_CASE("generate: counts, uniform class histogram, determinism") {
    SynthConfig cfg;
    cfg.records_per_class = 4;
    cfg.seed = 7;
    std::vector<SidecarRow> sidecar;
    Dataset d = generate(cfg, &sidecar);
    REQUIRE(d.records.size() == 36);
    REQUIRE(sidecar.size() == 36);
    std::vector<int> histogram(9, 0);
    for (const auto& r : d.records) {
        CHECK(r.length >= 6 * 500);
        CHECK(r.leads.size() == static_cast<std::size_t>(12 * r.length));
        ++histogram[static_cast<std::size_t>(r.label)];
    }
    for (int c = 0; c < 9; ++c) CHECK(histogram[static_cast<std::size_t>(c)] == 4);

    TempFile f1("gen_a.ecgd"), f2("gen_b.ecgd");
    save_dataset(d, f1.path);
    save_dataset(generate(cfg, nullptr), f2.path);
    CHECK(fnv1a64_file(f1.path) == fnv1a64_file(f2.path)); // byte-identical

    SynthConfig other = cfg;
    other.seed = 8;
    TempFile f3("gen_c.ecgd");
    save_dataset(generate(other, nullptr), f3.path);
    CHECK(fnv1a64_file(f1.path) != fnv1a64_file(f3.path));
}

TEST_CASE("generate: hard and flipped bookkeeping") {
    SynthConfig cfg;
    cfg.records_per_class = 10;
    cfg.hard_fraction = 0.3;
    cfg.label_flip_fraction = 0.1;
    cfg.seed = 99;
    std::vector<SidecarRow> sidecar;
    Dataset d = generate(cfg, &sidecar);

    int hard = 0, flipped = 0;
    double hard_power = 0.0, clean_power = 0.0;
    int n_hard = 0, n_clean = 0;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const auto& row = sidecar[i];
        CHECK(row.id == d.records[i].id);
        if (row.is_hard) {
            ++hard;
            CHECK_FALSE(row.is_flipped); // flips come from the clean pool
            hard_power += mean_power(d.records[i]);
            ++n_hard;
        } else {
            clean_power += mean_power(d.records[i]);
            ++n_clean;
        }
        if (row.is_flipped) {
            ++flipped;
            CHECK(d.records[i].label != row.clean_label);
        } else {
            CHECK(d.records[i].label == row.clean_label);
        }
    }
    CHECK(hard == 27);
    CHECK(flipped == 9);
    // Heavy noise injects strictly more energy on average.
    CHECK(hard_power / n_hard > clean_power / n_clean);
}

TEST_CASE("condition_length: pad, crop, center") {
    EcgRecord rec;
    rec.id = "r";
    rec.label = 0;
    rec.length = 3000;
    rec.leads.resize(12 * 3000);
    for (std::size_t i = 0; i < rec.leads.size(); ++i) {
        rec.leads[i] = static_cast<float>(i % 1000);
    }

    // exact length: unchanged
    {
        EcgRecord same = rec;
        same.length = 5000;
        same.leads.assign(12 * 5000, 1.5f);
        auto out = condition_length(same, 5000, CropMode::EvalCenterCrop, nullptr);
        CHECK(out.size() == static_cast<std::size_t>(12 * 5000));
        for (double v : out) CHECK(v == 1.5);
    }
    // shorter: right-padded with zeros
    {
        auto out = condition_length(rec, 5000, CropMode::EvalCenterCrop, nullptr);
        CHECK(out[0] == static_cast<double>(rec.leads[0]));
        CHECK(out[2999] == static_cast<double>(rec.leads[2999]));
        for (std::size_t i = 3000; i < 5000; ++i) CHECK(out[i] == 0.0);
        // second lead occupies [5000, 10000)
        CHECK(out[5000] == static_cast<double>(rec.leads[3000]));
    }
    // longer: eval takes the centered window
    {
        EcgRecord longer = rec;
        longer.length = 6000;
        longer.leads.resize(12 * 6000);
        for (std::size_t i = 0; i < longer.leads.size(); ++i) {
            longer.leads[i] = static_cast<float>(i % 6000);
        }
        auto out = condition_length(longer, 5000, CropMode::EvalCenterCrop, nullptr);
        CHECK(out[0] == 500.0); // offset (6000-5000)/2
        CHECK(out[4999] == 5499.0);
    }
    // random crop requires a generator and stays in range
    {
        Rng rng(5);
        EcgRecord longer = rec;
        for (int trial = 0; trial < 10; ++trial) {
            auto out = condition_length(longer, 1000, CropMode::TrainRandomCrop, &rng);
            CHECK(out.size() == static_cast<std::size_t>(12 * 1000));
        }
        CHECK_THROWS_AS(condition_length(longer, 1000, CropMode::TrainRandomCrop, nullptr),
                        ConfigError);
    }
}

TEST_CASE("ECGD round trip is bit-exact, including the empty dataset") {
    SynthConfig cfg;
    cfg.records_per_class = 2;
    cfg.seed = 12;
    Dataset d = generate(cfg, nullptr);

    TempFile f("roundtrip.ecgd");
    save_dataset(d, f.path);
    Dataset back = load_dataset(f.path);
    REQUIRE(back.records.size() == d.records.size());
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        CHECK(records_equal(d.records[i], back.records[i]));
    }
    // save the loaded copy: identical bytes
    TempFile f2("roundtrip2.ecgd");
    save_dataset(back, f2.path);
    CHECK(fnv1a64_file(f.path) == fnv1a64_file(f2.path));

    Dataset empty;
    TempFile fe("empty.ecgd");
    save_dataset(empty, fe.path);
    CHECK(load_dataset(fe.path).records.empty());
}

TEST_CASE("ECGD structured load errors") {
    TempFile f("badmagic.ecgd");
    {
        std::ofstream os(f.path, std::ios::binary);
        os << "NOPE then some bytes";
    }
    CHECK_THROWS_WITH_AS(load_dataset(f.path), doctest::Contains("bad magic at offset 0"),
                         IoError);

    // truncated file: valid magic+version but a short record section
    TempFile t("trunc.ecgd");
    {
        SynthConfig cfg;
        cfg.records_per_class = 1;
        cfg.seed = 3;
        Dataset d = generate(cfg, nullptr);
        save_dataset(d, t.path);
        std::ifstream is(t.path, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                                std::istreambuf_iterator<char>());
        bytes.resize(bytes.size() / 2);
        std::ofstream os(t.path, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_WITH_AS(load_dataset(t.path), doctest::Contains("truncated"), IoError);

    CHECK_THROWS_AS(load_dataset("/tmp/ecgunc_does_not_exist.ecgd"), IoError);
}

TEST_CASE("sidecar round trip") {
    std::vector<SidecarRow> rows{{"rec00000", 3, true, false}, {"rec00001", 5, false, true}};
    TempFile f("sidecar.csv");
    save_sidecar(rows, f.path);
    const auto back = load_sidecar(f.path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "rec00000");
    CHECK(back[0].clean_label == 3);
    CHECK(back[0].is_hard);
    CHECK_FALSE(back[0].is_flipped);
    CHECK(back[1].is_flipped);
}

TEST_CASE("config validation") {
    SynthConfig cfg;
    cfg.duration_min_s = 3.0;
    CHECK_THROWS_AS(generate(cfg, nullptr), ConfigError);
    SynthConfig cfg2;
    cfg2.hard_fraction = 1.5;
    CHECK_THROWS_AS(generate(cfg2, nullptr), ConfigError);
}
