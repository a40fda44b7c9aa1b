#include "ecgunc/data_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ecgunc/errors.hpp"

namespace ecgunc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCleanNoiseSigma = 0.02; // baseline measurement noise, mV

double gauss(double t, double center, double sigma) {
    const double d = (t - center) / sigma;
    return std::exp(-0.5 * d * d);
}

double smooth_plateau(double t, double a, double b, double tau) {
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    return sig((t - a) / tau) - sig((t - b) / tau);
}

// Rough precordial-like projection weights; classes only tweak signs/gains.
constexpr std::array<double, 12> kBaseLeadGain{
    0.60, 0.70, 0.50, -0.40, 0.30, 0.80, 0.45, 0.90, 1.00, 0.95, 0.85, 0.70};

struct Beat {
    double time = 0.0;
    bool premature = false;
};

} // namespace

const ClassMorphology& class_morphology(int class_id) {
    static const std::array<ClassMorphology, 9> table = [] {
        std::array<ClassMorphology, 9> t{};
        // 0 Normal: textbook beat.
        // 1 AF: no P, irregular RR, prominent fibrillatory baseline.
        t[1].absent_p = true;
        t[1].rr_jitter = 0.35;
        t[1].fibrillatory_amp = 0.22;
        // 2 AVBI: long PR analog with a tall, peaked P clear of the prior T wave.
        t[2].pr_interval_s = 0.28;
        t[2].p_amp = 0.35;
        t[2].p_width_s = 0.035;
        // 3 LBBB: broad QRS, inverted T.
        t[3].wide_qrs = true;
        t[3].qrs_width_s = 0.055;
        t[3].t_amp = -0.3;
        // 4 RBBB: broad, notched (rSR') QRS.
        t[4].wide_qrs = true;
        t[4].qrs_width_s = 0.045;
        t[4].rsr_prime = true;
        // 5 PAC: every other beat early, narrow QRS with P.
        t[5].premature_every = 2;
        // 6 PVC: every other beat early, wide P-less QRS.
        t[6].premature_every = 2;
        t[6].premature_wide = true;
        // 7 STD / 8 STE: level shift between QRS and T.
        t[7].st_offset_mv = -0.4;
        t[8].st_offset_mv = 0.5;
        return t;
    }();
    if (class_id < 0 || class_id >= static_cast<int>(table.size())) {
        throw ConfigError("class_morphology: class id " + std::to_string(class_id) +
                          " outside [0,9)");
    }
    return table[static_cast<std::size_t>(class_id)];
}

void SynthConfig::validate() const {
    if (records_per_class < 1) throw ConfigError("SynthConfig: records_per_class must be >= 1");
    if (duration_min_s < 6.0 || duration_max_s > 60.0 || duration_min_s > duration_max_s) {
        throw ConfigError("SynthConfig: duration must lie in [6,60] s with min <= max");
    }
    if (hard_fraction < 0.0 || hard_fraction > 1.0) {
        throw ConfigError("SynthConfig: hard_fraction outside [0,1]");
    }
    if (label_flip_fraction < 0.0 || label_flip_fraction > 1.0) {
        throw ConfigError("SynthConfig: label_flip_fraction outside [0,1]");
    }
}

namespace {

std::vector<Beat> make_beats(const ClassMorphology& m, double duration, double rr0, Rng& rng) {
    std::vector<Beat> beats;
    double t = rng.uniform(0.1, 0.1 + rr0);
    int index = 0;
    while (t < duration) {
        Beat b;
        b.time = t;
        b.premature = (m.premature_every > 0) && (index % m.premature_every == m.premature_every - 1);
        beats.push_back(b);
        double rr = rr0 * (1.0 + m.rr_jitter * rng.uniform(-1.0, 1.0));
        if (m.premature_every > 0) {
            const bool next_premature =
                ((index + 1) % m.premature_every) == m.premature_every - 1;
            if (next_premature) rr *= 0.62;       // early arrival
            else if (b.premature) rr *= 1.35;     // compensatory pause
        }
        t += rr;
        ++index;
    }
    return beats;
}

// One record's shared waveform (before lead projection and noise), in mV.
std::vector<double> synth_waveform(const ClassMorphology& m, double duration,
                                   std::int64_t length, int sample_rate, Rng& rng) {
    std::vector<double> wave(static_cast<std::size_t>(length), 0.0);
    const double rr0 = 60.0 / rng.uniform(95.0, 130.0);
    const auto beats = make_beats(m, duration, rr0, rng);
    const double amp_jitter = rng.uniform(0.9, 1.1);

    for (const Beat& beat : beats) {
        const bool wide = m.wide_qrs || (beat.premature && m.premature_wide);
        const double qrs_w = (beat.premature && m.premature_wide) ? 0.060 : m.qrs_width_s;
        const double qrs_amp = m.qrs_amp * amp_jitter * (beat.premature && m.premature_wide ? 1.25 : 1.0);
        const bool has_p = !m.absent_p && !(beat.premature && m.premature_wide);
        // Atrial premature beats carry an ectopic P: taller and closer to the QRS.
        double p_amp = m.p_amp, pr = m.pr_interval_s;
        if (beat.premature && !m.premature_wide) {
            p_amp *= 2.2;
            pr *= 0.72;
        }

        // Windows are padded by 0.6 s on both sides of the beat.
        const std::int64_t lo = std::max<std::int64_t>(
            0, static_cast<std::int64_t>((beat.time - 0.6) * sample_rate));
        const std::int64_t hi = std::min<std::int64_t>(
            length, static_cast<std::int64_t>((beat.time + 0.8) * sample_rate));
        for (std::int64_t i = lo; i < hi; ++i) {
            const double t = static_cast<double>(i) / sample_rate;
            double v = 0.0;
            if (has_p) {
                v += p_amp * gauss(t, beat.time - pr, m.p_width_s);
            }
            v += qrs_amp * gauss(t, beat.time, qrs_w);
            if (m.rsr_prime) {
                v += qrs_amp * 0.65 * gauss(t, beat.time + 2.6 * qrs_w, qrs_w * 0.9);
            }
            v -= qrs_amp * 0.22 * gauss(t, beat.time + (wide ? 2.0 : 1.6) * qrs_w, qrs_w * 0.8);
            if (m.st_offset_mv != 0.0) {
                v += m.st_offset_mv * smooth_plateau(t, beat.time + 0.05, beat.time + 0.22, 0.012);
            }
            v += m.t_amp * gauss(t, beat.time + 0.30, m.t_width_s);
            wave[static_cast<std::size_t>(i)] += v;
        }
    }

    if (m.fibrillatory_amp > 0.0) {
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        for (std::int64_t i = 0; i < length; ++i) {
            const double t = static_cast<double>(i) / sample_rate;
            wave[static_cast<std::size_t>(i)] +=
                m.fibrillatory_amp * std::sin(2.0 * kPi * 6.5 * t + phase) *
                (1.0 + 0.4 * std::sin(2.0 * kPi * 0.9 * t));
        }
    }
    return wave;
}

void add_heavy_noise(std::vector<float>& leads, std::int64_t length, int sample_rate,
                     const SynthConfig& cfg, Rng& rng) {
    const double duration = static_cast<double>(length) / sample_rate;
    for (int lead = 0; lead < EcgRecord::kLeads; ++lead) {
        float* dst = leads.data() + static_cast<std::size_t>(lead) * static_cast<std::size_t>(length);
        const double drift_phase = rng.uniform(0.0, 2.0 * kPi);
        const double drift_amp = cfg.baseline_drift_amplitude * rng.uniform(0.6, 1.4);
        for (std::int64_t i = 0; i < length; ++i) {
            const double t = static_cast<double>(i) / sample_rate;
            double v = drift_amp * std::sin(2.0 * kPi * cfg.drift_frequency * t + drift_phase);
            v += cfg.white_noise_sigma * rng.normal();
            dst[i] += static_cast<float>(v);
        }
    }
    // Interference bursts hit a random subset of leads.
    const int n_bursts = static_cast<int>(cfg.interference_burst_rate * duration);
    for (int b = 0; b < n_bursts; ++b) {
        const double center = rng.uniform(0.2, duration - 0.2);
        const double width = rng.uniform(0.10, 0.40);
        const double amp = cfg.burst_amplitude * rng.uniform(0.7, 1.3);
        const double freq = rng.uniform(15.0, 35.0);
        for (int lead = 0; lead < EcgRecord::kLeads; ++lead) {
            if (rng.uniform() < 0.5) continue;
            float* dst = leads.data() + static_cast<std::size_t>(lead) * static_cast<std::size_t>(length);
            const std::int64_t lo = std::max<std::int64_t>(
                0, static_cast<std::int64_t>((center - 2.0 * width) * sample_rate));
            const std::int64_t hi = std::min<std::int64_t>(
                length, static_cast<std::int64_t>((center + 2.0 * width) * sample_rate));
            for (std::int64_t i = lo; i < hi; ++i) {
                const double t = static_cast<double>(i) / sample_rate;
                dst[i] += static_cast<float>(amp * gauss(t, center, width) *
                                             std::sin(2.0 * kPi * freq * t));
            }
        }
    }
}

} // namespace

Dataset generate(const SynthConfig& config, std::vector<SidecarRow>* sidecar) {
    config.validate();
    constexpr int kClasses = 9;
    constexpr int kSampleRate = 500;
    const std::size_t n_records =
        static_cast<std::size_t>(config.records_per_class) * kClasses;

    Rng master(config.seed);

    // Hard records: a seeded shuffle picks round(hard_fraction * n) of them.
    std::vector<std::size_t> order(n_records);
    std::iota(order.begin(), order.end(), std::size_t{0});
    {
        Rng shuffle_rng = master.fork(1);
        for (std::size_t i = n_records; i > 1; --i) {
            std::swap(order[i - 1],
                      order[static_cast<std::size_t>(shuffle_rng.uniform_int(static_cast<std::int64_t>(i)))]);
        }
    }
    const std::size_t n_hard = static_cast<std::size_t>(
        std::llround(config.hard_fraction * static_cast<double>(n_records)));
    std::vector<bool> is_hard(n_records, false);
    for (std::size_t i = 0; i < n_hard; ++i) is_hard[order[i]] = true;

    // Label flips are drawn from the clean (non-hard) pool: a flipped record
    // keeps a clean signal but carries a wrong label.
    std::vector<std::size_t> clean_pool;
    for (std::size_t i = 0; i < n_records; ++i) {
        if (!is_hard[i]) clean_pool.push_back(i);
    }
    {
        Rng flip_rng = master.fork(2);
        for (std::size_t i = clean_pool.size(); i > 1; --i) {
            std::swap(clean_pool[i - 1],
                      clean_pool[static_cast<std::size_t>(flip_rng.uniform_int(static_cast<std::int64_t>(i)))]);
        }
    }
    const std::size_t n_flip = std::min(
        clean_pool.size(), static_cast<std::size_t>(std::llround(
                               config.label_flip_fraction * static_cast<double>(n_records))));
    std::vector<bool> is_flipped(n_records, false);
    for (std::size_t i = 0; i < n_flip; ++i) is_flipped[clean_pool[i]] = true;

    Dataset out;
    out.records.reserve(n_records);
    if (sidecar) sidecar->clear();

    for (std::size_t idx = 0; idx < n_records; ++idx) {
        const int clean_label = static_cast<int>(idx) / config.records_per_class;
        Rng rec_rng = master.fork(1000 + idx);

        const double duration = rec_rng.uniform(config.duration_min_s, config.duration_max_s);
        const std::int64_t length = static_cast<std::int64_t>(std::llround(duration * kSampleRate));

        const auto wave = synth_waveform(class_morphology(clean_label),
                                         static_cast<double>(length) / kSampleRate, length,
                                         kSampleRate, rec_rng);

        EcgRecord rec;
        {
            std::ostringstream os;
            os << "rec";
            os.fill('0');
            os.width(5);
            os << idx;
            rec.id = os.str();
        }
        rec.sample_rate = kSampleRate;
        rec.length = length;
        rec.leads.assign(static_cast<std::size_t>(EcgRecord::kLeads) * static_cast<std::size_t>(length), 0.0f);
        for (int lead = 0; lead < EcgRecord::kLeads; ++lead) {
            double gain = kBaseLeadGain[static_cast<std::size_t>(lead)] * rec_rng.uniform(0.85, 1.15);
            // Bundle-branch classes flip polarity on the first precordial-like leads.
            if ((clean_label == 3 && lead >= 6 && lead <= 8) ||
                (clean_label == 4 && lead >= 9)) {
                gain = -gain;
            }
            float* dst = rec.leads.data() + static_cast<std::size_t>(lead) * static_cast<std::size_t>(length);
            for (std::int64_t i = 0; i < length; ++i) {
                dst[i] = static_cast<float>(gain * wave[static_cast<std::size_t>(i)] +
                                            kCleanNoiseSigma * rec_rng.normal());
            }
        }
        if (is_hard[idx]) add_heavy_noise(rec.leads, length, kSampleRate, config, rec_rng);

        int label = clean_label;
        if (is_flipped[idx]) {
            label = (clean_label + 1 +
                     static_cast<int>(rec_rng.uniform_int(kClasses - 1))) % kClasses;
        }
        rec.label = label;

        if (sidecar) {
            sidecar->push_back({rec.id, clean_label, is_hard[idx], is_flipped[idx]});
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::vector<double> condition_length(const EcgRecord& record, std::int64_t target_len,
                                     CropMode mode, Rng* rng) {
    if (target_len < 1) throw ShapeError("condition_length: target_len must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(EcgRecord::kLeads) *
                                static_cast<std::size_t>(target_len),
                            0.0);
    const std::int64_t L = record.length;
    std::int64_t offset = 0;
    if (L > target_len) {
        if (mode == CropMode::TrainRandomCrop) {
            if (!rng) throw ConfigError("condition_length: TrainRandomCrop needs a generator");
            offset = rng->uniform_int(L - target_len + 1);
        } else {
            offset = (L - target_len) / 2;
        }
    }
    const std::int64_t copy_len = std::min(L, target_len);
    for (int lead = 0; lead < EcgRecord::kLeads; ++lead) {
        const float* src = record.lead(lead) + offset;
        double* dst = out.data() + static_cast<std::size_t>(lead) * static_cast<std::size_t>(target_len);
        for (std::int64_t i = 0; i < copy_len; ++i) dst[i] = static_cast<double>(src[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// ECGD container: magic "ECGD", version u32, record count u64; per record
// id (u16 length + UTF-8), label u8, lead count u16, length u32, then
// leads*length f32 little-endian, lead-major.
// ---------------------------------------------------------------------------

namespace {

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

void put_f32_le(std::ofstream& os, float v) {
    put_le<std::uint32_t>(os, std::bit_cast<std::uint32_t>(v));
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

    float get_f32_le(const char* what) {
        return std::bit_cast<float>(get_le<std::uint32_t>(what));
    }
};

} // namespace

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    put_bytes(os, "ECGD", 4);
    put_le<std::uint32_t>(os, 1);
    put_le<std::uint64_t>(os, data.records.size());
    for (const EcgRecord& rec : data.records) {
        put_le<std::uint16_t>(os, static_cast<std::uint16_t>(rec.id.size()));
        put_bytes(os, rec.id.data(), rec.id.size());
        put_le<std::uint8_t>(os, static_cast<std::uint8_t>(rec.label));
        put_le<std::uint16_t>(os, EcgRecord::kLeads);
        put_le<std::uint32_t>(os, static_cast<std::uint32_t>(rec.length));
        for (float v : rec.leads) put_f32_le(os, v);
    }
    if (!os) throw IoError("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    Reader r;
    r.path = path;
    r.is.open(path, std::ios::binary);
    if (!r.is) throw IoError("cannot open: " + path);

    char magic[4];
    r.offset = 0;
    r.is.read(magic, 4);
    if (r.is.gcount() != 4 || std::memcmp(magic, "ECGD", 4) != 0) {
        throw IoError(path + ": bad magic at offset 0");
    }
    r.offset = 4;
    const auto version = r.get_le<std::uint32_t>("version");
    if (version != 1) {
        throw IoError(path + ": unsupported ECGD version " + std::to_string(version));
    }
    const auto count = r.get_le<std::uint64_t>("record count");

    Dataset out;
    out.records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        EcgRecord rec;
        const auto id_len = r.get_le<std::uint16_t>("id length");
        rec.id.resize(id_len);
        if (id_len > 0) r.read(rec.id.data(), id_len, "id");
        rec.label = static_cast<int>(r.get_le<std::uint8_t>("label"));
        const auto leads = r.get_le<std::uint16_t>("lead count");
        if (leads != EcgRecord::kLeads) {
            throw IoError(path + ": record " + std::to_string(i) + " has " +
                          std::to_string(leads) + " leads (expected 12) at offset " +
                          std::to_string(r.offset - 2));
        }
        rec.length = static_cast<std::int64_t>(r.get_le<std::uint32_t>("length"));
        rec.leads.resize(static_cast<std::size_t>(EcgRecord::kLeads) *
                         static_cast<std::size_t>(rec.length));
        for (float& v : rec.leads) v = r.get_f32_le("samples");
        out.records.push_back(std::move(rec));
    }
    return out;
}

void save_sidecar(const std::vector<SidecarRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "id,clean_label,is_hard,is_flipped\n";
    for (const auto& row : rows) {
        os << row.id << "," << row.clean_label << "," << (row.is_hard ? 1 : 0) << ","
           << (row.is_flipped ? 1 : 0) << "\n";
    }
    if (!os) throw IoError("write failed: " + path);
}

std::vector<SidecarRow> load_sidecar(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    std::vector<SidecarRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::istringstream ls(line);
        SidecarRow row;
        std::string field;
        std::getline(ls, row.id, ',');
        std::getline(ls, field, ',');
        row.clean_label = std::stoi(field);
        std::getline(ls, field, ',');
        row.is_hard = (field == "1");
        std::getline(ls, field, ',');
        row.is_flipped = (field == "1");
        rows.push_back(std::move(row));
    }
    return rows;
}

void save_index_csv(const Dataset& data, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "id,label,length\n";
    for (const EcgRecord& rec : data.records) {
        os << rec.id << "," << rec.label << "," << rec.length << "\n";
    }
    if (!os) throw IoError("write failed: " + path);
}

} // namespace ecgunc
