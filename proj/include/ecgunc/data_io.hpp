#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgunc/rng.hpp"

namespace ecgunc {

/// One labeled 12-lead waveform, lead-major float samples in millivolts.
struct EcgRecord {
    std::string id;
    int label = 0; // assigned class id 0-8 (may be a deliberate flip)
    int sample_rate = 500;
    std::int64_t length = 0;       // samples per lead
    std::vector<float> leads;      // 12 * length, lead-major

    static constexpr int kLeads = 12;

    const float* lead(int i) const { return leads.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(length); }
};

struct Dataset {
    std::vector<EcgRecord> records;
};

/// Generation ground truth. is_hard marks heavy-noise records, is_flipped
/// marks records whose stored label was deliberately set wrong.
struct SidecarRow {
    std::string id;
    int clean_label = 0;
    bool is_hard = false;
    bool is_flipped = false;
};

/// Per-class waveform descriptor for the stylized beat synthesizer.
struct ClassMorphology {
    double rr_jitter = 0.03;        // fractional RR variability
    double p_amp = 0.15;            // mV
    double p_width_s = 0.045;
    double pr_interval_s = 0.16;    // P peak leads QRS by this much
    double qrs_amp = 1.1;
    double qrs_width_s = 0.025;     // Gaussian sigma of the R wave
    double t_amp = 0.3;
    double t_width_s = 0.08;
    double st_offset_mv = 0.0;      // plateau between QRS and T
    int premature_every = 0;        // 0 = regular rhythm; n = every nth beat early
    bool premature_wide = false;    // premature beats get a wide, P-less QRS
    bool wide_qrs = false;
    bool rsr_prime = false;         // notched double-peak R wave
    bool absent_p = false;
    double fibrillatory_amp = 0.0;  // fast baseline wiggle (AF)
};

/// Morphology table in class order (Normal, AF, AVBI, LBBB, RBBB, PAC, PVC, STD, STE).
const ClassMorphology& class_morphology(int class_id);

struct SynthConfig {
    int records_per_class = 10;
    double duration_min_s = 6.0;
    double duration_max_s = 6.0;
    // Heavy-noise model applied to hard records.
    double baseline_drift_amplitude = 2.0; // mV
    double drift_frequency = 0.35;         // Hz
    double interference_burst_rate = 1.5;  // bursts per second
    double burst_amplitude = 4.0;          // mV
    double white_noise_sigma = 0.8;        // mV
    double hard_fraction = 0.0;
    double label_flip_fraction = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Deterministic synthetic dataset; records are class-major in class order.
Dataset generate(const SynthConfig& config, std::vector<SidecarRow>* sidecar = nullptr);

enum class CropMode { TrainRandomCrop, EvalCenterCrop };

/// Fixed-length conditioning: shorter records are zero-padded on the right,
/// longer ones cropped (random offset for Train, centered for Eval). Output
/// is 12*target_len doubles, lead-major.
std::vector<double> condition_length(const EcgRecord& record, std::int64_t target_len,
                                     CropMode mode, Rng* rng);

// "ECGD" binary container.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

void save_sidecar(const std::vector<SidecarRow>& rows, const std::string& path);
std::vector<SidecarRow> load_sidecar(const std::string& path);

/// Optional inspection listing (id,label,length).
void save_index_csv(const Dataset& data, const std::string& path);

} // namespace ecgunc
