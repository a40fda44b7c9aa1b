#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ecgunc/checkpoint.hpp"
#include "ecgunc/csv.hpp"
#include "ecgunc/data_io.hpp"
#include "ecgunc/errors.hpp"
#include "ecgunc/manifest.hpp"
#include "ecgunc/metrics.hpp"
#include "ecgunc/rejection.hpp"
#include "ecgunc/report.hpp"
#include "ecgunc/svg.hpp"
#include "ecgunc/threading.hpp"
#include "ecgunc/trainer.hpp"
#include "ecgunc/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace ecgunc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct GridFlag {
    double start = 0.400, stop = 1.500, step = 0.050;
};

GridFlag parse_grid(const std::string& text) {
    GridFlag g;
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
        throw ConfigError("grid must be start:stop:step, got \"" + text + "\"");
    }
    try {
        g.start = std::stod(text.substr(0, c1));
        g.stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        g.step = std::stod(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ConfigError("grid must be numeric start:stop:step, got \"" + text + "\"");
    }
    return g;
}

void save_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
    CsvWriter csv(path);
    std::vector<std::string> header{"true\\pred"};
    for (int c = 0; c < cm.k; ++c) header.push_back(kClassNames[static_cast<std::size_t>(c)]);
    csv.row(header);
    for (int t = 0; t < cm.k; ++t) {
        std::vector<std::string> row{kClassNames[static_cast<std::size_t>(t)]};
        for (int p = 0; p < cm.k; ++p) row.push_back(std::to_string(cm.at(t, p)));
        csv.row(row);
    }
}

void save_confusion_svg(const ConfusionMatrix& cm, const std::string& title,
                        const std::string& path) {
    const NormalizedRows nr = row_normalize(cm);
    write_text_file(path, svg_heatmap(nr.fractions, cm.k, kClassNames, title));
}

// ----------------------------------------------------------------- gen-data

struct GenArgs {
    std::string out;
    SynthConfig cfg;
    std::string index_csv;
};

int run_gen_data(const GenArgs& a) {
    std::vector<SidecarRow> sidecar;
    Dataset d = generate(a.cfg, &sidecar);
    save_dataset(d, a.out);
    save_sidecar(sidecar, a.out + ".sidecar.csv");
    if (!a.index_csv.empty()) save_index_csv(d, a.index_csv);

    std::vector<int> histogram(9, 0);
    for (const auto& r : d.records) ++histogram[static_cast<std::size_t>(r.label)];
    std::cout << "wrote " << d.records.size() << " records to " << a.out << "\n";
    std::cout << "class histogram:\n";
    for (int c = 0; c < 9; ++c) {
        std::cout << "  " << kClassNames[static_cast<std::size_t>(c)] << ": "
                  << histogram[static_cast<std::size_t>(c)] << "\n";
    }

    RunManifest m;
    m.command = "gen-data";
    m.seed = a.cfg.seed;
    m.add_config("out", a.out);
    m.add_config("records-per-class", std::to_string(a.cfg.records_per_class));
    m.add_config("duration-min", fmt_double(a.cfg.duration_min_s));
    m.add_config("duration-max", fmt_double(a.cfg.duration_max_s));
    m.add_config("drift-amplitude", fmt_double(a.cfg.baseline_drift_amplitude));
    m.add_config("drift-frequency", fmt_double(a.cfg.drift_frequency));
    m.add_config("burst-rate", fmt_double(a.cfg.interference_burst_rate));
    m.add_config("burst-amplitude", fmt_double(a.cfg.burst_amplitude));
    m.add_config("noise-sigma", fmt_double(a.cfg.white_noise_sigma));
    m.add_config("hard-fraction", fmt_double(a.cfg.hard_fraction));
    m.add_config("flip-fraction", fmt_double(a.cfg.label_flip_fraction));
    m.add_file_hash("dataset", a.out);
    m.add_file_hash("sidecar", a.out + ".sidecar.csv");
    m.save(a.out + ".manifest.json");
    return 0;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string out;
    std::string net_scale = "desk";
    int input_length = 0; // 0 = preset default
    double dropout_p = -1.0;
    TrainConfig cfg;
    std::uint64_t split_seed = 42;
};

NetworkConfig net_config_for(const std::string& scale, int input_length, double dropout_p) {
    NetworkConfig c;
    if (scale == "desk") {
        c = NetworkConfig::desk();
    } else if (scale == "paper") {
        c = NetworkConfig::paper();
    } else {
        throw ConfigError("--net-scale must be desk or paper, got \"" + scale + "\"");
    }
    if (input_length > 0) c.input_length = input_length;
    if (dropout_p >= 0.0) c.dropout_p = dropout_p;
    c.validate();
    return c;
}

int run_train(const TrainArgs& a) {
    Dataset data = load_dataset(a.data);
    const SplitIndices split = split_dataset(data, SplitSpec{}, a.split_seed);
    const NetworkConfig net_cfg = net_config_for(a.net_scale, a.input_length, a.dropout_p);

    Rng init_rng = Rng(a.cfg.seed).fork(0xec6);
    Network net = build_network(net_cfg, init_rng);
    std::cout << "built " << a.net_scale << " network: " << net.parameter_count()
              << " parameters, " << net.conv_layer_count() << " conv layers\n";
    std::cout << "split: " << split.train.size() << " train / " << split.val.size()
              << " val / " << split.test.size() << " test\n";

    const TrainResult res = train(net, data, split.train, split.val, a.cfg);
    save_checkpoint(net, a.out);
    save_history_csv(res.history, a.out + ".history.csv");
    std::cout << "best val macro-F1 " << fmt_double(res.best_val_macro_f1) << " at step "
              << res.best_step << "\n";
    std::cout << "wrote checkpoint " << a.out << "\n";

    RunManifest m;
    m.command = "train";
    m.seed = a.cfg.seed;
    m.add_config("data", a.data);
    m.add_config("out", a.out);
    m.add_config("net-scale", a.net_scale);
    m.add_config("input-length", std::to_string(net_cfg.input_length));
    m.add_config("dropout-p", fmt_double(net_cfg.dropout_p));
    m.add_config("batch-size", std::to_string(a.cfg.batch_size));
    m.add_config("lr", fmt_double(a.cfg.lr_init));
    m.add_config("plateau-factor", fmt_double(a.cfg.plateau_factor));
    m.add_config("patience", std::to_string(a.cfg.plateau_patience_steps));
    m.add_config("weight-decay", fmt_double(a.cfg.weight_decay));
    m.add_config("max-steps", std::to_string(a.cfg.max_steps));
    m.add_config("eval-every", std::to_string(a.cfg.eval_every));
    m.add_config("split-seed", std::to_string(a.split_seed));
    m.add_file_hash("dataset", a.data);
    m.add_file_hash("checkpoint", a.out);
    m.add_file_hash("history", a.out + ".history.csv");
    m.save(a.out + ".manifest.json");
    return 0;
}

// ------------------------------------------------------------------ evaluate

struct EvalArgs {
    std::string data;
    std::string ckpt;
    std::string out_dir;
    int n_mc = 50;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 42;
    int batch_size = 32;
    bool dump_probs = false;
};

void dump_probs_container(const std::vector<McPrediction>& mcs,
                          const std::vector<std::string>& ids, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    auto put_u32 = [&os](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    os.write("ECGP", 4);
    put_u32(1);
    put_u32(static_cast<std::uint32_t>(mcs.size()));
    put_u32(mcs.empty() ? 0 : static_cast<std::uint32_t>(mcs[0].n_passes));
    put_u32(mcs.empty() ? 0 : static_cast<std::uint32_t>(mcs[0].class_count));
    for (std::size_t i = 0; i < mcs.size(); ++i) {
        put_u32(static_cast<std::uint32_t>(ids[i].size()));
        os.write(ids[i].data(), static_cast<std::streamsize>(ids[i].size()));
        for (double v : mcs[i].probs) {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            unsigned char b[8];
            for (int k = 0; k < 8; ++k) {
                b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
            }
            os.write(reinterpret_cast<const char*>(b), 8);
        }
    }
}

int run_evaluate(const EvalArgs& a) {
    if (a.n_mc < 1) throw ConfigError("--n-mc must be >= 1");
    Dataset data = load_dataset(a.data);
    Network net = load_checkpoint(a.ckpt);
    const SplitIndices split = split_dataset(data, SplitSpec{}, a.split_seed);
    fs::create_directories(a.out_dir);

    std::cout << "MC inference: " << split.test.size() << " test records, " << a.n_mc
              << " passes\n";
    const auto mcs = mc_sample(net, data, split.test, a.n_mc, a.seed, a.batch_size);

    std::vector<EvalRow> rows;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < split.test.size(); ++i) {
        const EcgRecord& rec = data.records[split.test[i]];
        const UncertaintyEstimate e = decompose(mcs[i]);
        EvalRow row;
        row.id = rec.id;
        row.true_label = rec.label;
        row.pred_label = mcs[i].predicted_class();
        row.total_u = e.total;
        row.data_u = e.data;
        row.model_u = e.model;
        rows.push_back(std::move(row));
        ids.push_back(rec.id);
    }

    const std::string unc_path = a.out_dir + "/uncertainty.csv";
    save_eval_rows_csv(rows, unc_path);

    std::vector<int> truth, pred;
    for (const auto& r : rows) {
        truth.push_back(r.true_label);
        pred.push_back(r.pred_label);
    }
    const ConfusionMatrix cm = confusion(truth, pred, net.config.num_classes);
    save_confusion_csv(cm, a.out_dir + "/confusion.csv");
    save_confusion_svg(cm, "Predictions without rejection (row-normalized)",
                       a.out_dir + "/confusion.svg");
    std::cout << "no-rejection macro-F1: " << fmt_double(macro_f1(cm)) << "\n";

    const auto report = class_stats_report(rows, net.config.num_classes);
    save_report_csv(report, a.out_dir + "/stats_report.csv");
    save_report_text(report, a.out_dir + "/stats_report.txt");

    // Figure analogs: uncertainty histograms split by correctness, and the
    // model-vs-data scatter with the y=x reference.
    HistogramSeries data_c{"correct", "#2ca02c", {}}, data_w{"wrong", "#d62728", {}};
    HistogramSeries model_c{"correct", "#2ca02c", {}}, model_w{"wrong", "#d62728", {}};
    std::vector<double> model_xs, data_ys;
    for (const auto& r : rows) {
        const bool ok = r.true_label == r.pred_label;
        (ok ? data_c : data_w).values.push_back(r.data_u);
        (ok ? model_c : model_w).values.push_back(r.model_u);
        model_xs.push_back(r.model_u);
        data_ys.push_back(r.data_u);
    }
    const std::vector<HistogramSeries> dh{data_c, data_w};
    const std::vector<HistogramSeries> mh{model_c, model_w};
    write_text_file(a.out_dir + "/hist_data_uncertainty.svg",
                    svg_histogram(dh, 30, "Data uncertainty by correctness", "nats"));
    write_text_file(a.out_dir + "/hist_model_uncertainty.svg",
                    svg_histogram(mh, 30, "Model uncertainty by correctness", "nats"));
    write_text_file(a.out_dir + "/scatter_model_data.svg",
                    svg_scatter(model_xs, data_ys, "Model vs data uncertainty",
                                "model uncertainty (nats)", "data uncertainty (nats)", true));

    if (a.dump_probs) dump_probs_container(mcs, ids, a.out_dir + "/mc_probs.ecgp");

    RunManifest m;
    m.command = "evaluate";
    m.seed = a.seed;
    m.add_config("data", a.data);
    m.add_config("ckpt", a.ckpt);
    m.add_config("out", a.out_dir);
    m.add_config("n-mc", std::to_string(a.n_mc));
    m.add_config("split-seed", std::to_string(a.split_seed));
    m.add_config("batch-size", std::to_string(a.batch_size));
    if (a.dump_probs) m.add_config("dump-probs", "");
    m.add_file_hash("dataset", a.data);
    m.add_file_hash("checkpoint", a.ckpt);
    m.add_file_hash("uncertainty_csv", unc_path);
    m.save(a.out_dir + "/manifest.json");
    std::cout << "wrote evaluation outputs to " << a.out_dir << "\n";
    return 0;
}

// --------------------------------------------------------------------- sweep

struct SweepArgs {
    std::string eval_dir;
    std::string out_dir;
    std::string grid_text = "0.4:1.5:0.05";
    double threshold = 0.400;
    std::string uncertainty = "total";
};

int run_sweep(const SweepArgs& a) {
    const GridFlag grid = parse_grid(a.grid_text);
    ThresholdOn on;
    if (a.uncertainty == "total") {
        on = ThresholdOn::Total;
    } else if (a.uncertainty == "data") {
        on = ThresholdOn::Data;
    } else {
        throw ConfigError("--uncertainty must be total or data, got \"" + a.uncertainty + "\"");
    }

    const auto rows = load_eval_rows_csv(a.eval_dir + "/uncertainty.csv");
    if (rows.empty()) throw ConfigError("sweep: uncertainty.csv has no rows");
    constexpr int k = 9;
    std::vector<UncertaintyEstimate> estimates;
    std::vector<int> truth, pred;
    for (const auto& r : rows) {
        UncertaintyEstimate e;
        e.total = r.total_u;
        e.data = r.data_u;
        e.model = r.model_u;
        e.model_raw = r.model_u;
        estimates.push_back(e);
        truth.push_back(r.true_label);
        pred.push_back(r.pred_label);
    }

    fs::create_directories(a.out_dir);
    const auto points = sweep(estimates, truth, pred, k,
                              SweepGrid{grid.start, grid.stop, grid.step}, on);

    {
        CsvWriter csv(a.out_dir + "/sweep.csv");
        std::vector<std::string> header{"threshold", "accept_ratio", "macro_f1",
                                        "accepted_count"};
        for (int c = 0; c < k; ++c) {
            header.push_back(std::string("precision_") +
                             kClassNames[static_cast<std::size_t>(c)]);
        }
        csv.row(header);
        for (const auto& p : points) {
            std::vector<std::string> row{fmt_double(p.threshold), fmt_double(p.accept_ratio),
                                         p.macro_f1 ? fmt_double(*p.macro_f1) : std::string(),
                                         std::to_string(p.accepted_count)};
            for (int c = 0; c < k; ++c) {
                const auto& pc = p.per_class_precision[static_cast<std::size_t>(c)];
                row.push_back(pc ? fmt_double(*pc) : std::string());
            }
            csv.row(row);
        }
    }

    std::vector<LabeledPoint> chart;
    for (const auto& p : points) {
        if (!p.macro_f1) continue;
        char label[32];
        std::snprintf(label, sizeof(label), "%.3f", p.threshold);
        chart.push_back({p.accept_ratio, *p.macro_f1, label});
    }
    write_text_file(a.out_dir + "/sweep.svg",
                    svg_line_chart(chart, "Macro-F1 vs accept ratio (threshold labels)",
                                   "accept ratio", "macro F1"));

    // Accepted/rejected confusion pair at the chosen threshold.
    std::vector<int> acc_t, acc_p, rej_t, rej_p;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (decide(estimates[i], a.threshold, pred[i], on).accepted) {
            acc_t.push_back(truth[i]);
            acc_p.push_back(pred[i]);
        } else {
            rej_t.push_back(truth[i]);
            rej_p.push_back(pred[i]);
        }
    }
    const ConfusionMatrix acm = confusion(acc_t, acc_p, k);
    const ConfusionMatrix rcm = confusion(rej_t, rej_p, k);
    save_confusion_csv(acm, a.out_dir + "/confusion_accepted.csv");
    save_confusion_csv(rcm, a.out_dir + "/confusion_rejected.csv");
    char title[96];
    std::snprintf(title, sizeof(title), "Accepted samples (t=%.3f)", a.threshold);
    save_confusion_svg(acm, title, a.out_dir + "/confusion_accepted.svg");
    std::snprintf(title, sizeof(title), "Rejected samples (t=%.3f)", a.threshold);
    save_confusion_svg(rcm, title, a.out_dir + "/confusion_rejected.svg");

    std::cout << "sweep points: " << points.size() << "\n";
    if (!acc_t.empty()) {
        std::cout << "accepted at t=" << fmt_double(a.threshold) << ": " << acc_t.size()
                  << " records, macro-F1 " << fmt_double(macro_f1(acm)) << "\n";
    }

    RunManifest m;
    m.command = "sweep";
    m.seed = 0;
    m.add_config("eval-dir", a.eval_dir);
    m.add_config("out", a.out_dir);
    m.add_config("grid", a.grid_text);
    m.add_config("threshold", fmt_double(a.threshold));
    m.add_config("uncertainty", a.uncertainty);
    m.add_file_hash("uncertainty_csv", a.eval_dir + "/uncertainty.csv");
    m.add_file_hash("sweep_csv", a.out_dir + "/sweep.csv");
    m.save(a.out_dir + "/manifest.json");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    set_threads(0); // honor ECG_UNC_THREADS, default all cores

    CLI::App app{"MC-dropout ECG classification with rejection"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* cmd_gen = app.add_subcommand("gen-data", "generate a synthetic ECGD dataset");
    cmd_gen->add_option("--out", gen.out, "output .ecgd path")->required();
    cmd_gen->add_option("--seed", gen.cfg.seed, "generation seed");
    cmd_gen->add_option("--records-per-class", gen.cfg.records_per_class);
    cmd_gen->add_option("--duration-min", gen.cfg.duration_min_s, "seconds, >= 6");
    cmd_gen->add_option("--duration-max", gen.cfg.duration_max_s, "seconds, <= 60");
    cmd_gen->add_option("--hard-fraction", gen.cfg.hard_fraction);
    cmd_gen->add_option("--flip-fraction", gen.cfg.label_flip_fraction);
    cmd_gen->add_option("--drift-amplitude", gen.cfg.baseline_drift_amplitude);
    cmd_gen->add_option("--drift-frequency", gen.cfg.drift_frequency);
    cmd_gen->add_option("--burst-rate", gen.cfg.interference_burst_rate);
    cmd_gen->add_option("--burst-amplitude", gen.cfg.burst_amplitude);
    cmd_gen->add_option("--noise-sigma", gen.cfg.white_noise_sigma);
    cmd_gen->add_option("--index-csv", gen.index_csv, "optional id,label,length listing");

    TrainArgs tr;
    auto* cmd_tr = app.add_subcommand("train", "train on an ECGD dataset");
    cmd_tr->add_option("--data", tr.data, "input .ecgd path")->required();
    cmd_tr->add_option("--out", tr.out, "output .ecgm checkpoint path")->required();
    cmd_tr->add_option("--net-scale", tr.net_scale, "desk | paper");
    cmd_tr->add_option("--input-length", tr.input_length, "override network input length");
    cmd_tr->add_option("--dropout-p", tr.dropout_p, "override dropout probability");
    cmd_tr->add_option("--batch-size", tr.cfg.batch_size);
    cmd_tr->add_option("--lr", tr.cfg.lr_init);
    cmd_tr->add_option("--max-steps", tr.cfg.max_steps);
    cmd_tr->add_option("--patience", tr.cfg.plateau_patience_steps, "plateau patience, steps");
    cmd_tr->add_option("--plateau-factor", tr.cfg.plateau_factor);
    cmd_tr->add_option("--weight-decay", tr.cfg.weight_decay);
    cmd_tr->add_option("--eval-every", tr.cfg.eval_every, "validation cadence, steps");
    cmd_tr->add_option("--seed", tr.cfg.seed);
    cmd_tr->add_option("--split-seed", tr.split_seed);

    EvalArgs ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "MC-dropout evaluation on the test split");
    cmd_ev->add_option("--data", ev.data)->required();
    cmd_ev->add_option("--ckpt", ev.ckpt)->required();
    cmd_ev->add_option("--out", ev.out_dir)->required();
    cmd_ev->add_option("--n-mc", ev.n_mc, "MC passes (default 50)");
    cmd_ev->add_option("--seed", ev.seed, "base seed; pass i uses seed+i");
    cmd_ev->add_option("--split-seed", ev.split_seed);
    cmd_ev->add_option("--batch-size", ev.batch_size);
    cmd_ev->add_flag("--dump-probs", ev.dump_probs, "write raw NxK rows (mc_probs.ecgp)");

    SweepArgs sw;
    auto* cmd_sw = app.add_subcommand("sweep", "threshold sweep over an evaluation run");
    cmd_sw->add_option("--eval-dir", sw.eval_dir, "directory with uncertainty.csv")->required();
    cmd_sw->add_option("--out", sw.out_dir)->required();
    cmd_sw->add_option("--grid", sw.grid_text, "start:stop:step (default 0.4:1.5:0.05)");
    cmd_sw->add_option("--threshold", sw.threshold, "confusion-pair threshold");
    cmd_sw->add_option("--uncertainty", sw.uncertainty, "total | data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (cmd_gen->parsed()) return run_gen_data(gen);
        if (cmd_tr->parsed()) return run_train(tr);
        if (cmd_ev->parsed()) return run_evaluate(ev);
        if (cmd_sw->parsed()) return run_sweep(sw);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
