// egofilter: one entry point wiring mixing, training, filtering, streaming
// simulation, evaluation, and clustering into reproducible commands.
//
// Precedence for every setting: explicit flag > --config file > built-in
// default. Each run writes a resolved-config snapshot beside its outputs.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "egofilter/datagen.hpp"
#include "egofilter/egonet.hpp"
#include "egofilter/eval.hpp"
#include "egofilter/stft.hpp"
#include "egofilter/stream.hpp"
#include "egofilter/subtract.hpp"
#include "egofilter/wav.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace egofilter;

namespace {

// A bad or missing flag/field, as opposed to bad data on disk.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Union of every tunable across subcommands; the config file uses exactly
// these field names.
struct RunConfig {
    double buffer_seconds = 1.0;
    double keep_seconds = 0.8;
    int frame_len = 400;
    int hop = 160;
    double vad_energy_multiplier = 3.0;
    int vad_frames_required = 3;
    double block_stride_seconds = 0.2;
    bool flush_tail = false;

    double floor_beta = 0.0;
    double over_subtraction_alpha = 1.0;

    int channels = 128;
    int kernel = 5;
    std::vector<int> dilations = {2, 4, 8, 16};
    bool convs_share_weights_across_blocks = true;
    double compression_exponent = 0.3;

    double lr = 0.001;
    int epochs = 50;
    int batch = 4;
    uint64_t seed = 1;

    std::string manifest;
    std::string out;
    std::string out_dir;
    std::string robot;
    std::string mic;
    std::string weights;
    std::string extracted_dir;
    std::string reference_dir;
    std::string report;
    std::string wer_csv;
    std::string mode = "entire";
    int chunk_ms = 100;
    int k = 4;
};

PipelineConfig pipeline_config(const RunConfig& rc) {
    PipelineConfig pc;
    pc.buffer_seconds = rc.buffer_seconds;
    pc.keep_seconds = rc.keep_seconds;
    pc.frame_len = rc.frame_len;
    pc.hop = rc.hop;
    pc.vad_energy_multiplier = rc.vad_energy_multiplier;
    pc.vad_frames_required = rc.vad_frames_required;
    pc.block_stride_seconds = rc.block_stride_seconds;
    pc.flush_tail = rc.flush_tail;
    pc.subtraction.floor_beta = rc.floor_beta;
    pc.subtraction.over_subtraction_alpha = rc.over_subtraction_alpha;
    return pc;
}

EgoNetConfig egonet_config(const RunConfig& rc) {
    EgoNetConfig cfg;
    cfg.channels = rc.channels;
    cfg.kernel = rc.kernel;
    cfg.dilations = rc.dilations;
    cfg.convs_share_weights_across_blocks = rc.convs_share_weights_across_blocks;
    cfg.compression_exponent = rc.compression_exponent;
    return cfg;
}

TrainOptions train_options(const RunConfig& rc) {
    TrainOptions opts;
    opts.epochs = rc.epochs;
    opts.lr = rc.lr;
    opts.batch_size = rc.batch;
    opts.seed = rc.seed;
    return opts;
}

// One flag/config-key/value binding. The config file fills any field whose
// flag was not given on the command line.
struct Binding {
    std::string key;
    CLI::Option* opt = nullptr;
    std::function<void(const json&)> from_json;
    std::function<json()> to_json;
};

struct Bindings {
    std::vector<Binding> items;

    template <typename T>
    void add(CLI::App* cmd, const std::string& flag, const std::string& key,
             T& target, const std::string& desc) {
        CLI::Option* o = cmd->add_option(flag, target, desc);
        if constexpr (std::is_same_v<T, std::vector<int>>) {
            o->delimiter(',');
        }
        items.push_back({key, o,
                         [&target](const json& v) { target = v.get<T>(); },
                         [&target]() { return json(target); }});
    }

    void add_flag(CLI::App* cmd, const std::string& flag,
                  const std::string& key, bool& target,
                  const std::string& desc) {
        CLI::Option* o = cmd->add_flag(flag, target, desc);
        items.push_back({key, o,
                         [&target](const json& v) { target = v.get<bool>(); },
                         [&target]() { return json(target); }});
    }
};

const std::set<std::string>& all_config_keys() {
    static const std::set<std::string> keys = {
        "buffer_seconds", "keep_seconds", "frame_len", "hop",
        "vad_energy_multiplier", "vad_frames_required", "block_stride_seconds",
        "flush_tail", "floor_beta", "over_subtraction_alpha", "channels",
        "kernel", "dilations", "convs_share_weights_across_blocks",
        "compression_exponent", "lr", "epochs", "batch", "seed", "manifest",
        "out", "out_dir", "robot", "mic", "weights", "extracted_dir",
        "reference_dir", "report", "wer_csv", "mode", "chunk_ms", "k"};
    return keys;
}

void apply_config_file(const std::string& path, Bindings& bindings) {
    if (path.empty()) return;
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw std::runtime_error("config file " + path +
                                 ": top level must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!all_config_keys().count(key)) {
            throw std::runtime_error("config file " + path +
                                     ": unknown field " + key);
        }
    }
    for (Binding& b : bindings.items) {
        if (b.opt->count() == 0 && j.contains(b.key)) {
            try {
                b.from_json(j.at(b.key));
            } catch (const json::exception& e) {
                throw std::runtime_error("config file " + path + ": field " +
                                         b.key + ": " + e.what());
            }
        }
    }
}

void write_snapshot(const fs::path& path, const std::string& command,
                    const Bindings& bindings) {
    json j;
    j["command"] = command;
    for (const Binding& b : bindings.items) j[b.key] = b.to_json();
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << j.dump(2) << "\n";
}

void require_field(const std::string& value, const char* flag) {
    if (value.empty()) {
        throw UsageError(std::string(flag) +
                         " is required (flag or config field)");
    }
}

void ensure_parent(const std::string& out_path) {
    const fs::path parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

// Relative paths inside a manifest resolve against the manifest's directory.
std::string resolve_near(const fs::path& base_file, const std::string& p) {
    fs::path q(p);
    if (q.is_absolute()) return p;
    return (base_file.parent_path() / q).string();
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

AudioClip slice_clip(const AudioClip& clip, size_t begin, size_t end) {
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.samples.assign(clip.samples.begin() + begin, clip.samples.begin() + end);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

EgoNetWeights load_weights_checked(const std::string& path) {
    try {
        return load_weights(path);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("no ego estimate: ") + e.what());
    }
}

// Replays the VAD over the whole stream; throws when it never fires so the
// caller's outputs, had there been any, would be meaningful.
long detect_onset_or_throw(const AudioClip& mic, const PipelineConfig& pc) {
    StreamState st;
    const std::optional<long> onset = detect_onset(st, mic.samples, pc);
    if (!onset) throw std::runtime_error("robot speech onset not detected");
    return *onset;
}

int cmd_mix(const RunConfig& rc, const Bindings& bindings) {
    require_field(rc.manifest, "--manifest");
    require_field(rc.out_dir, "--out-dir");
    std::vector<MixtureSpec> specs = load_manifest(rc.manifest);
    fs::create_directories(rc.out_dir);
    write_snapshot(fs::path(rc.out_dir) / "run_config.json", "mix", bindings);

    const fs::path out_dir(rc.out_dir);
    std::ofstream idx(out_dir / "index.csv");
    if (!idx) throw std::runtime_error("cannot write index.csv");
    idx << "file,snr_db,rt60,ar_target,words\n";
    for (size_t i = 0; i < specs.size(); ++i) {
        MixtureSpec spec = specs[i];
        spec.robot_path = resolve_near(rc.manifest, spec.robot_path);
        spec.target_path = resolve_near(rc.manifest, spec.target_path);
        const MixOutput m = mix(spec);
        const std::string n = std::to_string(i);
        write_wav((out_dir / ("mixture_" + n + ".wav")).string(), m.mixture);
        write_wav((out_dir / ("ego_" + n + ".wav")).string(), m.recorded_ego);
        write_wav((out_dir / ("target_" + n + ".wav")).string(),
                  m.scaled_target);
        const AudioClip tgt = slice_clip(m.scaled_target, m.target_range.begin,
                                         m.target_range.end);
        const double ar = alpha_ratio(stft(tgt, rc.frame_len, rc.hop));
        idx << "mixture_" << n << ".wav," << fmt_g(spec.snr_db) << ","
            << fmt_g(spec.rt60_seconds) << "," << fmt_g(ar) << ","
            << spec.words << "\n";
    }
    return 0;
}

int cmd_train(const RunConfig& rc, const Bindings& bindings) {
    require_field(rc.manifest, "--manifest");
    require_field(rc.out, "--out");
    std::vector<MixtureSpec> specs = load_manifest(rc.manifest);
    if (specs.empty()) throw std::runtime_error("manifest has no records");

    // One training pair per mixture: the dry robot magnitude against the
    // recorded ego's magnitude over the same samples.
    std::vector<TrainPair> pairs;
    pairs.reserve(specs.size());
    for (MixtureSpec spec : specs) {
        spec.robot_path = resolve_near(rc.manifest, spec.robot_path);
        spec.target_path = resolve_near(rc.manifest, spec.target_path);
        const AudioClip robot = read_wav(spec.robot_path);
        const AudioClip target = read_wav(spec.target_path);
        const MixOutput m = mix_clips(robot, target, spec);
        const AudioClip ego_cut =
            slice_clip(m.recorded_ego, 0, robot.samples.size());
        TrainPair pair;
        pair.r_mag = stft(robot, rc.frame_len, rc.hop).magnitude;
        pair.ego_mag = stft(ego_cut, rc.frame_len, rc.hop).magnitude;
        pairs.push_back(std::move(pair));
    }

    ensure_parent(rc.out);
    const TrainResult res = train(pairs, egonet_config(rc), train_options(rc));
    save_weights(res.weights, rc.out);
    write_snapshot(rc.out + ".run.json", "train", bindings);

    std::ofstream loss(rc.out + ".loss.csv");
    if (!loss) throw std::runtime_error("cannot write loss curve");
    loss << "step,loss\n";
    for (size_t i = 0; i < res.loss_curve.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", res.loss_curve[i]);
        loss << i << "," << buf << "\n";
    }
    return 0;
}

int cmd_filter(const RunConfig& rc, const Bindings& bindings) {
    require_field(rc.robot, "--robot");
    require_field(rc.mic, "--mic");
    require_field(rc.weights, "--weights");
    require_field(rc.out, "--out");
    if (rc.mode != "entire" && rc.mode != "blocks") {
        throw UsageError("--mode must be entire or blocks");
    }
    const EgoNetWeights w = load_weights_checked(rc.weights);
    const AudioClip robot = read_wav(rc.robot);
    const AudioClip mic = read_wav(rc.mic);
    const PipelineConfig pc = pipeline_config(rc);

    const long onset = detect_onset_or_throw(mic, pc);
    ensure_parent(rc.out);
    const AudioClip out = rc.mode == "entire"
                              ? run_offline_entire(mic, robot, w, pc)
                              : run_offline_blocks(mic, robot, w, pc);
    write_wav(rc.out, out);

    // Kept segments start at the middle window's lead-in, matching the
    // stream pipeline's (buffer - keep) / 2 split.
    const long lead = (std::lround(pc.buffer_seconds * mic.sample_rate) -
                       std::lround(pc.keep_seconds * mic.sample_rate)) /
                      2;
    json meta;
    meta["mode"] = rc.mode;
    meta["onset_samples"] = onset;
    meta["kept_offset_samples"] = rc.mode == "blocks" ? lead : 0;
    meta["output_samples"] = out.samples.size();
    std::ofstream mf(rc.out + ".meta.json");
    if (!mf) throw std::runtime_error("cannot write meta file");
    mf << meta.dump(2) << "\n";

    write_snapshot(rc.out + ".run.json", "filter", bindings);
    return 0;
}

int cmd_stream(const RunConfig& rc, const Bindings& bindings) {
    require_field(rc.robot, "--robot");
    require_field(rc.mic, "--mic");
    require_field(rc.weights, "--weights");
    require_field(rc.out_dir, "--out-dir");
    if (rc.chunk_ms < 1) throw UsageError("--chunk-ms must be at least 1");
    const EgoNetWeights w = load_weights_checked(rc.weights);
    const AudioClip robot = read_wav(rc.robot);
    const AudioClip mic = read_wav(rc.mic);
    const PipelineConfig pc = pipeline_config(rc);
    fs::create_directories(rc.out_dir);
    const fs::path out_dir(rc.out_dir);
    write_snapshot(out_dir / "run_config.json", "stream", bindings);

    const EgoEstimate est = prepare_ego_estimate(robot, w);

    StreamState st;
    std::vector<AudioClip> segments;
    const size_t chunk =
        static_cast<size_t>(rc.chunk_ms) * mic.sample_rate / 1000;
    for (size_t pos = 0; pos < mic.samples.size(); pos += chunk) {
        const size_t end = std::min(pos + chunk, mic.samples.size());
        const std::vector<double> c(mic.samples.begin() + pos,
                                    mic.samples.begin() + end);
        for (AudioClip& seg : push_samples(st, c, est.rhat, pc)) {
            segments.push_back(std::move(seg));
        }
    }
    for (AudioClip& seg : finish(st, est.rhat, pc)) {
        segments.push_back(std::move(seg));
    }
    if (!st.vad.onset) throw std::runtime_error("robot speech onset not detected");

    for (size_t i = 0; i < segments.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "seg_%04zu.wav", i);
        write_wav((out_dir / name).string(), segments[i]);
    }

    std::ofstream tf(out_dir / "timings.csv");
    if (!tf) throw std::runtime_error("cannot write timings.csv");
    tf << "stage,buffer_index,millis\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", est.prepare_millis);
    tf << "prepare,-1," << buf << "\n";
    for (const StageTiming& t : st.timings) {
        std::snprintf(buf, sizeof buf, "%.3f", t.millis);
        tf << t.stage << "," << t.buffer_index << "," << buf << "\n";
    }

    json meta;
    meta["onset_samples"] = *st.vad.onset;
    meta["segments"] = segments.size();
    std::ofstream mf(out_dir / "meta.json");
    if (!mf) throw std::runtime_error("cannot write meta.json");
    mf << meta.dump(2) << "\n";
    return 0;
}

std::map<std::string, double> load_wer_csv(const std::string& path) {
    std::map<std::string, double> wer;
    if (path.empty()) return wer;
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open wer csv " + path);
    std::string line;
    if (!std::getline(f, line)) {
        throw std::runtime_error("wer csv " + path + " is empty");
    }
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "file" ||
        header[1] != "wer_percent") {
        throw std::runtime_error("wer csv must start with file,wer_percent");
    }
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < 2) {
            throw std::runtime_error("wer csv " + path + ": short row");
        }
        wer[fields[0]] = std::stod(fields[1]);
    }
    return wer;
}

int cmd_eval(const RunConfig& rc, const Bindings& bindings) {
    require_field(rc.extracted_dir, "--extracted-dir");
    require_field(rc.reference_dir, "--reference-dir");
    require_field(rc.manifest, "--manifest");
    require_field(rc.out, "--out");
    const std::vector<MixtureSpec> specs = load_manifest(rc.manifest);
    const std::map<std::string, double> wer = load_wer_csv(rc.wer_csv);

    std::vector<EvalInput> inputs;
    std::vector<std::string> file_errors;
    for (size_t i = 0; i < specs.size(); ++i) {
        const std::string id = "extracted_" + std::to_string(i);
        const fs::path ext = fs::path(rc.extracted_dir) / (id + ".wav");
        const fs::path ref =
            fs::path(rc.reference_dir) / ("target_" + std::to_string(i) + ".wav");
        try {
            AudioClip extracted = read_wav(ext.string());
            AudioClip reference = read_wav(ref.string());
            const fs::path meta_path = ext.string() + ".meta.json";
            if (fs::exists(meta_path)) {
                std::ifstream mf(meta_path);
                const json meta = json::parse(mf);
                const size_t begin =
                    meta.at("onset_samples").get<size_t>() +
                    meta.at("kept_offset_samples").get<size_t>();
                const size_t n = meta.at("output_samples").get<size_t>();
                if (begin + n > reference.samples.size()) {
                    throw std::runtime_error(
                        "aligned window runs past the reference");
                }
                reference = slice_clip(reference, begin, begin + n);
            }
            EvalInput in;
            in.id = id;
            in.snr_db = specs[i].snr_db;
            in.words_target = specs[i].words;
            in.ar_target = alpha_ratio(stft(reference, rc.frame_len, rc.hop));
            if (const auto it = wer.find(id); it != wer.end()) {
                in.wer_percent = it->second;
            }
            in.extracted = std::move(extracted);
            in.reference = std::move(reference);
            inputs.push_back(std::move(in));
        } catch (const std::exception& e) {
            file_errors.push_back(id + ": " + e.what());
        }
    }

    const EvalReport report = evaluate_corpus(inputs);

    ensure_parent(rc.out);
    std::ofstream out(rc.out);
    if (!out) throw std::runtime_error("cannot write " + rc.out);
    out << "file,si_sdr_db,lsd_db,ar_target,snr_db,words,wer_percent\n";
    for (const EvalRecord& r : report.records) {
        out << r.id << "," << fmt_g(r.si_sdr_db) << "," << fmt_g(r.lsd_db)
            << "," << fmt_g(r.ar_target) << "," << fmt_g(r.snr_db) << ","
            << r.words_target << ","
            << (r.wer_percent ? fmt_g(*r.wer_percent) : "") << "\n";
    }
    write_snapshot(rc.out + ".run.json", "eval", bindings);

    for (const std::string& e : file_errors) {
        std::cerr << "eval: " << e << "\n";
    }
    for (const std::string& e : report.summary.errors) {
        std::cerr << "eval: " << e << "\n";
    }
    const EvalSummary& s = report.summary;
    std::cout << "files," << s.count << "\n"
              << "errors," << s.error_count + file_errors.size() << "\n"
              << "si_sdr_mean_db," << fmt_g(s.si_sdr.mean) << "\n"
              << "si_sdr_median_db," << fmt_g(s.si_sdr.median) << "\n"
              << "si_sdr_sd_db," << fmt_g(s.si_sdr.sd) << "\n"
              << "lsd_mean_db," << fmt_g(s.lsd.mean) << "\n"
              << "lsd_median_db," << fmt_g(s.lsd.median) << "\n"
              << "lsd_sd_db," << fmt_g(s.lsd.sd) << "\n"
              << "pct_si_sdr_above_10," << fmt_g(s.pct_si_sdr_above_10) << "\n"
              << "pct_si_sdr_above_0," << fmt_g(s.pct_si_sdr_above_0) << "\n";
    return 0;
}

int cmd_cluster(const RunConfig& rc, const Bindings& bindings) {
    require_field(rc.report, "--report");
    require_field(rc.out, "--out");
    std::ifstream f(rc.report);
    if (!f) throw std::runtime_error("cannot open report " + rc.report);
    std::string line;
    if (!std::getline(f, line)) {
        throw std::runtime_error("report " + rc.report + " is empty");
    }
    const std::vector<std::string> header = split_csv_line(line);
    std::map<std::string, size_t> col;
    for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need :
         {"file", "si_sdr_db", "ar_target", "snr_db", "words"}) {
        if (!col.count(need)) {
            throw std::runtime_error("report is missing column " +
                                     std::string(need));
        }
    }

    std::vector<EvalRecord> records;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < header.size()) {
            throw std::runtime_error("report row has too few columns: " + line);
        }
        EvalRecord r;
        r.id = fields[col["file"]];
        r.si_sdr_db = std::stod(fields[col["si_sdr_db"]]);
        r.ar_target = std::stod(fields[col["ar_target"]]);
        r.snr_db = std::stod(fields[col["snr_db"]]);
        r.words_target = std::stoi(fields[col["words"]]);
        if (col.count("wer_percent")) {
            const std::string& w = fields[col["wer_percent"]];
            if (!w.empty()) r.wer_percent = std::stod(w);
        }
        records.push_back(std::move(r));
    }

    const ClusterResult res = agglomerative_cluster(records, rc.k);
    for (const std::string& w : res.warnings) {
        std::cerr << "cluster: " << w << "\n";
    }

    ensure_parent(rc.out);
    std::ofstream out(rc.out);
    if (!out) throw std::runtime_error("cannot write " + rc.out);
    out << "file,label\n";
    for (size_t i = 0; i < records.size(); ++i) {
        out << records[i].id << "," << res.labels[i] << "\n";
    }

    const fs::path means_path =
        fs::path(rc.out).parent_path() / "cluster_means.csv";
    std::ofstream means(means_path);
    if (!means) throw std::runtime_error("cannot write cluster_means.csv");
    // feature_names already ends with the appended si_sdr_db column.
    means << "label,size";
    for (const std::string& name : res.feature_names) {
        means << ",mean_" << name;
    }
    means << "\n";
    for (size_t c = 0; c < res.cluster_means.size(); ++c) {
        means << c << "," << res.cluster_sizes[c];
        for (double v : res.cluster_means[c]) means << "," << fmt_g(v);
        means << "\n";
    }
    write_snapshot(rc.out + ".run.json", "cluster", bindings);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig rc;
    std::string config_path;

    CLI::App app{"ego-speech filtering toolkit"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd = nullptr;
        Bindings bindings;
        std::function<int(const RunConfig&, const Bindings&)> run;
    };
    std::vector<Sub> subs;

    auto add_sub = [&](const std::string& name, const std::string& desc,
                       int (*fn)(const RunConfig&, const Bindings&)) -> Sub& {
        Sub s;
        s.cmd = app.add_subcommand(name, desc);
        s.cmd->add_option("--config", config_path,
                          "JSON config file; flags take precedence");
        s.run = fn;
        subs.push_back(std::move(s));
        return subs.back();
    };

    auto bind_stft = [&](Sub& s) {
        s.bindings.add(s.cmd, "--frame-len", "frame_len", rc.frame_len,
                       "analysis frame length in samples");
        s.bindings.add(s.cmd, "--hop", "hop", rc.hop, "hop size in samples");
    };
    auto bind_pipeline = [&](Sub& s) {
        bind_stft(s);
        s.bindings.add(s.cmd, "--buffer-seconds", "buffer_seconds",
                       rc.buffer_seconds, "stream buffer length");
        s.bindings.add(s.cmd, "--keep-seconds", "keep_seconds", rc.keep_seconds,
                       "kept middle of each buffer");
        s.bindings.add(s.cmd, "--block-stride-seconds", "block_stride_seconds",
                       rc.block_stride_seconds,
                       "overlap shared by consecutive buffers");
        s.bindings.add(s.cmd, "--vad-energy-multiplier", "vad_energy_multiplier",
                       rc.vad_energy_multiplier,
                       "activity threshold over the noise floor");
        s.bindings.add(s.cmd, "--vad-frames-required", "vad_frames_required",
                       rc.vad_frames_required,
                       "consecutive active frames before onset");
        s.bindings.add_flag(s.cmd, "--flush-tail", "flush_tail", rc.flush_tail,
                            "process the trailing partial buffer");
        s.bindings.add(s.cmd, "--floor-beta", "floor_beta", rc.floor_beta,
                       "spectral floor as a fraction of the mixture");
        s.bindings.add(s.cmd, "--over-subtraction-alpha",
                       "over_subtraction_alpha", rc.over_subtraction_alpha,
                       "scale on the ego estimate before subtraction");
    };

    {
        Sub& s = add_sub("mix", "render a mixture corpus from a manifest",
                         cmd_mix);
        s.bindings.add(s.cmd, "--manifest", "manifest", rc.manifest,
                       "line-delimited JSON mixture specs");
        s.bindings.add(s.cmd, "--out-dir", "out_dir", rc.out_dir,
                       "output directory");
        bind_stft(s);
    }
    {
        Sub& s = add_sub("train", "train ego-estimate weights from a manifest",
                         cmd_train);
        s.bindings.add(s.cmd, "--manifest", "manifest", rc.manifest,
                       "line-delimited JSON mixture specs");
        s.bindings.add(s.cmd, "--out", "out", rc.out, "weights file to write");
        s.bindings.add(s.cmd, "--epochs", "epochs", rc.epochs, "training epochs");
        s.bindings.add(s.cmd, "--lr", "lr", rc.lr, "Adam learning rate");
        s.bindings.add(s.cmd, "--batch", "batch", rc.batch, "minibatch size");
        s.bindings.add(s.cmd, "--seed", "seed", rc.seed,
                       "weight init and shuffle seed");
        s.bindings.add(s.cmd, "--channels", "channels", rc.channels,
                       "hidden channels");
        s.bindings.add(s.cmd, "--kernel", "kernel", rc.kernel,
                       "conv kernel size");
        s.bindings.add(s.cmd, "--dilations", "dilations", rc.dilations,
                       "comma-separated dilation list");
        s.bindings.add(s.cmd, "--compression-exponent", "compression_exponent",
                       rc.compression_exponent, "magnitude compression power");
        {
            CLI::Option* o = s.cmd->add_flag_callback(
                "--independent-blocks",
                [&rc]() { rc.convs_share_weights_across_blocks = false; },
                "give each dilation block its own conv weights");
            s.bindings.items.push_back(
                {"convs_share_weights_across_blocks", o,
                 [&rc](const json& v) {
                     rc.convs_share_weights_across_blocks = v.get<bool>();
                 },
                 [&rc]() {
                     return json(rc.convs_share_weights_across_blocks);
                 }});
        }
        bind_stft(s);
    }
    {
        Sub& s = add_sub("filter", "filter one mixture offline", cmd_filter);
        s.bindings.add(s.cmd, "--robot", "robot", rc.robot,
                       "dry robot utterance wav");
        s.bindings.add(s.cmd, "--mic", "mic", rc.mic, "microphone mixture wav");
        s.bindings.add(s.cmd, "--weights", "weights", rc.weights,
                       "trained weights file");
        s.bindings.add(s.cmd, "--out", "out", rc.out, "extracted speech wav");
        s.bindings.add(s.cmd, "--mode", "mode", rc.mode, "entire or blocks");
        bind_pipeline(s);
    }
    {
        Sub& s = add_sub("stream", "simulate chunked streaming", cmd_stream);
        s.bindings.add(s.cmd, "--robot", "robot", rc.robot,
                       "dry robot utterance wav");
        s.bindings.add(s.cmd, "--mic", "mic", rc.mic, "microphone mixture wav");
        s.bindings.add(s.cmd, "--weights", "weights", rc.weights,
                       "trained weights file");
        s.bindings.add(s.cmd, "--chunk-ms", "chunk_ms", rc.chunk_ms,
                       "input chunk size in milliseconds");
        s.bindings.add(s.cmd, "--out-dir", "out_dir", rc.out_dir,
                       "output directory");
        bind_pipeline(s);
    }
    {
        Sub& s = add_sub("eval", "score extractions against references",
                         cmd_eval);
        s.bindings.add(s.cmd, "--extracted-dir", "extracted_dir",
                       rc.extracted_dir, "directory of extracted_%d.wav");
        s.bindings.add(s.cmd, "--reference-dir", "reference_dir",
                       rc.reference_dir, "directory of target_%d.wav");
        s.bindings.add(s.cmd, "--manifest", "manifest", rc.manifest,
                       "manifest the corpus was rendered from");
        s.bindings.add(s.cmd, "--out", "out", rc.out, "per-file report csv");
        s.bindings.add(s.cmd, "--wer-csv", "wer_csv", rc.wer_csv,
                       "optional csv of file,wer_percent");
        bind_stft(s);
    }
    {
        Sub& s = add_sub("cluster", "cluster a report into failure modes",
                         cmd_cluster);
        s.bindings.add(s.cmd, "--report", "report", rc.report,
                       "report csv from eval");
        s.bindings.add(s.cmd, "--k", "k", rc.k, "number of clusters");
        s.bindings.add(s.cmd, "--out", "out", rc.out, "cluster labels csv");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (Sub& s : subs) {
        if (!s.cmd->parsed()) continue;
        try {
            apply_config_file(config_path, s.bindings);
            return s.run(rc, s.bindings);
        } catch (const UsageError& e) {
            std::cerr << "egofilter " << s.cmd->get_name() << ": " << e.what()
                      << "\nRun with --help for usage.\n";
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "egofilter " << s.cmd->get_name() << ": " << e.what()
                      << "\n";
            return 2;
        }
    }
    return 1;
}
