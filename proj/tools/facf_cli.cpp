#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "facf/report.hpp"
#include "facf/sequence.hpp"
#include "facf/tracker.hpp"

namespace fs = std::filesystem;
using namespace facf;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kInternal = 4 };

struct TrackArgs {
    std::string sequence_dir, synth_script, config_file, mode, features, out_dir = "facf_out";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

struct EvalArgs {
    std::string results, sequence_dir, groundtruth, out_dir;
};

struct SynthArgs {
    std::string script, out_dir;
};

SynthScript read_synth_script(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read " + path.string());
    return parse_synth_script(in);
}

RunConfig resolve_config(const TrackArgs& a)
{
    RunConfig c = a.config_file.empty() ? RunConfig{} : load_config(a.config_file);
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(c, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    if (a.seed)
        c.seed = *a.seed;
    if (!a.mode.empty())
        c.mode = a.mode;
    if (!a.features.empty())
        c.features = a.features;
    c.validate();
    return c;
}

void print_summary(const std::string& name, const EvalCurves& c, const fs::path& dir)
{
    std::printf("%s: P20=%.4f AUC=%.4f -> %s\n", name.c_str(), c.precision.p20, c.success.auc, dir.string().c_str());
}

int run_track(const TrackArgs& a)
{
    const auto config = resolve_config(a);
    Sequence seq;
    if (!a.synth_script.empty()) {
        seq = synth_sequence(read_synth_script(a.synth_script));
    } else {
        seq = load_sequence(a.sequence_dir);
    }
    const auto record = run_tracker(config, seq);
    const auto curves = emit_reports(record, seq.ground_truth, a.out_dir);
    print_summary(seq.name, curves, a.out_dir);
    return kOk;
}

int run_eval(const EvalArgs& a)
{
    const auto parsed = read_results(a.results);
    std::vector<BoundingBox> gt;
    if (!a.sequence_dir.empty()) {
        gt = load_sequence(a.sequence_dir).ground_truth;
    } else {
        std::ifstream in(a.groundtruth);
        if (!in)
            throw IoError("cannot read " + a.groundtruth);
        for (const auto& r : parse_ground_truth(in))
            gt.push_back(BoundingBox::from_otb(r.x, r.y, r.w, r.h));
    }
    std::vector<BoundingBox> pred;
    for (const auto& f : parsed.frames)
        pred.push_back(f.box);
    if (pred.size() != gt.size())
        throw FormatError("results have " + std::to_string(pred.size()) + " frames but ground truth has " +
                          std::to_string(gt.size()));
    const auto curves = evaluate(pred, gt);
    const auto it = parsed.metadata.find("sequence");
    const std::string name = it == parsed.metadata.end() ? "sequence" : it->second;
    const auto text = format_metrics(curves, name);
    if (a.out_dir.empty()) {
        std::cout << text;
    } else {
        fs::create_directories(a.out_dir);
        const auto p = report_paths(a.out_dir);
        detail::write_file(p.metrics, text);
        detail::write_file(p.precision_plot, format_plot_data(curves, false));
        detail::write_file(p.success_plot, format_plot_data(curves, true));
        print_summary(name, curves, a.out_dir);
    }
    return kOk;
}

int run_synth(const SynthArgs& a)
{
    const auto seq = synth_sequence(read_synth_script(a.script));
    save_sequence(seq, a.out_dir);
    std::printf("%s: %d frames -> %s\n", seq.name.c_str(), seq.frame_count(), a.out_dir.c_str());
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive ensemble correlation-filter tracker"};
    app.require_subcommand(1);

    TrackArgs track;
    auto* t = app.add_subcommand("track", "Track an OTB sequence directory or a synthetic script");
    auto* seq_opt = t->add_option("sequence", track.sequence_dir, "OTB sequence directory (img/ + groundtruth_rect.txt)");
    auto* synth_opt = t->add_option("--synth", track.synth_script, "Synth script to generate the sequence from");
    seq_opt->excludes(synth_opt);
    t->add_option("--config", track.config_file, "key=value config file");
    t->add_option("--seed", track.seed, "Override the config seed");
    t->add_option("--mode", track.mode, "adaptive | all-experts");
    t->add_option("--features", track.features, "synthetic | path to a channel-map file");
    t->add_option("--out-dir", track.out_dir, "Directory for the reports")->capture_default_str();
    t->add_option("--set", track.overrides, "Extra config override, key=value (repeatable)");

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "Score a results CSV against ground truth");
    e->add_option("results", eval.results, "results.csv written by track")->required();
    auto* gt_seq = e->add_option("--sequence", eval.sequence_dir, "OTB sequence directory");
    auto* gt_file = e->add_option("--groundtruth", eval.groundtruth, "groundtruth_rect.txt");
    gt_seq->excludes(gt_file);
    e->add_option("--out-dir", eval.out_dir, "Write metrics.csv and plot data here instead of stdout");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Render a synth script to an OTB directory");
    s->add_option("script", synth.script, "Synth script (key=value lines)")->required();
    s->add_option("--out-dir", synth.out_dir, "Output sequence directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (t->parsed()) {
            if (track.sequence_dir.empty() && track.synth_script.empty())
                throw ConfigError("track needs a sequence directory or --synth");
            return run_track(track);
        }
        if (e->parsed()) {
            if (eval.sequence_dir.empty() && eval.groundtruth.empty())
                throw ConfigError("eval needs --sequence or --groundtruth");
            return run_eval(eval);
        }
        return run_synth(synth);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kConfig;
    } catch (const InvariantError& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return kInternal;
    } catch (const InvalidArgument& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    } catch (const FormatError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    } catch (const IoError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    } catch (const NotFound& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    } catch (const TrackingDegenerate& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return kData;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return kInternal;
    }
}
