#include "ecgpaper/cli/commands.hpp"

#include "ecgpaper/error.hpp"

#include <iostream>

#include <CLI11.hpp>

namespace ecgpaper::cli {

int run(int argc, char** argv) {
    CLI::App app{"Synthetic paper ECG toolkit: generate, distort, rectify, split, evaluate"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    unsigned workers = 1;
    fs::path manifest;
    fs::path out;
    bool force = false;

    auto add_common = [&](CLI::App* sub, bool seeded, bool needs_manifest, bool parallel) {
        if (seeded) sub->add_option("--seed", seed, "Run seed (u64)")->required();
        if (needs_manifest) sub->add_option("--manifest", manifest, "Input manifest JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory")->required();
        if (parallel) sub->add_option("--workers", workers, "Parallel workers")->check(CLI::Range(1u, 256u));
        sub->add_flag("--force", force, "Write into a non-empty output directory");
    };

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write synthetic waveform records (CSV + JSON sidecar)");
    add_common(synth_cmd, true, false, false);
    synth_cmd->add_option("--count", synth.count, "Number of records")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--fs", synth.fs_hz, "Sampling rate in Hz")->check(CLI::Range(100, 2000));
    synth_cmd->add_option("--duration", synth.duration_s, "Seconds per record")->check(CLI::Range(2.5, 60.0));

    GenerateOptions gen;
    auto* gen_cmd = app.add_subcommand("generate", "Render waveform records as paper ECG images");
    add_common(gen_cmd, true, false, true);
    gen_cmd->add_option("--waveforms", gen.waveforms, "Directory of waveform CSV files")->required()->check(CLI::ExistingDirectory);
    gen_cmd->add_option("--count", gen.count, "Render a seeded subset of this size")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--grid", gen.grid_config, "Grid config JSON")->check(CLI::ExistingFile);
    gen_cmd->add_option("--fs", gen.fs_hz, "Sampling rate for records without a sidecar");

    DistortOptions dis;
    auto* dis_cmd = app.add_subcommand("distort", "Apply a distortion recipe to every manifest entry");
    add_common(dis_cmd, true, true, true);
    dis_cmd->add_option("--recipe", dis.recipe, "Recipe template JSON")->check(CLI::ExistingFile);
    dis_cmd->add_option("--replay", dis.replay, "Reuse realised recipes from this manifest")->check(CLI::ExistingFile);

    RectifyOptions rect;
    std::string mode = "full";
    auto* rect_cmd = app.add_subcommand("rectify", "Locate, rectify and enhance paper images");
    add_common(rect_cmd, false, true, true);
    rect_cmd->add_option("--mode", mode, "crop-only or full")->check(CLI::IsMember({"crop-only", "full"}));
    rect_cmd->add_option("--config", rect.config, "Rectify config JSON")->check(CLI::ExistingFile);

    SplitOptions split;
    auto* split_cmd = app.add_subcommand("split", "Assign cross-validation folds");
    add_common(split_cmd, true, true, false);
    split_cmd->add_option("--folds", split.folds, "Number of folds");

    EvaluateOptions eval;
    std::string eval_out;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a prediction CSV against manifest labels");
    eval_cmd->add_option("--predictions", eval.predictions, "CSV with header id,MI,AF,HYP,CD,STTC")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--manifest", eval.manifest, "Ground-truth manifest JSON")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval_out, "Directory for metrics.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        BatchOutcome outcome;
        if (*synth_cmd) {
            synth.out = out;
            synth.seed = seed;
            synth.force = force;
            outcome = cmd_synth(synth);
        } else if (*gen_cmd) {
            gen.out = out;
            gen.seed = seed;
            gen.workers = workers;
            gen.force = force;
            outcome = cmd_generate(gen);
        } else if (*dis_cmd) {
            dis.manifest = manifest;
            dis.out = out;
            dis.seed = seed;
            dis.workers = workers;
            dis.force = force;
            outcome = cmd_distort(dis);
        } else if (*rect_cmd) {
            rect.manifest = manifest;
            rect.out = out;
            rect.mode = mode == "full" ? RectifyMode::Full : RectifyMode::CropOnly;
            rect.workers = workers;
            rect.force = force;
            outcome = cmd_rectify(rect);
        } else if (*split_cmd) {
            split.manifest = manifest;
            split.out = out;
            split.seed = seed;
            split.force = force;
            outcome = cmd_split(split);
        } else if (*eval_cmd) {
            if (!eval_out.empty()) eval.out = eval_out;
            outcome = cmd_evaluate(eval);
        }
        return outcome.exit_code();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace ecgpaper::cli
