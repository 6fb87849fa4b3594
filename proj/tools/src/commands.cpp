#include "ecgpaper/cli/commands.hpp"

#include "ecgpaper/cli/parallel.hpp"
#include "ecgpaper/distort.hpp"
#include "ecgpaper/error.hpp"
#include "ecgpaper/eval.hpp"
#include "ecgpaper/manifest.hpp"
#include "ecgpaper/predictions.hpp"
#include "ecgpaper/rectify.hpp"
#include "ecgpaper/render.hpp"
#include "ecgpaper/rng.hpp"
#include "ecgpaper/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

namespace ecgpaper::cli {

namespace {

using nlohmann::json;

void log(const std::string& msg) {
    std::cerr << msg << '\n';
}

void prepare_out_dir(const fs::path& out, bool force) {
    if (out.empty()) throw Error(Errc::InvalidArgument, "--out is required");
    if (fs::exists(out)) {
        if (!fs::is_directory(out)) throw Error(Errc::IoFailure, out.string() + " exists and is not a directory");
        if (!fs::is_empty(out) && !force) {
            throw Error(Errc::NonEmptyOutDir, out.string() + " is not empty (use --force to write into it)");
        }
    }
    fs::create_directories(out);
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error(Errc::SchemaViolation, path.string() + ": not valid JSON: " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

bool safe_id(const std::string& id) {
    if (id.empty() || id == "." || id == "..") return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    });
}

fs::path manifest_dir(const fs::path& manifest) {
    return manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
}

// image_path re-expressed relative to a manifest written into `to`.
std::string rebase(const fs::path& from, const std::string& image_path, const fs::path& to) {
    const fs::path abs = fs::weakly_canonical(fs::absolute(from / image_path));
    return fs::relative(abs, fs::weakly_canonical(fs::absolute(to))).generic_string();
}

json failures_json(const std::vector<EntryFailure>& failures) {
    json arr = json::array();
    for (const auto& f : failures) arr.push_back({{"id", f.id}, {"error", f.error}});
    return arr;
}

void report_failures(const std::vector<EntryFailure>& failures) {
    for (const auto& f : failures) log("  failed " + f.id + ": " + f.error);
}

template <class T>
struct Attempt {
    std::optional<T> value;
    std::string error;
};

template <class T, class Fn>
Attempt<T> attempt(Fn&& fn) {
    try {
        return {fn(), {}};
    } catch (const std::exception& e) {
        return {std::nullopt, e.what()};
    }
}

} // namespace

BatchOutcome cmd_synth(const SynthOptions& opt) {
    prepare_out_dir(opt.out, opt.force);
    // Label prevalences of a typical 12-lead diagnostic dataset.
    constexpr std::array<double, kLabelCount> prevalence{0.2545, 0.0688, 0.1233, 0.2090, 0.2425};
    BatchOutcome outcome;
    for (std::size_t i = 0; i < opt.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "rec%05zu", i + 1);
        const std::uint64_t seed = seed_for_id(opt.seed, name);
        Rng rng(derive_seed(seed, 0xA11));
        DiagnosisVector labels;
        for (std::size_t l = 0; l < kLabelCount; ++l) labels.flags[l] = rng.uniform() < prevalence[l] ? 1 : 0;
        save_record(synthesize_record(name, seed, opt.fs_hz, opt.duration_s, labels), opt.out);
        ++outcome.succeeded;
    }
    log("synth: wrote " + std::to_string(outcome.succeeded) + " records to " + opt.out.string());
    return outcome;
}

BatchOutcome cmd_generate(const GenerateOptions& opt) {
    if (!fs::is_directory(opt.waveforms)) throw Error(Errc::IoFailure, opt.waveforms.string() + " is not a directory");
    GridConfig grid;
    if (opt.grid_config) grid = grid_config_from_json(read_json(*opt.grid_config));
    grid.validate();

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(opt.waveforms)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(Errc::InvalidArgument, "no .csv records in " + opt.waveforms.string());

    BatchOutcome outcome;
    std::vector<EcgRecord> records;
    std::map<std::string, bool> seen;
    auto parsed = parallel_map(files.size(), opt.workers, [&](std::size_t i) {
        return attempt<EcgRecord>([&] { return load_record(files[i], opt.fs_hz); });
    });
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].filename().string();
        if (!parsed[i].value) {
            outcome.failures.push_back({name, parsed[i].error});
            continue;
        }
        EcgRecord& rec = *parsed[i].value;
        if (!safe_id(rec.id)) {
            outcome.failures.push_back({name, "record id '" + rec.id + "' is not usable as a file name"});
        } else if (seen[rec.id]) {
            outcome.failures.push_back({name, "duplicate record id '" + rec.id + "'"});
        } else {
            seen[rec.id] = true;
            records.push_back(std::move(rec));
        }
    }
    if (records.empty()) {
        report_failures(outcome.failures);
        throw Error(Errc::InvalidArgument, "no parseable records in " + opt.waveforms.string());
    }

    if (opt.count && *opt.count < records.size()) {
        // Seeded subset; kept in id order afterwards.
        std::vector<std::size_t> order(records.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto ha = seed_for_id(opt.seed, records[a].id);
            const auto hb = seed_for_id(opt.seed, records[b].id);
            return ha != hb ? ha < hb : records[a].id < records[b].id;
        });
        order.resize(*opt.count);
        std::sort(order.begin(), order.end());
        std::vector<EcgRecord> chosen;
        for (std::size_t i : order) chosen.push_back(std::move(records[i]));
        records = std::move(chosen);
    }

    prepare_out_dir(opt.out, opt.force);
    fs::create_directories(opt.out / "images");
    auto rendered = parallel_map(records.size(), opt.workers, [&](std::size_t i) {
        return attempt<ManifestEntry>([&] {
            const EcgRecord& rec = records[i];
            const PaperImage img = render_record(rec, grid);
            const std::string rel = "images/" + rec.id + ".png";
            write_png(img.raster, opt.out / rel);
            return ManifestEntry{rec.id, rel, rec.labels, img.corners, std::nullopt, std::nullopt};
        });
    });
    DatasetManifest manifest;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (rendered[i].value) {
            manifest.entries.push_back(std::move(*rendered[i].value));
        } else {
            outcome.failures.push_back({records[i].id, rendered[i].error});
        }
    }
    outcome.succeeded = manifest.size();
    write_manifest(manifest, opt.out / "manifest.json");
    write_json(opt.out / "run.json", {{"command", "generate"},
                                      {"seed", opt.seed},
                                      {"count", opt.count ? json(*opt.count) : json(nullptr)},
                                      {"grid", grid_config_to_json(grid)},
                                      {"failures", failures_json(outcome.failures)}});
    report_failures(outcome.failures);
    log("generate: " + std::to_string(outcome.succeeded) + " images, " + std::to_string(outcome.failures.size()) + " failures");
    return outcome;
}

BatchOutcome cmd_distort(const DistortOptions& opt) {
    const DatasetManifest input = read_manifest(opt.manifest);
    const fs::path in_dir = manifest_dir(opt.manifest);
    std::optional<DistortionRecipe> tmpl;
    std::optional<DatasetManifest> replay;
    if (opt.replay) {
        replay = read_manifest(*opt.replay);
    } else if (opt.recipe) {
        tmpl = recipe_from_json(read_json(*opt.recipe));
        validate_recipe(*tmpl);
    } else {
        throw Error(Errc::InvalidArgument, "distort needs --recipe or --replay");
    }
    prepare_out_dir(opt.out, opt.force);
    fs::create_directories(opt.out / "images");

    auto results = parallel_map(input.size(), opt.workers, [&](std::size_t i) {
        return attempt<ManifestEntry>([&] {
            const ManifestEntry& e = input.entries[i];
            if (!safe_id(e.id)) throw Error(Errc::InvalidArgument, "id is not usable as a file name");
            DistortionRecipe recipe;
            if (replay) {
                const ManifestEntry* r = replay->find(e.id);
                if (!r || !r->recipe) throw Error(Errc::InvalidArgument, "no realised recipe for '" + e.id + "' in replay manifest");
                recipe = *r->recipe;
            } else {
                recipe = *tmpl;
                recipe.seed = seed_for_id(opt.seed, e.id);
            }
            const fs::path src = in_dir / e.image_path;
            if (!fs::exists(src)) throw Error(Errc::MissingImage, e.id + " (" + src.string() + ")");
            PaperImage img;
            img.raster = read_png(src);
            img.corners = e.corners ? *e.corners : Quad::image_corners(img.width(), img.height());
            const RecipeResult res = apply_recipe(img, recipe);
            const std::string rel = "images/" + e.id + ".png";
            write_png(res.image.raster, opt.out / rel);
            return ManifestEntry{e.id, rel, e.labels, res.corners, res.realised, e.fold};
        });
    });

    BatchOutcome outcome;
    DatasetManifest manifest;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].value) {
            manifest.entries.push_back(std::move(*results[i].value));
        } else {
            outcome.failures.push_back({input.entries[i].id, results[i].error});
        }
    }
    outcome.succeeded = manifest.size();
    write_manifest(manifest, opt.out / "manifest.json");
    json run{{"command", "distort"}, {"seed", opt.seed}, {"failures", failures_json(outcome.failures)}};
    run["recipe"] = tmpl ? recipe_to_json(*tmpl) : json(nullptr);
    run["replay"] = opt.replay.has_value();
    write_json(opt.out / "run.json", run);
    report_failures(outcome.failures);
    log("distort: " + std::to_string(outcome.succeeded) + " images, " + std::to_string(outcome.failures.size()) + " failures");
    return outcome;
}

BatchOutcome cmd_rectify(const RectifyOptions& opt) {
    const DatasetManifest input = read_manifest(opt.manifest);
    const fs::path in_dir = manifest_dir(opt.manifest);
    RectifyConfig cfg;
    if (opt.config) cfg = rectify_config_from_json(read_json(*opt.config));
    cfg.validate();
    prepare_out_dir(opt.out, opt.force);
    fs::create_directories(opt.out / "images");
    fs::create_directories(opt.out / "reports");
    const bool full = opt.mode == RectifyMode::Full;

    struct Done {
        ManifestEntry entry;
        std::optional<double> rmse;
    };
    auto results = parallel_map(input.size(), opt.workers, [&](std::size_t i) {
        return attempt<Done>([&] {
            const ManifestEntry& e = input.entries[i];
            if (!safe_id(e.id)) throw Error(Errc::InvalidArgument, "id is not usable as a file name");
            const fs::path src = in_dir / e.image_path;
            if (!fs::exists(src)) throw Error(Errc::MissingImage, e.id + " (" + src.string() + ")");
            const Image img = read_png(src);
            Done d{ManifestEntry{e.id, "images/" + e.id + ".png", e.labels, std::nullopt, std::nullopt, e.fold}, std::nullopt};
            json report;
            if (full) {
                auto [out, rep] = rectify_pipeline(img, cfg);
                write_png(out.raster, opt.out / d.entry.image_path);
                d.entry.corners = out.corners;
                report = report_to_json(rep);
                if (e.corners) d.rmse = reprojection_rmse(rep.homography, *e.corners, cfg);
            } else {
                auto [out, rep] = crop_pipeline(img, cfg);
                write_png(out, opt.out / d.entry.image_path);
                d.entry.corners = e.corners ? rep.homography.apply(*e.corners) : rep.corners;
                report = report_to_json(rep);
            }
            if (d.rmse) report["corner_rmse"] = *d.rmse;
            write_json(opt.out / "reports" / (e.id + ".json"), report);
            return d;
        });
    });

    BatchOutcome outcome;
    DatasetManifest manifest;
    json per_entry = json::object();
    std::vector<double> rmses;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].value) {
            outcome.failures.push_back({input.entries[i].id, results[i].error});
            continue;
        }
        Done& d = *results[i].value;
        if (d.rmse) {
            per_entry[d.entry.id] = *d.rmse;
            rmses.push_back(*d.rmse);
        }
        manifest.entries.push_back(std::move(d.entry));
    }
    outcome.succeeded = manifest.size();
    write_manifest(manifest, opt.out / "manifest.json");

    json summary{{"mode", full ? "full" : "crop-only"},
                 {"config", rectify_config_to_json(cfg)},
                 {"succeeded", outcome.succeeded},
                 {"failures", failures_json(outcome.failures)}};
    if (!rmses.empty()) {
        std::vector<double> sorted = rmses;
        std::sort(sorted.begin(), sorted.end());
        const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
        const std::size_t n = sorted.size();
        const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        summary["corner_rmse"] = {{"count", n}, {"mean", mean}, {"median", median}, {"max", sorted.back()}, {"entries", per_entry}};
        log("rectify: corner RMSE mean " + std::to_string(mean) + " px, max " + std::to_string(sorted.back()) + " px");
    }
    write_json(opt.out / "summary.json", summary);
    report_failures(outcome.failures);
    log("rectify: " + std::to_string(outcome.succeeded) + " images, " + std::to_string(outcome.failures.size()) + " failures");
    return outcome;
}

BatchOutcome cmd_split(const SplitOptions& opt) {
    if (opt.folds < 2) throw Error(Errc::InvalidArgument, "--folds must be >= 2");
    DatasetManifest m = read_manifest(opt.manifest);
    const auto k = static_cast<std::size_t>(opt.folds);
    if (m.size() < k) {
        throw Error(Errc::TooFewEntries, std::to_string(m.size()) + " entries cannot fill " + std::to_string(k) + " folds");
    }
    prepare_out_dir(opt.out, opt.force);

    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ha = seed_for_id(opt.seed, m.entries[a].id);
        const auto hb = seed_for_id(opt.seed, m.entries[b].id);
        return ha != hb ? ha < hb : m.entries[a].id < m.entries[b].id;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        m.entries[order[rank]].fold = static_cast<int>(rank % k);
    }
    const fs::path in_dir = manifest_dir(opt.manifest);
    for (auto& e : m.entries) e.image_path = rebase(in_dir, e.image_path, opt.out);
    write_manifest(m, opt.out / "manifest.json");

    std::vector<std::vector<DiagnosisVector>> by_fold(k);
    std::vector<DiagnosisVector> all;
    for (const auto& e : m.entries) {
        by_fold[static_cast<std::size_t>(*e.fold)].push_back(e.labels);
        all.push_back(e.labels);
    }
    auto rates_json = [](const std::vector<DiagnosisVector>& v) {
        const auto r = positive_rates(count_positives(v), v.size());
        json j;
        for (std::size_t l = 0; l < kLabelCount; ++l) j[std::string(kLabelNames[l])] = r[l];
        return j;
    };
    const auto overall = positive_rates(count_positives(all), all.size());
    json sizes = json::array();
    json per_fold = json::array();
    LabelScores drift{};
    for (const auto& f : by_fold) {
        sizes.push_back(f.size());
        per_fold.push_back(rates_json(f));
        const auto r = positive_rates(count_positives(f), f.size());
        for (std::size_t l = 0; l < kLabelCount; ++l) drift[l] = std::max(drift[l], std::abs(r[l] - overall[l]));
    }
    json drift_json;
    for (std::size_t l = 0; l < kLabelCount; ++l) drift_json[std::string(kLabelNames[l])] = drift[l];
    write_json(opt.out / "split_summary.json", {{"seed", opt.seed},
                                                {"folds", k},
                                                {"sizes", sizes},
                                                {"positive_rate", {{"overall", rates_json(all)}, {"per_fold", per_fold}}},
                                                {"max_rate_drift", drift_json}});
    log("split: " + std::to_string(m.size()) + " entries into " + std::to_string(k) + " folds");
    return {m.size(), {}};
}

BatchOutcome cmd_evaluate(const EvaluateOptions& opt) {
    const PredictionTable preds = read_predictions(opt.predictions);
    const DatasetManifest truth = read_manifest(opt.manifest);
    const json metrics = evaluation_to_json(evaluate(preds, truth));
    std::cout << metrics.dump(2) << '\n';
    if (opt.out) {
        fs::create_directories(*opt.out);
        write_json(*opt.out / "metrics.json", metrics);
    }
    return {truth.size(), {}};
}

} // namespace ecgpaper::cli
