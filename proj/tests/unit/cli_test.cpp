#include "ecgpaper/cli/commands.hpp"
#include "ecgpaper/error.hpp"
#include "ecgpaper/image.hpp"
#include "ecgpaper/manifest.hpp"
#include "ecgpaper/predictions.hpp"
#include "ecgpaper/recipe.hpp"

#include "fixtures.hpp"

#include <functional>

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

using namespace ecgpaper;
using namespace ecgpaper::cli;
using fixture::TempDir;
using nlohmann::json;

namespace {

Errc error_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return Errc::InvalidArgument;
}

std::vector<std::string> png_names(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".png") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

bool same_tree(const fs::path& a, const fs::path& b) {
    const auto na = png_names(a / "images");
    if (na != png_names(b / "images")) return false;
    for (const auto& n : na) {
        if (!fixture::same_file(a / "images" / n, b / "images" / n)) return false;
    }
    return fixture::same_file(a / "manifest.json", b / "manifest.json");
}

void write_recipe(const DistortionRecipe& r, const fs::path& path) {
    write_text(path, recipe_to_json(r).dump(2));
}

// Shared clean set: synthesised waveforms rendered once for the suite.
class CliPipeline : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new TempDir;
        cmd_synth({.out = *dir_ / "wave", .count = 10, .seed = 5});
        GenerateOptions g;
        g.waveforms = *dir_ / "wave";
        g.out = *dir_ / "clean";
        g.seed = 11;
        const BatchOutcome o = cmd_generate(g);
        ASSERT_EQ(o.exit_code(), kExitOk);
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }
    static fs::path clean() { return *dir_ / "clean"; }
    static fs::path wave() { return *dir_ / "wave"; }

    TempDir tmp_;

private:
    static inline TempDir* dir_ = nullptr;
};

} // namespace

TEST_F(CliPipeline, GenerateWritesOneImagePerRecord) {
    EXPECT_EQ(png_names(clean() / "images").size(), 10u);
    const DatasetManifest m = read_manifest(clean() / "manifest.json");
    EXPECT_EQ(m.size(), 10u);
    for (const auto& e : m.entries) {
        ASSERT_TRUE(e.corners.has_value());
        EXPECT_TRUE(fs::exists(clean() / e.image_path));
    }
    const json run = json::parse(read_text(clean() / "run.json"));
    EXPECT_EQ(run["command"], "generate");
    EXPECT_EQ(run["seed"], 11);
}

TEST_F(CliPipeline, GenerateIsByteIdenticalOnRerun) {
    GenerateOptions g;
    g.waveforms = wave();
    g.out = tmp_ / "again";
    g.seed = 11;
    g.workers = 3;
    cmd_generate(g);
    EXPECT_TRUE(same_tree(clean(), tmp_ / "again"));
}

TEST_F(CliPipeline, GenerateSubsetDependsOnlyOnSeed) {
    GenerateOptions g;
    g.waveforms = wave();
    g.seed = 4;
    g.count = 3;
    g.out = tmp_ / "a";
    cmd_generate(g);
    g.out = tmp_ / "b";
    cmd_generate(g);
    EXPECT_EQ(read_manifest(tmp_ / "a" / "manifest.json").size(), 3u);
    EXPECT_TRUE(same_tree(tmp_ / "a", tmp_ / "b"));
}

TEST_F(CliPipeline, GenerateRefusesNonEmptyOutDir) {
    fs::create_directories(tmp_ / "occupied");
    write_text(tmp_ / "occupied" / "x.txt", "x");
    GenerateOptions g;
    g.waveforms = wave();
    g.out = tmp_ / "occupied";
    EXPECT_EQ(error_code([&] { cmd_generate(g); }), Errc::NonEmptyOutDir);
}

TEST_F(CliPipeline, GenerateWithNoRecordsFailsWithoutManifest) {
    fs::create_directories(tmp_ / "empty");
    GenerateOptions g;
    g.waveforms = tmp_ / "empty";
    g.out = tmp_ / "out";
    EXPECT_THROW(cmd_generate(g), Error);
    EXPECT_FALSE(fs::exists(tmp_ / "out" / "manifest.json"));
}

TEST_F(CliPipeline, DistortRecordsRealisedHomographies) {
    DistortionRecipe r;
    r.margin = 0.1;
    r.steps.push_back(PerspectiveStep{.jitter = 0.08});
    write_recipe(r, tmp_ / "recipe.json");
    DistortOptions d;
    d.manifest = clean() / "manifest.json";
    d.out = tmp_ / "d";
    d.seed = 21;
    d.recipe = tmp_ / "recipe.json";
    EXPECT_EQ(cmd_distort(d).exit_code(), kExitOk);
    const DatasetManifest m = read_manifest(tmp_ / "d" / "manifest.json");
    ASSERT_EQ(m.size(), 10u);
    for (const auto& e : m.entries) {
        ASSERT_TRUE(e.recipe.has_value());
        const auto& p = std::get<PerspectiveStep>(e.recipe->steps.at(0));
        EXPECT_TRUE(p.homography.has_value()) << e.id;
        EXPECT_TRUE(e.corners.has_value());
    }
}

TEST_F(CliPipeline, DistortWithNoOpRecipeKeepsBytes) {
    DistortionRecipe r;
    r.steps.push_back(ShadowStep{.intensity = 0.0});
    r.steps.push_back(PerspectiveStep{.jitter = 0.0});
    write_recipe(r, tmp_ / "recipe.json");
    DistortOptions d;
    d.manifest = clean() / "manifest.json";
    d.out = tmp_ / "d";
    d.recipe = tmp_ / "recipe.json";
    cmd_distort(d);
    for (const auto& n : png_names(clean() / "images")) {
        EXPECT_EQ(read_png(clean() / "images" / n), read_png(tmp_ / "d" / "images" / n)) << n;
    }
}

TEST_F(CliPipeline, DistortIsDeterministicAcrossWorkerCountsAndReplays) {
    DistortionRecipe r;
    r.margin = 0.1;
    r.steps.push_back(ShadowStep{.intensity = 0.4});
    r.steps.push_back(PerspectiveStep{.jitter = 0.06});
    r.steps.push_back(CreaseStep{});
    write_recipe(r, tmp_ / "recipe.json");
    DistortOptions d;
    d.manifest = clean() / "manifest.json";
    d.recipe = tmp_ / "recipe.json";
    d.seed = 99;
    d.out = tmp_ / "serial";
    cmd_distort(d);
    d.out = tmp_ / "parallel";
    d.workers = 8;
    cmd_distort(d);
    EXPECT_TRUE(same_tree(tmp_ / "serial", tmp_ / "parallel"));

    DistortOptions rp;
    rp.manifest = clean() / "manifest.json";
    rp.replay = tmp_ / "serial" / "manifest.json";
    rp.out = tmp_ / "replayed";
    rp.seed = 12345; // ignored on replay
    EXPECT_EQ(cmd_distort(rp).exit_code(), kExitOk);
    EXPECT_TRUE(same_tree(tmp_ / "serial", tmp_ / "replayed"));

    d.seed = 100;
    d.out = tmp_ / "other";
    d.workers = 1;
    cmd_distort(d);
    EXPECT_FALSE(same_tree(tmp_ / "serial", tmp_ / "other"));
}

TEST_F(CliPipeline, MissingImageIsAPerEntryFailure) {
    DatasetManifest m = read_manifest(clean() / "manifest.json");
    for (auto& e : m.entries) e.image_path = fs::relative(clean() / e.image_path, tmp_.path()).generic_string();
    m.entries[2].image_path = "nowhere.png";
    write_manifest(m, tmp_ / "manifest.json");
    DistortionRecipe r;
    write_recipe(r, tmp_ / "recipe.json");
    DistortOptions d;
    d.manifest = tmp_ / "manifest.json";
    d.recipe = tmp_ / "recipe.json";
    d.out = tmp_ / "d";
    const BatchOutcome o = cmd_distort(d);
    EXPECT_EQ(o.exit_code(), kExitPartial);
    ASSERT_EQ(o.failures.size(), 1u);
    EXPECT_EQ(o.failures[0].id, m.entries[2].id);
    EXPECT_NE(o.failures[0].error.find("MissingImage"), std::string::npos);
    EXPECT_EQ(read_manifest(tmp_ / "d" / "manifest.json").size(), 9u);
}

TEST_F(CliPipeline, RectifyCleanSetAndUnreadableImage) {
    DatasetManifest m = read_manifest(clean() / "manifest.json");
    m.entries.resize(3);
    for (auto& e : m.entries) e.image_path = fs::relative(clean() / e.image_path, tmp_.path()).generic_string();
    write_text(tmp_ / "broken.png", "not a png");
    m.entries.push_back(m.entries[0]);
    m.entries.back().id = "broken";
    m.entries.back().image_path = "broken.png";
    write_manifest(m, tmp_ / "manifest.json");

    RectifyOptions r;
    r.manifest = tmp_ / "manifest.json";
    r.out = tmp_ / "r";
    const BatchOutcome o = cmd_rectify(r);
    EXPECT_EQ(o.succeeded, 3u);
    ASSERT_EQ(o.failures.size(), 1u);
    EXPECT_EQ(o.failures[0].id, "broken");
    EXPECT_EQ(o.exit_code(), kExitPartial);

    const json summary = json::parse(read_text(tmp_ / "r" / "summary.json"));
    EXPECT_EQ(summary["corner_rmse"]["count"], 3);
    EXPECT_LT(summary["corner_rmse"]["max"].get<double>(), 2.0);
    EXPECT_TRUE(fs::exists(tmp_ / "r" / "reports" / (m.entries[0].id + ".json")));

    RectifyOptions c = r;
    c.mode = RectifyMode::CropOnly;
    c.out = tmp_ / "c";
    EXPECT_EQ(cmd_rectify(c).succeeded, 3u);
    EXPECT_EQ(json::parse(read_text(tmp_ / "c" / "summary.json"))["mode"], "crop-only");
}

TEST(CliSplit, FoldSizesForFullDataset) {
    TempDir tmp;
    DatasetManifest m;
    for (int i = 0; i < 15009; ++i) {
        const std::string id = "r" + std::to_string(i);
        DiagnosisVector d;
        d.flags[static_cast<std::size_t>(i % 5)] = 1;
        m.entries.push_back({id, "images/" + id + ".png", d, std::nullopt, std::nullopt, std::nullopt});
    }
    write_manifest(m, tmp / "manifest.json");
    SplitOptions s;
    s.manifest = tmp / "manifest.json";
    s.out = tmp / "s";
    s.seed = 3;
    cmd_split(s);
    const DatasetManifest folded = read_manifest(tmp / "s" / "manifest.json", 5);
    std::array<int, 5> sizes{};
    for (const auto& e : folded.entries) ++sizes.at(static_cast<std::size_t>(*e.fold));
    std::sort(sizes.begin(), sizes.end());
    EXPECT_EQ(sizes, (std::array<int, 5>{3001, 3002, 3002, 3002, 3002}));
    EXPECT_EQ(folded.entries[0].image_path, "../images/r0.png");

    s.out = tmp / "again";
    cmd_split(s);
    EXPECT_TRUE(fixture::same_file(tmp / "s" / "manifest.json", tmp / "again" / "manifest.json"));

    const json summary = json::parse(read_text(tmp / "s" / "split_summary.json"));
    EXPECT_EQ(summary["folds"], 5);
    EXPECT_EQ(summary["sizes"].size(), 5u);
}

TEST(CliSplit, TooFewEntries) {
    TempDir tmp;
    DatasetManifest m;
    for (int i = 0; i < 3; ++i) m.entries.push_back({"x" + std::to_string(i), "x.png", {}, std::nullopt, std::nullopt, std::nullopt});
    write_manifest(m, tmp / "manifest.json");
    SplitOptions s;
    s.manifest = tmp / "manifest.json";
    s.out = tmp / "s";
    EXPECT_EQ(error_code([&] { cmd_split(s); }), Errc::TooFewEntries);
}

TEST(CliEvaluate, PerfectPredictionsThroughArgv) {
    TempDir tmp;
    DatasetManifest m;
    PredictionTable t;
    const char* labels[] = {"MI;AF;HYP;CD;STTC", "", "AF;CD", "MI;HYP;STTC"};
    for (int i = 0; i < 4; ++i) {
        const std::string id = "p" + std::to_string(i);
        const auto d = DiagnosisVector::parse(labels[i]);
        m.entries.push_back({id, id + ".png", d, std::nullopt, std::nullopt, std::nullopt});
        LabelScores s{};
        for (std::size_t l = 0; l < kLabelCount; ++l) s[l] = d.flags[l] ? 0.8 : 0.2;
        t.ids.push_back(id);
        t.scores.push_back(s);
    }
    write_manifest(m, tmp / "manifest.json");
    write_predictions(t, tmp / "preds.csv");

    const std::string preds = (tmp / "preds.csv").string();
    const std::string manifest = (tmp / "manifest.json").string();
    const std::string out = (tmp / "metrics").string();
    std::vector<std::string> args{"ecgpaper", "evaluate", "--predictions", preds, "--manifest", manifest, "--out", out};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    EXPECT_EQ(run(static_cast<int>(argv.size()), argv.data()), kExitOk);
    const json metrics = json::parse(read_text(tmp / "metrics" / "metrics.json"));
    EXPECT_DOUBLE_EQ(metrics["macro_auroc"].get<double>(), 1.0);

    std::vector<std::string> bad{"ecgpaper", "evaluate", "--predictions", (tmp / "none.csv").string(), "--manifest", manifest};
    std::vector<char*> badv;
    for (auto& a : bad) badv.push_back(a.data());
    EXPECT_EQ(run(static_cast<int>(badv.size()), badv.data()), kExitUsage);

    std::vector<std::string> unknown{"ecgpaper", "frobnicate"};
    std::vector<char*> unknownv;
    for (auto& a : unknown) unknownv.push_back(a.data());
    EXPECT_EQ(run(static_cast<int>(unknownv.size()), unknownv.data()), kExitUsage);
}
