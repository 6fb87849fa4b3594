#include "ecgpaper/error.hpp"
#include "ecgpaper/eval.hpp"
#include "ecgpaper/predictions.hpp"
#include "ecgpaper/rng.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

using namespace ecgpaper;

namespace {

double auc(std::vector<double> s, std::vector<std::uint8_t> y) {
    return auroc(s, y);
}

} // namespace

TEST(Auroc, WorkedExamples) {
    EXPECT_DOUBLE_EQ(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(auc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(auc({0.7, 0.3, 0.5, 0.2}, {1, 0, 0, 1}), 0.5);
    EXPECT_DOUBLE_EQ(auc({0.4, 0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0, 0}), 0.5);
}

TEST(Auroc, SingleClassRejected) {
    try {
        (void)auc({0.1, 0.2}, {1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingleClass);
    }
    EXPECT_THROW((void)auc({0.1, 0.2}, {0, 0}), Error);
    EXPECT_THROW((void)auc({0.1}, {0, 1}), Error);
}

TEST(Auroc, EqualsPairwiseCountWithTies) {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(150);
        std::vector<double> s(n);
        std::vector<std::uint8_t> y(n);
        const auto levels = 1 + rng.below(12); // few levels -> many ties
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(levels)) / 10.0;
            y[i] = static_cast<std::uint8_t>(rng.below(2));
        }
        y[0] = 0;
        y[1] = 1;
        ASSERT_EQ(auroc(s, y), oracle::pairwise_auroc(s, y));
    }
}

TEST(Auroc, InvariantUnderMonotoneTransform) {
    Rng rng(8);
    std::vector<double> s(300), t(300);
    std::vector<std::uint8_t> y(300);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = rng.uniform();
        t[i] = std::exp(3.0 * s[i]) - 7.0;
        y[i] = rng.uniform() < 0.3 + 0.4 * s[i];
    }
    EXPECT_EQ(auroc(s, y), auroc(t, y));
}

TEST(MacroAuroc, MeanOfLabelsAndNamesSingleClassLabel) {
    ScoredPredictions p;
    // MI perfect, AF inverted, others all tied.
    const int n = 4;
    for (int i = 0; i < n; ++i) {
        DiagnosisVector d;
        const bool pos = i < 2;
        d.flags = {static_cast<std::uint8_t>(pos), static_cast<std::uint8_t>(pos), static_cast<std::uint8_t>(pos),
                   static_cast<std::uint8_t>(pos), static_cast<std::uint8_t>(pos)};
        p.truths.push_back(d);
        p.scores.push_back({pos ? 0.9 : 0.1, pos ? 0.1 : 0.9, 0.5, 0.5, 0.5});
    }
    const AurocSummary s = macro_auroc(p);
    EXPECT_DOUBLE_EQ(s.per_label[0], 1.0);
    EXPECT_DOUBLE_EQ(s.per_label[1], 0.0);
    EXPECT_DOUBLE_EQ(s.macro, 0.5);

    for (auto& t : p.truths) t.flags[2] = 1;
    try {
        (void)macro_auroc(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingleClass);
        EXPECT_NE(e.detail().find("HYP"), std::string::npos);
    }
}

TEST(Weights, InverseOfPositiveRate) {
    const LabelCounts counts{3819, 1033, 1850, 3137, 3640};
    const LabelScores w = positive_weights(counts, 15009);
    const LabelScores r = positive_rates(counts, 15009);
    EXPECT_NEAR(w[0], 3.930, 5e-4);
    EXPECT_NEAR(w[1], 14.5295, 5e-4);
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        EXPECT_EQ(w[l], 15009.0 / static_cast<double>(counts[l]));
        EXPECT_NEAR(w[l] * r[l], 1.0, 1e-15);
    }
    EXPECT_DOUBLE_EQ(positive_weights({5, 5, 5, 5, 5}, 5)[3], 1.0);
    try {
        (void)positive_weights({1, 0, 1, 1, 1}, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ZeroPositives);
    }
}

TEST(Bce, HandValues) {
    EXPECT_NEAR(weighted_bce(1.0 - kBceEpsilon, 1, 1.0), 0.0, 1e-6);
    EXPECT_NEAR(weighted_bce(0.5, 1, 2.0), 2.0 * std::log(2.0), 1e-12);
    EXPECT_NEAR(weighted_bce(0.5, 0, 7.0), std::log(2.0), 1e-12);
    EXPECT_TRUE(std::isfinite(weighted_bce(0.0, 1, 1.0)));
    EXPECT_NEAR(weighted_bce(0.0, 1, 1.0), -std::log(kBceEpsilon), 1e-9);
}

TEST(Bce, UnitWeightIsPlainBceAndBatchIsMean) {
    ScoredPredictions p;
    p.scores = {{0.2, 0.7, 0.5, 0.9, 0.1}, {0.6, 0.4, 0.3, 0.8, 0.99}};
    p.truths = {DiagnosisVector::parse("AF;CD"), DiagnosisVector::parse("MI;STTC")};
    double plain = 0;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t l = 0; l < kLabelCount; ++l) {
            const double q = p.scores[i][l];
            plain += p.truths[i].flags[l] ? -std::log(q) : -std::log(1 - q);
        }
    }
    EXPECT_NEAR(batch_weighted_bce(p, {1, 1, 1, 1, 1}), plain / 10.0, 1e-12);
}

TEST(Cosine, EndpointsAndHandValue) {
    EXPECT_DOUBLE_EQ(cosine_lambda(0.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(cosine_lambda(0.0, 3.0), 1.0);
    EXPECT_NEAR(cosine_lambda(1.0, 0.5), 0.0, 1e-15);
    EXPECT_NEAR(cosine_lambda(0.25, 0.5), 0.5 * (1 + std::cos(std::numbers::pi / 4)), 1e-15);
    EXPECT_NEAR(cosine_lambda(0.25, 0.5), 0.85355, 1e-5);
    for (int i = 0; i <= 100; ++i) {
        const double v = cosine_lambda(i / 100.0, 1.7);
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
    }
    EXPECT_THROW((void)cosine_lambda(1.5, 0.5), Error);
}

TEST(HardVote, MajorityRuleAndFractions) {
    EXPECT_EQ(majority_threshold(5), 3u);
    EXPECT_EQ(majority_threshold(4), 3u);
    EXPECT_EQ(majority_threshold(1), 1u);

    VoteMatrix five(5, 2);
    for (std::size_t m = 0; m < 3; ++m) five.set(m, 0, 0, true);
    const VoteResult r = hard_vote(five);
    EXPECT_TRUE(r.predictions[0][std::size_t{0}]);
    EXPECT_DOUBLE_EQ(r.fractions[0][0], 0.6);
    EXPECT_FALSE(r.predictions[1][std::size_t{0}]);
    EXPECT_DOUBLE_EQ(r.fractions[1][0], 0.0);

    VoteMatrix four(4, 1);
    four.set(0, 0, 2, true);
    four.set(1, 0, 2, true);
    EXPECT_FALSE(hard_vote(four).predictions[0][std::size_t{2}]);
}

TEST(HardVote, OddKMatchesFractionAboveHalf) {
    Rng rng(3);
    VoteMatrix v(7, 50);
    for (std::size_t m = 0; m < 7; ++m) {
        for (std::size_t s = 0; s < 50; ++s) {
            for (std::size_t l = 0; l < kLabelCount; ++l) v.set(m, s, l, rng.uniform() < 0.5);
        }
    }
    const VoteResult r = hard_vote(v);
    for (std::size_t s = 0; s < 50; ++s) {
        for (std::size_t l = 0; l < kLabelCount; ++l) ASSERT_EQ(r.predictions[s][l], r.fractions[s][l] > 0.5);
    }
}

TEST(SoftVote, MeanProbabilityAndBinarisation) {
    const std::vector<std::vector<LabelScores>> models{{{0.2, 0.9, 0.5, 0.0, 1.0}}, {{0.4, 0.1, 0.5, 0.0, 1.0}}};
    const auto mean = mean_probability(models);
    EXPECT_DOUBLE_EQ(mean[0][0], 0.3);
    EXPECT_DOUBLE_EQ(mean[0][1], 0.5);
    const VoteMatrix v = votes_from_probabilities(models);
    EXPECT_EQ(v.at(0, 0, 1), 1);
    EXPECT_EQ(v.at(1, 0, 1), 0);
    EXPECT_EQ(v.at(1, 0, 2), 1); // 0.5 >= 0.5
}

TEST(Predictions, CsvRoundTripAndColumnOrder) {
    PredictionTable t{{"a", "b"}, {{0.1, 0.2, 0.3, 0.4, 0.5}, {1.0, 0.0, 0.25, 0.125, 0.75}}};
    EXPECT_EQ(parse_predictions(predictions_to_csv(t)), t);
    const auto shuffled = parse_predictions("STTC,extra,id,CD,HYP,AF,MI\r\n0.5,zzz,a,0.4,0.3,0.2,0.1\r\n");
    EXPECT_EQ(shuffled.ids[0], "a");
    EXPECT_EQ(shuffled.scores[0], (LabelScores{0.1, 0.2, 0.3, 0.4, 0.5}));
}

TEST(Predictions, Errors) {
    auto code = [](const std::string& csv) {
        try {
            (void)parse_predictions(csv);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::InvalidArgument;
    };
    EXPECT_EQ(code("id,MI,AF,HYP,CD\nx,0,0,0,0\n"), Errc::BadHeader);
    EXPECT_EQ(code("id,MI,AF,HYP,CD,STTC\nx,0,0,0,0,1.5\n"), Errc::MalformedCsv);
    EXPECT_EQ(code("id,MI,AF,HYP,CD,STTC\nx,0,0,0,0\n"), Errc::MalformedCsv);
    EXPECT_EQ(code("id,MI,AF,HYP,CD,STTC\nx,0,0,0,0,0\nx,0,0,0,0,0\n"), Errc::MalformedCsv);
    EXPECT_EQ(code("id,MI,AF,HYP,CD,STTC\nx,0,0,nan,0,0\n"), Errc::MalformedCsv);
}

TEST(Evaluate, PerfectPredictionsAndMissingId) {
    DatasetManifest m;
    PredictionTable t;
    const char* labels[] = {"MI;AF;HYP;CD;STTC", "", "MI;HYP", "AF;CD;STTC"};
    for (int i = 0; i < 4; ++i) {
        const std::string id = "e" + std::to_string(i);
        const DiagnosisVector d = DiagnosisVector::parse(labels[i]);
        m.entries.push_back({id, id + ".png", d, std::nullopt, std::nullopt, std::nullopt});
        LabelScores s{};
        for (std::size_t l = 0; l < kLabelCount; ++l) s[l] = d.flags[l];
        t.ids.push_back(id);
        t.scores.push_back(s);
    }
    t.ids.push_back("unused");
    t.scores.push_back({});
    const Evaluation e = evaluate(t, m);
    EXPECT_DOUBLE_EQ(e.auroc.macro, 1.0);
    EXPECT_EQ(e.samples, 4u);
    EXPECT_EQ(e.positives[0], 2u);
    const auto j = evaluation_to_json(e);
    EXPECT_DOUBLE_EQ(j["macro_auroc"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(j["auroc"]["STTC"].get<double>(), 1.0);

    t.ids.erase(t.ids.begin());
    t.scores.erase(t.scores.begin());
    try {
        (void)evaluate(t, m);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), Errc::MissingPrediction);
        EXPECT_EQ(err.detail(), "e0");
    }
}
