#include "ecgpaper/eval.hpp"

#include "ecgpaper/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace ecgpaper {

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw Error(Errc::ShapeMismatch, "scores and labels differ in length");
    std::uint64_t pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
        if (!std::isfinite(scores[i])) throw Error(Errc::InvalidArgument, "scores must be finite");
        pos += labels[i];
    }
    const std::uint64_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw Error(Errc::SingleClass, pos == 0 ? "no positive samples" : "no negative samples");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the positive rank sum, kept integral: a tie group spanning ranks
    // lo+1..hi gives each member the midrank (lo + 1 + hi) / 2.
    std::uint64_t rank_sum2 = 0;
    for (std::size_t lo = 0; lo < order.size();) {
        std::size_t hi = lo + 1;
        while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
        std::uint64_t group_pos = 0;
        for (std::size_t k = lo; k < hi; ++k) group_pos += labels[order[k]];
        rank_sum2 += group_pos * (lo + 1 + hi);
        lo = hi;
    }
    const std::uint64_t u2 = rank_sum2 - pos * (pos + 1);
    return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

AurocSummary macro_auroc(const ScoredPredictions& preds) {
    if (preds.scores.size() != preds.truths.size()) throw Error(Errc::ShapeMismatch, "scores and truths differ in length");
    AurocSummary out;
    std::vector<double> s(preds.scores.size());
    std::vector<std::uint8_t> y(preds.scores.size());
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] = preds.scores[i][l];
            y[i] = preds.truths[i].flags[l];
        }
        try {
            out.per_label[l] = auroc(s, y);
        } catch (const Error& e) {
            if (e.code() != Errc::SingleClass) throw;
            throw Error(Errc::SingleClass, std::string(kLabelNames[l]) + ": " + e.detail());
        }
    }
    out.macro = std::accumulate(out.per_label.begin(), out.per_label.end(), 0.0) / kLabelCount;
    return out;
}

LabelCounts count_positives(std::span<const DiagnosisVector> truths) {
    LabelCounts c{};
    for (const auto& t : truths) {
        for (std::size_t l = 0; l < kLabelCount; ++l) c[l] += t.flags[l] ? 1 : 0;
    }
    return c;
}

LabelScores positive_rates(const LabelCounts& counts, std::uint64_t total) {
    if (total == 0) throw Error(Errc::InvalidArgument, "total must be positive");
    LabelScores r{};
    for (std::size_t l = 0; l < kLabelCount; ++l) r[l] = static_cast<double>(counts[l]) / static_cast<double>(total);
    return r;
}

LabelScores positive_weights(const LabelCounts& counts, std::uint64_t total) {
    LabelScores w{};
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        if (counts[l] == 0) throw Error(Errc::ZeroPositives, std::string(kLabelNames[l]) + " has no positive samples");
        if (counts[l] > total) throw Error(Errc::InvalidArgument, std::string(kLabelNames[l]) + " count exceeds total");
        w[l] = static_cast<double>(total) / static_cast<double>(counts[l]);
    }
    return w;
}

double weighted_bce(double prob, int label, double pos_weight) {
    if (label != 0 && label != 1) throw Error(Errc::InvalidArgument, "label must be 0 or 1");
    if (!(pos_weight > 0.0)) throw Error(Errc::InvalidArgument, "pos_weight must be positive");
    if (std::isnan(prob)) throw Error(Errc::InvalidArgument, "probability is NaN");
    const double p = std::clamp(prob, kBceEpsilon, 1.0 - kBceEpsilon);
    return label == 1 ? -pos_weight * std::log(p) : -std::log(1.0 - p);
}

double batch_weighted_bce(const ScoredPredictions& preds, const LabelScores& pos_weights) {
    if (preds.scores.size() != preds.truths.size()) throw Error(Errc::ShapeMismatch, "scores and truths differ in length");
    if (preds.scores.empty()) throw Error(Errc::InvalidArgument, "empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.scores.size(); ++i) {
        for (std::size_t l = 0; l < kLabelCount; ++l) {
            sum += weighted_bce(preds.scores[i][l], preds.truths[i].flags[l], pos_weights[l]);
        }
    }
    return sum / static_cast<double>(preds.scores.size() * kLabelCount);
}

double cosine_lambda(double progress, double num_cycles) {
    if (!(progress >= 0.0 && progress <= 1.0)) throw Error(Errc::InvalidArgument, "progress must lie in [0, 1]");
    if (!(num_cycles > 0.0)) throw Error(Errc::InvalidArgument, "num_cycles must be positive");
    return std::clamp(0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * num_cycles * progress)), 0.0, 1.0);
}

VoteMatrix::VoteMatrix(std::size_t models, std::size_t samples)
    : models_(models), samples_(samples), votes_(models * samples * kLabelCount, 0) {
    if (models == 0) throw Error(Errc::InvalidArgument, "a vote needs at least one model");
}

std::size_t majority_threshold(std::size_t models) {
    return (models + 2) / 2;
}

VoteResult hard_vote(const VoteMatrix& votes) {
    const std::size_t k = votes.models();
    const std::size_t need = majority_threshold(k);
    VoteResult out;
    out.predictions.resize(votes.samples());
    out.fractions.resize(votes.samples());
    for (std::size_t s = 0; s < votes.samples(); ++s) {
        for (std::size_t l = 0; l < kLabelCount; ++l) {
            std::size_t n = 0;
            for (std::size_t m = 0; m < k; ++m) n += votes.at(m, s, l);
            out.predictions[s].flags[l] = n >= need ? 1 : 0;
            out.fractions[s][l] = static_cast<double>(n) / static_cast<double>(k);
        }
    }
    return out;
}

namespace {

std::size_t common_length(std::span<const std::vector<LabelScores>> per_model) {
    if (per_model.empty()) throw Error(Errc::InvalidArgument, "no models");
    const std::size_t n = per_model.front().size();
    for (const auto& m : per_model) {
        if (m.size() != n) throw Error(Errc::ShapeMismatch, "models disagree on sample count");
    }
    return n;
}

} // namespace

VoteMatrix votes_from_probabilities(std::span<const std::vector<LabelScores>> per_model, double threshold) {
    const std::size_t n = common_length(per_model);
    VoteMatrix v(per_model.size(), n);
    for (std::size_t m = 0; m < per_model.size(); ++m) {
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t l = 0; l < kLabelCount; ++l) v.set(m, s, l, per_model[m][s][l] >= threshold);
        }
    }
    return v;
}

std::vector<LabelScores> mean_probability(std::span<const std::vector<LabelScores>> per_model) {
    const std::size_t n = common_length(per_model);
    std::vector<LabelScores> out(n, LabelScores{});
    for (const auto& m : per_model) {
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t l = 0; l < kLabelCount; ++l) out[s][l] += m[s][l];
        }
    }
    const double k = static_cast<double>(per_model.size());
    for (auto& row : out) {
        for (double& v : row) v /= k;
    }
    return out;
}

} // namespace ecgpaper
