#pragma once

#include "ecgpaper/waveform.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace ecgpaper {

using LabelScores = std::array<double, kLabelCount>;

/// Area under the ROC curve as the Mann-Whitney statistic with midranks for
/// ties. Labels are 0/1. Throws Error(SingleClass) when either class is absent.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Per-sample scores aligned with the truth vectors.
struct ScoredPredictions {
    std::vector<LabelScores> scores;
    std::vector<DiagnosisVector> truths;
};

struct AurocSummary {
    LabelScores per_label{};
    double macro = 0.0;
};

/// Unweighted mean of the five per-label AUROCs.
AurocSummary macro_auroc(const ScoredPredictions& preds);

using LabelCounts = std::array<std::uint64_t, kLabelCount>;

/// Positive count of each label over `truths`.
LabelCounts count_positives(std::span<const DiagnosisVector> truths);

/// count / total per label, in percent-free fraction form.
LabelScores positive_rates(const LabelCounts& counts, std::uint64_t total);

/// total / count per label. Throws Error(ZeroPositives) for an empty label.
LabelScores positive_weights(const LabelCounts& counts, std::uint64_t total);

inline constexpr double kBceEpsilon = 1e-7;

/// -[w * y * ln p + (1 - y) * ln(1 - p)] with p clamped to [eps, 1 - eps].
double weighted_bce(double prob, int label, double pos_weight);

/// Mean of weighted_bce over every sample and label.
double batch_weighted_bce(const ScoredPredictions& preds, const LabelScores& pos_weights);

/// 0.5 * (1 + cos(2 pi * cycles * progress)).
double cosine_lambda(double progress, double num_cycles);

/// k models x n samples x 5 labels of binary votes.
class VoteMatrix {
public:
    VoteMatrix(std::size_t models, std::size_t samples);

    std::size_t models() const { return models_; }
    std::size_t samples() const { return samples_; }

    std::uint8_t at(std::size_t model, std::size_t sample, std::size_t label) const { return votes_[index(model, sample, label)]; }
    void set(std::size_t model, std::size_t sample, std::size_t label, bool vote) {
        votes_[index(model, sample, label)] = vote ? 1 : 0;
    }

private:
    std::size_t index(std::size_t m, std::size_t s, std::size_t l) const { return (m * samples_ + s) * kLabelCount + l; }

    std::size_t models_;
    std::size_t samples_;
    std::vector<std::uint8_t> votes_;
};

/// Votes needed for a positive: ceil((k + 1) / 2), so an even split is negative.
std::size_t majority_threshold(std::size_t models);

struct VoteResult {
    std::vector<DiagnosisVector> predictions;
    /// votes / k, usable as a ranking score.
    std::vector<LabelScores> fractions;
};

VoteResult hard_vote(const VoteMatrix& votes);

/// Binarises each model's probabilities at `threshold` (p >= threshold).
VoteMatrix votes_from_probabilities(std::span<const std::vector<LabelScores>> per_model, double threshold = 0.5);

/// Soft-vote alternative: mean probability across models.
std::vector<LabelScores> mean_probability(std::span<const std::vector<LabelScores>> per_model);

} // namespace ecgpaper
