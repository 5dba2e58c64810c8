#pragma once

#include <string>
#include <vector>

namespace tmoe {

// One stream's pair of independent binary predictions for a question. The
// two probabilities need not sum to 1.
struct StreamPrediction {
    std::string name;  // stream label, e.g. "qcn"
    double p1 = 0.0;   // P(choice 1 correct)
    double p2 = 0.0;   // P(choice 2 correct)
};

enum class MixtureMode { WeightedSum, HardChoice };

MixtureMode parse_mixture_mode(const std::string& name);  // UsageError on unknown
std::string to_string(MixtureMode mode);

struct CombinedPrediction {
    double p1 = 0.0;
    double p2 = 0.0;
    int chosen = 0;  // 0-based choice index; ties go to choice 1
};

// |p1 - p2|: how decisively the stream separates the two choices.
double confidence_weight(const StreamPrediction& pred);

// Confidence-weighted average, normalized by the weight sum; falls back to
// uniform weights when the total weight is below 1e-12.
CombinedPrediction combine_weighted(const std::vector<StreamPrediction>& preds);

// Takes the most confident stream outright (ties: earliest in input order).
CombinedPrediction combine_hard(const std::vector<StreamPrediction>& preds);

CombinedPrediction combine(MixtureMode mode, const std::vector<StreamPrediction>& preds);

}  // namespace tmoe
