#include "mixture.hpp"

#include <cmath>

#include "error.hpp"

namespace tmoe {

namespace {

void validate(const std::vector<StreamPrediction>& preds, const char* op) {
    if (preds.empty()) throw DataError(std::string(op) + ": empty prediction list");
    for (const auto& p : preds) {
        if (!std::isfinite(p.p1) || !std::isfinite(p.p2) || p.p1 <= 0.0 || p.p1 >= 1.0 ||
            p.p2 <= 0.0 || p.p2 >= 1.0)
            throw DataError(std::string(op) + ": probabilities must lie strictly in (0,1)");
    }
}

int argmax_pair(double p1, double p2) { return p2 > p1 ? 1 : 0; }

}  // namespace

MixtureMode parse_mixture_mode(const std::string& name) {
    if (name == "weighted") return MixtureMode::WeightedSum;
    if (name == "hard") return MixtureMode::HardChoice;
    throw UsageError("unknown mixture mode '" + name + "' (expected weighted or hard)");
}

std::string to_string(MixtureMode mode) {
    return mode == MixtureMode::WeightedSum ? "weighted" : "hard";
}

double confidence_weight(const StreamPrediction& pred) {
    return std::fabs(pred.p1 - pred.p2);
}

CombinedPrediction combine_weighted(const std::vector<StreamPrediction>& preds) {
    validate(preds, "combine_weighted");
    double total = 0.0;
    for (const auto& p : preds) total += confidence_weight(p);

    CombinedPrediction out;
    if (total < 1e-12) {
        // No stream separates the choices; average them equally.
        for (const auto& p : preds) {
            out.p1 += p.p1;
            out.p2 += p.p2;
        }
        out.p1 /= static_cast<double>(preds.size());
        out.p2 /= static_cast<double>(preds.size());
    } else {
        for (const auto& p : preds) {
            const double w = confidence_weight(p);
            out.p1 += w * p.p1;
            out.p2 += w * p.p2;
        }
        out.p1 /= total;
        out.p2 /= total;
    }
    out.chosen = argmax_pair(out.p1, out.p2);
    return out;
}

CombinedPrediction combine_hard(const std::vector<StreamPrediction>& preds) {
    validate(preds, "combine_hard");
    size_t best = 0;
    double best_w = confidence_weight(preds[0]);
    for (size_t i = 1; i < preds.size(); ++i) {
        const double w = confidence_weight(preds[i]);
        if (w > best_w) {
            best = i;
            best_w = w;
        }
    }
    CombinedPrediction out;
    out.p1 = preds[best].p1;
    out.p2 = preds[best].p2;
    out.chosen = argmax_pair(out.p1, out.p2);
    return out;
}

CombinedPrediction combine(MixtureMode mode, const std::vector<StreamPrediction>& preds) {
    return mode == MixtureMode::WeightedSum ? combine_weighted(preds) : combine_hard(preds);
}

}  // namespace tmoe
