#pragma once

#include <optional>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "instances.hpp"
#include "mixture.hpp"
#include "optim.hpp"
#include "streams.hpp"

namespace tmoe {

struct TrainConfig {
    double lr = 2e-3;
    int epochs = 50;
    int batch = 32;  // gradient accumulation count
    double clip_norm = 10.0;
    int patience = 10;  // epochs without dev improvement before stopping
    uint64_t seed = 1;
};

// Binary cross-entropy on the tape; p is clamped to [1e-7, 1-1e-7] first.
TensorId bce_loss(Tape& tape, TensorId prob, int y);
double bce_value(double p, int y);

struct EpochStats {
    int epoch = 0;             // 1-based
    double mean_train_loss = 0.0;
    double dev_accuracy = 0.0;
};

struct EvalReport {
    int questions = 0;
    double accuracy = 0.0;  // chosen index matches gold
    std::vector<std::pair<std::string, double>> per_stream_accuracy;
    double agreement_rate = 0.0;  // all streams share an argmax
    int low_margin_count = 0;     // (stream, question) pairs with |p1-p2| < 0.1
};

// A trained stream plus everything needed to encode raw text against it.
struct LoadedStream {
    StreamParams stream;
    Resources resources;
};

struct QuestionGroup {
    std::string qid;
    std::array<Example, 2> choices;  // file order: "#0" then "#1"
    int gold = 0;
};

// Groups instances by question id; every question must have exactly two
// choice instances and exactly one with y = 1.
std::vector<QuestionGroup> group_questions(const std::vector<Example>& examples);
bool groupable(const std::vector<Example>& examples);

std::vector<StreamPrediction> predict_question(std::vector<LoadedStream>& streams,
                                               const QuestionGroup& group);

// Forwards both choices of every question through every stream (evaluation
// mode). workers > 1 fans questions out across threads; results are merged
// in question order.
std::vector<std::vector<StreamPrediction>> predict_all(std::vector<LoadedStream>& streams,
                                                       const std::vector<QuestionGroup>& groups,
                                                       int workers = 1);

// Combines per-question predictions via the mixture rule and scores against
// gold.
EvalReport score_predictions(const std::vector<std::vector<StreamPrediction>>& preds,
                             const std::vector<QuestionGroup>& groups, MixtureMode mode);

EvalReport evaluate(std::vector<LoadedStream>& streams, const std::vector<QuestionGroup>& groups,
                    MixtureMode mode, int workers = 1);

struct TrainResult {
    StreamParams best;  // best-dev parameters (last epoch when dev is empty)
    int best_epoch = 0;
    double best_dev_accuracy = 0.0;
    std::vector<EpochStats> epochs;
};

// Epoch loop: seeded shuffle, per-instance forward/backward, gradient
// accumulation over `batch` instances (mean), Adam step, dev evaluation.
// Dev accuracy is question accuracy when dev groups into two-choice
// questions, otherwise plain binary accuracy. Stops early after `patience`
// epochs without improvement, or once dev accuracy reaches 1.
TrainResult train_stream(StreamKind kind, const std::vector<Example>& train,
                         const std::vector<Example>& dev, const Resources& resources,
                         const WordVectorTable& word_vectors, const StreamConfig& stream_config,
                         const TrainConfig& train_config,
                         const ParamSet* init_params_opt = nullptr,
                         const Logger& log = nullptr);

}  // namespace tmoe
