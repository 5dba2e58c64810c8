#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "error.hpp"

namespace tmoe {

namespace {

constexpr double kProbFloor = 1e-7;

void log_to(const Logger& log, const std::string& msg) {
    if (log) log(msg);
}

}  // namespace

TensorId bce_loss(Tape& tape, TensorId prob, int y) {
    const Tensor& p = tape.value(prob);
    if (p.shape != std::vector<int>{1})
        throw ShapeError("bce_loss: probability must have shape [1], got " + shape_str(p.shape));
    TensorId clamped = tape.clamp(prob, kProbFloor, 1.0 - kProbFloor);
    TensorId one = tape.constant(Tensor::scalar(1.0));
    TensorId pos = tape.scale(tape.log(clamped), -static_cast<double>(y));
    TensorId neg = tape.scale(tape.log(tape.sub(one, clamped)), -(1.0 - static_cast<double>(y)));
    return tape.add(pos, neg);
}

double bce_value(double p, int y) {
    p = std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

std::vector<QuestionGroup> group_questions(const std::vector<Example>& examples) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const Example*>> by_qid;
    for (const auto& ex : examples) {
        const std::string qid = question_id_of(ex.raw.id);
        auto [it, fresh] = by_qid.try_emplace(qid);
        if (fresh) order.push_back(qid);
        it->second.push_back(&ex);
    }
    std::vector<QuestionGroup> groups;
    groups.reserve(order.size());
    for (const auto& qid : order) {
        const auto& members = by_qid[qid];
        if (members.size() != 2)
            throw DataError("question '" + qid + "' has " + std::to_string(members.size()) +
                            " choice instances, expected 2");
        QuestionGroup g;
        g.qid = qid;
        g.choices = {*members[0], *members[1]};
        if (members[0]->raw.id > members[1]->raw.id) std::swap(g.choices[0], g.choices[1]);
        const int pos = (g.choices[0].raw.y == 1 ? 1 : 0) + (g.choices[1].raw.y == 1 ? 1 : 0);
        if (pos != 1)
            throw DataError("question '" + qid + "' must have exactly one correct choice");
        g.gold = g.choices[0].raw.y == 1 ? 0 : 1;
        groups.push_back(std::move(g));
    }
    return groups;
}

bool groupable(const std::vector<Example>& examples) {
    std::map<std::string, int> sizes;
    for (const auto& ex : examples) ++sizes[question_id_of(ex.raw.id)];
    for (const auto& [qid, n] : sizes)
        if (n != 2) return false;
    return !examples.empty();
}

std::vector<StreamPrediction> predict_question(std::vector<LoadedStream>& streams,
                                               const QuestionGroup& group) {
    std::vector<StreamPrediction> preds;
    preds.reserve(streams.size());
    for (size_t s = 0; s < streams.size(); ++s) {
        auto& ls = streams[s];
        StreamPrediction pred;
        pred.name = to_string(ls.stream.kind);
        const EncodedInstance e1 =
            encode_instance(group.choices[0].raw, ls.resources, &group.choices[0].tags);
        const EncodedInstance e2 =
            encode_instance(group.choices[1].raw, ls.resources, &group.choices[1].tags);
        pred.p1 = stream_predict(ls.stream, e1);
        pred.p2 = stream_predict(ls.stream, e2);
        preds.push_back(std::move(pred));
    }
    return preds;
}

std::vector<std::vector<StreamPrediction>> predict_all(std::vector<LoadedStream>& streams,
                                                       const std::vector<QuestionGroup>& groups,
                                                       int workers) {
    if (streams.empty()) throw DataError("evaluate: no streams");
    if (groups.empty()) throw DataError("evaluate: no questions");

    const size_t n = groups.size();
    std::vector<std::vector<StreamPrediction>> all_preds(n);
    auto run_range = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) all_preds[i] = predict_question(streams, groups[i]);
    };
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (nw == 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const size_t chunk = (n + static_cast<size_t>(nw) - 1) / static_cast<size_t>(nw);
        for (int w = 0; w < nw; ++w) {
            const size_t lo = static_cast<size_t>(w) * chunk;
            const size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    return all_preds;
}

EvalReport score_predictions(const std::vector<std::vector<StreamPrediction>>& preds,
                             const std::vector<QuestionGroup>& groups, MixtureMode mode) {
    const size_t n = groups.size();
    if (preds.size() != n) throw DataError("score_predictions: prediction/question mismatch");

    EvalReport report;
    report.questions = static_cast<int>(n);
    std::vector<int> stream_correct(preds[0].size(), 0);
    int correct = 0, agree = 0;
    for (size_t i = 0; i < n; ++i) {
        const auto& row = preds[i];
        const CombinedPrediction combined = combine(mode, row);
        if (combined.chosen == groups[i].gold) ++correct;

        bool all_agree = true;
        const int first_arg = row[0].p2 > row[0].p1 ? 1 : 0;
        for (size_t s = 0; s < row.size(); ++s) {
            const int arg = row[s].p2 > row[s].p1 ? 1 : 0;
            if (arg != first_arg) all_agree = false;
            if (arg == groups[i].gold) ++stream_correct[s];
            if (confidence_weight(row[s]) < 0.1) ++report.low_margin_count;
        }
        if (all_agree) ++agree;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    report.agreement_rate = static_cast<double>(agree) / static_cast<double>(n);
    for (size_t s = 0; s < preds[0].size(); ++s)
        report.per_stream_accuracy.emplace_back(
            preds[0][s].name, static_cast<double>(stream_correct[s]) / static_cast<double>(n));
    return report;
}

EvalReport evaluate(std::vector<LoadedStream>& streams, const std::vector<QuestionGroup>& groups,
                    MixtureMode mode, int workers) {
    return score_predictions(predict_all(streams, groups, workers), groups, mode);
}

namespace {

// Dev score used for model selection: question accuracy when the dev set is
// two-choice grouped, binary accuracy otherwise (pre-training corpora).
double dev_score(StreamParams& stream, const std::vector<Example>& dev,
                 const std::vector<EncodedInstance>& dev_encoded,
                 const std::optional<std::vector<QuestionGroup>>& dev_groups) {
    if (dev_groups) {
        int correct = 0;
        for (size_t i = 0; i + 1 < dev_encoded.size(); i += 2) {
            const double p1 = stream_predict(stream, dev_encoded[i]);
            const double p2 = stream_predict(stream, dev_encoded[i + 1]);
            const int arg = p2 > p1 ? 1 : 0;
            const int gold = dev_encoded[i].y == 1 ? 0 : 1;
            if (arg == gold) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(dev_groups->size());
    }
    int correct = 0;
    for (const auto& enc : dev_encoded) {
        const double p = stream_predict(stream, enc);
        if ((p > 0.5) == (enc.y == 1)) ++correct;
    }
    return dev.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(dev.size());
}

}  // namespace

TrainResult train_stream(StreamKind kind, const std::vector<Example>& train,
                         const std::vector<Example>& dev, const Resources& resources,
                         const WordVectorTable& word_vectors, const StreamConfig& stream_config,
                         const TrainConfig& train_config, const ParamSet* init_params_opt,
                         const Logger& log) {
    if (train.empty()) throw DataError("train_stream: empty training set");
    if (train_config.epochs < 0 || train_config.batch < 1)
        throw DataError("train_stream: epochs must be >= 0 and batch >= 1");

    StreamParams stream = init_params(kind, stream_config, word_vectors, resources);
    if (init_params_opt) {
        for (const auto& name : stream.params.names()) {
            if (!init_params_opt->contains(name))
                throw DataError("train_stream: initial parameters missing '" + name + "'");
            const Tensor& src = init_params_opt->at(name);
            Tensor& dst = stream.params.at(name);
            if (src.shape != dst.shape)
                throw ShapeError("train_stream: initial parameter '" + name + "' has shape " +
                                 shape_str(src.shape) + ", expected " + shape_str(dst.shape));
            dst.values = src.values;
        }
    }

    std::vector<EncodedInstance> train_encoded;
    train_encoded.reserve(train.size());
    for (const auto& ex : train) train_encoded.push_back(encode_instance(ex.raw, resources, &ex.tags));

    std::optional<std::vector<QuestionGroup>> dev_groups;
    if (!dev.empty() && groupable(dev)) dev_groups = group_questions(dev);
    std::vector<EncodedInstance> dev_encoded;
    if (dev_groups) {
        for (const auto& g : *dev_groups)
            for (const auto& ex : g.choices)
                dev_encoded.push_back(encode_instance(ex.raw, resources, &ex.tags));
    } else {
        for (const auto& ex : dev) dev_encoded.push_back(encode_instance(ex.raw, resources, &ex.tags));
    }

    AdamConfig adam_cfg;
    adam_cfg.lr = train_config.lr;
    adam_cfg.clip_norm = train_config.clip_norm;
    Adam adam(stream.params, adam_cfg);
    Rng rng(train_config.seed);

    TrainResult result;
    result.best = stream;
    result.best_epoch = 0;
    result.best_dev_accuracy =
        dev.empty() ? 0.0 : dev_score(stream, dev, dev_encoded, dev_groups);
    int stale = 0;

    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;

        size_t cursor = 0;
        while (cursor < order.size()) {
            const size_t batch_end =
                std::min(order.size(), cursor + static_cast<size_t>(train_config.batch));
            GradMap accum;
            for (const auto& name : stream.params.names())
                accum.add(name, Tensor::zeros(stream.params.at(name).shape));
            const double inv = 1.0 / static_cast<double>(batch_end - cursor);
            for (; cursor < batch_end; ++cursor) {
                const EncodedInstance& enc = train_encoded[order[cursor]];
                Tape tape;
                ForwardResult fwd = stream_forward(tape, stream, enc, true, rng);
                TensorId loss = bce_loss(tape, fwd.prob_id, enc.y);
                loss_sum += tape.value(loss).values[0];
                GradMap grads = tape.backward(loss, stream.params);
                for (const auto& name : accum.names()) {
                    auto& acc = accum.at(name).values;
                    const auto& g = grads.at(name).values;
                    for (size_t i = 0; i < acc.size(); ++i) acc[i] += g[i] * inv;
                }
            }
            adam.step(stream.params, accum);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_train_loss = loss_sum / static_cast<double>(train.size());
        stats.dev_accuracy =
            dev.empty() ? 0.0 : dev_score(stream, dev, dev_encoded, dev_groups);
        result.epochs.push_back(stats);
        log_to(log, "epoch " + std::to_string(epoch) + " train_loss " +
                        std::to_string(stats.mean_train_loss) + " dev_acc " +
                        std::to_string(stats.dev_accuracy));

        if (dev.empty()) {
            result.best = stream;
            result.best_epoch = epoch;
        } else if (stats.dev_accuracy > result.best_dev_accuracy) {
            result.best = stream;
            result.best_epoch = epoch;
            result.best_dev_accuracy = stats.dev_accuracy;
            stale = 0;
        } else {
            ++stale;
        }
        if (!dev.empty() && result.best_dev_accuracy >= 1.0) break;
        if (!dev.empty() && stale >= train_config.patience) break;
    }
    if (dev.empty()) result.best_dev_accuracy = 0.0;
    return result;
}

}  // namespace tmoe
