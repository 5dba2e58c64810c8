#include "ablation.hpp"

#include <algorithm>
#include <cstdio>

#include "error.hpp"

namespace tmoe {

std::string to_string(AblationFlag flag) {
    switch (flag) {
        case AblationFlag::Pos: return "pos";
        case AblationFlag::Ne: return "ne";
        case AblationFlag::Handcrafted: return "handcrafted";
        case AblationFlag::Relations: return "relations";
        case AblationFlag::WordVectors: return "word_vectors";
    }
    return "?";
}

AblationFlag parse_ablation_flag(const std::string& name) {
    if (name == "pos") return AblationFlag::Pos;
    if (name == "ne") return AblationFlag::Ne;
    if (name == "handcrafted") return AblationFlag::Handcrafted;
    if (name == "relations") return AblationFlag::Relations;
    if (name == "word_vectors") return AblationFlag::WordVectors;
    throw UsageError("unknown ablation flag '" + name +
                     "' (expected pos, ne, handcrafted, relations or word_vectors)");
}

namespace {

double run_once(const AblationSetup& setup, const StreamConfig& cfg, bool pretrained_vectors,
                const Logger& log) {
    const WordVectorTable vectors =
        pretrained_vectors
            ? setup.pretrained_vectors
            : random_word_vectors(setup.resources.vocab, cfg.d_word, cfg.seed);
    TrainResult trained = train_stream(setup.kind, setup.train, setup.dev, setup.resources,
                                       vectors, cfg, setup.train_config, nullptr, log);
    std::vector<LoadedStream> streams;
    streams.push_back(LoadedStream{std::move(trained.best), setup.resources});
    EvalReport report =
        evaluate(streams, group_questions(setup.dev), MixtureMode::WeightedSum, 1);
    return report.accuracy;
}

}  // namespace

std::vector<AblationRow> ablation_run(const AblationSetup& setup, const Logger& log) {
    std::vector<AblationRow> rows;
    rows.push_back({"all_on", run_once(setup, setup.stream_config, true, log)});
    for (AblationFlag flag : setup.flags) {
        StreamConfig cfg = setup.stream_config;
        bool pretrained = true;
        switch (flag) {
            case AblationFlag::Pos: cfg.use_pos = false; break;
            case AblationFlag::Ne: cfg.use_ne = false; break;
            case AblationFlag::Handcrafted: cfg.use_handcrafted = false; break;
            case AblationFlag::Relations: cfg.use_rel = false; break;
            case AblationFlag::WordVectors: pretrained = false; break;
        }
        rows.push_back({"no_" + to_string(flag), run_once(setup, cfg, pretrained, log)});
    }
    return rows;
}

std::string ablation_machine_rows(const std::vector<AblationRow>& rows) {
    std::string out;
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", row.dev_accuracy);
        out += row.name + "\t" + buf + "\n";
    }
    return out;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    size_t width = std::string("configuration").size();
    for (const auto& row : rows) width = std::max(width, row.name.size());
    std::string out = "configuration";
    out += std::string(width - 13 + 2, ' ') + "dev_accuracy\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", row.dev_accuracy);
        out += row.name + std::string(width - row.name.size() + 2, ' ') + buf + "\n";
    }
    return out;
}

}  // namespace tmoe
