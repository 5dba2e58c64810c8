// Batch driver for the tmoe engine. All work happens behind the C API; this
// binary only maps flags onto engine options.

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tmoe/tmoe.h>

namespace {

// key=value lines, '#' comments. Explicit flags override config values, so
// config entries are pushed to the engine first.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path,
                                                             std::string& error) {
    std::vector<std::pair<std::string, std::string>> out;
    std::ifstream in(path);
    if (!in) {
        error = "cannot open config file '" + path + "'";
        return out;
    }
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            error = path + ":" + std::to_string(line_no) + ": expected key=value";
            return out;
        }
        auto trim = [](std::string s) {
            const size_t b = s.find_first_not_of(" \t");
            const size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            error = path + ":" + std::to_string(line_no) + ": empty key";
            return out;
        }
        out.emplace_back(key, value);
    }
    return out;
}

class Verb {
public:
    Verb(CLI::App& app, const std::string& name, const std::string& desc)
        : name_(name), sub_(app.add_subcommand(name, desc)) {
        config_opt_ = sub_->add_option("--config", config_path_,
                                       "key=value file; explicit flags take precedence");
    }

    void opt(const std::string& key, const std::string& help) {
        auto [it, fresh] = values_.try_emplace(key);
        single_.emplace_back(key, sub_->add_option("--" + key, it->second, help));
    }

    void multi(const std::string& key, const std::string& help) {
        multi_key_ = key;
        multi_opt_ = sub_->add_option("--" + key, multi_values_, help);
    }

    bool parsed() const { return sub_->parsed(); }
    const std::string& name() const { return name_; }

    // Returns false (with a message) only for config-file problems.
    bool push(tmoe_engine* eng, std::string& error) const {
        if (config_opt_->count() > 0) {
            auto entries = read_config(config_path_, error);
            if (!error.empty()) return false;
            for (const auto& [k, v] : entries) tmoe_engine_set(eng, k.c_str(), v.c_str());
        }
        for (const auto& [key, o] : single_)
            if (o->count() > 0) tmoe_engine_set(eng, key.c_str(), values_.at(key).c_str());
        if (multi_opt_ && multi_opt_->count() > 0)
            for (const auto& v : multi_values_) tmoe_engine_set(eng, multi_key_.c_str(), v.c_str());
        return true;
    }

private:
    std::string name_;
    CLI::App* sub_;
    std::string config_path_;
    CLI::Option* config_opt_ = nullptr;
    std::map<std::string, std::string> values_;
    std::vector<std::pair<std::string, CLI::Option*>> single_;
    std::string multi_key_;
    std::vector<std::string> multi_values_;
    CLI::Option* multi_opt_ = nullptr;
};

void add_model_options(Verb& v) {
    v.opt("d-word", "word embedding width (default 100)");
    v.opt("d-h", "LSTM hidden size per direction (default 96)");
    v.opt("d-att", "attention projection width (default: d-word)");
    v.opt("dropout", "dropout rate in [0,1) (default 0.4)");
}

void add_train_options(Verb& v) {
    v.opt("lr", "Adam learning rate (default 2e-3)");
    v.opt("epochs", "training epochs (default 50)");
    v.opt("batch", "gradient accumulation count (default 32)");
    v.opt("clip", "global gradient-norm clip (default 10)");
    v.opt("patience", "early-stop patience in epochs (default 10)");
    v.opt("min-count", "vocabulary frequency threshold (default 1)");
    v.opt("lexicon", "relation lexicon file (head<TAB>tail<TAB>relation)");
    v.opt("vectors", "pretrained word-vector text file");
    v.opt("report", "write the run report to this file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tmoe — mixture-of-experts reading-comprehension engine"};
    app.require_subcommand(1);

    std::vector<Verb> verbs;
    verbs.reserve(7);

    {
        Verb& v = verbs.emplace_back(app, "train", "train one expert stream");
        v.opt("data", "training instance file, JSON lines (required)");
        v.opt("stream", "pqcn, qcn or pcn (required)");
        v.opt("seed", "rng seed (required)");
        v.opt("dev", "development instance file");
        v.opt("init-from", "checkpoint to transfer parameters from");
        v.opt("out", "checkpoint output path");
        add_model_options(v);
        add_train_options(v);
    }
    {
        Verb& v = verbs.emplace_back(app, "pretrain", "pretrain QCN on entailment or PCN on stories");
        v.opt("task", "entailment or storycloze (required)");
        v.opt("data", "auxiliary-task training file, JSON lines (required)");
        v.opt("seed", "rng seed (required)");
        v.opt("dev", "auxiliary-task development file");
        v.opt("init-from", "checkpoint to transfer parameters from");
        v.opt("out", "checkpoint output path");
        add_model_options(v);
        add_train_options(v);
    }
    {
        Verb& v = verbs.emplace_back(app, "eval", "score checkpoints on an instance file");
        v.opt("data", "instance file, JSON lines (required)");
        v.multi("checkpoint", "stream checkpoint, repeatable (at least one required)");
        v.opt("lexicon", "relation lexicon file");
        v.opt("workers", "evaluation threads (default 1)");
        v.opt("report", "write the report to this file");
    }
    {
        Verb& v = verbs.emplace_back(app, "predict", "emit per-question predictions");
        v.opt("data", "instance file, JSON lines (required)");
        v.multi("checkpoint", "stream checkpoint, repeatable");
        v.opt("mode", "weighted or hard (default weighted)");
        v.opt("lexicon", "relation lexicon file");
        v.opt("stub-preds", "debug: fixed predictions name=p1,p2;name=p1,p2");
        v.opt("out", "write JSON-lines predictions to this file");
        v.opt("report", "write the report to this file");
    }
    {
        Verb& v = verbs.emplace_back(app, "gradcheck", "finite-difference gradient verification");
        v.opt("seed", "rng seed (default 1)");
        v.opt("report", "write the report to this file");
    }
    {
        Verb& v = verbs.emplace_back(app, "ablate", "train/evaluate with channels disabled");
        v.opt("data", "training instance file (required)");
        v.opt("dev", "development instance file (required)");
        v.opt("seed", "rng seed (required)");
        v.opt("stream", "stream to ablate (default pqcn)");
        v.opt("flags", "comma list: pos,ne,handcrafted,relations,word_vectors");
        add_model_options(v);
        add_train_options(v);
    }
    {
        Verb& v = verbs.emplace_back(app, "synth", "generate deterministic synthetic corpora");
        v.opt("mode", "overfit, relation, vectors, transfer, storycloze, worked or all (required)");
        v.opt("out", "output directory (required)");
        v.opt("seed", "rng seed (default 1)");
        v.opt("train-records", "records in the training split (default 32)");
        v.opt("dev-records", "records in the dev split (default 24)");
        v.opt("entailment-records", "entailment records for transfer mode (default 160)");
        v.opt("d-word", "vector width for vectors mode (default 16)");
        v.opt("report", "write the file manifest to this file");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const Verb* active = nullptr;
    for (const auto& v : verbs)
        if (v.parsed()) active = &v;
    if (!active) {
        std::fputs("error: no verb given\n", stderr);
        return 1;
    }

    tmoe_engine* eng = tmoe_engine_new();
    if (!eng) {
        std::fputs("error: engine allocation failed\n", stderr);
        return 2;
    }
    std::string config_error;
    if (!active->push(eng, config_error)) {
        std::fprintf(stderr, "error: %s\n", config_error.c_str());
        tmoe_engine_free(eng);
        return 2;
    }
    const tmoe_status rc = tmoe_engine_run(eng, active->name().c_str());
    if (rc == TMOE_OK) {
        std::fputs(tmoe_engine_report(eng), stdout);
    } else {
        std::fprintf(stderr, "error: %s\n", tmoe_engine_last_error(eng));
    }
    tmoe_engine_free(eng);
    return static_cast<int>(rc);
}
