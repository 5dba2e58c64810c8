#include "engine.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ablation.hpp"
#include "error.hpp"
#include "gradsuite.hpp"
#include "synthgen.hpp"
#include "train.hpp"

namespace tmoe {

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace

void Options::set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

bool Options::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

std::string Options::lookup(const std::string& key, const std::string& fallback,
                            bool required) const {
    read_[key] = true;
    const std::string* found = nullptr;
    for (const auto& [k, v] : entries_)
        if (k == key) found = &v;  // last occurrence wins
    if (!found) {
        if (required) throw UsageError("missing required option --" + key);
        resolved_[key] = fallback;
        return fallback;
    }
    resolved_[key] = *found;
    return *found;
}

std::string Options::str(const std::string& key, const std::string& fallback) const {
    return lookup(key, fallback, false);
}

std::string Options::require(const std::string& key) const { return lookup(key, "", true); }

long Options::i64(const std::string& key, long fallback) const {
    const std::string s = lookup(key, std::to_string(fallback), false);
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("option --" + key + " expects an integer, got '" + s + "'");
    }
}

uint64_t Options::u64(const std::string& key, uint64_t fallback) const {
    const std::string s = lookup(key, std::to_string(fallback), false);
    try {
        size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("option --" + key + " expects an unsigned integer, got '" + s + "'");
    }
}

uint64_t Options::require_u64(const std::string& key) const {
    lookup(key, "", true);
    return u64(key, 0);
}

double Options::f64(const std::string& key, double fallback) const {
    const std::string s = lookup(key, fmt(fallback, "%g"), false);
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("option --" + key + " expects a number, got '" + s + "'");
    }
}

std::vector<std::string> Options::all(const std::string& key) const {
    read_[key] = true;
    std::vector<std::string> out;
    std::string joined;
    for (const auto& [k, v] : entries_)
        if (k == key) {
            out.push_back(v);
            joined += (joined.empty() ? "" : ";") + v;
        }
    if (!out.empty()) resolved_[key] = joined;
    return out;
}

std::string Options::effective() const {
    std::string out;
    for (const auto& [k, v] : resolved_) out += k + "=" + v + "\n";
    return out;
}

void Options::reject_unread() const {
    std::set<std::string> unknown;
    for (const auto& [k, v] : entries_)
        if (!read_.count(k)) unknown.insert(k);
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "--" : ", --") + k;
        throw UsageError("unknown option(s): " + list);
    }
}

namespace {

struct CommonData {
    std::vector<Example> train;
    std::vector<Example> dev;
    Resources resources;
    WordVectorTable vectors;
};

std::vector<std::vector<std::string>> token_streams(const std::vector<Example>& examples) {
    std::vector<std::vector<std::string>> streams;
    for (const auto& ex : examples) {
        streams.push_back(tokenize(ex.raw.passage));
        streams.push_back(tokenize(ex.raw.question));
        streams.push_back(tokenize(ex.raw.choice));
    }
    return streams;
}

Resources build_resources(const std::vector<Example>& train, const std::vector<Example>& dev,
                          const std::string& lexicon_path, int min_count) {
    Resources res;
    auto streams = token_streams(train);
    auto dev_streams = token_streams(dev);
    // Vocabulary covers train and dev so held-out tokens keep their own
    // (pretrained or fresh) embedding rows; corpus frequencies come from the
    // training split only.
    std::vector<std::vector<std::string>> all = streams;
    all.insert(all.end(), dev_streams.begin(), dev_streams.end());
    res.vocab = Vocab::build(all, min_count);
    res.freq = build_freq(streams);

    std::vector<std::vector<std::string>> pos_streams, ne_streams;
    for (const auto* split : {&train, &dev})
        for (const auto& ex : *split)
            for (const auto* st : {&ex.tags.passage, &ex.tags.question, &ex.tags.choice}) {
                if (!st->pos.empty()) pos_streams.push_back(st->pos);
                if (!st->ne.empty()) ne_streams.push_back(st->ne);
            }
    res.pos_tags = TagVocab::build(pos_streams);
    res.ne_tags = TagVocab::build(ne_streams);

    if (!lexicon_path.empty()) {
        res.lexicon = RelationLexicon::load(lexicon_path);
        res.rel_vocab = res.lexicon.vocab();
    }
    res.frozen = true;
    return res;
}

StreamConfig stream_config_from(const Options& opts, uint64_t seed) {
    StreamConfig cfg;
    cfg.d_word = static_cast<int>(opts.i64("d-word", cfg.d_word));
    cfg.d_h = static_cast<int>(opts.i64("d-h", cfg.d_h));
    cfg.d_att = static_cast<int>(opts.i64("d-att", 0));
    cfg.dropout = opts.f64("dropout", cfg.dropout);
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
        throw UsageError("--dropout must lie in [0,1)");
    cfg.seed = seed;
    return cfg;
}

TrainConfig train_config_from(const Options& opts, uint64_t seed) {
    TrainConfig cfg;
    cfg.lr = opts.f64("lr", cfg.lr);
    cfg.epochs = static_cast<int>(opts.i64("epochs", cfg.epochs));
    cfg.batch = static_cast<int>(opts.i64("batch", cfg.batch));
    cfg.clip_norm = opts.f64("clip", cfg.clip_norm);
    cfg.patience = static_cast<int>(opts.i64("patience", cfg.patience));
    cfg.seed = seed;
    if (cfg.lr < 0.0) throw UsageError("--lr must be >= 0");
    if (cfg.epochs < 0) throw UsageError("--epochs must be >= 0");
    if (cfg.batch < 1) throw UsageError("--batch must be >= 1");
    if (cfg.patience < 1) throw UsageError("--patience must be >= 1");
    return cfg;
}

std::string train_report_text(StreamKind kind, const TrainResult& result,
                              const std::string& ckpt_path) {
    std::string out = "stream: " + to_string(kind) + "\n";
    out += "epochs_run: " + std::to_string(result.epochs.size()) + "\n";
    for (const auto& e : result.epochs)
        out += "epoch " + std::to_string(e.epoch) + " train_loss " + fmt(e.mean_train_loss) +
               " dev_accuracy " + fmt(e.dev_accuracy) + "\n";
    out += "best_epoch: " + std::to_string(result.best_epoch) + "\n";
    out += "best_dev_accuracy: " + fmt(result.best_dev_accuracy) + "\n";
    if (!ckpt_path.empty()) out += "checkpoint: " + ckpt_path + "\n";
    return out;
}

RunOutcome finish(Status status, std::string report, const Options& opts,
                  const std::string& report_path) {
    if (!report_path.empty()) write_text_file(report_path, report);
    opts.reject_unread();
    RunOutcome outcome;
    outcome.status = status;
    outcome.report = std::move(report);
    return outcome;
}

RunOutcome do_synth(Options& opts, const Logger& log) {
    const std::string mode = opts.require("mode");
    const std::string out_dir = opts.require("out");
    const uint64_t seed = opts.u64("seed", 1);
    const int n_train = static_cast<int>(opts.i64("train-records", 32));
    const int n_dev = static_cast<int>(opts.i64("dev-records", 24));
    const int n_ent = static_cast<int>(opts.i64("entailment-records", 160));
    const int d_word = static_cast<int>(opts.i64("d-word", 16));
    const std::string report_path = opts.str("report", "");
    log("synth configuration:\n" + opts.effective());
    opts.reject_unread();

    std::vector<std::string> paths;
    auto run_mode = [&](const std::string& m) {
        if (m == "overfit") return synth_overfit(out_dir, seed);
        if (m == "relation") return synth_relation(out_dir, seed, n_train, n_dev);
        if (m == "vectors") return synth_vectors(out_dir, seed, n_train, n_dev, d_word);
        if (m == "transfer") return synth_transfer(out_dir, seed, n_ent, n_train, n_dev);
        if (m == "storycloze") return synth_storycloze(out_dir, seed, n_train, n_dev);
        if (m == "worked") return synth_worked(out_dir);
        throw UsageError("unknown synth mode '" + m + "'");
    };
    if (mode == "all") {
        for (const char* m : {"overfit", "relation", "vectors", "transfer", "storycloze", "worked"})
            for (auto& p : run_mode(m)) paths.push_back(std::move(p));
    } else {
        paths = run_mode(mode);
    }

    std::string report;
    for (const auto& p : paths) report += "wrote " + p + "\n";
    return finish(Status::Ok, std::move(report), opts, report_path);
}

RunOutcome do_gradcheck(Options& opts, const Logger& log) {
    const uint64_t seed = opts.u64("seed", 1);
    const std::string report_path = opts.str("report", "");
    log("gradcheck configuration:\n" + opts.effective());
    opts.reject_unread();
    GradSuiteResult result = run_gradcheck_suite(seed);
    return finish(result.all_passed ? Status::Ok : Status::Check, gradsuite_report(result), opts,
                  report_path);
}

RunOutcome do_train(Options& opts, const Logger& log, bool pretrain) {
    const std::string task = pretrain ? opts.require("task") : "";
    const std::string stream_name = pretrain ? "" : opts.require("stream");
    const std::string data_path = opts.require("data");
    const std::string dev_path = opts.str("dev", "");
    const uint64_t seed = opts.require_u64("seed");
    const int min_count = static_cast<int>(opts.i64("min-count", 1));
    const std::string lexicon_path = opts.str("lexicon", "");
    const std::string vectors_path = opts.str("vectors", "");
    const std::string init_from = opts.str("init-from", "");
    const std::string out_path = opts.str("out", "");
    const std::string report_path = opts.str("report", "");
    StreamConfig stream_cfg = stream_config_from(opts, seed);
    TrainConfig train_cfg = train_config_from(opts, seed);
    log((pretrain ? "pretrain" : "train") + std::string(" configuration:\n") + opts.effective());
    opts.reject_unread();

    StreamKind kind;
    std::vector<Example> train, dev;
    std::string source_task = "scratch";
    if (pretrain) {
        if (task == "entailment") {
            kind = StreamKind::QCN;
            train = adapt_entailment(data_path);
            if (!dev_path.empty()) dev = adapt_entailment(dev_path);
            source_task = "entailment";
        } else if (task == "storycloze") {
            kind = StreamKind::PCN;
            train = adapt_storycloze(data_path);
            if (!dev_path.empty()) dev = adapt_storycloze(dev_path);
            source_task = "story-cloze";
        } else {
            throw UsageError("unknown pretrain task '" + task +
                             "' (expected entailment or storycloze)");
        }
    } else {
        kind = parse_stream_kind(stream_name);
        train = expand_records(read_instance_file(data_path));
        if (!dev_path.empty()) dev = expand_records(read_instance_file(dev_path));
    }

    Resources resources = build_resources(train, dev, lexicon_path, min_count);
    WordVectorTable vectors =
        vectors_path.empty() ? random_word_vectors(resources.vocab, stream_cfg.d_word, seed)
                             : load_word_vectors(vectors_path, resources.vocab, stream_cfg.d_word,
                                                 seed);

    ParamSet init;
    const ParamSet* init_ptr = nullptr;
    if (!init_from.empty()) {
        Checkpoint src = load_checkpoint(init_from);
        if (src.kind != kind)
            throw DataError("--init-from checkpoint holds a " + to_string(src.kind) +
                            " stream, requested " + to_string(kind));
        stream_cfg.d_att = stream_cfg.att_dim();
        StreamParams transferred = transfer_load(src, resources, vectors, stream_cfg, log);
        init = std::move(transferred.params);
        init_ptr = &init;
        source_task = src.source_task;
    }

    TrainResult result = train_stream(kind, train, dev, resources, vectors, stream_cfg, train_cfg,
                                      init_ptr, log);

    if (!out_path.empty()) {
        Checkpoint ckpt = make_checkpoint(result.best, resources, result.best_epoch,
                                          result.best_dev_accuracy, source_task);
        save_checkpoint(out_path, ckpt);
    }
    return finish(Status::Ok, train_report_text(kind, result, out_path), opts, report_path);
}

std::vector<LoadedStream> load_streams(const std::vector<std::string>& ckpt_paths,
                                       const std::string& lexicon_path) {
    if (ckpt_paths.empty()) throw UsageError("at least one --checkpoint is required");
    RelationLexicon lexicon;
    if (!lexicon_path.empty()) lexicon = RelationLexicon::load(lexicon_path);
    std::vector<LoadedStream> streams;
    for (const auto& path : ckpt_paths) {
        Checkpoint ckpt = load_checkpoint(path);
        LoadedStream ls;
        ls.resources = resources_from_checkpoint(ckpt, lexicon);
        ls.stream.kind = ckpt.kind;
        ls.stream.config = ckpt.config;
        ls.stream.params = std::move(ckpt.params);
        streams.push_back(std::move(ls));
    }
    return streams;
}

RunOutcome do_eval(Options& opts, const Logger& log) {
    const std::string data_path = opts.require("data");
    const auto ckpt_paths = opts.all("checkpoint");
    const std::string lexicon_path = opts.str("lexicon", "");
    const int workers = static_cast<int>(opts.i64("workers", 1));
    const std::string report_path = opts.str("report", "");
    log("eval configuration:\n" + opts.effective());
    opts.reject_unread();

    std::vector<LoadedStream> streams = load_streams(ckpt_paths, lexicon_path);
    const auto groups = group_questions(expand_records(read_instance_file(data_path)));

    const auto preds = predict_all(streams, groups, workers);
    const EvalReport weighted = score_predictions(preds, groups, MixtureMode::WeightedSum);
    const EvalReport hard = score_predictions(preds, groups, MixtureMode::HardChoice);

    std::string report = "questions: " + std::to_string(weighted.questions) + "\n";
    report += "accuracy_weighted: " + fmt(weighted.accuracy) + "\n";
    report += "accuracy_hard: " + fmt(hard.accuracy) + "\n";
    for (const auto& [name, acc] : weighted.per_stream_accuracy)
        report += "stream_accuracy " + name + ": " + fmt(acc) + "\n";
    report += "agreement_rate: " + fmt(weighted.agreement_rate) + "\n";
    report += "low_margin_count: " + std::to_string(weighted.low_margin_count) + "\n";
    return finish(Status::Ok, std::move(report), opts, report_path);
}

std::vector<StreamPrediction> parse_stub_preds(const std::string& spec) {
    std::vector<StreamPrediction> preds;
    size_t start = 0;
    while (start <= spec.size()) {
        size_t end = spec.find(';', start);
        if (end == std::string::npos) end = spec.size();
        const std::string part = spec.substr(start, end - start);
        if (!part.empty()) {
            const size_t eq = part.find('=');
            const size_t comma = part.find(',', eq == std::string::npos ? 0 : eq);
            if (comma == std::string::npos)
                throw UsageError("--stub-preds expects name=p1,p2;... got '" + spec + "'");
            StreamPrediction p;
            p.name = eq == std::string::npos ? ("stub" + std::to_string(preds.size()))
                                             : part.substr(0, eq);
            try {
                p.p1 = std::stod(part.substr(eq == std::string::npos ? 0 : eq + 1,
                                             comma - (eq == std::string::npos ? 0 : eq + 1)));
                p.p2 = std::stod(part.substr(comma + 1));
            } catch (const std::exception&) {
                throw UsageError("--stub-preds expects name=p1,p2;... got '" + spec + "'");
            }
            preds.push_back(std::move(p));
        }
        start = end + 1;
    }
    if (preds.empty()) throw UsageError("--stub-preds is empty");
    return preds;
}

RunOutcome do_predict(Options& opts, const Logger& log) {
    const std::string data_path = opts.require("data");
    const std::string stub_spec = opts.str("stub-preds", "");
    const MixtureMode mode = parse_mixture_mode(opts.str("mode", "weighted"));
    const std::string lexicon_path = opts.str("lexicon", "");
    const std::string out_path = opts.str("out", "");
    const std::string report_path = opts.str("report", "");
    const auto ckpt_paths = opts.all("checkpoint");
    log("predict configuration:\n" + opts.effective());
    opts.reject_unread();

    const auto groups = group_questions(expand_records(read_instance_file(data_path)));

    std::vector<LoadedStream> streams;
    std::vector<StreamPrediction> stub;
    if (!stub_spec.empty()) stub = parse_stub_preds(stub_spec);
    else streams = load_streams(ckpt_paths, lexicon_path);

    std::string report = "questions: " + std::to_string(groups.size()) + "\n";
    report += "mode: " + to_string(mode) + "\n";
    std::string jsonl;
    for (const auto& group : groups) {
        const std::vector<StreamPrediction> preds =
            stub.empty() ? predict_question(streams, group) : stub;
        const CombinedPrediction combined = combine(mode, preds);
        report += "id=" + group.qid + " chosen_choice=" + std::to_string(combined.chosen + 1) +
                  " p1=" + fmt(combined.p1) + " p2=" + fmt(combined.p2);
        nlohmann::ordered_json j;
        j["id"] = group.qid;
        j["chosen_index"] = combined.chosen;
        j["p1"] = combined.p1;
        j["p2"] = combined.p2;
        j["streams"] = nlohmann::ordered_json::array();
        for (const auto& p : preds) {
            report += " | " + p.name + " p1=" + fmt(p.p1) + " p2=" + fmt(p.p2) +
                      " w=" + fmt(confidence_weight(p), "%.6g");
            nlohmann::ordered_json js;
            js["name"] = p.name;
            js["p1"] = p.p1;
            js["p2"] = p.p2;
            js["weight"] = confidence_weight(p);
            j["streams"].push_back(std::move(js));
        }
        report += "\n";
        jsonl += j.dump() + "\n";
    }
    if (!out_path.empty()) write_text_file(out_path, jsonl);
    return finish(Status::Ok, std::move(report), opts, report_path);
}

RunOutcome do_ablate(Options& opts, const Logger& log) {
    AblationSetup setup;
    setup.kind = parse_stream_kind(opts.str("stream", "pqcn"));
    setup.train = expand_records(read_instance_file(opts.require("data")));
    setup.dev = expand_records(read_instance_file(opts.require("dev")));
    const uint64_t seed = opts.require_u64("seed");
    const int min_count = static_cast<int>(opts.i64("min-count", 1));
    const std::string lexicon_path = opts.str("lexicon", "");
    const std::string vectors_path = opts.str("vectors", "");
    const std::string report_path = opts.str("report", "");
    const std::string flags_csv = opts.str("flags", "pos,ne,handcrafted,relations,word_vectors");
    setup.stream_config = stream_config_from(opts, seed);
    setup.train_config = train_config_from(opts, seed);
    log("ablate configuration:\n" + opts.effective());
    opts.reject_unread();

    size_t start = 0;
    while (start <= flags_csv.size()) {
        size_t end = flags_csv.find(',', start);
        if (end == std::string::npos) end = flags_csv.size();
        const std::string name = flags_csv.substr(start, end - start);
        if (!name.empty()) setup.flags.push_back(parse_ablation_flag(name));
        start = end + 1;
    }

    setup.resources = build_resources(setup.train, setup.dev, lexicon_path, min_count);
    setup.pretrained_vectors =
        vectors_path.empty()
            ? random_word_vectors(setup.resources.vocab, setup.stream_config.d_word, seed)
            : load_word_vectors(vectors_path, setup.resources.vocab, setup.stream_config.d_word,
                                seed);

    const auto rows = ablation_run(setup, log);
    std::string report = ablation_machine_rows(rows);
    report += "\n" + ablation_table(rows);
    return finish(Status::Ok, std::move(report), opts, report_path);
}

}  // namespace

RunOutcome run_verb(const std::string& verb, Options& options, const Logger& log) {
    Logger safe_log = log ? log : [](const std::string&) {};
    try {
        if (verb == "synth") return do_synth(options, safe_log);
        if (verb == "gradcheck") return do_gradcheck(options, safe_log);
        if (verb == "train") return do_train(options, safe_log, false);
        if (verb == "pretrain") return do_train(options, safe_log, true);
        if (verb == "eval") return do_eval(options, safe_log);
        if (verb == "predict") return do_predict(options, safe_log);
        if (verb == "ablate") return do_ablate(options, safe_log);
        throw UsageError("unknown verb '" + verb + "'");
    } catch (const UsageError& e) {
        return RunOutcome{Status::Usage, "", e.what()};
    } catch (const CheckError& e) {
        return RunOutcome{Status::Check, "", e.what()};
    } catch (const std::exception& e) {
        return RunOutcome{Status::Data, "", e.what()};
    }
}

}  // namespace tmoe
