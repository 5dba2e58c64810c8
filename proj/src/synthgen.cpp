#include "synthgen.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace tmoe {

namespace {

using nlohmann::ordered_json;

class WordMaker {
public:
    explicit WordMaker(Rng& rng) : rng_(rng) {}

    std::string fresh() {
        static const std::string consonants = "bdfgklmnprstvz";
        static const std::string vowels = "aeiou";
        while (true) {
            std::string w;
            const size_t syllables = 2 + rng_.below(2);
            for (size_t s = 0; s < syllables; ++s) {
                w += consonants[rng_.below(consonants.size())];
                w += vowels[rng_.below(vowels.size())];
            }
            if (used_.insert(w).second) return w;
        }
    }

    std::vector<std::string> fresh_n(size_t n) {
        std::vector<std::string> out;
        for (size_t i = 0; i < n; ++i) out.push_back(fresh());
        return out;
    }

private:
    Rng& rng_;
    std::unordered_set<std::string> used_;
};

std::string join(const std::vector<std::string>& toks) {
    std::string out;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (i) out += " ";
        out += toks[i];
    }
    return out;
}

std::ofstream open_out(const std::string& dir, const std::string& name, std::string& path_out) {
    std::filesystem::create_directories(dir);
    path_out = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path_out, std::ios::trunc);
    if (!out) throw DataError("synth: cannot open '" + path_out + "' for writing");
    return out;
}

void write_record(std::ofstream& out, const std::string& id, const std::string& passage,
                  const std::string& question, const std::string& c0, const std::string& c1,
                  int label) {
    ordered_json j;
    j["id"] = id;
    j["passage"] = passage;
    j["question"] = question;
    j["choices"] = {c0, c1};
    j["label"] = label;
    out << j.dump() << "\n";
}

std::vector<std::string> pick(const std::vector<std::string>& pool, size_t n, Rng& rng) {
    std::vector<std::string> out;
    for (size_t i = 0; i < n; ++i) out.push_back(pool[rng.below(pool.size())]);
    return out;
}

}  // namespace

std::vector<std::string> synth_overfit(const std::string& dir, uint64_t seed) {
    Rng rng(seed);
    WordMaker words(rng);
    const auto pool = words.fresh_n(48);
    const std::string fixed_passage = join(pick(pool, 7, rng));
    const std::string fixed_question = join(pick(pool, 4, rng));

    std::vector<std::string> paths(3);
    const char* names[3] = {"overfit_pqcn.jsonl", "overfit_qcn.jsonl", "overfit_pcn.jsonl"};
    const char* tags[3] = {"op", "oq", "oc"};
    for (int f = 0; f < 3; ++f) {
        auto out = open_out(dir, names[f], paths[static_cast<size_t>(f)]);
        for (int r = 0; r < 16; ++r) {
            const std::string passage = f == 1 ? fixed_passage : join(pick(pool, 7, rng));
            const std::string question = f == 2 ? fixed_question : join(pick(pool, 4, rng));
            const std::string c0 = join(pick(pool, 3, rng));
            std::string c1 = join(pick(pool, 3, rng));
            while (c1 == c0) c1 = join(pick(pool, 3, rng));
            write_record(out, tags[f] + std::to_string(r), passage, question, c0, c1,
                         static_cast<int>(rng.below(2)));
        }
    }
    return paths;
}

namespace {

// Shared machinery for the relation-signal reading task. Each record plants
// (question token, correct choice token) -> "signal" in the lexicon and,
// half the time, (question token, wrong choice token) -> "noise".
struct RelationTask {
    std::vector<std::string> lexicon_lines;

    void write_split(std::ofstream& out, const std::string& tag, int n, WordMaker& words,
                     const std::vector<std::string>& fillers, Rng& rng) {
        for (int r = 0; r < n; ++r) {
            const std::string qtok = words.fresh();
            const std::string ctok = words.fresh();
            const std::string wtok = words.fresh();
            lexicon_lines.push_back(qtok + "\t" + ctok + "\tsignal");
            if (rng.below(2) == 0) lexicon_lines.push_back(qtok + "\t" + wtok + "\tnoise");
            const std::string passage = join(pick(fillers, 6, rng));
            const std::string question = join({fillers[rng.below(fillers.size())], qtok});
            const int label = static_cast<int>(rng.below(2));
            const std::string correct = join({ctok, fillers[rng.below(fillers.size())]});
            const std::string wrong = join({wtok, fillers[rng.below(fillers.size())]});
            write_record(out, tag + std::to_string(r), passage, question,
                         label == 0 ? correct : wrong, label == 0 ? wrong : correct, label);
        }
    }
};

}  // namespace

std::vector<std::string> synth_relation(const std::string& dir, uint64_t seed, int n_train,
                                        int n_dev) {
    Rng rng(seed);
    WordMaker words(rng);
    const auto fillers = words.fresh_n(12);

    RelationTask task;
    std::vector<std::string> paths(3);
    {
        auto out = open_out(dir, "relation_train.jsonl", paths[0]);
        task.write_split(out, "rtr", n_train, words, fillers, rng);
    }
    {
        auto out = open_out(dir, "relation_dev.jsonl", paths[1]);
        task.write_split(out, "rdv", n_dev, words, fillers, rng);
    }
    {
        auto out = open_out(dir, "relation_lexicon.tsv", paths[2]);
        for (const auto& line : task.lexicon_lines) out << line << "\n";
    }
    return paths;
}

std::vector<std::string> synth_vectors(const std::string& dir, uint64_t seed, int n_train,
                                       int n_dev, int d_word) {
    if (d_word < 2) throw DataError("synth vectors: d_word must be >= 2");
    Rng rng(seed);
    WordMaker words(rng);
    const auto fillers = words.fresh_n(12);

    std::vector<std::pair<std::string, std::vector<double>>> vec_lines;
    auto random_vec = [&](double scl) {
        std::vector<double> v(static_cast<size_t>(d_word));
        for (auto& x : v) x = rng.uniform(-scl, scl);
        return v;
    };
    for (const auto& f : fillers) vec_lines.emplace_back(f, random_vec(0.1));

    // Correct-choice tokens sit on the positive side of a hidden direction,
    // wrong-choice tokens on the negative side. The direction is only
    // recoverable through the emitted vector file.
    const std::vector<double> axis = random_vec(1.0);
    auto signed_vec = [&](double sign) {
        std::vector<double> v = random_vec(0.2);
        for (size_t i = 0; i < v.size(); ++i) v[i] += 2.0 * sign * axis[i];
        return v;
    };

    auto write_split = [&](std::ofstream& out, const std::string& tag, int n) {
        for (int r = 0; r < n; ++r) {
            const std::string ctok = words.fresh();
            const std::string wtok = words.fresh();
            vec_lines.emplace_back(ctok, signed_vec(1.0));
            vec_lines.emplace_back(wtok, signed_vec(-1.0));
            const std::string passage = join(pick(fillers, 6, rng));
            const std::string question = join(pick(fillers, 3, rng));
            const int label = static_cast<int>(rng.below(2));
            const std::string correct = join({ctok, fillers[rng.below(fillers.size())]});
            const std::string wrong = join({wtok, fillers[rng.below(fillers.size())]});
            write_record(out, tag + std::to_string(r), passage, question,
                         label == 0 ? correct : wrong, label == 0 ? wrong : correct, label);
        }
    };

    std::vector<std::string> paths(3);
    {
        auto out = open_out(dir, "vectors_train.jsonl", paths[0]);
        write_split(out, "vtr", n_train);
    }
    {
        auto out = open_out(dir, "vectors_dev.jsonl", paths[1]);
        write_split(out, "vdv", n_dev);
    }
    {
        auto out = open_out(dir, "vectors_vectors.txt", paths[2]);
        out.precision(8);
        for (const auto& [tok, vec] : vec_lines) {
            out << tok;
            for (double v : vec) out << " " << v;
            out << "\n";
        }
    }
    return paths;
}

std::vector<std::string> synth_transfer(const std::string& dir, uint64_t seed, int n_entailment,
                                        int n_train, int n_dev) {
    Rng rng(seed);
    WordMaker words(rng);
    const auto fillers = words.fresh_n(12);

    RelationTask task;
    std::vector<std::string> paths(5);

    auto write_entailment = [&](std::ofstream& out, int n) {
        for (int r = 0; r < n; ++r) {
            const std::string ptok = words.fresh();
            const std::string htok = words.fresh();
            // Thirds: entailed (signal pair), contradiction (noise pair), neutral.
            const size_t bucket = rng.below(3);
            std::string label = "neutral";
            if (bucket == 0) {
                task.lexicon_lines.push_back(ptok + "\t" + htok + "\tsignal");
                label = "entailment";
            } else if (bucket == 1) {
                task.lexicon_lines.push_back(ptok + "\t" + htok + "\tnoise");
                label = "contradiction";
            }
            ordered_json j;
            j["premise"] = join({fillers[rng.below(fillers.size())], ptok});
            j["hypothesis"] = join({htok, fillers[rng.below(fillers.size())]});
            j["label"] = label;
            out << j.dump() << "\n";
        }
    };

    {
        auto out = open_out(dir, "transfer_entailment_train.jsonl", paths[0]);
        write_entailment(out, n_entailment);
    }
    {
        auto out = open_out(dir, "transfer_entailment_dev.jsonl", paths[1]);
        write_entailment(out, std::max(8, n_entailment / 5));
    }
    {
        auto out = open_out(dir, "transfer_train.jsonl", paths[2]);
        task.write_split(out, "ttr", n_train, words, fillers, rng);
    }
    {
        auto out = open_out(dir, "transfer_dev.jsonl", paths[3]);
        task.write_split(out, "tdv", n_dev, words, fillers, rng);
    }
    {
        auto out = open_out(dir, "transfer_lexicon.tsv", paths[4]);
        for (const auto& line : task.lexicon_lines) out << line << "\n";
    }
    return paths;
}

std::vector<std::string> synth_storycloze(const std::string& dir, uint64_t seed, int n_train,
                                          int n_dev) {
    Rng rng(seed);
    WordMaker words(rng);
    const auto fillers = words.fresh_n(16);

    auto write_split = [&](std::ofstream& out, int n) {
        for (int r = 0; r < n; ++r) {
            const std::string planted = words.fresh();
            ordered_json j;
            std::vector<std::string> story;
            for (int s = 0; s < 4; ++s) {
                auto sent = pick(fillers, 3, rng);
                if (s == 1 || s == 3) sent[rng.below(sent.size())] = planted;
                story.push_back(join(sent));
            }
            const std::string good = join({planted, fillers[rng.below(fillers.size())]});
            const std::string bad = join({words.fresh(), fillers[rng.below(fillers.size())]});
            const int label = static_cast<int>(rng.below(2));
            j["story"] = story;
            j["endings"] = label == 0 ? std::vector<std::string>{good, bad}
                                      : std::vector<std::string>{bad, good};
            j["label"] = label;
            out << j.dump() << "\n";
        }
    };

    std::vector<std::string> paths(2);
    {
        auto out = open_out(dir, "story_train.jsonl", paths[0]);
        write_split(out, n_train);
    }
    {
        auto out = open_out(dir, "story_dev.jsonl", paths[1]);
        write_split(out, n_dev);
    }
    return paths;
}

std::vector<std::string> synth_worked(const std::string& dir) {
    std::vector<std::string> paths(1);
    auto out = open_out(dir, "worked.jsonl", paths[0]);
    write_record(out, "worked0", "rano pilu sema rano", "lemo dita ?", "vasu kola", "brin zemo", 0);
    return paths;
}

}  // namespace tmoe
