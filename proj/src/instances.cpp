#include "instances.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"

namespace tmoe {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, const std::string& path, long line_no) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
}

std::string context(const std::string& path, long line_no) {
    return path + ":" + std::to_string(line_no) + ": ";
}

std::vector<std::string> tag_array(const json& j, size_t want, const std::string& ctx) {
    if (!j.is_array()) throw DataError(ctx + "tag field must be an array");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw DataError(ctx + "tags must be strings");
        out.push_back(v.get<std::string>());
    }
    if (out.size() != want)
        throw DataError(ctx + "tag count " + std::to_string(out.size()) +
                        " does not match token count " + std::to_string(want));
    return out;
}

// pos/ner blocks: {"passage": [...], "question": [...], "choices": [[...],[...]]}
void read_tag_block(const json& block, const InstanceRecord& rec, const std::string& ctx,
                    bool is_pos, std::array<InstanceTags, 2>& out) {
    const size_t np = tokenize(rec.passage).size();
    const size_t nq = tokenize(rec.question).size();
    if (block.contains("passage")) {
        auto tags = tag_array(block["passage"], np, ctx);
        for (auto& t : out) (is_pos ? t.passage.pos : t.passage.ne) = tags;
    }
    if (block.contains("question")) {
        auto tags = tag_array(block["question"], nq, ctx);
        for (auto& t : out) (is_pos ? t.question.pos : t.question.ne) = tags;
    }
    if (block.contains("choices")) {
        const auto& cj = block["choices"];
        if (!cj.is_array() || cj.size() != 2)
            throw DataError(ctx + "choices tags must be an array of 2 arrays");
        for (int k = 0; k < 2; ++k) {
            auto tags = tag_array(cj[static_cast<size_t>(k)],
                                  tokenize(rec.choices[static_cast<size_t>(k)]).size(), ctx);
            (is_pos ? out[static_cast<size_t>(k)].choice.pos
                    : out[static_cast<size_t>(k)].choice.ne) = tags;
        }
    }
}

}  // namespace

std::vector<InstanceRecord> read_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("instance file: cannot open '" + path + "'");
    std::vector<InstanceRecord> out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        const std::string ctx = context(path, line_no);
        InstanceRecord rec;
        try {
            rec.id = j.at("id").get<std::string>();
            rec.passage = j.at("passage").get<std::string>();
            rec.question = j.at("question").get<std::string>();
            const auto& choices = j.at("choices");
            if (!choices.is_array() || choices.size() != 2)
                throw DataError(ctx + "choices must be an array of exactly 2 strings");
            rec.choices[0] = choices[0].get<std::string>();
            rec.choices[1] = choices[1].get<std::string>();
            rec.label = j.at("label").get<int>();
        } catch (const json::exception& e) {
            throw DataError(ctx + e.what());
        }
        if (rec.label != 0 && rec.label != 1)
            throw DataError(ctx + "label must be 0 or 1, got " + std::to_string(rec.label));
        if (!seen_ids.insert(rec.id).second)
            throw DataError(ctx + "duplicate record id '" + rec.id + "'");
        if (j.contains("pos")) read_tag_block(j["pos"], rec, ctx, true, rec.tags);
        if (j.contains("ner")) read_tag_block(j["ner"], rec, ctx, false, rec.tags);
        out.push_back(std::move(rec));
    }
    return out;
}

std::array<Example, 2> expand_record(const InstanceRecord& rec) {
    std::array<Example, 2> out;
    for (int k = 0; k < 2; ++k) {
        RawInstance raw;
        raw.id = rec.id + "#" + std::to_string(k);
        raw.passage = rec.passage;
        raw.question = rec.question;
        raw.choice = rec.choices[static_cast<size_t>(k)];
        raw.y = (rec.label == k) ? 1 : 0;
        out[static_cast<size_t>(k)] = Example{std::move(raw), rec.tags[static_cast<size_t>(k)]};
    }
    return out;
}

std::vector<Example> expand_records(const std::vector<InstanceRecord>& recs) {
    std::vector<Example> out;
    out.reserve(recs.size() * 2);
    for (const auto& rec : recs) {
        auto pair = expand_record(rec);
        out.push_back(std::move(pair[0]));
        out.push_back(std::move(pair[1]));
    }
    return out;
}

std::string question_id_of(const std::string& instance_id) {
    size_t pos = instance_id.rfind('#');
    return pos == std::string::npos ? instance_id : instance_id.substr(0, pos);
}

Tensor handcrafted_features(const std::vector<std::string>& seq,
                            const std::vector<std::vector<std::string>>& other_seqs,
                            const FreqTable& corpus_freq) {
    Tensor feat = Tensor::zeros({static_cast<int>(seq.size()), 3});
    std::unordered_set<std::string> first_set, second_set;
    if (other_seqs.size() > 0) first_set.insert(other_seqs[0].begin(), other_seqs[0].end());
    if (other_seqs.size() > 1) second_set.insert(other_seqs[1].begin(), other_seqs[1].end());
    for (size_t i = 0; i < seq.size(); ++i) {
        auto it = corpus_freq.find(seq[i]);
        const long count = it == corpus_freq.end() ? 0 : it->second;
        feat.at(static_cast<int>(i), 0) = std::log(1.0 + static_cast<double>(count));
        feat.at(static_cast<int>(i), 1) = first_set.count(seq[i]) ? 1.0 : 0.0;
        feat.at(static_cast<int>(i), 2) = second_set.count(seq[i]) ? 1.0 : 0.0;
    }
    return feat;
}

EncodedInstance encode_instance(const RawInstance& raw, const Resources& resources,
                                const InstanceTags* tags) {
    if (!resources.frozen) throw DataError("encode_instance: resources not frozen");

    const auto p_toks = tokenize(raw.passage);
    const auto q_toks = tokenize(raw.question);
    const auto a_toks = tokenize(raw.choice);
    if (p_toks.empty() || q_toks.empty() || a_toks.empty())
        throw DataError("encode_instance: empty token sequence in instance '" + raw.id + "'");

    auto encode_seq = [&](const std::vector<std::string>& toks, const SeqTags* st,
                          const std::vector<std::string>& rel_other,
                          const std::vector<std::vector<std::string>>& feat_others) {
        EncodedSeq seq;
        seq.words.reserve(toks.size());
        for (const auto& t : toks) seq.words.push_back(resources.vocab.index(t));
        seq.pos.assign(toks.size(), 0);
        seq.ne.assign(toks.size(), 0);
        if (st) {
            if (!st->pos.empty()) {
                if (st->pos.size() != toks.size())
                    throw DataError("encode_instance: POS tag count mismatch in '" + raw.id + "'");
                for (size_t i = 0; i < toks.size(); ++i)
                    seq.pos[i] = resources.pos_tags.id(st->pos[i]);
            }
            if (!st->ne.empty()) {
                if (st->ne.size() != toks.size())
                    throw DataError("encode_instance: NE tag count mismatch in '" + raw.id + "'");
                for (size_t i = 0; i < toks.size(); ++i)
                    seq.ne[i] = resources.ne_tags.id(st->ne[i]);
            }
        }
        seq.rel = lookup_relations(toks, rel_other, resources.lexicon);
        seq.feat = handcrafted_features(toks, feat_others, resources.freq);
        return seq;
    };

    std::vector<std::string> q_plus_a = q_toks;
    q_plus_a.insert(q_plus_a.end(), a_toks.begin(), a_toks.end());

    EncodedInstance enc;
    enc.id = raw.id;
    enc.y = raw.y;
    enc.passage = encode_seq(p_toks, tags ? &tags->passage : nullptr, q_plus_a, {q_toks, a_toks});
    enc.question = encode_seq(q_toks, tags ? &tags->question : nullptr, a_toks, {p_toks, a_toks});
    enc.choice = encode_seq(a_toks, tags ? &tags->choice : nullptr, p_toks, {p_toks, q_toks});
    return enc;
}

std::vector<Example> adapt_entailment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("entailment file: cannot open '" + path + "'");
    std::vector<Example> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        const std::string ctx = context(path, line_no);
        std::string premise, hypothesis, label;
        try {
            premise = j.at("premise").get<std::string>();
            hypothesis = j.at("hypothesis").get<std::string>();
            label = j.at("label").get<std::string>();
        } catch (const json::exception& e) {
            throw DataError(ctx + e.what());
        }
        int y;
        if (label == "entailment") y = 1;
        else if (label == "neutral" || label == "contradiction") y = 0;
        else throw DataError(ctx + "unknown entailment label '" + label + "'");
        RawInstance raw;
        raw.id = "ent" + std::to_string(line_no);
        raw.passage = kEmptyFieldSentinel;
        raw.question = premise;
        raw.choice = hypothesis;
        raw.y = y;
        out.push_back(Example{std::move(raw), {}});
    }
    return out;
}

std::vector<Example> adapt_storycloze(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("story file: cannot open '" + path + "'");
    std::vector<Example> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        const std::string ctx = context(path, line_no);
        std::vector<std::string> story, endings;
        int label;
        try {
            for (const auto& s : j.at("story")) story.push_back(s.get<std::string>());
            for (const auto& e : j.at("endings")) endings.push_back(e.get<std::string>());
            label = j.at("label").get<int>();
        } catch (const json::exception& e) {
            throw DataError(ctx + e.what());
        }
        if (story.size() != 4)
            throw DataError(ctx + "story must have 4 sentences, got " +
                            std::to_string(story.size()));
        if (endings.size() != 2)
            throw DataError(ctx + "endings must have 2 entries, got " +
                            std::to_string(endings.size()));
        if (label != 0 && label != 1) throw DataError(ctx + "label must be 0 or 1");
        std::string passage;
        for (size_t i = 0; i < story.size(); ++i) {
            if (i) passage += " ";
            passage += story[i];
        }
        for (int k = 0; k < 2; ++k) {
            RawInstance raw;
            raw.id = "story" + std::to_string(line_no) + "#" + std::to_string(k);
            raw.passage = passage;
            raw.question = kEmptyFieldSentinel;
            raw.choice = endings[static_cast<size_t>(k)];
            raw.y = (label == k) ? 1 : 0;
            out.push_back(Example{std::move(raw), {}});
        }
    }
    return out;
}

}  // namespace tmoe
