#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "relations.hpp"
#include "tensor.hpp"
#include "text.hpp"

namespace tmoe {

// Placeholder text for a field an adapter leaves unused (the consuming stream
// ignores that channel; the placeholder only keeps sequences non-empty).
inline constexpr const char* kEmptyFieldSentinel = ".";

// One binary example: is this choice the right answer for (passage, question)?
struct RawInstance {
    std::string id;
    std::string passage;
    std::string question;
    std::string choice;
    int y = 0;  // 1 iff this choice is the correct one
};

// Optional externally produced per-token tags for one sequence.
struct SeqTags {
    std::vector<std::string> pos;
    std::vector<std::string> ne;
};

struct InstanceTags {
    SeqTags passage, question, choice;
};

struct Example {
    RawInstance raw;
    InstanceTags tags;
};

// One line of the instance file: a question with exactly two choices.
struct InstanceRecord {
    std::string id;
    std::string passage;
    std::string question;
    std::array<std::string, 2> choices;
    int label = 0;  // index of the correct choice
    std::array<InstanceTags, 2> tags;  // per choice instance
};

std::vector<InstanceRecord> read_instance_file(const std::string& path);

// Expands a record into its two binary examples; ids get "#0" / "#1" suffixes.
std::array<Example, 2> expand_record(const InstanceRecord& rec);
std::vector<Example> expand_records(const std::vector<InstanceRecord>& recs);

// Splits "rec#k" back into the question id; ids without '#' group alone.
std::string question_id_of(const std::string& instance_id);

// Frozen lookup state shared by encoding, training and evaluation.
struct Resources {
    Vocab vocab;
    TagVocab pos_tags;
    TagVocab ne_tags;
    RelationVocab rel_vocab;
    RelationLexicon lexicon;  // ids already in rel_vocab space
    FreqTable freq;           // training-corpus token counts
    bool frozen = false;
};

// Every channel of one tokenized sequence. feat columns: 0 = log(1+count),
// 1 = occurs in first companion sequence, 2 = occurs in second companion.
struct EncodedSeq {
    std::vector<int> words;
    std::vector<int> pos;
    std::vector<int> ne;
    std::vector<int> rel;
    Tensor feat;  // [len, 3]

    int len() const { return static_cast<int>(words.size()); }
};

struct EncodedInstance {
    std::string id;
    EncodedSeq passage;
    EncodedSeq question;
    EncodedSeq choice;
    int y = 0;
};

// Per-token signals: log(1+corpus count), membership in others[0], others[1].
Tensor handcrafted_features(const std::vector<std::string>& seq,
                            const std::vector<std::vector<std::string>>& other_seqs,
                            const FreqTable& corpus_freq);

// Relation pairing: passage vs question+choice, question vs choice, choice vs
// passage. Companion order for feat columns: passage -> (question, choice),
// question -> (passage, choice), choice -> (passage, question).
EncodedInstance encode_instance(const RawInstance& raw, const Resources& resources,
                                const InstanceTags* tags = nullptr);

// Entailment file: JSON object per line with premise, hypothesis, label in
// {entailment, neutral, contradiction}. Maps to a question/choice pair with
// y = 1 only for entailment.
std::vector<Example> adapt_entailment(const std::string& path);

// Story file: JSON object per line with story (4 strings), endings (2
// strings), label (0/1). Each record yields two passage/choice examples.
std::vector<Example> adapt_storycloze(const std::string& path);

}  // namespace tmoe
