#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tmoe {

// Deterministic synthetic corpora for tests and offline experiments. Every
// generator writes JSON-lines instance files (plus companion lexicon or
// vector files where noted) under `dir` and returns the paths it wrote.
// Content is a pure function of the seed.

// Sixteen two-choice records (32 binary instances) per fixture, one fixture
// per stream: arbitrary labels, mutually distinct records, with the sequence
// a stream ignores held constant. Files: overfit_{pqcn,qcn,pcn}.jsonl.
std::vector<std::string> synth_overfit(const std::string& dir, uint64_t seed);

// Knowledge-channel task: the correct choice is linked to a question token
// through the "signal" relation of the generated lexicon; every other channel
// is uninformative and train/dev content tokens are disjoint, so held-out
// accuracy requires the relation channel. Files: relation_train.jsonl,
// relation_dev.jsonl, relation_lexicon.tsv.
std::vector<std::string> synth_relation(const std::string& dir, uint64_t seed, int n_train,
                                        int n_dev);

// Word-vector task: question and correct-choice tokens share a vector
// cluster in the emitted embedding file; train/dev tokens are disjoint, so
// held-out accuracy requires the pretrained vectors. Files:
// vectors_train.jsonl, vectors_dev.jsonl, vectors_vectors.txt.
std::vector<std::string> synth_vectors(const std::string& dir, uint64_t seed, int n_train,
                                       int n_dev, int d_word);

// Relation-signal bundle shared between an entailment corpus and a reading
// task, for pre-training experiments: transfer_lexicon.tsv,
// transfer_entailment_{train,dev}.jsonl, transfer_{train,dev}.jsonl.
std::vector<std::string> synth_transfer(const std::string& dir, uint64_t seed, int n_entailment,
                                        int n_train, int n_dev);

// Story-completion corpus: the true ending reuses a token planted in the
// story. Files: story_train.jsonl, story_dev.jsonl.
std::vector<std::string> synth_storycloze(const std::string& dir, uint64_t seed, int n_train,
                                          int n_dev);

// One tiny two-choice record for exercising prediction plumbing:
// worked.jsonl.
std::vector<std::string> synth_worked(const std::string& dir);

}  // namespace tmoe
