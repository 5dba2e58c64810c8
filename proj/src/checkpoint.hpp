#pragma once

#include <functional>
#include <string>
#include <vector>

#include "instances.hpp"
#include "streams.hpp"

namespace tmoe {

using Logger = std::function<void(const std::string&)>;

// Binary container for one trained stream. Layout: magic "TMOE", format
// version (u32 LE), metadata length (u32 LE) + JSON metadata, then per
// tensor: name length (u32), name bytes, rank (u32), dims (u32 each), values
// as little-endian 64-bit floats, row-major. Save/load round-trips bit-exactly.
struct Checkpoint {
    static constexpr uint32_t kFormatVersion = 1;

    StreamKind kind = StreamKind::PQCN;
    StreamConfig config;
    int epoch = 0;
    double best_dev_accuracy = 0.0;
    std::string source_task = "scratch";  // or "entailment" / "story-cloze"

    // Lookup state needed to encode new data against these parameters.
    std::vector<std::string> vocab_tokens;  // vocabulary order, from index 2
    std::vector<std::string> pos_tag_names;
    std::vector<std::string> ne_tag_names;
    std::vector<std::string> rel_names;  // starting with "none"
    std::vector<std::string> freq_tokens;
    std::vector<long> freq_counts;

    ParamSet params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const StreamParams& stream, const Resources& resources, int epoch,
                           double best_dev_accuracy, const std::string& source_task);

// Rebuilds encode-time resources from checkpoint metadata. The relation
// lexicon is an external file and is rebound to the stored relation
// vocabulary (names it does not know map to "none").
Resources resources_from_checkpoint(const Checkpoint& ckpt, const RelationLexicon& lexicon);

// Initializes target-shaped parameters from a source checkpoint: layer
// tensors copied verbatim, word-embedding rows matched by token string
// (everything unmatched keeps its fresh target initialization), tag/relation
// tables copied only when the tag vocabularies agree exactly.
StreamParams transfer_load(const Checkpoint& ckpt, const Resources& target,
                           const WordVectorTable& target_vectors, const StreamConfig& target_config,
                           const Logger& log);

}  // namespace tmoe
