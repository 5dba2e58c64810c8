#pragma once

#include <string>

#include "instances.hpp"
#include "layers.hpp"
#include "tape.hpp"
#include "vectors.hpp"

namespace tmoe {

// PQCN consumes the full triple; QCN ignores the passage; PCN ignores the
// question. The ignored sequence is treated as absent end to end: its
// channels are never embedded and any cross-derived component of the kept
// sequences (co-occurrence column, relation ids against it) is blanked, so
// the output is literally independent of that sequence.
enum class StreamKind { PQCN, QCN, PCN };

std::string to_string(StreamKind kind);
StreamKind parse_stream_kind(const std::string& name);  // UsageError on unknown

struct StreamConfig {
    int d_word = 100;
    int d_pos = 10;
    int d_ne = 12;
    int d_rel = 10;
    int d_h = 96;
    int d_att = 0;  // 0 means d_word
    double dropout = 0.4;
    uint64_t seed = 1;
    // Channel switches used by the ablation harness. Disabled embedding
    // channels contribute zero matrices (dimensions preserved); disabled
    // handcrafted features are omitted from the concatenation.
    bool use_pos = true;
    bool use_ne = true;
    bool use_rel = true;
    bool use_handcrafted = true;

    int att_dim() const { return d_att > 0 ? d_att : d_word; }
    // Width of one fully embedded position.
    int channel_dim() const {
        return d_word + d_pos + d_ne + d_rel + (use_handcrafted ? 3 : 0);
    }
    bool operator==(const StreamConfig&) const = default;
};

// All learnable tensors of one expert. Parameter paths are stable:
// <stream>.<block>.<tensor>, e.g. "qcn.choice_bilstm.fwd.w_i".
struct StreamParams {
    StreamKind kind = StreamKind::PQCN;
    StreamConfig config;
    ParamSet params;
};

// Word table copied from `word_vectors`; POS/NE/relation tables
// uniform(-0.1, 0.1); layer parameters per the layer initializers. All draws
// come from config.seed, so equal seeds give bitwise-equal parameter sets.
StreamParams init_params(StreamKind kind, const StreamConfig& config,
                         const WordVectorTable& word_vectors, const Resources& resources);

struct ForwardResult {
    TensorId prob_id;  // [1], strictly inside (0,1)
    double prob;
};

// One binary forward pass: P(choice is correct | visible sequences).
// `rng` drives dropout and is consumed only when training.
ForwardResult stream_forward(Tape& tape, StreamParams& stream, const EncodedInstance& inst,
                             bool training, Rng& rng);

// Convenience evaluation-mode forward.
double stream_predict(StreamParams& stream, const EncodedInstance& inst);

}  // namespace tmoe
