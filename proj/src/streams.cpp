#include "streams.hpp"

#include "error.hpp"

namespace tmoe {

namespace {

std::string prefix_of(StreamKind kind) { return to_string(kind); }

Tensor uniform_table(int rows, int cols, Rng& rng) {
    Tensor t = Tensor::zeros({rows, cols}, true);
    for (auto& v : t.values) v = rng.uniform(-0.1, 0.1);
    return t;
}

// Which cross-sequence components a stream consumes; see header.
struct SeqView {
    const EncodedSeq* seq = nullptr;
    bool drop_rel = false;  // relation ids derived from the ignored sequence
    int zero_feat_col = -1; // co-occurrence column derived from it
};

struct EmbeddedSeq {
    TensorId words;  // [len, d_word], after dropout
    TensorId full;   // [len, channel_dim]
    int len = 0;
};

EmbeddedSeq embed_seq(Tape& tape, StreamParams& stream, const SeqView& view, bool training,
                      Rng& rng) {
    const StreamConfig& cfg = stream.config;
    const std::string p = prefix_of(stream.kind);
    const EncodedSeq& seq = *view.seq;
    const int n = seq.len();

    auto drop = [&](TensorId x) { return tape.dropout(x, cfg.dropout, rng, training); };
    auto channel = [&](const char* table, const std::vector<int>& ids, bool enabled, int dim) {
        if (!enabled) return tape.constant(Tensor::zeros({n, dim}));
        return drop(tape.gather_rows(tape.param(stream.params, p + table), ids));
    };

    EmbeddedSeq out;
    out.len = n;
    out.words = channel(".word_emb.table", seq.words, true, cfg.d_word);
    std::vector<TensorId> parts{out.words};
    parts.push_back(channel(".pos_emb.table", seq.pos, cfg.use_pos, cfg.d_pos));
    parts.push_back(channel(".ne_emb.table", seq.ne, cfg.use_ne, cfg.d_ne));
    std::vector<int> rel_ids =
        view.drop_rel ? std::vector<int>(static_cast<size_t>(n), 0) : seq.rel;
    parts.push_back(channel(".rel_emb.table", rel_ids, cfg.use_rel, cfg.d_rel));
    if (cfg.use_handcrafted) {
        Tensor feat = seq.feat;
        if (view.zero_feat_col >= 0)
            for (int i = 0; i < n; ++i) feat.at(i, view.zero_feat_col) = 0.0;
        parts.push_back(tape.constant(std::move(feat)));
    }
    out.full = tape.concat_last(parts);
    return out;
}

}  // namespace

std::string to_string(StreamKind kind) {
    switch (kind) {
        case StreamKind::PQCN: return "pqcn";
        case StreamKind::QCN: return "qcn";
        case StreamKind::PCN: return "pcn";
    }
    return "?";
}

StreamKind parse_stream_kind(const std::string& name) {
    if (name == "pqcn") return StreamKind::PQCN;
    if (name == "qcn") return StreamKind::QCN;
    if (name == "pcn") return StreamKind::PCN;
    throw UsageError("unknown stream kind '" + name + "' (expected pqcn, qcn or pcn)");
}

StreamParams init_params(StreamKind kind, const StreamConfig& config,
                         const WordVectorTable& word_vectors, const Resources& resources) {
    if (word_vectors.d_word != config.d_word)
        throw DataError("init_params: word vector dimension " +
                        std::to_string(word_vectors.d_word) + " does not match d_word " +
                        std::to_string(config.d_word));
    if (word_vectors.matrix.rows() != resources.vocab.size())
        throw DataError("init_params: word vector rows " +
                        std::to_string(word_vectors.matrix.rows()) +
                        " do not match vocabulary size " +
                        std::to_string(resources.vocab.size()));

    StreamParams sp;
    sp.kind = kind;
    sp.config = config;
    sp.config.d_att = config.att_dim();
    Rng rng(config.seed);
    const std::string p = prefix_of(kind);
    const int d_word = config.d_word;
    const int d_att = config.att_dim();
    const int d_sum = 2 * config.d_h;
    const int dim_full = sp.config.channel_dim();

    Tensor words = word_vectors.matrix;
    words.requires_grad = true;
    sp.params.add(p + ".word_emb.table", std::move(words));
    sp.params.add(p + ".pos_emb.table", uniform_table(resources.pos_tags.size(), config.d_pos, rng));
    sp.params.add(p + ".ne_emb.table", uniform_table(resources.ne_tags.size(), config.d_ne, rng));
    sp.params.add(p + ".rel_emb.table", uniform_table(resources.rel_vocab.size(), config.d_rel, rng));

    const bool has_passage = kind != StreamKind::QCN;
    const bool has_question = kind != StreamKind::PCN;

    if (kind == StreamKind::PQCN)
        init_seq_attention(sp.params, p + ".p_q_att", d_word, d_att, rng);
    if (has_passage) init_seq_attention(sp.params, p + ".a_p_att", d_word, d_att, rng);
    if (has_question) init_seq_attention(sp.params, p + ".a_q_att", d_word, d_att, rng);

    // Anchor sequences read their plain channels; attended vectors widen the
    // inputs of the sequences that receive attention.
    if (has_passage)
        init_bilstm(sp.params, p + ".passage_bilstm",
                    dim_full + (kind == StreamKind::PQCN ? d_word : 0), config.d_h, rng);
    if (has_question) init_bilstm(sp.params, p + ".question_bilstm", dim_full, config.d_h, rng);
    const int n_choice_att = (kind == StreamKind::PQCN) ? 2 : 1;
    init_bilstm(sp.params, p + ".choice_bilstm", dim_full + n_choice_att * d_word, config.d_h, rng);

    if (has_passage) init_self_attention(sp.params, p + ".passage_selfatt", d_sum, rng);
    if (has_question) init_self_attention(sp.params, p + ".question_selfatt", d_sum, rng);
    init_self_attention(sp.params, p + ".choice_selfatt", d_sum, rng);

    if (has_passage) init_bilinear(sp.params, p + ".bilinear_ap", d_sum, d_sum, rng);
    if (has_question) init_bilinear(sp.params, p + ".bilinear_aq", d_sum, d_sum, rng);
    return sp;
}

ForwardResult stream_forward(Tape& tape, StreamParams& stream, const EncodedInstance& inst,
                             bool training, Rng& rng) {
    const StreamKind kind = stream.kind;
    const StreamConfig& cfg = stream.config;
    const std::string p = prefix_of(kind);

    SeqView passage_view{&inst.passage, false, -1};
    SeqView question_view{&inst.question, false, -1};
    SeqView choice_view{&inst.choice, false, -1};
    if (kind == StreamKind::QCN) {
        // Passage absent: question feat col 1 and choice feat col 1 point at
        // it, and choice relation ids were derived against it.
        question_view.zero_feat_col = 1;
        choice_view.zero_feat_col = 1;
        choice_view.drop_rel = true;
    } else if (kind == StreamKind::PCN) {
        // Question absent: passage relations scan question tokens first.
        passage_view.zero_feat_col = 1;
        passage_view.drop_rel = true;
        choice_view.zero_feat_col = 2;
    }

    auto drop = [&](TensorId x) { return tape.dropout(x, cfg.dropout, rng, training); };

    EmbeddedSeq pe, qe;
    if (kind != StreamKind::QCN) pe = embed_seq(tape, stream, passage_view, training, rng);
    if (kind != StreamKind::PCN) qe = embed_seq(tape, stream, question_view, training, rng);
    EmbeddedSeq ae = embed_seq(tape, stream, choice_view, training, rng);

    TensorId logit;
    if (kind == StreamKind::PQCN) {
        TensorId q_aware_p =
            seq_attention(tape, stream.params, p + ".p_q_att", pe.words, qe.words, full_mask(qe.len));
        TensorId p_aware_a =
            seq_attention(tape, stream.params, p + ".a_p_att", ae.words, pe.words, full_mask(pe.len));
        TensorId q_aware_a =
            seq_attention(tape, stream.params, p + ".a_q_att", ae.words, qe.words, full_mask(qe.len));

        TensorId hp = drop(bilstm(tape, stream.params, p + ".passage_bilstm",
                                  tape.concat_last({pe.full, q_aware_p})));
        TensorId hq = drop(bilstm(tape, stream.params, p + ".question_bilstm", qe.full));
        TensorId ha = drop(bilstm(tape, stream.params, p + ".choice_bilstm",
                                  tape.concat_last({ae.full, p_aware_a, q_aware_a})));

        TensorId psum = self_attention(tape, stream.params, p + ".passage_selfatt", hp,
                                       full_mask(pe.len));
        TensorId qsum = self_attention(tape, stream.params, p + ".question_selfatt", hq,
                                       full_mask(qe.len));
        TensorId asum = self_attention(tape, stream.params, p + ".choice_selfatt", ha,
                                       full_mask(ae.len));
        logit = tape.add(bilinear_logit(tape, stream.params, p + ".bilinear_ap", asum, psum),
                         bilinear_logit(tape, stream.params, p + ".bilinear_aq", asum, qsum));
    } else {
        const bool qcn = kind == StreamKind::QCN;
        const EmbeddedSeq& anchor = qcn ? qe : pe;
        const std::string att = qcn ? ".a_q_att" : ".a_p_att";
        const std::string anchor_bilstm = qcn ? ".question_bilstm" : ".passage_bilstm";
        const std::string anchor_selfatt = qcn ? ".question_selfatt" : ".passage_selfatt";
        const std::string bilinear = qcn ? ".bilinear_aq" : ".bilinear_ap";

        TensorId aware_a = seq_attention(tape, stream.params, p + att, ae.words, anchor.words,
                                         full_mask(anchor.len));
        TensorId hanchor = drop(bilstm(tape, stream.params, p + anchor_bilstm, anchor.full));
        TensorId ha = drop(bilstm(tape, stream.params, p + ".choice_bilstm",
                                  tape.concat_last({ae.full, aware_a})));
        TensorId anchor_sum = self_attention(tape, stream.params, p + anchor_selfatt, hanchor,
                                             full_mask(anchor.len));
        TensorId asum =
            self_attention(tape, stream.params, p + ".choice_selfatt", ha, full_mask(ae.len));
        logit = bilinear_logit(tape, stream.params, p + bilinear, asum, anchor_sum);
    }

    ForwardResult result;
    result.prob_id = tape.sigmoid(logit);
    result.prob = tape.value(result.prob_id).values[0];
    return result;
}

double stream_predict(StreamParams& stream, const EncodedInstance& inst) {
    Tape tape;
    Rng rng(0);
    return stream_forward(tape, stream, inst, false, rng).prob;
}

}  // namespace tmoe
