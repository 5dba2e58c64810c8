#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "error.hpp"
#include "gradcheck.hpp"
#include "helpers.hpp"
#include "oracle.hpp"
#include "streams.hpp"
#include "train.hpp"

using namespace tmoe;

namespace {

Resources toy_resources() {
    Resources res;
    res.vocab = Vocab::build(
        {{"fire", "wood", "dry", "wet", "what", "kind", "burns", "the", "a", "b", "c", "d"}}, 1);
    res.pos_tags = TagVocab::from_tags({"nn", "vb"});
    res.ne_tags = TagVocab::from_tags({"loc"});
    res.rel_vocab = RelationVocab::from_names({"none", "signal"});
    res.freq = FreqTable{{"fire", 4}, {"wood", 2}, {"the", 7}};
    res.frozen = true;
    return res;
}

StreamConfig toy_config(uint64_t seed) {
    StreamConfig cfg;
    cfg.d_word = 6;
    cfg.d_pos = 3;
    cfg.d_ne = 2;
    cfg.d_rel = 2;
    cfg.d_h = 4;
    cfg.d_att = 5;
    cfg.dropout = 0.0;
    cfg.seed = seed;
    return cfg;
}

RawInstance toy_raw(int y = 1) {
    return RawInstance{"t#0", "the dry wood burns a b", "what kind of wood", "dry wood", y};
}

}  // namespace

TEST_CASE("init_params is bitwise deterministic in the seed") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(11);
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 3);
    StreamParams a = init_params(StreamKind::PQCN, cfg, wv, res);
    StreamParams b = init_params(StreamKind::PQCN, cfg, wv, res);
    REQUIRE(a.params.names() == b.params.names());
    for (const auto& name : a.params.names())
        CHECK(a.params.at(name).values == b.params.at(name).values);
}

TEST_CASE("seed changes move at least one tensor") {
    Resources res = toy_resources();
    WordVectorTable wv = random_word_vectors(res.vocab, 6, 3);
    StreamParams a = init_params(StreamKind::PQCN, toy_config(11), wv, res);
    StreamParams b = init_params(StreamKind::PQCN, toy_config(12), wv, res);
    bool any_diff = false;
    for (const auto& name : a.params.names())
        any_diff = any_diff || a.params.at(name).values != b.params.at(name).values;
    CHECK(any_diff);
}

TEST_CASE("QCN has no passage-side parameters; PCN no question-side") {
    Resources res = toy_resources();
    WordVectorTable wv = random_word_vectors(res.vocab, 6, 3);
    StreamParams qcn = init_params(StreamKind::QCN, toy_config(1), wv, res);
    for (const auto& name : qcn.params.names()) CHECK(name.find("passage") == std::string::npos);
    StreamParams pcn = init_params(StreamKind::PCN, toy_config(1), wv, res);
    for (const auto& name : pcn.params.names()) CHECK(name.find("question") == std::string::npos);
    CHECK(qcn.params.contains("qcn.bilinear_aq.w"));
    CHECK(pcn.params.contains("pcn.bilinear_ap.w"));
    CHECK(qcn.params.contains("qcn.choice_bilstm.fwd.w_i"));
}

TEST_CASE("word table mismatches are rejected") {
    Resources res = toy_resources();
    WordVectorTable wv = random_word_vectors(res.vocab, 5, 3);
    CHECK_THROWS_AS(init_params(StreamKind::QCN, toy_config(1), wv, res), DataError);
}

TEST_CASE("all-zero parameters output exactly one half for every stream") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(5);
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 3);
    EncodedInstance enc = encode_instance(toy_raw(), res);
    for (StreamKind kind : {StreamKind::PQCN, StreamKind::QCN, StreamKind::PCN}) {
        StreamParams sp = init_params(kind, cfg, wv, res);
        for (const auto& name : sp.params.names())
            for (auto& v : sp.params.at(name).values) v = 0.0;
        CHECK(stream_predict(sp, enc) == 0.5);
    }
}

TEST_CASE("evaluation-mode forwards are identical across calls") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(6);
    cfg.dropout = 0.4;  // must not fire outside training
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 3);
    StreamParams sp = init_params(StreamKind::PQCN, cfg, wv, res);
    EncodedInstance enc = encode_instance(toy_raw(), res);
    CHECK(stream_predict(sp, enc) == stream_predict(sp, enc));
}

TEST_CASE("probabilities are strictly inside (0,1)") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(7);
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 3);
    EncodedInstance enc = encode_instance(toy_raw(), res);
    for (StreamKind kind : {StreamKind::PQCN, StreamKind::QCN, StreamKind::PCN}) {
        StreamParams sp = init_params(kind, cfg, wv, res);
        const double p = stream_predict(sp, enc);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("every stream matches the straight-line oracle to 1e-12") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(8);
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 4);
    RawInstance raw = toy_raw();
    InstanceTags tags;
    tags.passage.pos = {"nn", "vb", "nn", "vb", "nn", "nn"};
    EncodedInstance enc = encode_instance(raw, res, &tags);
    enc.question.rel[0] = 1;
    enc.choice.rel[1] = 1;
    for (StreamKind kind : {StreamKind::PQCN, StreamKind::QCN, StreamKind::PCN}) {
        StreamParams sp = init_params(kind, cfg, wv, res);
        const double got = stream_predict(sp, enc);
        const double expect = oracle::stream_forward(sp, enc);
        CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("QCN output is literally invariant to the passage") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(9);
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 4);
    StreamParams sp = init_params(StreamKind::QCN, cfg, wv, res);

    Rng rng(100);
    const std::vector<std::string> pool{"fire", "wood", "dry", "wet", "the", "a", "b", "c", "d"};
    RawInstance base = toy_raw();
    const double base_p = stream_predict(sp, encode_instance(base, res));
    for (int rep = 0; rep < 100; ++rep) {
        RawInstance mutated = base;
        std::string passage;
        const int len = 1 + static_cast<int>(rng.below(8));
        for (int i = 0; i < len; ++i) {
            if (i) passage += " ";
            passage += pool[rng.below(pool.size())];
        }
        mutated.passage = passage;
        CHECK(stream_predict(sp, encode_instance(mutated, res)) == base_p);
    }
}

TEST_CASE("PCN output is literally invariant to the question") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(10);
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 4);
    StreamParams sp = init_params(StreamKind::PCN, cfg, wv, res);

    Rng rng(101);
    const std::vector<std::string> pool{"what", "kind", "burns", "the", "a", "b", "c"};
    RawInstance base = toy_raw();
    const double base_p = stream_predict(sp, encode_instance(base, res));
    for (int rep = 0; rep < 100; ++rep) {
        RawInstance mutated = base;
        std::string question;
        const int len = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < len; ++i) {
            if (i) question += " ";
            question += pool[rng.below(pool.size())];
        }
        mutated.question = question;
        CHECK(stream_predict(sp, encode_instance(mutated, res)) == base_p);
    }
}

TEST_CASE("streams share no parameters: mutating one leaves the others fixed") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(12);
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 4);
    StreamParams pqcn = init_params(StreamKind::PQCN, cfg, wv, res);
    StreamParams qcn = init_params(StreamKind::QCN, cfg, wv, res);
    EncodedInstance enc = encode_instance(toy_raw(), res);

    const double before = stream_predict(pqcn, enc);
    for (const auto& name : qcn.params.names())
        for (auto& v : qcn.params.at(name).values) v += 17.0;
    CHECK(stream_predict(pqcn, enc) == before);
}

TEST_CASE("training-mode dropout perturbs the forward but stays in range") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(13);
    cfg.dropout = 0.5;
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 4);
    StreamParams sp = init_params(StreamKind::PQCN, cfg, wv, res);
    EncodedInstance enc = encode_instance(toy_raw(), res);

    Rng rng(55);
    Tape t1;
    const double p1 = stream_forward(t1, sp, enc, true, rng).prob;
    Tape t2;
    const double p2 = stream_forward(t2, sp, enc, true, rng).prob;
    CHECK(p1 != p2);  // different draws
    CHECK(p1 > 0.0);
    CHECK(p1 < 1.0);
}

TEST_CASE("each stream's forward+backward passes grad_check at 1e-3 on a toy instance") {
    Resources res = toy_resources();
    StreamConfig cfg = toy_config(14);
    cfg.d_word = 4;
    cfg.d_pos = 2;
    cfg.d_ne = 2;
    cfg.d_rel = 2;
    cfg.d_h = 2;
    cfg.d_att = 3;
    WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, 4);
    RawInstance raw{"g#0", "the dry wood", "what burns", "dry wood", 1};
    EncodedInstance enc = encode_instance(raw, res);
    for (StreamKind kind : {StreamKind::PQCN, StreamKind::QCN, StreamKind::PCN}) {
        StreamParams sp = init_params(kind, cfg, wv, res);
        GradCheckReport rep = grad_check(
            [&](Tape& tape, ParamSet&) {
                Rng unused(0);
                ForwardResult fwd = stream_forward(tape, sp, enc, false, unused);
                return bce_loss(tape, fwd.prob_id, enc.y);
            },
            sp.params);
        INFO(to_string(kind), " worst ", rep.worst_param);
        CHECK(rep.max_rel < 1e-3);
    }
}
