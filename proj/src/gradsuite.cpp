#include "gradsuite.hpp"

#include <cstdio>

#include "gradcheck.hpp"
#include "layers.hpp"
#include "streams.hpp"
#include "train.hpp"

namespace tmoe {

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double bound = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (auto& v : t.values) v = rng.uniform(-bound, bound);
    return t;
}

// Small instance with every channel populated, ids drawn against the toy
// resource sizes used below.
EncodedInstance toy_instance(Rng& rng, int vocab_size, int n_pos, int n_ne, int n_rel) {
    auto seq = [&](int len) {
        EncodedSeq s;
        for (int i = 0; i < len; ++i) {
            s.words.push_back(2 + static_cast<int>(rng.below(static_cast<size_t>(vocab_size - 2))));
            s.pos.push_back(static_cast<int>(rng.below(static_cast<size_t>(n_pos))));
            s.ne.push_back(static_cast<int>(rng.below(static_cast<size_t>(n_ne))));
            s.rel.push_back(static_cast<int>(rng.below(static_cast<size_t>(n_rel))));
        }
        s.feat = random_tensor({len, 3}, rng);
        return s;
    };
    EncodedInstance inst;
    inst.id = "toy";
    inst.passage = seq(6);
    inst.question = seq(4);
    inst.choice = seq(3);
    inst.y = 1;
    return inst;
}

GradSuiteSection check(const std::string& name, double tolerance, const ForwardFn& fn,
                       ParamSet& params) {
    GradCheckReport rep = grad_check(fn, params, 1e-5);
    GradSuiteSection s;
    s.name = name;
    s.max_rel = rep.max_rel;
    s.worst_param = rep.worst_param;
    s.tolerance = tolerance;
    s.passed = rep.max_rel < tolerance;
    return s;
}

}  // namespace

GradSuiteResult run_gradcheck_suite(uint64_t seed) {
    GradSuiteResult result;
    Rng rng(seed);

    {
        ParamSet params;
        Rng init(seed + 1);
        init_seq_attention(params, "att", 4, 3, init);
        const Tensor query = random_tensor({3, 4}, rng);
        const Tensor keys = random_tensor({5, 4}, rng);
        const std::vector<uint8_t> mask{1, 1, 0, 1, 1};
        result.sections.push_back(check(
            "seq_attention", 1e-4,
            [&](Tape& tape, ParamSet& p) {
                TensorId out = seq_attention(tape, p, "att", tape.constant(query),
                                             tape.constant(keys), mask);
                return tape.sum_all(out);
            },
            params));
    }
    {
        ParamSet params;
        Rng init(seed + 2);
        init_bilstm(params, "lstm", 3, 2, init);
        const Tensor input = random_tensor({4, 3}, rng);
        result.sections.push_back(check(
            "bilstm", 1e-4,
            [&](Tape& tape, ParamSet& p) {
                return tape.sum_all(bilstm(tape, p, "lstm", tape.constant(input)));
            },
            params));
    }
    {
        ParamSet params;
        Rng init(seed + 3);
        init_self_attention(params, "selfatt", 3, init);
        const Tensor hidden = random_tensor({5, 3}, rng);
        const std::vector<uint8_t> mask{1, 1, 1, 0, 1};
        result.sections.push_back(check(
            "self_attention", 1e-4,
            [&](Tape& tape, ParamSet& p) {
                return tape.sum_all(self_attention(tape, p, "selfatt", tape.constant(hidden), mask));
            },
            params));
    }
    {
        ParamSet params;
        Rng init(seed + 4);
        init_bilinear(params, "bilin", 3, 4, init);
        const Tensor a = random_tensor({3}, rng);
        const Tensor b = random_tensor({4}, rng);
        result.sections.push_back(check(
            "bilinear_logit", 1e-4,
            [&](Tape& tape, ParamSet& p) {
                return bilinear_logit(tape, p, "bilin", tape.constant(a), tape.constant(b));
            },
            params));
    }

    // Full streams on a toy instance, loss = binary cross-entropy.
    {
        Resources res;
        res.vocab = Vocab::from_tokens({"ada", "bix", "cor", "dul", "eno", "fim", "gus", "hol",
                                        "ipa", "jor"});
        res.pos_tags = TagVocab::from_tags({"n", "v"});
        res.ne_tags = TagVocab::from_tags({"per"});
        res.rel_vocab = RelationVocab::from_names({"none", "signal"});
        res.frozen = true;
        StreamConfig cfg;
        cfg.d_word = 5;
        cfg.d_pos = 3;
        cfg.d_ne = 2;
        cfg.d_rel = 2;
        cfg.d_h = 3;
        cfg.d_att = 4;
        cfg.dropout = 0.0;
        cfg.seed = seed + 5;
        const WordVectorTable wv = random_word_vectors(res.vocab, cfg.d_word, seed + 6);
        const EncodedInstance inst = toy_instance(rng, res.vocab.size(), res.pos_tags.size(),
                                                  res.ne_tags.size(), res.rel_vocab.size());
        for (StreamKind kind : {StreamKind::PQCN, StreamKind::QCN, StreamKind::PCN}) {
            StreamParams sp = init_params(kind, cfg, wv, res);
            // grad_check perturbs sp.params in place; the forward reads the
            // same object through sp.
            result.sections.push_back(check(
                to_string(kind) + "_forward", 1e-3,
                [&](Tape& tape, ParamSet&) {
                    Rng unused(0);
                    ForwardResult fwd = stream_forward(tape, sp, inst, false, unused);
                    return bce_loss(tape, fwd.prob_id, inst.y);
                },
                sp.params));
        }
    }

    for (const auto& s : result.sections) {
        result.worst = std::max(result.worst, s.max_rel);
        if (!s.passed) result.all_passed = false;
    }
    return result;
}

std::string gradsuite_report(const GradSuiteResult& result) {
    std::string out;
    char buf[160];
    for (const auto& s : result.sections) {
        std::snprintf(buf, sizeof(buf), "%s %-16s max_rel_err %.3e (tol %.0e) worst %s\n",
                      s.passed ? "ok  " : "FAIL", s.name.c_str(), s.max_rel, s.tolerance,
                      s.worst_param.c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "overall %s (worst %.3e)\n",
                  result.all_passed ? "ok" : "FAIL", result.worst);
    out += buf;
    return out;
}

}  // namespace tmoe
