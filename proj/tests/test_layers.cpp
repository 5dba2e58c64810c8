#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "gradcheck.hpp"
#include "layers.hpp"
#include "oracle.hpp"

using namespace tmoe;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double bound = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (auto& v : t.values) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

TEST_CASE("seq_attention with a single key copies that key to every row") {
    Rng rng(1);
    ParamSet params;
    init_seq_attention(params, "att", 4, 3, rng);
    Tape tape;
    TensorId q = tape.constant(random_tensor({3, 4}, rng));
    Tensor key = random_tensor({1, 4}, rng);
    TensorId k = tape.constant(key);
    const Tensor& out = tape.value(seq_attention(tape, params, "att", q, k, full_mask(1)));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) CHECK(out.at(i, j) == doctest::Approx(key.at(0, j)));
}

TEST_CASE("seq_attention over identical keys returns that key") {
    Rng rng(2);
    ParamSet params;
    init_seq_attention(params, "att", 4, 3, rng);
    Tensor key_row = random_tensor({1, 4}, rng);
    Tensor keys = Tensor::zeros({5, 4});
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) keys.at(i, j) = key_row.at(0, j);
    Tape tape;
    const Tensor& out = tape.value(seq_attention(tape, params, "att",
                                                 tape.constant(random_tensor({2, 4}, rng)),
                                                 tape.constant(keys), full_mask(5)));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(out.at(i, j) == doctest::Approx(key_row.at(0, j)).epsilon(1e-9));
}

TEST_CASE("seq_attention matches the formula oracle and normalizes") {
    Rng rng(3);
    ParamSet params;
    init_seq_attention(params, "att", 4, 5, rng);
    const Tensor query = random_tensor({3, 4}, rng);
    const Tensor keys = random_tensor({5, 4}, rng);
    const std::vector<uint8_t> mask{1, 0, 1, 1, 0};

    Tape tape;
    const Tensor& out = tape.value(
        seq_attention(tape, params, "att", tape.constant(query), tape.constant(keys), mask));
    const oracle::Mat expect =
        oracle::seq_attention(oracle::to_mat(query), oracle::to_mat(keys),
                              oracle::to_mat(params.at("att.w")), mask);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(out.at(i, j) ==
                  doctest::Approx(expect[static_cast<size_t>(i)][static_cast<size_t>(j)])
                      .epsilon(1e-12));
}

TEST_CASE("seq_attention output rows stay in the convex hull of unmasked keys") {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const int m = 1 + static_cast<int>(rng.below(4));
        const int n = 1 + static_cast<int>(rng.below(5));
        const int d = 2 + static_cast<int>(rng.below(4));
        ParamSet params;
        init_seq_attention(params, "att", d, 3, rng);
        const Tensor query = random_tensor({m, d}, rng);
        const Tensor keys = random_tensor({n, d}, rng);
        std::vector<uint8_t> mask(static_cast<size_t>(n));
        int kept = 0;
        for (auto& v : mask)
            if ((v = rng.below(2) ? 1 : 0)) ++kept;
        if (!kept) mask[0] = 1;
        Tape tape;
        const Tensor& out = tape.value(
            seq_attention(tape, params, "att", tape.constant(query), tape.constant(keys), mask));
        for (int j = 0; j < d; ++j) {
            double lo = 1e300, hi = -1e300;
            for (int t = 0; t < n; ++t)
                if (mask[static_cast<size_t>(t)]) {
                    lo = std::min(lo, keys.at(t, j));
                    hi = std::max(hi, keys.at(t, j));
                }
            for (int i = 0; i < m; ++i) {
                CHECK(out.at(i, j) >= lo - 1e-9);
                CHECK(out.at(i, j) <= hi + 1e-9);
            }
        }
    }
}

TEST_CASE("seq_attention with every key masked yields zero rows") {
    Rng rng(5);
    ParamSet params;
    init_seq_attention(params, "att", 4, 3, rng);
    Tape tape;
    const Tensor& out = tape.value(seq_attention(tape, params, "att",
                                                 tape.constant(random_tensor({2, 4}, rng)),
                                                 tape.constant(random_tensor({3, 4}, rng)),
                                                 {0, 0, 0}));
    for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("bilstm fixes the origin with zero input and zero parameters") {
    ParamSet params;
    Rng rng(6);
    init_bilstm(params, "lstm", 3, 2, rng);
    for (const auto& name : params.names())
        for (auto& v : params.at(name).values) v = 0.0;
    Tape tape;
    const Tensor& out =
        tape.value(bilstm(tape, params, "lstm", tape.constant(Tensor::zeros({4, 3}))));
    CHECK(out.shape == std::vector<int>{4, 4});
    for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("bilstm on one step computes both directions from the same input") {
    Rng rng(7);
    ParamSet params;
    init_bilstm(params, "lstm", 3, 2, rng);
    const Tensor input = random_tensor({1, 3}, rng);
    Tape tape;
    const Tensor& out = tape.value(bilstm(tape, params, "lstm", tape.constant(input)));
    const oracle::Mat expect = oracle::bilstm(oracle::to_mat(input), params, "lstm");
    for (int j = 0; j < 4; ++j)
        CHECK(out.at(0, j) == doctest::Approx(expect[0][static_cast<size_t>(j)]).epsilon(1e-12));
}

TEST_CASE("bilstm matches the scalar gate-equation oracle on four steps") {
    Rng rng(8);
    ParamSet params;
    init_bilstm(params, "lstm", 3, 2, rng);
    const Tensor input = random_tensor({4, 3}, rng);
    Tape tape;
    const Tensor& out = tape.value(bilstm(tape, params, "lstm", tape.constant(input)));
    const oracle::Mat expect = oracle::bilstm(oracle::to_mat(input), params, "lstm");
    for (int t = 0; t < 4; ++t)
        for (int j = 0; j < 4; ++j)
            CHECK(out.at(t, j) ==
                  doctest::Approx(expect[static_cast<size_t>(t)][static_cast<size_t>(j)])
                      .epsilon(1e-12));
}

TEST_CASE("self_attention with one row returns it") {
    Rng rng(9);
    ParamSet params;
    init_self_attention(params, "sa", 3, rng);
    const Tensor hidden = random_tensor({1, 3}, rng);
    Tape tape;
    const Tensor& out =
        tape.value(self_attention(tape, params, "sa", tape.constant(hidden), full_mask(1)));
    for (int j = 0; j < 3; ++j) CHECK(out.at(j) == doctest::Approx(hidden.at(0, j)));
}

TEST_CASE("self_attention with a zero scoring vector averages unmasked rows") {
    Rng rng(10);
    ParamSet params;
    init_self_attention(params, "sa", 3, rng);
    for (auto& v : params.at("sa.w").values) v = 0.0;
    const Tensor hidden = random_tensor({4, 3}, rng);
    Tape tape;
    const Tensor& out =
        tape.value(self_attention(tape, params, "sa", tape.constant(hidden), {1, 1, 0, 1}));
    for (int j = 0; j < 3; ++j) {
        const double mean = (hidden.at(0, j) + hidden.at(1, j) + hidden.at(3, j)) / 3.0;
        CHECK(out.at(j) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("self_attention matches the weighted-sum oracle") {
    Rng rng(11);
    ParamSet params;
    init_self_attention(params, "sa", 6, rng);
    const Tensor hidden = random_tensor({5, 6}, rng);
    Tape tape;
    const Tensor& out =
        tape.value(self_attention(tape, params, "sa", tape.constant(hidden), full_mask(5)));
    const oracle::Vec expect =
        oracle::self_attention(oracle::to_mat(hidden), oracle::to_vec(params.at("sa.w")),
                               full_mask(5));
    for (int j = 0; j < 6; ++j)
        CHECK(out.at(j) == doctest::Approx(expect[static_cast<size_t>(j)]).epsilon(1e-12));
}

TEST_CASE("self_attention rejects a fully masked sequence") {
    Rng rng(12);
    ParamSet params;
    init_self_attention(params, "sa", 3, rng);
    Tape tape;
    CHECK_THROWS_AS(
        self_attention(tape, params, "sa", tape.constant(random_tensor({2, 3}, rng)), {0, 0}),
        DataError);
}

TEST_CASE("bilinear_logit on basis vectors reads the matrix entry") {
    ParamSet params;
    Rng rng(13);
    init_bilinear(params, "bl", 2, 2, rng);
    Tensor& w = params.at("bl.w");
    w.values = {1, 0, 0, 1};
    Tape tape;
    TensorId a = tape.constant(Tensor::from({2}, {1, 0}));
    TensorId b = tape.constant(Tensor::from({2}, {1, 0}));
    CHECK(tape.value(bilinear_logit(tape, params, "bl", a, b)).values[0] == doctest::Approx(1.0));
}

TEST_CASE("bilinear_logit with a zero left vector is zero") {
    ParamSet params;
    Rng rng(14);
    init_bilinear(params, "bl", 3, 4, rng);
    Tape tape;
    TensorId a = tape.constant(Tensor::zeros({3}));
    TensorId b = tape.constant(random_tensor({4}, rng));
    CHECK(tape.value(bilinear_logit(tape, params, "bl", a, b)).values[0] == 0.0);
}

TEST_CASE("bilinear_logit matches the double-loop oracle") {
    ParamSet params;
    Rng rng(15);
    init_bilinear(params, "bl", 3, 4, rng);
    const Tensor a = random_tensor({3}, rng);
    const Tensor b = random_tensor({4}, rng);
    double expect = 0.0;
    const Tensor& w = params.at("bl.w");
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) expect += a.at(i) * w.at(i, j) * b.at(j);
    Tape tape;
    const double got =
        tape.value(bilinear_logit(tape, params, "bl", tape.constant(a), tape.constant(b)))
            .values[0];
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("attention weights over unmasked positions sum to one") {
    Rng rng(16);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 1 + static_cast<int>(rng.below(6));
        const int d = 2 + static_cast<int>(rng.below(4));
        // Normalization is checked through the summary of constant rows: if
        // the weights sum to w, a constant row r maps to w * r.
        Tensor hidden = Tensor::zeros({n, d});
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < d; ++j) hidden.at(t, j) = 3.25;
        ParamSet params2;
        init_self_attention(params2, "sa", d, rng);
        Tape tape;
        const Tensor& out =
            tape.value(self_attention(tape, params2, "sa", tape.constant(hidden), full_mask(n)));
        for (int j = 0; j < d; ++j) CHECK(out.at(j) == doctest::Approx(3.25).epsilon(1e-9));
    }
}

TEST_CASE("masked trailing padding does not change masked summaries") {
    Rng rng(17);
    ParamSet params;
    init_bilstm(params, "lstm", 3, 2, rng);
    ParamSet sa;
    init_self_attention(sa, "sa", 4, rng);

    const Tensor input = random_tensor({4, 3}, rng);
    Tensor padded = Tensor::zeros({6, 3});
    for (int t = 0; t < 4; ++t)
        for (int j = 0; j < 3; ++j) padded.at(t, j) = input.at(t, j);

    Tape tape1;
    TensorId h1 = bilstm(tape1, params, "lstm", tape1.constant(input));
    const Tensor s1 = tape1.value(self_attention(tape1, sa, "sa", h1, full_mask(4)));

    Tape tape2;
    TensorId h2 = bilstm(tape2, params, "lstm", tape2.constant(padded), 4);
    const Tensor s2 =
        tape2.value(self_attention(tape2, sa, "sa", h2, {1, 1, 1, 1, 0, 0}));

    for (int j = 0; j < 4; ++j) CHECK(s1.at(j) == doctest::Approx(s2.at(j)).epsilon(1e-15));
}

TEST_CASE("every layer passes grad_check at 1e-4 on random small shapes") {
    Rng rng(18);
    for (int rep = 0; rep < 3; ++rep) {
        {
            ParamSet params;
            init_seq_attention(params, "att", 3, 2, rng);
            const Tensor q = random_tensor({2, 3}, rng);
            const Tensor k = random_tensor({3, 3}, rng);
            GradCheckReport r = grad_check(
                [&](Tape& tape, ParamSet& p) {
                    return tape.sum_all(seq_attention(tape, p, "att", tape.constant(q),
                                                      tape.constant(k), full_mask(3)));
                },
                params);
            CHECK(r.max_rel < 1e-4);
        }
        {
            ParamSet params;
            init_bilstm(params, "lstm", 2, 2, rng);
            const Tensor x = random_tensor({3, 2}, rng);
            GradCheckReport r = grad_check(
                [&](Tape& tape, ParamSet& p) {
                    return tape.sum_all(bilstm(tape, p, "lstm", tape.constant(x)));
                },
                params);
            CHECK(r.max_rel < 1e-4);
        }
        {
            ParamSet params;
            init_self_attention(params, "sa", 3, rng);
            const Tensor h = random_tensor({4, 3}, rng);
            GradCheckReport r = grad_check(
                [&](Tape& tape, ParamSet& p) {
                    return tape.sum_all(
                        self_attention(tape, p, "sa", tape.constant(h), full_mask(4)));
                },
                params);
            CHECK(r.max_rel < 1e-4);
        }
        {
            ParamSet params;
            init_bilinear(params, "bl", 2, 3, rng);
            const Tensor a = random_tensor({2}, rng);
            const Tensor b = random_tensor({3}, rng);
            GradCheckReport r = grad_check(
                [&](Tape& tape, ParamSet& p) {
                    return bilinear_logit(tape, p, "bl", tape.constant(a), tape.constant(b));
                },
                params);
            CHECK(r.max_rel < 1e-4);
        }
    }
}

TEST_CASE("forget-gate bias initializes to one") {
    Rng rng(19);
    ParamSet params;
    init_bilstm(params, "lstm", 3, 2, rng);
    for (double v : params.at("lstm.fwd.b_f").values) CHECK(v == 1.0);
    for (double v : params.at("lstm.bwd.b_f").values) CHECK(v == 1.0);
    for (double v : params.at("lstm.fwd.b_i").values) CHECK(v == 0.0);
}
