#include "layers.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace tmoe {

namespace {

Tensor uniform_tensor(std::vector<int> shape, double bound, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape), true);
    for (auto& v : t.values) v = rng.uniform(-bound, bound);
    return t;
}

bool any_kept(const std::vector<uint8_t>& mask) {
    return std::any_of(mask.begin(), mask.end(), [](uint8_t k) { return k != 0; });
}

}  // namespace

std::vector<uint8_t> full_mask(int n) {
    return std::vector<uint8_t>(static_cast<size_t>(n), 1);
}

void init_seq_attention(ParamSet& params, const std::string& prefix, int d_in, int d_att,
                        Rng& rng) {
    params.add(prefix + ".w", uniform_tensor({d_in, d_att}, 1.0 / std::sqrt(d_in), rng));
}

void init_bilstm(ParamSet& params, const std::string& prefix, int d_in, int d_h, Rng& rng) {
    for (const char* dir : {"fwd", "bwd"}) {
        const std::string base = prefix + "." + dir + ".";
        for (const char* gate : {"i", "f", "o", "c"})
            params.add(base + "w_" + gate,
                       uniform_tensor({d_in, d_h}, 1.0 / std::sqrt(d_in), rng));
        for (const char* gate : {"i", "f", "o", "c"})
            params.add(base + "u_" + gate, uniform_tensor({d_h, d_h}, 1.0 / std::sqrt(d_h), rng));
        for (const char* gate : {"i", "f", "o", "c"}) {
            Tensor b = Tensor::zeros({d_h}, true);
            if (gate[0] == 'f') std::fill(b.values.begin(), b.values.end(), 1.0);
            params.add(base + "b_" + gate, std::move(b));
        }
    }
}

void init_self_attention(ParamSet& params, const std::string& prefix, int d_in, Rng& rng) {
    params.add(prefix + ".w", uniform_tensor({d_in}, 1.0 / std::sqrt(d_in), rng));
}

void init_bilinear(ParamSet& params, const std::string& prefix, int d_a, int d_b, Rng& rng) {
    params.add(prefix + ".w", uniform_tensor({d_a, d_b}, 1.0 / std::sqrt(d_a), rng));
}

TensorId seq_attention(Tape& tape, ParamSet& params, const std::string& prefix, TensorId query_seq,
                       TensorId key_seq, const std::vector<uint8_t>& key_mask) {
    const Tensor& q = tape.value(query_seq);
    const Tensor& k = tape.value(key_seq);
    if (q.rank() != 2 || k.rank() != 2 || q.cols() != k.cols())
        throw ShapeError("seq_attention: incompatible shapes " + shape_str(q.shape) + " and " +
                         shape_str(k.shape));
    if (static_cast<int>(key_mask.size()) != k.rows())
        throw ShapeError("seq_attention: mask size " + std::to_string(key_mask.size()) +
                         " does not match keys " + shape_str(k.shape));
    if (!any_kept(key_mask)) return tape.constant(Tensor::zeros({q.rows(), k.cols()}));

    TensorId w = tape.param(params, prefix + ".w");
    TensorId uq = tape.relu(tape.matmul(query_seq, w));
    TensorId uk = tape.relu(tape.matmul(key_seq, w));
    TensorId scores = tape.matmul(uq, tape.transpose(uk));
    TensorId alpha = tape.softmax_rows(tape.masked_fill(scores, key_mask));
    return tape.matmul(alpha, key_seq);
}

TensorId bilstm(Tape& tape, ParamSet& params, const std::string& prefix, TensorId input_seq,
                int n_valid) {
    const Tensor& x = tape.value(input_seq);
    if (x.rank() != 2) throw ShapeError("bilstm: expects rank 2, got " + shape_str(x.shape));
    const int n = x.rows();
    const int nv = n_valid < 0 ? n : n_valid;
    if (nv < 1 || nv > n)
        throw ShapeError("bilstm: n_valid " + std::to_string(nv) + " out of range for " +
                         shape_str(x.shape));

    auto gate_ids = [&](const char* dir) {
        const std::string base = prefix + "." + dir + ".";
        struct {
            TensorId w_i, w_f, w_o, w_c, u_i, u_f, u_o, u_c, b_i, b_f, b_o, b_c;
        } g{tape.param(params, base + "w_i"), tape.param(params, base + "w_f"),
            tape.param(params, base + "w_o"), tape.param(params, base + "w_c"),
            tape.param(params, base + "u_i"), tape.param(params, base + "u_f"),
            tape.param(params, base + "u_o"), tape.param(params, base + "u_c"),
            tape.param(params, base + "b_i"), tape.param(params, base + "b_f"),
            tape.param(params, base + "b_o"), tape.param(params, base + "b_c")};
        return g;
    };

    const int d_h = tape.value(tape.param(params, prefix + ".fwd.u_i")).rows();
    TensorId zero_row = tape.constant(Tensor::zeros({1, d_h}));

    auto run_dir = [&](bool forward) {
        auto g = gate_ids(forward ? "fwd" : "bwd");
        std::vector<TensorId> rows(static_cast<size_t>(n), zero_row);
        TensorId h = zero_row, c = zero_row;
        for (int step = 0; step < nv; ++step) {
            const int t = forward ? step : nv - 1 - step;
            TensorId xt = tape.gather_rows(input_seq, {t});
            TensorId i_g = tape.sigmoid(
                tape.add(tape.add(tape.matmul(xt, g.w_i), tape.matmul(h, g.u_i)), g.b_i));
            TensorId f_g = tape.sigmoid(
                tape.add(tape.add(tape.matmul(xt, g.w_f), tape.matmul(h, g.u_f)), g.b_f));
            TensorId o_g = tape.sigmoid(
                tape.add(tape.add(tape.matmul(xt, g.w_o), tape.matmul(h, g.u_o)), g.b_o));
            TensorId cand = tape.tanh(
                tape.add(tape.add(tape.matmul(xt, g.w_c), tape.matmul(h, g.u_c)), g.b_c));
            c = tape.add(tape.mul(f_g, c), tape.mul(i_g, cand));
            h = tape.mul(o_g, tape.tanh(c));
            rows[static_cast<size_t>(t)] = h;
        }
        return tape.reshape(tape.concat_last(rows), {n, d_h});
    };

    TensorId fwd = run_dir(true);
    TensorId bwd = run_dir(false);
    return tape.concat_last({fwd, bwd});
}

TensorId self_attention(Tape& tape, ParamSet& params, const std::string& prefix, TensorId hidden,
                        const std::vector<uint8_t>& mask) {
    const Tensor& h = tape.value(hidden);
    if (h.rank() != 2) throw ShapeError("self_attention: expects rank 2, got " + shape_str(h.shape));
    if (static_cast<int>(mask.size()) != h.rows())
        throw ShapeError("self_attention: mask size " + std::to_string(mask.size()) +
                         " does not match " + shape_str(h.shape));
    if (!any_kept(mask)) throw DataError("self_attention: all positions masked");

    const int d = h.cols();
    TensorId w = tape.param(params, prefix + ".w");
    TensorId scores = tape.transpose(tape.matmul(hidden, tape.reshape(w, {d, 1})));  // [1, n]
    TensorId beta = tape.softmax_rows(tape.masked_fill(scores, mask));
    return tape.reshape(tape.matmul(beta, hidden), {d});
}

TensorId bilinear_logit(Tape& tape, ParamSet& params, const std::string& prefix, TensorId a,
                        TensorId b) {
    const std::vector<int> a_shape = tape.value(a).shape;
    const std::vector<int> b_shape = tape.value(b).shape;
    TensorId w = tape.param(params, prefix + ".w");
    const std::vector<int> w_shape = tape.value(w).shape;
    if (a_shape.size() != 1 || b_shape.size() != 1 || a_shape[0] != w_shape[0] ||
        b_shape[0] != w_shape[1])
        throw ShapeError("bilinear_logit: incompatible shapes " + shape_str(a_shape) + ", " +
                         shape_str(w_shape) + ", " + shape_str(b_shape));
    TensorId left = tape.matmul(tape.reshape(a, {1, a_shape[0]}), w);
    return tape.reshape(tape.matmul(left, tape.reshape(b, {b_shape[0], 1})), {1});
}

}  // namespace tmoe
