#pragma once

#include <string>
#include <vector>

#include "tape.hpp"

namespace tmoe {

// Parameter initializers. Each registers tensors under `prefix` in a fixed
// order; matrices are uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) unless noted.

// prefix.w : [d_in, d_att]
void init_seq_attention(ParamSet& params, const std::string& prefix, int d_in, int d_att,
                        Rng& rng);

// prefix.{fwd,bwd}.{w_i,w_f,w_o,w_c} : [d_in, d_h]
// prefix.{fwd,bwd}.{u_i,u_f,u_o,u_c} : [d_h, d_h]
// prefix.{fwd,bwd}.{b_i,b_f,b_o,b_c} : [d_h]; biases zero, forget bias 1.
void init_bilstm(ParamSet& params, const std::string& prefix, int d_in, int d_h, Rng& rng);

// prefix.w : [d_in]
void init_self_attention(ParamSet& params, const std::string& prefix, int d_in, Rng& rng);

// prefix.w : [d_a, d_b]
void init_bilinear(ParamSet& params, const std::string& prefix, int d_a, int d_b, Rng& rng);

// Word-level sequence attention. score(i,j) = relu(W q_i) . relu(W k_j);
// softmax over unmasked keys; output row i is the convex combination of the
// original key rows. A fully masked key set yields all-zero output rows.
TensorId seq_attention(Tape& tape, ParamSet& params, const std::string& prefix, TensorId query_seq,
                       TensorId key_seq, const std::vector<uint8_t>& key_mask);

// Single-layer bidirectional LSTM from zero initial states; per-position
// concat of the two directions -> [n, 2*d_h]. Positions >= n_valid produce
// zero rows and are never visited by either direction (n_valid < 0 means all).
TensorId bilstm(Tape& tape, ParamSet& params, const std::string& prefix, TensorId input_seq,
                int n_valid = -1);

// Learned-vector summary: beta = softmax over unmasked of (w . h_j),
// summary = sum_j beta_j h_j. Throws if every position is masked.
TensorId self_attention(Tape& tape, ParamSet& params, const std::string& prefix, TensorId hidden,
                        const std::vector<uint8_t>& mask);

// a^T W b as a [1] tensor.
TensorId bilinear_logit(Tape& tape, ParamSet& params, const std::string& prefix, TensorId a,
                        TensorId b);

std::vector<uint8_t> full_mask(int n);

}  // namespace tmoe
