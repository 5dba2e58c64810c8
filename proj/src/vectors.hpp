#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"
#include "text.hpp"

namespace tmoe {

// Word-embedding initialization table, one row per vocabulary index.
// PAD row is all-zero; rows found in the vectors file carry the file values
// and are flagged pretrained; everything else is uniform(-0.1, 0.1).
struct WordVectorTable {
    int d_word = 0;
    Tensor matrix;                    // [vocab size, d_word]
    std::vector<uint8_t> pretrained;  // per row
};

// Builds a randomly initialized table (no file).
WordVectorTable random_word_vectors(const Vocab& vocab, int d_word, uint64_t seed);

// Text format: one line per token, token followed by d_word decimal numbers.
// Later duplicate lines for a token overwrite earlier ones.
WordVectorTable load_word_vectors(const std::string& path, const Vocab& vocab, int d_word,
                                  uint64_t seed);

}  // namespace tmoe
