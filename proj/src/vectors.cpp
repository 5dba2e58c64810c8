#include "vectors.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "error.hpp"
#include "rng.hpp"

namespace tmoe {

namespace {

WordVectorTable make_table(const Vocab& vocab, int d_word, uint64_t seed,
                           const std::unordered_map<std::string, std::vector<double>>& file_vecs) {
    if (d_word <= 0) throw DataError("word vectors: d_word must be positive");
    WordVectorTable t;
    t.d_word = d_word;
    t.matrix = Tensor::zeros({vocab.size(), d_word});
    t.pretrained.assign(static_cast<size_t>(vocab.size()), 0);
    Rng rng(seed);
    for (int row = 0; row < vocab.size(); ++row) {
        if (row == Vocab::kPad) continue;  // PAD stays zero
        const std::vector<double>* vec = nullptr;
        if (row >= 2) {
            auto it = file_vecs.find(vocab.token(row));
            if (it != file_vecs.end()) vec = &it->second;
        }
        if (vec) {
            for (int j = 0; j < d_word; ++j) t.matrix.at(row, j) = (*vec)[static_cast<size_t>(j)];
            t.pretrained[static_cast<size_t>(row)] = 1;
        } else {
            for (int j = 0; j < d_word; ++j) t.matrix.at(row, j) = rng.uniform(-0.1, 0.1);
        }
    }
    return t;
}

}  // namespace

WordVectorTable random_word_vectors(const Vocab& vocab, int d_word, uint64_t seed) {
    return make_table(vocab, d_word, seed, {});
}

WordVectorTable load_word_vectors(const std::string& path, const Vocab& vocab, int d_word,
                                  uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw DataError("word vectors: cannot open '" + path + "'");
    std::unordered_map<std::string, std::vector<double>> file_vecs;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<double> vec;
        double v;
        while (ss >> v) vec.push_back(v);
        if (!ss.eof())
            throw DataError("word vectors: malformed line " + std::to_string(line_no) + " in '" +
                            path + "'");
        if (token.empty() || vec.empty())
            throw DataError("word vectors: malformed line " + std::to_string(line_no) + " in '" +
                            path + "'");
        if (static_cast<int>(vec.size()) != d_word)
            throw DataError("word vectors: dimension " + std::to_string(vec.size()) + " in '" +
                            path + "' line " + std::to_string(line_no) + " does not match d_word " +
                            std::to_string(d_word));
        file_vecs[token] = std::move(vec);
    }
    return make_table(vocab, d_word, seed, file_vecs);
}

}  // namespace tmoe
