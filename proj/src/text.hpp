#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace tmoe {

// Whitespace split, then leading/trailing punctuation peeled into standalone
// tokens (apostrophe and hyphen stay attached: "'s", "fire-pit"). Output is
// lowercased; all downstream lookups use these forms.
std::vector<std::string> tokenize(const std::string& text);

std::string lowercase(const std::string& s);

using FreqTable = std::unordered_map<std::string, long>;

FreqTable build_freq(const std::vector<std::vector<std::string>>& corpora);

// Token index map. Index 0 is PAD, 1 is UNK; real tokens start at 2, ordered
// by frequency (descending), ties broken lexicographically.
class Vocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    static Vocab build(const std::vector<std::vector<std::string>>& corpora, int min_count);
    static Vocab from_tokens(const std::vector<std::string>& ordered_tokens);

    int index(const std::string& token) const;  // kUnk when absent
    const std::string& token(int index) const;  // "<pad>" / "<unk>" for 0 / 1
    int size() const { return static_cast<int>(tokens_.size()) + 2; }
    const std::vector<std::string>& tokens() const { return tokens_; }  // from index 2
    bool frozen() const { return frozen_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    bool frozen_ = false;
};

// Tag-string map for one channel (POS or NE). Id 0 is the unknown tag; known
// tags are ordered lexicographically starting at 1.
class TagVocab {
public:
    static TagVocab build(const std::vector<std::vector<std::string>>& tag_streams);
    static TagVocab from_tags(const std::vector<std::string>& ordered_tags);

    int id(const std::string& tag) const;  // 0 when absent
    int size() const { return static_cast<int>(tags_.size()) + 1; }
    const std::vector<std::string>& tags() const { return tags_; }  // from id 1

private:
    std::vector<std::string> tags_;
    std::unordered_map<std::string, int> id_;
};

}  // namespace tmoe
