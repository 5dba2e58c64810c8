#include "text.hpp"

#include <algorithm>
#include <cctype>

#include "error.hpp"

namespace tmoe {

namespace {

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Punctuation peeled off token edges. Apostrophe and hyphen are word-internal
// in this corpus and stay attached.
bool is_strip_punct(unsigned char c) {
    return c < 0x80 && std::ispunct(c) && c != '\'' && c != '-';
}

}  // namespace

std::string lowercase(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (static_cast<unsigned char>(c) < 0x80)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        size_t j = i;
        while (j < n && !is_space(static_cast<unsigned char>(text[j]))) ++j;
        std::string chunk = text.substr(i, j - i);
        i = j;

        size_t lo = 0, hi = chunk.size();
        std::vector<std::string> leading, trailing;
        while (lo < hi && is_strip_punct(static_cast<unsigned char>(chunk[lo])))
            leading.push_back(std::string(1, chunk[lo++]));
        while (hi > lo && is_strip_punct(static_cast<unsigned char>(chunk[hi - 1])))
            trailing.push_back(std::string(1, chunk[hi - 1])), --hi;

        for (auto& t : leading) out.push_back(std::move(t));
        if (hi > lo) out.push_back(lowercase(chunk.substr(lo, hi - lo)));
        for (auto it = trailing.rbegin(); it != trailing.rend(); ++it)
            out.push_back(std::move(*it));
    }
    return out;
}

FreqTable build_freq(const std::vector<std::vector<std::string>>& corpora) {
    FreqTable freq;
    for (const auto& stream : corpora)
        for (const auto& tok : stream) ++freq[tok];
    return freq;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpora, int min_count) {
    if (min_count < 1) throw DataError("Vocab::build: min_count must be >= 1");
    FreqTable freq = build_freq(corpora);
    std::vector<std::pair<std::string, long>> entries;
    entries.reserve(freq.size());
    for (const auto& [tok, count] : freq)
        if (count >= min_count) entries.emplace_back(tok, count);
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocab v;
    v.tokens_.reserve(entries.size());
    for (auto& [tok, count] : entries) {
        v.index_.emplace(tok, static_cast<int>(v.tokens_.size()) + 2);
        v.tokens_.push_back(tok);
    }
    v.frozen_ = true;
    return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& ordered_tokens) {
    Vocab v;
    v.tokens_ = ordered_tokens;
    for (size_t i = 0; i < ordered_tokens.size(); ++i) {
        if (!v.index_.emplace(ordered_tokens[i], static_cast<int>(i) + 2).second)
            throw DataError("Vocab::from_tokens: duplicate token '" + ordered_tokens[i] + "'");
    }
    v.frozen_ = true;
    return v;
}

int Vocab::index(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int index) const {
    static const std::string pad = "<pad>", unk = "<unk>";
    if (index == kPad) return pad;
    if (index == kUnk) return unk;
    if (index < 2 || index >= size()) throw DataError("Vocab::token: index out of range");
    return tokens_[static_cast<size_t>(index) - 2];
}

TagVocab TagVocab::build(const std::vector<std::vector<std::string>>& tag_streams) {
    std::vector<std::string> uniq;
    for (const auto& stream : tag_streams)
        for (const auto& tag : stream) uniq.push_back(tag);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    return from_tags(uniq);
}

TagVocab TagVocab::from_tags(const std::vector<std::string>& ordered_tags) {
    TagVocab v;
    v.tags_ = ordered_tags;
    for (size_t i = 0; i < ordered_tags.size(); ++i) {
        if (!v.id_.emplace(ordered_tags[i], static_cast<int>(i) + 1).second)
            throw DataError("TagVocab: duplicate tag '" + ordered_tags[i] + "'");
    }
    return v;
}

int TagVocab::id(const std::string& tag) const {
    auto it = id_.find(tag);
    return it == id_.end() ? 0 : it->second;
}

}  // namespace tmoe
