#include "relations.hpp"

#include <algorithm>
#include <fstream>

#include "error.hpp"
#include "text.hpp"

namespace tmoe {

int RelationVocab::id(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return 0;
}

RelationVocab RelationVocab::from_names(const std::vector<std::string>& names_with_none) {
    if (names_with_none.empty() || names_with_none[0] != "none")
        throw DataError("RelationVocab: names must start with 'none'");
    RelationVocab v;
    v.names = names_with_none;
    return v;
}

RelationLexicon RelationLexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("relation lexicon: cannot open '" + path + "'");
    struct Entry {
        std::string head, tail, relation;
    };
    std::vector<Entry> entries;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw DataError("relation lexicon: malformed line " + std::to_string(line_no) +
                            " in '" + path + "'");
        Entry e{lowercase(line.substr(0, t1)), lowercase(line.substr(t1 + 1, t2 - t1 - 1)),
                line.substr(t2 + 1)};
        if (e.head.empty() || e.tail.empty() || e.relation.empty())
            throw DataError("relation lexicon: empty field at line " + std::to_string(line_no) +
                            " in '" + path + "'");
        entries.push_back(std::move(e));
    }

    std::vector<std::string> names;
    for (const auto& e : entries) names.push_back(e.relation);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());

    RelationLexicon lex;
    lex.vocab_.names = {"none"};
    lex.vocab_.names.insert(lex.vocab_.names.end(), names.begin(), names.end());
    for (const auto& e : entries)
        lex.pairs_[e.head + "\t" + e.tail] = lex.vocab_.id(e.relation);
    return lex;
}

RelationLexicon RelationLexicon::remapped(const RelationVocab& target) const {
    RelationLexicon out;
    out.vocab_ = target;
    for (const auto& [key, id] : pairs_)
        out.pairs_[key] = target.id(vocab_.names[static_cast<size_t>(id)]);
    return out;
}

int RelationLexicon::pair_relation(const std::string& a, const std::string& b) const {
    auto fwd = pairs_.find(a + "\t" + b);
    if (fwd != pairs_.end()) return fwd->second;
    auto rev = pairs_.find(b + "\t" + a);
    if (rev != pairs_.end()) return rev->second;
    return 0;
}

std::vector<int> lookup_relations(const std::vector<std::string>& seq_a,
                                  const std::vector<std::string>& seq_b,
                                  const RelationLexicon& lex) {
    std::vector<int> out(seq_a.size(), 0);
    if (lex.pair_count() == 0 || seq_b.empty()) return out;
    for (size_t i = 0; i < seq_a.size(); ++i) {
        for (const auto& other : seq_b) {
            int id = lex.pair_relation(seq_a[i], other);
            if (id != 0) {
                out[i] = id;
                break;
            }
        }
    }
    return out;
}

}  // namespace tmoe
