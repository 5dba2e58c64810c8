#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace tmoe {

// Relation names for the knowledge channel; id 0 is always "none".
struct RelationVocab {
    std::vector<std::string> names{"none"};

    int id(const std::string& name) const;
    int size() const { return static_cast<int>(names.size()); }
    static RelationVocab from_names(const std::vector<std::string>& names_with_none);
};

// Local lookup table of (head, tail) -> relation id, loaded from a
// tab-separated file: head<TAB>tail<TAB>relation.
class RelationLexicon {
public:
    RelationLexicon() = default;

    static RelationLexicon load(const std::string& path);

    // Rebinds relation ids to another vocabulary; unknown names map to none.
    RelationLexicon remapped(const RelationVocab& target) const;

    // Relation id of the ordered pair, head-first orientation preferred,
    // reversed orientation accepted; 0 when absent.
    int pair_relation(const std::string& a, const std::string& b) const;

    const RelationVocab& vocab() const { return vocab_; }
    size_t pair_count() const { return pairs_.size(); }

private:
    RelationVocab vocab_;
    std::unordered_map<std::string, int> pairs_;  // "head\ttail" -> id
};

// For each token of seq_a, scans seq_b left to right and reports the first
// lexicon hit (either orientation, head-first preferred); 0 when none.
std::vector<int> lookup_relations(const std::vector<std::string>& seq_a,
                                  const std::vector<std::string>& seq_b,
                                  const RelationLexicon& lex);

}  // namespace tmoe
