#pragma once
// Triple ingestion, vocabularies, splits, degree statistics, filtered-eval
// structures and robustness perturbations.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "slint/util.hpp"

namespace slint {

struct Triple {
    int head = -1;
    int rel = -1;
    int tail = -1;

    bool operator==(const Triple&) const = default;
};

enum class Direction { predict_tail, predict_head };

struct Query {
    int known = -1;
    int rel = -1;
    Direction direction = Direction::predict_tail;
    int gold = -1;
};

enum class Split { train, valid, test };

struct DegreeStats {
    int entity_count = 0;
    double avg_degree = 0.0;
    double low_degree_pct = 0.0;  // percent of entities in the bottom-20% degree group
    int max_degree = 0;
    int min_degree = 0;
};

class KnowledgeGraph {
  public:
    // Vocabularies, first-seen interning order.
    int intern_entity(const std::string& name);
    int intern_relation(const std::string& name);
    std::optional<int> entity_id(const std::string& name) const;
    const std::string& entity_name(int id) const { return entity_names_.at(static_cast<size_t>(id)); }
    const std::string& relation_name(int id) const { return relation_names_.at(static_cast<size_t>(id)); }
    int num_entities() const { return static_cast<int>(entity_names_.size()); }
    int num_relations() const { return static_cast<int>(relation_names_.size()); }

    std::vector<Triple>& triples(Split s);
    const std::vector<Triple>& triples(Split s) const;

    // Rebuilds the all_true set, degree index and completion indexes from
    // the current splits. Call after any split mutation.
    void finalize();

    bool contains(const Triple& t) const;
    int degree(int entity) const { return degree_.at(static_cast<size_t>(entity)); }
    const std::vector<int>& degrees() const { return degree_; }

    // First train triple (in file order) incident to the entity, if any.
    std::optional<Triple> first_incident_train_triple(int entity) const;

    // All entities completing the query's missing slot to a known-true
    // triple, excluding the gold itself.
    std::unordered_set<int> filter_set(const Query& q) const;

    // Degree threshold for the bottom-20% group: the value at ascending
    // rank ceil(0.2*|E|), ties included at or below.
    int low_degree_threshold() const;
    bool is_low_degree(int entity) const { return degree(entity) <= low_degree_threshold(); }

    bool splits_disjoint() const;

    const std::string& description(int entity) const;
    void set_description(const std::string& entity_name, const std::string& text);

    uint64_t content_hash() const;

  private:
    std::vector<std::string> entity_names_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, int> entity_ids_;
    std::unordered_map<std::string, int> relation_ids_;
    std::vector<Triple> train_, valid_, test_;
    std::unordered_set<uint64_t> all_true_;
    std::vector<int> degree_;
    // (known, rel) -> completions, one map per direction
    std::unordered_map<uint64_t, std::vector<int>> tails_by_head_rel_;
    std::unordered_map<uint64_t, std::vector<int>> heads_by_tail_rel_;
    std::unordered_map<int, std::string> descriptions_;

    uint64_t pack(const Triple& t) const;
};

// Reads a line-oriented UTF-8 triple file (head<TAB>relation<TAB>tail),
// interning names in first-seen order. Returns triples in file order.
// A malformed line (field count != 3) raises a parse error naming the line.
std::vector<Triple> load_triples(const std::string& path, KnowledgeGraph& kg);

// Loads train.txt/valid.txt/test.txt (+ optional descriptions.txt:
// entity-name<TAB>text) from a dataset directory and finalizes the graph.
KnowledgeGraph load_kg(const std::string& dir);

DegreeStats degree_stats(const KnowledgeGraph& kg);

// Both-direction queries from the split whose gold entity falls in the
// bottom-20% degree group.
std::vector<Query> low_degree_slice(const KnowledgeGraph& kg, Split split);

// Both-direction queries for every triple of the split.
std::vector<Query> queries_for_split(const KnowledgeGraph& kg, Split split);

// Subsamples train to ceil(train_fraction*|train|) triples without
// replacement, then drops floor(edge_dropout*remaining) of the survivors.
// Deterministic given seed; valid/test untouched.
KnowledgeGraph perturb(const KnowledgeGraph& kg, double train_fraction, double edge_dropout,
                       uint64_t seed);

}  // namespace slint
