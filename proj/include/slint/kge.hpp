#pragma once
// Pretrained structural embeddings and top-m candidate retrieval.
// TransE is the built-in encoder; tables from other encoders load
// through the same file interface.

#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "slint/kg_data.hpp"
#include "slint/tensor.hpp"

namespace slint {

struct EmbeddingTable {
    Tensor2 entity_vecs;    // |E| x d
    Tensor2 relation_vecs;  // |R| x d
    int dim = 0;
    std::vector<double> norms;  // cached per-entity L2 norms

    std::span<const double> entity(int id) const { return entity_vecs.row_span(id); }
    std::span<const double> relation(int id) const { return relation_vecs.row_span(id); }
    int num_entities() const { return entity_vecs.rows; }

    void refresh_norms();
    bool norms_consistent(double rel_tol = 1e-6) const;
    uint64_t content_hash() const;
};

struct TransEConfig {
    int dim = 32;
    double margin = 1.0;
    double lr = 0.01;
    int epochs = 50;
    int negatives_per_positive = 1;
    uint64_t seed = 1;
};

struct CandidateList {
    Query query;
    std::vector<int> ids;        // top-m, scores descending
    std::vector<double> scores;  // -||q - e||_2
};

// Margin ranking loss with uniform head-or-tail corruption; entity vectors
// renormalized to unit L2 after each epoch. Deterministic given cfg.seed.
EmbeddingTable train_transe(const KnowledgeGraph& kg, const TransEConfig& cfg);

// Seeded initialization identical to train_transe's starting point.
EmbeddingTable init_embeddings(int num_entities, int num_relations, int dim, uint64_t seed);

// known + rel for predict-tail, known - rel for predict-head.
std::vector<double> query_embedding(const Query& q, const EmbeddingTable& table);

// Scores every entity by -||query_embedding(q) - e||_2, removes excl,
// returns the top-m with ties broken by ascending entity id.
CandidateList rank_candidates(const Query& q, const EmbeddingTable& table, int m,
                              const std::unordered_set<int>& excl);

// Text format: "N d" header then N rows of d reals; relation block follows
// with an "R d" header. Row order matches vocabulary order.
void save_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embeddings(const std::string& path);

}  // namespace slint
