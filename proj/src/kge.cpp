#include "slint/kge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "slint/util.hpp"

namespace slint {

void EmbeddingTable::refresh_norms() {
    norms.resize(static_cast<size_t>(entity_vecs.rows));
    for (int i = 0; i < entity_vecs.rows; ++i) norms[static_cast<size_t>(i)] = l2_norm(entity_vecs.row_span(i));
}

bool EmbeddingTable::norms_consistent(double rel_tol) const {
    if (norms.size() != static_cast<size_t>(entity_vecs.rows)) return false;
    for (int i = 0; i < entity_vecs.rows; ++i) {
        double fresh = l2_norm(entity_vecs.row_span(i));
        double denom = std::max(1.0, std::abs(fresh));
        if (std::abs(fresh - norms[static_cast<size_t>(i)]) / denom > rel_tol) return false;
    }
    return true;
}

uint64_t EmbeddingTable::content_hash() const {
    uint64_t h = fnv1a_doubles(entity_vecs.data);
    return fnv1a_doubles(relation_vecs.data, h);
}

EmbeddingTable init_embeddings(int num_entities, int num_relations, int dim, uint64_t seed) {
    EmbeddingTable t;
    t.dim = dim;
    t.entity_vecs = Tensor2(num_entities, dim);
    t.relation_vecs = Tensor2(num_relations, dim);
    Rng rng = make_rng(seed);
    double bound = 6.0 / std::sqrt(static_cast<double>(dim));
    for (double& v : t.entity_vecs.data) v = uniform_real(rng, -bound, bound);
    for (double& v : t.relation_vecs.data) v = uniform_real(rng, -bound, bound);
    // relation vectors normalized once at init, entities every epoch
    for (int r = 0; r < num_relations; ++r) {
        double n = l2_norm(t.relation_vecs.row_span(r));
        if (n > 0) {
            for (double& v : t.relation_vecs.row_span(r)) v /= n;
        }
    }
    for (int e = 0; e < num_entities; ++e) {
        double n = l2_norm(t.entity_vecs.row_span(e));
        if (n > 0) {
            for (double& v : t.entity_vecs.row_span(e)) v /= n;
        }
    }
    t.refresh_norms();
    return t;
}

namespace {

double triple_distance(const EmbeddingTable& t, int h, int r, int ta, std::span<double> diff) {
    auto hv = t.entity(h);
    auto rv = t.relation(r);
    auto tv = t.entity(ta);
    double sq = 0.0;
    for (size_t i = 0; i < diff.size(); ++i) {
        diff[i] = hv[i] + rv[i] - tv[i];
        sq += diff[i] * diff[i];
    }
    return std::sqrt(sq);
}

}  // namespace

EmbeddingTable train_transe(const KnowledgeGraph& kg, const TransEConfig& cfg) {
    const auto& train = kg.triples(Split::train);
    if (train.empty()) throw SlintError("train_transe: empty train split");
    if (cfg.dim < 1) throw SlintError("train_transe: dim must be >= 1");
    if (cfg.margin <= 0) throw SlintError("train_transe: margin must be > 0");

    EmbeddingTable t = init_embeddings(kg.num_entities(), kg.num_relations(), cfg.dim, cfg.seed);
    Rng rng = make_rng(derive_seed(cfg.seed, 0x7e5));

    std::vector<double> pos_diff(static_cast<size_t>(cfg.dim));
    std::vector<double> neg_diff(static_cast<size_t>(cfg.dim));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order = shuffled_indices(static_cast<int>(train.size()), rng);
        double epoch_loss = 0.0;
        for (int idx : order) {
            const Triple& pos = train[static_cast<size_t>(idx)];
            for (int neg_i = 0; neg_i < cfg.negatives_per_positive; ++neg_i) {
                bool corrupt_head = uniform_int(rng, 0, 1) == 0;
                int corrupted = uniform_int(rng, 0, kg.num_entities() - 1);
                Triple neg = pos;
                (corrupt_head ? neg.head : neg.tail) = corrupted;

                double dp = triple_distance(t, pos.head, pos.rel, pos.tail, pos_diff);
                double dn = triple_distance(t, neg.head, neg.rel, neg.tail, neg_diff);
                double loss = cfg.margin + dp - dn;
                if (loss <= 0.0) continue;
                epoch_loss += loss;
                if (!std::isfinite(epoch_loss)) {
                    throw SlintError("train_transe: non-finite loss at epoch " + std::to_string(epoch));
                }

                // d||x||/dx = x/||x||; skip degenerate zero distances
                double inv_p = dp > 0 ? 1.0 / dp : 0.0;
                double inv_n = dn > 0 ? 1.0 / dn : 0.0;
                auto hv = t.entity_vecs.row_span(pos.head);
                auto rv = t.relation_vecs.row_span(pos.rel);
                auto tv = t.entity_vecs.row_span(pos.tail);
                auto nh = t.entity_vecs.row_span(neg.head);
                auto nt = t.entity_vecs.row_span(neg.tail);
                for (int i = 0; i < cfg.dim; ++i) {
                    double gp = pos_diff[static_cast<size_t>(i)] * inv_p;
                    double gn = neg_diff[static_cast<size_t>(i)] * inv_n;
                    hv[i] -= cfg.lr * gp;
                    rv[i] -= cfg.lr * (gp - gn);
                    tv[i] += cfg.lr * gp;
                    nh[i] += cfg.lr * gn;
                    nt[i] -= cfg.lr * gn;
                }
            }
        }
        for (int e = 0; e < kg.num_entities(); ++e) {
            double n = l2_norm(t.entity_vecs.row_span(e));
            if (n > 0) {
                for (double& v : t.entity_vecs.row_span(e)) v /= n;
            }
        }
    }
    t.refresh_norms();
    if (!t.entity_vecs.all_finite() || !t.relation_vecs.all_finite()) {
        throw SlintError("train_transe: non-finite embeddings after training");
    }
    return t;
}

std::vector<double> query_embedding(const Query& q, const EmbeddingTable& table) {
    auto known = table.entity(q.known);
    auto rel = table.relation(q.rel);
    std::vector<double> out(static_cast<size_t>(table.dim));
    if (q.direction == Direction::predict_tail) {
        for (size_t i = 0; i < out.size(); ++i) out[i] = known[i] + rel[i];
    } else {
        for (size_t i = 0; i < out.size(); ++i) out[i] = known[i] - rel[i];
    }
    return out;
}

CandidateList rank_candidates(const Query& q, const EmbeddingTable& table, int m,
                              const std::unordered_set<int>& excl) {
    if (m < 1) throw SlintError("rank_candidates: m must be >= 1");
    std::vector<double> qv = query_embedding(q, table);
    std::vector<std::pair<double, int>> scored;
    scored.reserve(static_cast<size_t>(table.num_entities()));
    std::vector<double> diff(static_cast<size_t>(table.dim));
    for (int e = 0; e < table.num_entities(); ++e) {
        if (excl.count(e)) continue;
        auto ev = table.entity(e);
        double sq = 0.0;
        for (size_t i = 0; i < diff.size(); ++i) {
            double d = qv[i] - ev[i];
            sq += d * d;
        }
        scored.emplace_back(-std::sqrt(sq), e);
    }
    auto better = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    size_t take = std::min(static_cast<size_t>(m), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(take), scored.end(), better);

    CandidateList out;
    out.query = q;
    out.ids.reserve(take);
    out.scores.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        out.scores.push_back(scored[i].first);
        out.ids.push_back(scored[i].second);
    }
    return out;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SlintError("save_embeddings: cannot open " + path);
    out.precision(17);
    out << table.entity_vecs.rows << ' ' << table.dim << '\n';
    for (int r = 0; r < table.entity_vecs.rows; ++r) {
        auto row = table.entity_vecs.row_span(r);
        for (size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
        out << '\n';
    }
    out << table.relation_vecs.rows << ' ' << table.dim << '\n';
    for (int r = 0; r < table.relation_vecs.rows; ++r) {
        auto row = table.relation_vecs.row_span(r);
        for (size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
        out << '\n';
    }
    if (!out) throw SlintError("save_embeddings: write failed for " + path);
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SlintError("load_embeddings: cannot open " + path);
    int n = 0, d = 0;
    if (!(in >> n >> d) || n < 0 || d < 1) throw SlintError("load_embeddings: bad entity header");
    EmbeddingTable t;
    t.dim = d;
    t.entity_vecs = Tensor2(n, d);
    for (double& v : t.entity_vecs.data) {
        if (!(in >> v)) throw SlintError("load_embeddings: truncated entity block");
    }
    int r = 0, d2 = 0;
    if (!(in >> r >> d2) || r < 0 || d2 != d) throw SlintError("load_embeddings: bad relation header");
    t.relation_vecs = Tensor2(r, d);
    for (double& v : t.relation_vecs.data) {
        if (!(in >> v)) throw SlintError("load_embeddings: truncated relation block");
    }
    if (!t.entity_vecs.all_finite() || !t.relation_vecs.all_finite()) {
        throw SlintError("load_embeddings: non-finite entries in " + path);
    }
    t.refresh_norms();
    return t;
}

}  // namespace slint
