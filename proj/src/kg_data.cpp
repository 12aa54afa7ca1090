#include "slint/kg_data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace slint {

namespace {
constexpr uint64_t kSlotBits = 21;  // packed triple keys hold ids < 2^21
constexpr int kMaxId = (1 << kSlotBits) - 1;
const std::string kEmpty;

uint64_t pack_pair(int a, int b) {
    return (static_cast<uint64_t>(a) << kSlotBits) | static_cast<uint64_t>(b);
}
}  // namespace

uint64_t KnowledgeGraph::pack(const Triple& t) const {
    return (static_cast<uint64_t>(t.head) << (2 * kSlotBits)) |
           (static_cast<uint64_t>(t.rel) << kSlotBits) | static_cast<uint64_t>(t.tail);
}

int KnowledgeGraph::intern_entity(const std::string& name) {
    auto it = entity_ids_.find(name);
    if (it != entity_ids_.end()) return it->second;
    int id = static_cast<int>(entity_names_.size());
    if (id > kMaxId) throw SlintError("entity vocabulary exceeds packed-key capacity");
    entity_names_.push_back(name);
    entity_ids_.emplace(name, id);
    return id;
}

int KnowledgeGraph::intern_relation(const std::string& name) {
    auto it = relation_ids_.find(name);
    if (it != relation_ids_.end()) return it->second;
    int id = static_cast<int>(relation_names_.size());
    if (id > kMaxId) throw SlintError("relation vocabulary exceeds packed-key capacity");
    relation_names_.push_back(name);
    relation_ids_.emplace(name, id);
    return id;
}

std::optional<int> KnowledgeGraph::entity_id(const std::string& name) const {
    auto it = entity_ids_.find(name);
    if (it == entity_ids_.end()) return std::nullopt;
    return it->second;
}

std::vector<Triple>& KnowledgeGraph::triples(Split s) {
    switch (s) {
        case Split::train: return train_;
        case Split::valid: return valid_;
        case Split::test: return test_;
    }
    throw SlintError("bad split");
}

const std::vector<Triple>& KnowledgeGraph::triples(Split s) const {
    return const_cast<KnowledgeGraph*>(this)->triples(s);
}

void KnowledgeGraph::finalize() {
    all_true_.clear();
    tails_by_head_rel_.clear();
    heads_by_tail_rel_.clear();
    degree_.assign(entity_names_.size(), 0);
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Triple& t : triples(s)) {
            if (t.head < 0 || t.head >= num_entities() || t.tail < 0 || t.tail >= num_entities() ||
                t.rel < 0 || t.rel >= num_relations()) {
                throw SlintError("finalize: triple references unknown id");
            }
            if (all_true_.insert(pack(t)).second) {
                tails_by_head_rel_[pack_pair(t.head, t.rel)].push_back(t.tail);
                heads_by_tail_rel_[pack_pair(t.tail, t.rel)].push_back(t.head);
            }
        }
    }
    // degree counts train edges only, once per endpoint
    for (const Triple& t : train_) {
        degree_[static_cast<size_t>(t.head)] += 1;
        degree_[static_cast<size_t>(t.tail)] += 1;
    }
}

bool KnowledgeGraph::contains(const Triple& t) const {
    return all_true_.count(pack(t)) > 0;
}

std::unordered_set<int> KnowledgeGraph::filter_set(const Query& q) const {
    std::unordered_set<int> out;
    const auto& index = q.direction == Direction::predict_tail ? tails_by_head_rel_ : heads_by_tail_rel_;
    auto it = index.find(pack_pair(q.known, q.rel));
    if (it == index.end()) return out;
    for (int e : it->second) {
        if (e != q.gold) out.insert(e);
    }
    return out;
}

int KnowledgeGraph::low_degree_threshold() const {
    if (degree_.empty()) throw SlintError("low_degree_threshold: no entities");
    std::vector<int> sorted = degree_;
    std::sort(sorted.begin(), sorted.end());
    size_t rank = static_cast<size_t>(std::ceil(0.2 * static_cast<double>(sorted.size())));
    rank = std::max<size_t>(rank, 1);
    return sorted[rank - 1];
}

bool KnowledgeGraph::splits_disjoint() const {
    std::unordered_set<uint64_t> seen;
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Triple& t : triples(s)) {
            if (!seen.insert(pack(t)).second) return false;
        }
    }
    return true;
}

const std::string& KnowledgeGraph::description(int entity) const {
    auto it = descriptions_.find(entity);
    return it == descriptions_.end() ? kEmpty : it->second;
}

void KnowledgeGraph::set_description(const std::string& entity_name, const std::string& text) {
    auto id = entity_id(entity_name);
    if (!id) return;  // descriptions for unknown entities are dropped
    descriptions_[*id] = text;
}

uint64_t KnowledgeGraph::content_hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& n : entity_names_) h = fnv1a(n.data(), n.size(), h);
    for (const auto& n : relation_names_) h = fnv1a(n.data(), n.size(), h);
    for (Split s : {Split::train, Split::valid, Split::test}) {
        for (const Triple& t : triples(s)) {
            int v[3] = {t.head, t.rel, t.tail};
            h = fnv1a(v, sizeof(v), h);
        }
    }
    return h;
}

std::vector<Triple> load_triples(const std::string& path, KnowledgeGraph& kg) {
    std::ifstream in(path);
    if (!in) throw SlintError("load_triples: cannot open " + path);
    std::vector<Triple> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        size_t t3 = t2 == std::string::npos ? std::string::npos : line.find('\t', t2 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos || t3 != std::string::npos) {
            throw SlintError("load_triples: malformed line " + std::to_string(line_no) + " in " + path);
        }
        Triple t;
        t.head = kg.intern_entity(line.substr(0, t1));
        t.rel = kg.intern_relation(line.substr(t1 + 1, t2 - t1 - 1));
        t.tail = kg.intern_entity(line.substr(t2 + 1));
        out.push_back(t);
    }
    return out;
}

KnowledgeGraph load_kg(const std::string& dir) {
    namespace fs = std::filesystem;
    KnowledgeGraph kg;
    kg.triples(Split::train) = load_triples(dir + "/train.txt", kg);
    kg.triples(Split::valid) = load_triples(dir + "/valid.txt", kg);
    kg.triples(Split::test) = load_triples(dir + "/test.txt", kg);
    std::string desc_path = dir + "/descriptions.txt";
    if (fs::exists(desc_path)) {
        std::ifstream in(desc_path);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            size_t tab = line.find('\t');
            if (tab == std::string::npos) continue;
            kg.set_description(line.substr(0, tab), line.substr(tab + 1));
        }
    }
    kg.finalize();
    return kg;
}

DegreeStats degree_stats(const KnowledgeGraph& kg) {
    if (kg.triples(Split::train).empty()) throw SlintError("degree_stats: empty train split");
    DegreeStats st;
    st.entity_count = kg.num_entities();
    st.avg_degree = 2.0 * static_cast<double>(kg.triples(Split::train).size()) / st.entity_count;
    int threshold = kg.low_degree_threshold();
    int low = 0;
    st.max_degree = kg.degrees()[0];
    st.min_degree = kg.degrees()[0];
    for (int d : kg.degrees()) {
        if (d <= threshold) ++low;
        st.max_degree = std::max(st.max_degree, d);
        st.min_degree = std::min(st.min_degree, d);
    }
    st.low_degree_pct = 100.0 * low / st.entity_count;
    return st;
}

std::vector<Query> queries_for_split(const KnowledgeGraph& kg, Split split) {
    std::vector<Query> out;
    out.reserve(kg.triples(split).size() * 2);
    for (const Triple& t : kg.triples(split)) {
        out.push_back({t.head, t.rel, Direction::predict_tail, t.tail});
        out.push_back({t.tail, t.rel, Direction::predict_head, t.head});
    }
    return out;
}

std::vector<Query> low_degree_slice(const KnowledgeGraph& kg, Split split) {
    std::vector<Query> out;
    for (const Query& q : queries_for_split(kg, split)) {
        if (kg.is_low_degree(q.gold)) out.push_back(q);
    }
    return out;
}

KnowledgeGraph perturb(const KnowledgeGraph& kg, double train_fraction, double edge_dropout,
                       uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction > 1.0) throw SlintError("perturb: train_fraction must be in (0,1]");
    if (edge_dropout < 0.0 || edge_dropout >= 1.0) throw SlintError("perturb: edge_dropout must be in [0,1)");

    KnowledgeGraph out = kg;
    auto& train = out.triples(Split::train);
    Rng rng = make_rng(seed);

    int n = static_cast<int>(train.size());
    int keep = static_cast<int>(std::ceil(train_fraction * n));
    std::vector<Triple> kept;
    if (keep < n) {
        std::vector<int> chosen = sample_without_replacement(n, keep, rng);
        std::sort(chosen.begin(), chosen.end());  // preserve original order
        kept.reserve(chosen.size());
        for (int i : chosen) kept.push_back(train[static_cast<size_t>(i)]);
    } else {
        kept = train;
    }

    int drop = static_cast<int>(std::floor(edge_dropout * static_cast<double>(kept.size())));
    if (drop > 0) {
        std::vector<int> removed = sample_without_replacement(static_cast<int>(kept.size()), drop, rng);
        std::vector<uint8_t> dead(kept.size(), 0);
        for (int i : removed) dead[static_cast<size_t>(i)] = 1;
        std::vector<Triple> survivors;
        survivors.reserve(kept.size() - static_cast<size_t>(drop));
        for (size_t i = 0; i < kept.size(); ++i) {
            if (!dead[i]) survivors.push_back(kept[i]);
        }
        kept = std::move(survivors);
    }

    if (kept.empty()) throw SlintError("perturb: resulting train split is empty");
    train = std::move(kept);
    out.finalize();
    return out;
}

}  // namespace slint
