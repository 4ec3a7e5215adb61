#include "quopt/gnn.hpp"

#include <stdexcept>

namespace quopt {

using nn::Tensor;

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, std::mt19937_64& rng,
                    bool requires_grad) {
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> vals(n);
    for (double& v : vals) {
        const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
        v = bound * (2.0 * u - 1.0);
    }
    return requires_grad ? Tensor::param(std::move(shape), std::move(vals))
                         : Tensor::from(std::move(shape), std::move(vals));
}

GnnParams GnnParams::init(const GateSet& gs, int k, std::size_t dim, std::mt19937_64& rng) {
    GnnParams p;
    p.gate_set = &gs;
    p.dim = dim;
    p.type_embedding = uniform_init({gs.types().size(), dim}, dim, rng);
    for (int layer = 0; layer < k; ++layer) {
        Layer l;
        l.w_a = uniform_init({dim + 6, dim}, dim + 6, rng);
        l.b_a = uniform_init({dim}, dim + 6, rng);
        l.w_u = uniform_init({dim + dim, dim}, dim + dim, rng);
        p.layers.push_back(std::move(l));
    }
    return p;
}

namespace {

struct EdgeWork {
    std::vector<std::size_t> src_row, dst_row;
    std::vector<double> feat; // 6 per edge endpoint
};

// One aggregation term per incident edge per direction: an edge u -> g
// contributes to g with the in-neighbor flag and to u with the out-neighbor
// flag, both carrying the edge's (src_port, dst_port) one-hots.
EdgeWork edge_work(const Circuit& c, const Embedding& emb) {
    EdgeWork w;
    for (std::size_t i = 0; i < emb.order.size(); ++i) {
        const Gate& g = c.gate(emb.order[i]);
        for (int p = 0; p < g.arity(); ++p) {
            if (!g.in[p].is_boundary()) {
                w.src_row.push_back(emb.row_of.at(g.in[p].gate));
                w.dst_row.push_back(i);
                w.feat.insert(w.feat.end(),
                              {1.0, 0.0, g.in[p].port == 0 ? 1.0 : 0.0,
                               g.in[p].port == 1 ? 1.0 : 0.0, p == 0 ? 1.0 : 0.0,
                               p == 1 ? 1.0 : 0.0});
            }
            if (!g.out[p].is_boundary()) {
                w.src_row.push_back(emb.row_of.at(g.out[p].gate));
                w.dst_row.push_back(i);
                w.feat.insert(w.feat.end(),
                              {0.0, 1.0, p == 0 ? 1.0 : 0.0, p == 1 ? 1.0 : 0.0,
                               g.out[p].port == 0 ? 1.0 : 0.0, g.out[p].port == 1 ? 1.0 : 0.0});
            }
        }
    }
    return w;
}

} // namespace

Embedding embed(const Circuit& c, const GnnParams& params) {
    Embedding emb;
    emb.order = c.canonical_order();
    for (std::size_t i = 0; i < emb.order.size(); ++i)
        emb.row_of.emplace(emb.order[i], i);
    const std::size_t n = emb.order.size();
    if (n == 0) {
        emb.h = Tensor::zeros({0, params.dim});
        return emb;
    }

    std::vector<std::size_t> type_idx;
    type_idx.reserve(n);
    for (GateId id : emb.order) {
        const GateType* t = c.gate(id).type;
        const GateType* own = params.gate_set->find(t->name);
        if (!own)
            throw std::invalid_argument("embed: gate type '" + t->name +
                                        "' not in the embedding table");
        type_idx.push_back(params.gate_set->index_of(own));
    }

    const EdgeWork work = edge_work(c, emb);
    const std::size_t n_edges = work.src_row.size();
    Tensor feat;
    if (n_edges > 0)
        feat = Tensor::from({n_edges, 6}, work.feat);

    Tensor x = nn::gather_rows(params.type_embedding, type_idx);
    for (const GnnParams::Layer& layer : params.layers) {
        Tensor agg;
        if (n_edges > 0) {
            Tensor u = nn::gather_rows(x, work.src_row);
            Tensor z = nn::concat_cols(u, feat);
            Tensor per_edge = nn::relu(nn::add_rowvec(nn::matmul(z, layer.w_a), layer.b_a));
            agg = nn::scatter_add_rows(per_edge, work.dst_row, n);
        } else {
            agg = Tensor::zeros({n, params.dim});
        }
        x = nn::relu(nn::matmul(nn::concat_cols(x, agg), layer.w_u));
    }
    emb.h = x;
    return emb;
}

Tensor embed_fragment(const Circuit& c, GateId gate, const GnnParams& params) {
    const Circuit frag = c.k_hop_neighborhood(gate, params.k_hops());
    const Embedding emb = embed(frag, params);
    return nn::flatten(nn::gather_rows(emb.h, {emb.row_of.at(gate)}));
}

} // namespace quopt
