#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pomo/core/error.hpp"
#include "pomo/core/rng.hpp"
#include "pomo/instances/types.hpp"
#include "pomo/model/config.hpp"
#include "pomo/model/graph.hpp"
#include "pomo/model/params.hpp"

namespace pomo {

// Encoder/decoder parameter layout plus graph builders. The network encodes
// all nodes once per instance; each decode step builds per-trajectory
// contexts, runs one multi-head glimpse over the node embeddings and scores
// actions with a clipped single-head pointer.
template <typename Real>
class Network {
public:
    struct LayerIds {
        int wq, wk, wv, wo;
        int n1_gain, n1_bias;
        int ff1_w, ff1_b, ff2_w, ff2_b;
        int n2_gain, n2_bias;
    };

    Network(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
        cfg_.validate();
        const int d = cfg_.d_h;
        const int f_in = input_width(cfg_.problem);
        embed_w_ = params_.add("embed.w", f_in, d, ParamInit::kUniformFanIn);
        embed_b_ = params_.add("embed.b", 1, d, ParamInit::kUniformFanIn, f_in);
        if (cfg_.problem == ProblemKind::kCvrp) {
            depot_w_ = params_.add("embed_depot.w", 2, d, ParamInit::kUniformFanIn);
            depot_b_ = params_.add("embed_depot.b", 1, d, ParamInit::kUniformFanIn, 2);
        }
        for (int l = 0; l < cfg_.n_layers; ++l) {
            const std::string p = "enc" + std::to_string(l) + ".";
            LayerIds ids;
            ids.wq = params_.add(p + "wq", d, d, ParamInit::kUniformFanIn);
            ids.wk = params_.add(p + "wk", d, d, ParamInit::kUniformFanIn);
            ids.wv = params_.add(p + "wv", d, d, ParamInit::kUniformFanIn);
            ids.wo = params_.add(p + "wo", d, d, ParamInit::kUniformFanIn);
            ids.n1_gain = params_.add(p + "norm1.g", 1, d, ParamInit::kOnes);
            ids.n1_bias = params_.add(p + "norm1.b", 1, d, ParamInit::kZeros);
            ids.ff1_w = params_.add(p + "ff1.w", d, cfg_.d_ff, ParamInit::kUniformFanIn);
            ids.ff1_b = params_.add(p + "ff1.b", 1, cfg_.d_ff, ParamInit::kUniformFanIn, d);
            ids.ff2_w = params_.add(p + "ff2.w", cfg_.d_ff, d, ParamInit::kUniformFanIn);
            ids.ff2_b = params_.add(p + "ff2.b", 1, d, ParamInit::kUniformFanIn, cfg_.d_ff);
            ids.n2_gain = params_.add(p + "norm2.g", 1, d, ParamInit::kOnes);
            ids.n2_bias = params_.add(p + "norm2.b", 1, d, ParamInit::kZeros);
            layers_.push_back(ids);
        }
        wq_ctx_ = params_.add("dec.wq_ctx", cfg_.context_width(), d, ParamInit::kUniformFanIn);
        wk_g_ = params_.add("dec.wk_g", d, d, ParamInit::kUniformFanIn);
        wv_g_ = params_.add("dec.wv_g", d, d, ParamInit::kUniformFanIn);
        wo_g_ = params_.add("dec.wo_g", d, d, ParamInit::kUniformFanIn);
        wk_p_ = params_.add("dec.wk_p", d, d, ParamInit::kUniformFanIn);
        if (cfg_.variant == Variant::kStartToken)
            start_token_ = params_.add("dec.start_token", 2, d, ParamInit::kUniformFanIn, d);
        Xoshiro256pp rng(mix64(seed, 0x706172616D736574ULL));
        params_.init_values(rng);
    }

    const ModelConfig& config() const { return cfg_; }
    ParamSet<Real>& params() { return params_; }
    const ParamSet<Real>& params() const { return params_; }

    static int input_width(ProblemKind kind) {
        return kind == ProblemKind::kCvrp ? 3 : 2;
    }

    // Embedding rows per instance: CVRP adds the depot as row 0.
    int block_rows(int m) const {
        return cfg_.problem == ProblemKind::kCvrp ? m + 1 : m;
    }

    struct Encoded {
        int groups = 0;
        int block = 0;
        int emb = -1;
        int mean = -1;
        int k_glimpse = -1;
        int v_glimpse = -1;
        int k_pointer = -1;
        int alt = -1;  // START-token rows, when the variant has them
    };

    // Encodes a batch of same-shape instances as one grouped graph; group g
    // holds instance g's embedding block.
    Encoded encode(Graph<Real>& g, const std::vector<const AnyInstance*>& instances) const {
        if (instances.empty()) throw ArgumentError("Network::encode: empty batch");
        const int b = static_cast<int>(instances.size());
        const int m = static_cast<int>(instance_size(*instances[0]));
        for (const AnyInstance* inst : instances) {
            if (kind_of(*inst) != cfg_.problem)
                throw ConfigError("Network::encode: instance kind does not match the model");
            if (static_cast<int>(instance_size(*inst)) != m)
                throw ArgumentError("Network::encode: mixed instance sizes in one batch");
        }

        int h = -1;
        if (cfg_.problem == ProblemKind::kCvrp) {
            Mat<Real> cust(b * m, 3);
            Mat<Real> depot(b, 2);
            for (int i = 0; i < b; ++i) {
                const auto& inst = std::get<CvrpInstance>(*instances[i]);
                depot.at(i, 0) = static_cast<Real>(inst.depot.x);
                depot.at(i, 1) = static_cast<Real>(inst.depot.y);
                for (int j = 0; j < m; ++j) {
                    cust.at(i * m + j, 0) = static_cast<Real>(inst.customers[j].x);
                    cust.at(i * m + j, 1) = static_cast<Real>(inst.customers[j].y);
                    cust.at(i * m + j, 2) = static_cast<Real>(inst.demands[j]);
                }
            }
            check_finite(cust, "cvrp customer features");
            check_finite(depot, "cvrp depot features");
            const int cust_emb =
                g.add_bias(g.matmul(g.input(std::move(cust)), g.param(embed_w_)),
                           g.param(embed_b_));
            const int depot_emb =
                g.add_bias(g.matmul(g.input(std::move(depot)), g.param(depot_w_)),
                           g.param(depot_b_));
            h = g.interleave_groups(depot_emb, cust_emb, 1, m, b);
        } else {
            Mat<Real> feats(b * m, 2);
            for (int i = 0; i < b; ++i) {
                if (cfg_.problem == ProblemKind::kTsp) {
                    const auto& inst = std::get<TspInstance>(*instances[i]);
                    for (int j = 0; j < m; ++j) {
                        feats.at(i * m + j, 0) = static_cast<Real>(inst.nodes[j].x);
                        feats.at(i * m + j, 1) = static_cast<Real>(inst.nodes[j].y);
                    }
                } else {
                    const auto& inst = std::get<KpInstance>(*instances[i]);
                    for (int j = 0; j < m; ++j) {
                        feats.at(i * m + j, 0) = static_cast<Real>(inst.items[j].weight);
                        feats.at(i * m + j, 1) = static_cast<Real>(inst.items[j].value);
                    }
                }
            }
            check_finite(feats, "node features");
            h = g.add_bias(g.matmul(g.input(std::move(feats)), g.param(embed_w_)),
                           g.param(embed_b_));
        }

        for (const LayerIds& l : layers_) {
            const int q = g.matmul(h, g.param(l.wq));
            const int k = g.matmul(h, g.param(l.wk));
            const int v = g.matmul(h, g.param(l.wv));
            const int att = g.attention(q, k, v, cfg_.n_heads, b, {});
            const int att_o = g.matmul(att, g.param(l.wo));
            const int n1 = g.instance_norm(g.add(h, att_o), g.param(l.n1_gain),
                                           g.param(l.n1_bias), b);
            const int f1 = g.relu(g.add_bias(g.matmul(n1, g.param(l.ff1_w)), g.param(l.ff1_b)));
            const int f2 = g.add_bias(g.matmul(f1, g.param(l.ff2_w)), g.param(l.ff2_b));
            h = g.instance_norm(g.add(n1, f2), g.param(l.n2_gain), g.param(l.n2_bias), b);
        }

        Encoded enc;
        enc.groups = b;
        enc.block = block_rows(m);
        enc.emb = h;
        enc.mean = g.mean_rows_grouped(h, b);
        enc.k_glimpse = g.matmul(h, g.param(wk_g_));
        enc.v_glimpse = g.matmul(h, g.param(wv_g_));
        enc.k_pointer = g.matmul(h, g.param(wk_p_));
        if (cfg_.variant == Variant::kStartToken) enc.alt = g.param(start_token_);
        return enc;
    }

    // One decoder step for all trajectory rows at once. The mask covers the
    // embedding block (1 = attendable/selectable) and is applied to both the
    // glimpse and the pointer softmax. Returns the probability node.
    int decode_step(Graph<Real>& g, const Encoded& enc, std::vector<ContextSpec> specs,
                    const std::vector<std::uint8_t>& mask) const {
        const bool with_extra = cfg_.problem != ProblemKind::kTsp;
        const int ctx = g.build_context(enc.emb, enc.mean, enc.alt, std::move(specs), enc.block,
                                        with_extra);
        const int q = g.matmul(ctx, g.param(wq_ctx_));
        const int glimpse = g.attention(q, enc.k_glimpse, enc.v_glimpse, cfg_.n_heads,
                                        enc.groups, mask);
        const int pointer_q = g.matmul(glimpse, g.param(wo_g_));
        const int raw = g.grouped_matmul_nt(pointer_q, enc.k_pointer, enc.groups);
        const int scaled = g.scale(raw, 1.0 / std::sqrt(static_cast<double>(cfg_.d_h)));
        const int clipped = g.tanh_scale(scaled, cfg_.logit_clip);
        return g.masked_softmax(clipped, mask);
    }

    int start_token_param() const {
        if (start_token_ < 0)
            throw ConfigError("start token requested on a POMO-variant model");
        return start_token_;
    }

private:
    static void check_finite(const Mat<Real>& m, const char* what) {
        if (!m.all_finite())
            throw NumericError(std::string("Network::encode: non-finite ") + what);
    }

    ModelConfig cfg_;
    ParamSet<Real> params_;
    int embed_w_ = -1, embed_b_ = -1;
    int depot_w_ = -1, depot_b_ = -1;
    std::vector<LayerIds> layers_;
    int wq_ctx_ = -1, wk_g_ = -1, wv_g_ = -1, wo_g_ = -1, wk_p_ = -1;
    int start_token_ = -1;
};

}  // namespace pomo
