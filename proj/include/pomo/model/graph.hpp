#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pomo/core/error.hpp"
#include "pomo/core/kernels.hpp"
#include "pomo/core/mat.hpp"
#include "pomo/core/parallel.hpp"
#include "pomo/model/params.hpp"

namespace pomo {

// Decoder context row: concat(mean[group], emb[last], emb[first], extra?).
// last_row/first_row are local to the group's embedding block; -1 selects
// the alt node's row 0 (last) or row 1 (first) instead, which is how the
// START-token variant injects its trainable vectors at t=1.
struct ContextSpec {
    int group = 0;
    int last_row = 0;
    int first_row = 0;
    double extra = 0.0;
};

// Reverse-mode tape over dense matrices. Forward values are computed eagerly
// at node creation so drivers can read intermediate results (e.g. step
// probabilities) while recording. backward() accumulates into the bound
// ParamSet's grad tensors. All kernels keep per-output-row accumulation
// order fixed, so results are identical for any thread count.
template <typename Real>
class Graph {
    enum class OpKind : std::uint8_t {
        kLeaf,
        kParam,
        kMatmul,
        kMatmulNT,
        kGroupedMatmulNT,
        kAdd,
        kAddBias,
        kRelu,
        kTanhScale,
        kScale,
        kMeanRowsGrouped,
        kInstanceNorm,
        kInterleaveGroups,
        kAttention,
        kBuildContext,
        kMaskedSoftmax,
        kGatherLog,
        kScatterAddRows,
        kWeightedSum,
    };

    struct Op {
        OpKind kind;
        int a = -1, b = -1, c = -1;
        int out = -1;
        int param_id = -1;
        int groups = 1;
        int heads = 1;
        int block_rows = 0;
        int rows_a = 0, rows_b = 0;
        double scalar = 0.0;
        bool with_extra = false;
        std::vector<std::uint8_t> mask;
        std::vector<ContextSpec> specs;
        std::vector<std::pair<int, int>> picks;
        std::vector<int> rows;
        std::vector<Real> weights;
        Mat<Real> aux;
        Mat<Real> aux2;
    };

public:
    explicit Graph(ParamSet<Real>* params = nullptr, int threads = 1)
        : params_(params), threads_(threads) {}

    void clear() {
        tape_.clear();
        values_.clear();
        grads_.clear();
    }

    int threads() const { return threads_; }
    void set_threads(int t) { threads_ = t; }
    int node_count() const { return static_cast<int>(values_.size()); }

    const Mat<Real>& value(int id) const { return values_.at(id); }
    const Mat<Real>& grad(int id) const { return grads_.at(id); }

    int input(Mat<Real> v) {
        Op op;
        op.kind = OpKind::kLeaf;
        return push(std::move(op), std::move(v));
    }

    int zeros(int rows, int cols) { return input(Mat<Real>(rows, cols)); }

    int param(int param_id) {
        if (!params_) throw ContractViolation("Graph::param: no ParamSet bound");
        Op op;
        op.kind = OpKind::kParam;
        op.param_id = param_id;
        return push(std::move(op), params_->tensor(param_id).value);
    }

    int matmul(int a, int b) {
        const Mat<Real>& av = values_[a];
        const Mat<Real>& bv = values_[b];
        if (av.cols != bv.rows) throw SizeError("Graph::matmul: inner dimensions disagree");
        Mat<Real> out(av.rows, bv.cols);
        if (threads_ > 1)
            kernels::matmul_omp(av, bv, out, false, threads_);
        else
            kernels::matmul(av, bv, out);
        Op op;
        op.kind = OpKind::kMatmul;
        op.a = a;
        op.b = b;
        return push(std::move(op), std::move(out));
    }

    int matmul_nt(int a, int b) {
        const Mat<Real>& av = values_[a];
        const Mat<Real>& bv = values_[b];
        if (av.cols != bv.cols) throw SizeError("Graph::matmul_nt: widths disagree");
        Mat<Real> out(av.rows, bv.rows);
        if (threads_ > 1)
            kernels::matmul_nt_omp(av, bv, out, false, threads_);
        else
            kernels::matmul_nt(av, bv, out);
        Op op;
        op.kind = OpKind::kMatmulNT;
        op.a = a;
        op.b = b;
        return push(std::move(op), std::move(out));
    }

    // Block-diagonal A * B^T: query row r only sees the key rows of its own
    // group. A is (G*nq) x d, B is (G*M) x d, out is (G*nq) x M.
    int grouped_matmul_nt(int a, int b, int groups) {
        const Mat<Real>& av = values_[a];
        const Mat<Real>& bv = values_[b];
        if (av.cols != bv.cols) throw SizeError("Graph::grouped_matmul_nt: widths disagree");
        if (av.rows % groups || bv.rows % groups)
            throw SizeError("Graph::grouped_matmul_nt: rows not divisible by groups");
        const int nq = av.rows / groups;
        const int mk = bv.rows / groups;
        const int d = av.cols;
        Mat<Real> out(av.rows, mk);
        parallel_for(av.rows, threads_, [&](std::int64_t r) {
            const int g = static_cast<int>(r) / nq;
            const Real* qa = av.row(static_cast<int>(r));
            Real* o = out.row(static_cast<int>(r));
            for (int j = 0; j < mk; ++j) {
                const Real* kb = bv.row(g * mk + j);
                Real dot = Real(0);
                for (int t = 0; t < d; ++t) dot += qa[t] * kb[t];
                o[j] = dot;
            }
        });
        Op op;
        op.kind = OpKind::kGroupedMatmulNT;
        op.a = a;
        op.b = b;
        op.groups = groups;
        return push(std::move(op), std::move(out));
    }

    int add(int a, int b) {
        const Mat<Real>& av = values_[a];
        const Mat<Real>& bv = values_[b];
        if (!av.same_shape(bv)) throw SizeError("Graph::add: shape mismatch");
        Mat<Real> out = av;
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
        Op op;
        op.kind = OpKind::kAdd;
        op.a = a;
        op.b = b;
        return push(std::move(op), std::move(out));
    }

    int add_bias(int a, int bias) {
        const Mat<Real>& av = values_[a];
        const Mat<Real>& bv = values_[bias];
        if (bv.rows != 1 || bv.cols != av.cols)
            throw SizeError("Graph::add_bias: bias must be 1 x cols");
        Mat<Real> out = av;
        for (int r = 0; r < out.rows; ++r) {
            Real* o = out.row(r);
            for (int c = 0; c < out.cols; ++c) o[c] += bv.data[c];
        }
        Op op;
        op.kind = OpKind::kAddBias;
        op.a = a;
        op.b = bias;
        return push(std::move(op), std::move(out));
    }

    int relu(int a) {
        Mat<Real> out = values_[a];
        for (Real& v : out.data)
            if (v < Real(0)) v = Real(0);
        Op op;
        op.kind = OpKind::kRelu;
        op.a = a;
        return push(std::move(op), std::move(out));
    }

    // out = c * tanh(x)
    int tanh_scale(int a, double c) {
        Mat<Real> out = values_[a];
        const Real cr = static_cast<Real>(c);
        for (Real& v : out.data) v = cr * std::tanh(v);
        Op op;
        op.kind = OpKind::kTanhScale;
        op.a = a;
        op.scalar = c;
        return push(std::move(op), std::move(out));
    }

    int scale(int a, double s) {
        Mat<Real> out = values_[a];
        const Real sr = static_cast<Real>(s);
        for (Real& v : out.data) v *= sr;
        Op op;
        op.kind = OpKind::kScale;
        op.a = a;
        op.scalar = s;
        return push(std::move(op), std::move(out));
    }

    // (G*R) x C -> G x C column means per group.
    int mean_rows_grouped(int a, int groups) {
        const Mat<Real>& av = values_[a];
        if (av.rows % groups) throw SizeError("Graph::mean_rows_grouped: rows % groups != 0");
        const int r_per = av.rows / groups;
        Mat<Real> out(groups, av.cols);
        for (int g = 0; g < groups; ++g) {
            Real* o = out.row(g);
            for (int i = 0; i < r_per; ++i) {
                const Real* src = av.row(g * r_per + i);
                for (int c = 0; c < av.cols; ++c) o[c] += src[c];
            }
            const Real inv = Real(1) / static_cast<Real>(r_per);
            for (int c = 0; c < av.cols; ++c) o[c] *= inv;
        }
        Op op;
        op.kind = OpKind::kMeanRowsGrouped;
        op.a = a;
        op.groups = groups;
        return push(std::move(op), std::move(out));
    }

    // Feature-wise normalization over each group's rows (the node dimension),
    // with affine gain/bias. Biased variance, like torch InstanceNorm.
    int instance_norm(int a, int gain, int bias, int groups, double eps = 1e-5) {
        const Mat<Real>& av = values_[a];
        const Mat<Real>& gv = values_[gain];
        const Mat<Real>& bv = values_[bias];
        if (gv.rows != 1 || gv.cols != av.cols || bv.rows != 1 || bv.cols != av.cols)
            throw SizeError("Graph::instance_norm: gain/bias must be 1 x cols");
        if (av.rows % groups) throw SizeError("Graph::instance_norm: rows % groups != 0");
        const int r_per = av.rows / groups;
        const int cols = av.cols;
        Mat<Real> out(av.rows, cols);
        Mat<Real> xhat(av.rows, cols);
        Mat<Real> inv_std(groups, cols);
        parallel_for(groups, threads_, [&](std::int64_t gi) {
            const int g = static_cast<int>(gi);
            std::vector<Real> mean(cols, Real(0)), var(cols, Real(0));
            for (int i = 0; i < r_per; ++i) {
                const Real* src = av.row(g * r_per + i);
                for (int c = 0; c < cols; ++c) mean[c] += src[c];
            }
            const Real inv_r = Real(1) / static_cast<Real>(r_per);
            for (int c = 0; c < cols; ++c) mean[c] *= inv_r;
            for (int i = 0; i < r_per; ++i) {
                const Real* src = av.row(g * r_per + i);
                for (int c = 0; c < cols; ++c) {
                    const Real d = src[c] - mean[c];
                    var[c] += d * d;
                }
            }
            Real* istd = inv_std.row(g);
            for (int c = 0; c < cols; ++c)
                istd[c] = Real(1) / std::sqrt(var[c] * inv_r + static_cast<Real>(eps));
            for (int i = 0; i < r_per; ++i) {
                const int row = g * r_per + i;
                const Real* src = av.row(row);
                Real* xh = xhat.row(row);
                Real* o = out.row(row);
                for (int c = 0; c < cols; ++c) {
                    xh[c] = (src[c] - mean[c]) * istd[c];
                    o[c] = gv.data[c] * xh[c] + bv.data[c];
                }
            }
        });
        Op op;
        op.kind = OpKind::kInstanceNorm;
        op.a = a;
        op.b = gain;
        op.c = bias;
        op.groups = groups;
        op.scalar = eps;
        op.aux = std::move(xhat);
        op.aux2 = std::move(inv_std);
        return push(std::move(op), std::move(out));
    }

    // Per group g: output rows are [a's rows_a rows of g, then b's rows_b
    // rows of g]. Used to stack the depot embedding on top of the customer
    // embeddings per instance.
    int interleave_groups(int a, int b, int rows_a, int rows_b, int groups) {
        const Mat<Real>& av = values_[a];
        const Mat<Real>& bv = values_[b];
        if (av.cols != bv.cols) throw SizeError("Graph::interleave_groups: widths disagree");
        if (av.rows != groups * rows_a || bv.rows != groups * rows_b)
            throw SizeError("Graph::interleave_groups: row counts disagree");
        Mat<Real> out(groups * (rows_a + rows_b), av.cols);
        for (int g = 0; g < groups; ++g) {
            for (int i = 0; i < rows_a; ++i)
                std::copy_n(av.row(g * rows_a + i), av.cols,
                            out.row(g * (rows_a + rows_b) + i));
            for (int i = 0; i < rows_b; ++i)
                std::copy_n(bv.row(g * rows_b + i), bv.cols,
                            out.row(g * (rows_a + rows_b) + rows_a + i));
        }
        Op op;
        op.kind = OpKind::kInterleaveGroups;
        op.a = a;
        op.b = b;
        op.rows_a = rows_a;
        op.rows_b = rows_b;
        op.groups = groups;
        return push(std::move(op), std::move(out));
    }

    // Multi-head scaled-dot attention core. q is (G*nq) x d, k and v are
    // (G*M) x d; query rows attend only within their group. mask (optional)
    // is (G*nq) x M with 1 = attendable. Per-head softmax weights are saved
    // for the backward pass.
    int attention(int q, int k, int v, int n_heads, int groups,
                  std::vector<std::uint8_t> mask) {
        const Mat<Real>& qv = values_[q];
        const Mat<Real>& kv = values_[k];
        const Mat<Real>& vv = values_[v];
        const int d = qv.cols;
        if (kv.cols != d || vv.cols != d) throw SizeError("Graph::attention: widths disagree");
        if (d % n_heads) throw SizeError("Graph::attention: d % n_heads != 0");
        if (qv.rows % groups || kv.rows % groups || kv.rows != vv.rows)
            throw SizeError("Graph::attention: bad row grouping");
        const int nq = qv.rows / groups;
        const int mk = kv.rows / groups;
        if (!mask.empty() && static_cast<int>(mask.size()) != qv.rows * mk)
            throw SizeError("Graph::attention: mask size mismatch");
        const int dk = d / n_heads;
        const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(dk));
        Mat<Real> out(qv.rows, d);
        Mat<Real> probs(qv.rows, n_heads * mk);
        const std::uint8_t* mptr = mask.empty() ? nullptr : mask.data();
        parallel_for_workers(qv.rows, threads_, [&](std::int64_t ri, int) {
            const int r = static_cast<int>(ri);
            const int g = r / nq;
            const std::uint8_t* mrow = mptr ? mptr + static_cast<std::size_t>(r) * mk : nullptr;
            std::vector<Real> scores(mk);
            for (int h = 0; h < n_heads; ++h) {
                const int off = h * dk;
                Real max_s = -std::numeric_limits<Real>::infinity();
                for (int j = 0; j < mk; ++j) {
                    if (mrow && !mrow[j]) continue;
                    const Real* qr = qv.row(r) + off;
                    const Real* kr = kv.row(g * mk + j) + off;
                    Real dot = Real(0);
                    for (int t = 0; t < dk; ++t) dot += qr[t] * kr[t];
                    scores[j] = dot * inv_sqrt;
                    if (scores[j] > max_s) max_s = scores[j];
                }
                if (max_s == -std::numeric_limits<Real>::infinity())
                    throw ContractViolation("Graph::attention: fully masked query row " +
                                            std::to_string(r));
                Real sum = Real(0);
                Real* prow = probs.row(r) + h * mk;
                for (int j = 0; j < mk; ++j) {
                    if (mrow && !mrow[j]) {
                        prow[j] = Real(0);
                        continue;
                    }
                    prow[j] = std::exp(scores[j] - max_s);
                    sum += prow[j];
                }
                const Real inv_sum = Real(1) / sum;
                Real* orow = out.row(r) + off;
                for (int j = 0; j < mk; ++j) {
                    prow[j] *= inv_sum;
                    if (prow[j] == Real(0)) continue;
                    const Real* vr = vv.row(g * mk + j) + off;
                    for (int t = 0; t < dk; ++t) orow[t] += prow[j] * vr[t];
                }
            }
        });
        Op op;
        op.kind = OpKind::kAttention;
        op.a = q;
        op.b = k;
        op.c = v;
        op.heads = n_heads;
        op.groups = groups;
        op.mask = std::move(mask);
        op.aux = std::move(probs);
        return push(std::move(op), std::move(out));
    }

    // One context row per spec; emb is (G*block_rows) x d, mean is G x d,
    // alt (may be -1) is 2 x d for the START-token slots.
    int build_context(int emb, int mean, int alt, std::vector<ContextSpec> specs,
                      int block_rows, bool with_extra) {
        const Mat<Real>& ev = values_[emb];
        const Mat<Real>& mv = values_[mean];
        const int d = ev.cols;
        if (mv.cols != d) throw SizeError("Graph::build_context: widths disagree");
        if (ev.rows != mv.rows * block_rows)
            throw SizeError("Graph::build_context: emb rows != groups * block_rows");
        const int cols = 3 * d + (with_extra ? 1 : 0);
        Mat<Real> out(static_cast<int>(specs.size()), cols);
        for (std::size_t r = 0; r < specs.size(); ++r) {
            const ContextSpec& s = specs[r];
            if ((s.last_row < 0 || s.first_row < 0) && alt < 0)
                throw ContractViolation("Graph::build_context: token slot used without alt node");
            Real* o = out.row(static_cast<int>(r));
            std::copy_n(mv.row(s.group), d, o);
            const Real* last = s.last_row >= 0 ? ev.row(s.group * block_rows + s.last_row)
                                               : values_[alt].row(0);
            std::copy_n(last, d, o + d);
            const Real* first = s.first_row >= 0 ? ev.row(s.group * block_rows + s.first_row)
                                                 : values_[alt].row(1);
            std::copy_n(first, d, o + 2 * d);
            if (with_extra) o[3 * d] = static_cast<Real>(s.extra);
        }
        Op op;
        op.kind = OpKind::kBuildContext;
        op.a = emb;
        op.b = mean;
        op.c = alt;
        op.block_rows = block_rows;
        op.with_extra = with_extra;
        op.specs = std::move(specs);
        return push(std::move(op), std::move(out));
    }

    // Row-wise softmax over legal entries; illegal entries get exactly 0.
    int masked_softmax(int logits, std::vector<std::uint8_t> mask) {
        const Mat<Real>& lv = values_[logits];
        if (static_cast<int>(mask.size()) != lv.rows * lv.cols)
            throw SizeError("Graph::masked_softmax: mask size mismatch");
        Mat<Real> out(lv.rows, lv.cols);
        parallel_for(lv.rows, threads_, [&](std::int64_t ri) {
            const int r = static_cast<int>(ri);
            const Real* in = lv.row(r);
            const std::uint8_t* mrow = mask.data() + static_cast<std::size_t>(r) * lv.cols;
            Real* o = out.row(r);
            Real max_s = -std::numeric_limits<Real>::infinity();
            for (int j = 0; j < lv.cols; ++j)
                if (mrow[j] && in[j] > max_s) max_s = in[j];
            if (max_s == -std::numeric_limits<Real>::infinity())
                throw ContractViolation("Graph::masked_softmax: fully masked row " +
                                        std::to_string(r));
            Real sum = Real(0);
            for (int j = 0; j < lv.cols; ++j) {
                o[j] = mrow[j] ? std::exp(in[j] - max_s) : Real(0);
                sum += o[j];
            }
            const Real inv = Real(1) / sum;
            for (int j = 0; j < lv.cols; ++j) o[j] *= inv;
        });
        Op op;
        op.kind = OpKind::kMaskedSoftmax;
        op.a = logits;
        op.mask = std::move(mask);
        return push(std::move(op), std::move(out));
    }

    // out[k] = log(probs[row_k, col_k]).
    int gather_log(int probs, std::vector<std::pair<int, int>> picks) {
        const Mat<Real>& pv = values_[probs];
        Mat<Real> out(static_cast<int>(picks.size()), 1);
        for (std::size_t i = 0; i < picks.size(); ++i) {
            const Real p = pv.at(picks[i].first, picks[i].second);
            if (!(p > Real(0)))
                throw ContractViolation("Graph::gather_log: picked zero-probability action (" +
                                        std::to_string(picks[i].first) + ", " +
                                        std::to_string(picks[i].second) + ")");
            out.at(static_cast<int>(i), 0) = std::log(p);
        }
        Op op;
        op.kind = OpKind::kGatherLog;
        op.a = probs;
        op.picks = std::move(picks);
        return push(std::move(op), std::move(out));
    }

    // out = acc, then out[rows[k], :] += delta[k, :].
    int scatter_add_rows(int acc, int delta, std::vector<int> rows) {
        const Mat<Real>& av = values_[acc];
        const Mat<Real>& dv = values_[delta];
        if (dv.rows != static_cast<int>(rows.size()) || dv.cols != av.cols)
            throw SizeError("Graph::scatter_add_rows: shape mismatch");
        Mat<Real> out = av;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            Real* o = out.row(rows[k]);
            const Real* d = dv.row(static_cast<int>(k));
            for (int c = 0; c < out.cols; ++c) o[c] += d[c];
        }
        Op op;
        op.kind = OpKind::kScatterAddRows;
        op.a = acc;
        op.b = delta;
        op.rows = std::move(rows);
        return push(std::move(op), std::move(out));
    }

    // out (1x1) = s * sum_i w[i] * a[i, 0]; the weights are constants.
    int weighted_sum(int a, std::vector<Real> w, double s) {
        const Mat<Real>& av = values_[a];
        if (av.cols != 1 || av.rows != static_cast<int>(w.size()))
            throw SizeError("Graph::weighted_sum: expects a column vector matching weights");
        double acc = 0.0;
        for (int i = 0; i < av.rows; ++i)
            acc += static_cast<double>(w[i]) * static_cast<double>(av.at(i, 0));
        Mat<Real> out(1, 1);
        out.at(0, 0) = static_cast<Real>(acc * s);
        Op op;
        op.kind = OpKind::kWeightedSum;
        op.a = a;
        op.scalar = s;
        op.weights = std::move(w);
        return push(std::move(op), std::move(out));
    }

    void backward(int loss) {
        const Mat<Real>& lv = values_.at(loss);
        if (lv.rows != 1 || lv.cols != 1)
            throw ContractViolation("Graph::backward: loss must be a 1x1 node");
        if (!lv.all_finite()) throw NumericError("Graph::backward: non-finite loss");
        grads_.assign(values_.size(), Mat<Real>());
        ensure_grad(loss).at(0, 0) = Real(1);
        for (int i = static_cast<int>(tape_.size()) - 1; i >= 0; --i) {
            const Op& op = tape_[i];
            if (grads_[op.out].empty()) continue;
            backward_op(op);
        }
    }

private:
    int push(Op op, Mat<Real> value) {
        op.out = static_cast<int>(values_.size());
        values_.push_back(std::move(value));
        tape_.push_back(std::move(op));
        return tape_.back().out;
    }

    Mat<Real>& ensure_grad(int id) {
        Mat<Real>& g = grads_[id];
        if (g.empty()) g.resize(values_[id].rows, values_[id].cols);
        return g;
    }

    void backward_op(const Op& op) {
        const Mat<Real>& go = grads_[op.out];
        switch (op.kind) {
            case OpKind::kLeaf:
                break;
            case OpKind::kParam: {
                Mat<Real>& pg = params_->tensor(op.param_id).grad;
                for (std::size_t i = 0; i < pg.size(); ++i) pg.data[i] += go.data[i];
                break;
            }
            case OpKind::kMatmul: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& gb = ensure_grad(op.b);
                if (threads_ > 1) {
                    kernels::matmul_nt_omp(go, values_[op.b], ga, true, threads_);
                    kernels::matmul_tn_omp(values_[op.a], go, gb, true, threads_);
                } else {
                    kernels::matmul_nt(go, values_[op.b], ga, true);
                    kernels::matmul_tn(values_[op.a], go, gb, true);
                }
                break;
            }
            case OpKind::kMatmulNT: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& gb = ensure_grad(op.b);
                if (threads_ > 1) {
                    kernels::matmul_omp(go, values_[op.b], ga, true, threads_);
                    kernels::matmul_tn_omp(go, values_[op.a], gb, true, threads_);
                } else {
                    kernels::matmul(go, values_[op.b], ga, true);
                    kernels::matmul_tn(go, values_[op.a], gb, true);
                }
                break;
            }
            case OpKind::kGroupedMatmulNT: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& gb = ensure_grad(op.b);
                const Mat<Real>& av = values_[op.a];
                const Mat<Real>& bv = values_[op.b];
                const int nq = av.rows / op.groups;
                const int mk = bv.rows / op.groups;
                const int d = av.cols;
                parallel_for(av.rows, threads_, [&](std::int64_t ri) {
                    const int r = static_cast<int>(ri);
                    const int g = r / nq;
                    Real* gar = ga.row(r);
                    const Real* gor = go.row(r);
                    for (int j = 0; j < mk; ++j) {
                        const Real w = gor[j];
                        if (w == Real(0)) continue;
                        const Real* kb = bv.row(g * mk + j);
                        for (int t = 0; t < d; ++t) gar[t] += w * kb[t];
                    }
                });
                parallel_for(bv.rows, threads_, [&](std::int64_t ki) {
                    const int kr = static_cast<int>(ki);
                    const int g = kr / mk;
                    const int j = kr % mk;
                    Real* gbr = gb.row(kr);
                    for (int r = g * nq; r < (g + 1) * nq; ++r) {
                        const Real w = go.at(r, j);
                        if (w == Real(0)) continue;
                        const Real* ar = av.row(r);
                        for (int t = 0; t < d; ++t) gbr[t] += w * ar[t];
                    }
                });
                break;
            }
            case OpKind::kAdd: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& gb = ensure_grad(op.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga.data[i] += go.data[i];
                    gb.data[i] += go.data[i];
                }
                break;
            }
            case OpKind::kAddBias: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& gb = ensure_grad(op.b);
                for (std::size_t i = 0; i < go.size(); ++i) ga.data[i] += go.data[i];
                for (int r = 0; r < go.rows; ++r) {
                    const Real* g = go.row(r);
                    for (int c = 0; c < go.cols; ++c) gb.data[c] += g[c];
                }
                break;
            }
            case OpKind::kRelu: {
                Mat<Real>& ga = ensure_grad(op.a);
                const Mat<Real>& av = values_[op.a];
                for (std::size_t i = 0; i < go.size(); ++i)
                    if (av.data[i] > Real(0)) ga.data[i] += go.data[i];
                break;
            }
            case OpKind::kTanhScale: {
                Mat<Real>& ga = ensure_grad(op.a);
                const Mat<Real>& ov = values_[op.out];
                const Real c = static_cast<Real>(op.scalar);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    const Real t = ov.data[i] / c;
                    ga.data[i] += go.data[i] * c * (Real(1) - t * t);
                }
                break;
            }
            case OpKind::kScale: {
                Mat<Real>& ga = ensure_grad(op.a);
                const Real s = static_cast<Real>(op.scalar);
                for (std::size_t i = 0; i < go.size(); ++i) ga.data[i] += s * go.data[i];
                break;
            }
            case OpKind::kMeanRowsGrouped: {
                Mat<Real>& ga = ensure_grad(op.a);
                const int r_per = values_[op.a].rows / op.groups;
                const Real inv = Real(1) / static_cast<Real>(r_per);
                for (int g = 0; g < op.groups; ++g) {
                    const Real* gr = go.row(g);
                    for (int i = 0; i < r_per; ++i) {
                        Real* dst = ga.row(g * r_per + i);
                        for (int c = 0; c < go.cols; ++c) dst[c] += gr[c] * inv;
                    }
                }
                break;
            }
            case OpKind::kInstanceNorm: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& ggain = ensure_grad(op.b);
                Mat<Real>& gbias = ensure_grad(op.c);
                const Mat<Real>& gain = values_[op.b];
                const Mat<Real>& xhat = op.aux;
                const Mat<Real>& inv_std = op.aux2;
                const int r_per = values_[op.a].rows / op.groups;
                const int cols = go.cols;
                for (int r = 0; r < go.rows; ++r) {
                    const Real* g = go.row(r);
                    const Real* xh = xhat.row(r);
                    for (int c = 0; c < cols; ++c) {
                        ggain.data[c] += g[c] * xh[c];
                        gbias.data[c] += g[c];
                    }
                }
                parallel_for(op.groups, threads_, [&](std::int64_t gi) {
                    const int g = static_cast<int>(gi);
                    std::vector<Real> m1(cols, Real(0)), m2(cols, Real(0));
                    for (int i = 0; i < r_per; ++i) {
                        const int row = g * r_per + i;
                        const Real* gr = go.row(row);
                        const Real* xh = xhat.row(row);
                        for (int c = 0; c < cols; ++c) {
                            m1[c] += gr[c];
                            m2[c] += gr[c] * xh[c];
                        }
                    }
                    const Real inv_r = Real(1) / static_cast<Real>(r_per);
                    for (int c = 0; c < cols; ++c) {
                        m1[c] *= inv_r;
                        m2[c] *= inv_r;
                    }
                    const Real* istd = inv_std.row(g);
                    for (int i = 0; i < r_per; ++i) {
                        const int row = g * r_per + i;
                        const Real* gr = go.row(row);
                        const Real* xh = xhat.row(row);
                        Real* dst = ga.row(row);
                        for (int c = 0; c < cols; ++c)
                            dst[c] += gain.data[c] * istd[c] * (gr[c] - m1[c] - xh[c] * m2[c]);
                    }
                });
                break;
            }
            case OpKind::kInterleaveGroups: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& gb = ensure_grad(op.b);
                const int stride = op.rows_a + op.rows_b;
                for (int g = 0; g < op.groups; ++g) {
                    for (int i = 0; i < op.rows_a; ++i) {
                        const Real* src = go.row(g * stride + i);
                        Real* dst = ga.row(g * op.rows_a + i);
                        for (int c = 0; c < go.cols; ++c) dst[c] += src[c];
                    }
                    for (int i = 0; i < op.rows_b; ++i) {
                        const Real* src = go.row(g * stride + op.rows_a + i);
                        Real* dst = gb.row(g * op.rows_b + i);
                        for (int c = 0; c < go.cols; ++c) dst[c] += src[c];
                    }
                }
                break;
            }
            case OpKind::kAttention:
                backward_attention(op);
                break;
            case OpKind::kBuildContext: {
                Mat<Real>& ge = ensure_grad(op.a);
                Mat<Real>& gm = ensure_grad(op.b);
                Mat<Real>* galt = op.c >= 0 ? &ensure_grad(op.c) : nullptr;
                const int d = values_[op.b].cols;
                for (std::size_t r = 0; r < op.specs.size(); ++r) {
                    const ContextSpec& s = op.specs[r];
                    const Real* g = go.row(static_cast<int>(r));
                    Real* mdst = gm.row(s.group);
                    for (int c = 0; c < d; ++c) mdst[c] += g[c];
                    Real* ldst = s.last_row >= 0 ? ge.row(s.group * op.block_rows + s.last_row)
                                                 : galt->row(0);
                    for (int c = 0; c < d; ++c) ldst[c] += g[d + c];
                    Real* fdst = s.first_row >= 0 ? ge.row(s.group * op.block_rows + s.first_row)
                                                  : galt->row(1);
                    for (int c = 0; c < d; ++c) fdst[c] += g[2 * d + c];
                }
                break;
            }
            case OpKind::kMaskedSoftmax: {
                Mat<Real>& ga = ensure_grad(op.a);
                const Mat<Real>& p = values_[op.out];
                parallel_for(go.rows, threads_, [&](std::int64_t ri) {
                    const int r = static_cast<int>(ri);
                    const Real* gr = go.row(r);
                    const Real* pr = p.row(r);
                    Real sigma = Real(0);
                    for (int j = 0; j < go.cols; ++j) sigma += gr[j] * pr[j];
                    Real* dst = ga.row(r);
                    for (int j = 0; j < go.cols; ++j) dst[j] += pr[j] * (gr[j] - sigma);
                });
                break;
            }
            case OpKind::kGatherLog: {
                Mat<Real>& ga = ensure_grad(op.a);
                const Mat<Real>& p = values_[op.a];
                for (std::size_t k = 0; k < op.picks.size(); ++k) {
                    const auto [r, c] = op.picks[k];
                    ga.at(r, c) += go.at(static_cast<int>(k), 0) / p.at(r, c);
                }
                break;
            }
            case OpKind::kScatterAddRows: {
                Mat<Real>& ga = ensure_grad(op.a);
                Mat<Real>& gb = ensure_grad(op.b);
                for (std::size_t i = 0; i < go.size(); ++i) ga.data[i] += go.data[i];
                for (std::size_t k = 0; k < op.rows.size(); ++k) {
                    const Real* src = go.row(op.rows[k]);
                    Real* dst = gb.row(static_cast<int>(k));
                    for (int c = 0; c < go.cols; ++c) dst[c] += src[c];
                }
                break;
            }
            case OpKind::kWeightedSum: {
                Mat<Real>& ga = ensure_grad(op.a);
                const Real g = go.at(0, 0) * static_cast<Real>(op.scalar);
                for (int i = 0; i < ga.rows; ++i) ga.at(i, 0) += g * op.weights[i];
                break;
            }
        }
    }

    void backward_attention(const Op& op) {
        const Mat<Real>& go = grads_[op.out];
        Mat<Real>& gq = ensure_grad(op.a);
        Mat<Real>& gk = ensure_grad(op.b);
        Mat<Real>& gv = ensure_grad(op.c);
        const Mat<Real>& qv = values_[op.a];
        const Mat<Real>& kv = values_[op.b];
        const Mat<Real>& vv = values_[op.c];
        const Mat<Real>& probs = op.aux;
        const int d = qv.cols;
        const int dk = d / op.heads;
        const int nq = qv.rows / op.groups;
        const int mk = kv.rows / op.groups;
        const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(dk));
        Mat<Real> ds(qv.rows, op.heads * mk);
        parallel_for(qv.rows, threads_, [&](std::int64_t ri) {
            const int r = static_cast<int>(ri);
            const int g = r / nq;
            for (int h = 0; h < op.heads; ++h) {
                const int off = h * dk;
                const Real* gor = go.row(r) + off;
                const Real* prow = probs.row(r) + h * mk;
                Real* dsr = ds.row(r) + h * mk;
                Real sigma = Real(0);
                for (int j = 0; j < mk; ++j) {
                    if (prow[j] == Real(0)) {
                        dsr[j] = Real(0);
                        continue;
                    }
                    const Real* vr = vv.row(g * mk + j) + off;
                    Real dp = Real(0);
                    for (int t = 0; t < dk; ++t) dp += gor[t] * vr[t];
                    dsr[j] = dp;
                    sigma += prow[j] * dp;
                }
                Real* gqr = gq.row(r) + off;
                for (int j = 0; j < mk; ++j) {
                    if (prow[j] == Real(0)) continue;
                    dsr[j] = prow[j] * (dsr[j] - sigma);
                    const Real w = dsr[j] * inv_sqrt;
                    const Real* kr = kv.row(g * mk + j) + off;
                    for (int t = 0; t < dk; ++t) gqr[t] += w * kr[t];
                }
            }
        });
        parallel_for(kv.rows, threads_, [&](std::int64_t ki) {
            const int krow = static_cast<int>(ki);
            const int g = krow / mk;
            const int j = krow % mk;
            for (int h = 0; h < op.heads; ++h) {
                const int off = h * dk;
                Real* gkr = gk.row(krow) + off;
                Real* gvr = gv.row(krow) + off;
                for (int r = g * nq; r < (g + 1) * nq; ++r) {
                    const Real p = probs.at(r, h * mk + j);
                    const Real s = ds.at(r, h * mk + j);
                    const Real* qr = qv.row(r) + off;
                    const Real* gor = go.row(r) + off;
                    if (s != Real(0)) {
                        const Real w = s * inv_sqrt;
                        for (int t = 0; t < dk; ++t) gkr[t] += w * qr[t];
                    }
                    if (p != Real(0))
                        for (int t = 0; t < dk; ++t) gvr[t] += p * gor[t];
                }
            }
        });
    }

    ParamSet<Real>* params_;
    int threads_;
    std::vector<Op> tape_;
    std::vector<Mat<Real>> values_;
    std::vector<Mat<Real>> grads_;
};

}  // namespace pomo
