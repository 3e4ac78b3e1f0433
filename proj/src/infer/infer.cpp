#include "pomo/infer/infer.hpp"

#include <algorithm>
#include <numeric>

#include "pomo/env/returns.hpp"
#include "pomo/env/rollout.hpp"
#include "pomo/infer/augment.hpp"
#include "pomo/model/rollout.hpp"

namespace pomo {

namespace {

// Legal first actions: every node (TSP), every customer action (CVRP), or
// every item that fits (KP).
std::vector<int> all_starts(const AnyInstance& instance) {
    const int m = instance_size(instance);
    std::vector<int> starts;
    switch (kind_of(instance)) {
        case ProblemKind::kTsp:
            starts.resize(m);
            std::iota(starts.begin(), starts.end(), 0);
            break;
        case ProblemKind::kCvrp:
            starts.resize(m);
            std::iota(starts.begin(), starts.end(), 1);
            break;
        case ProblemKind::kKp: {
            const auto& inst = std::get<KpInstance>(instance);
            for (int i = 0; i < m; ++i)
                if (inst.items[i].weight <= inst.capacity + kCapacityEps) starts.push_back(i);
            break;
        }
    }
    return starts;
}

// Score a trajectory on the given instance (higher is better).
double score_on(const AnyInstance& instance, const std::vector<int>& actions) {
    switch (kind_of(instance)) {
        case ProblemKind::kTsp: return tsp_return(std::get<TspInstance>(instance), actions);
        case ProblemKind::kCvrp: return cvrp_return(std::get<CvrpInstance>(instance), actions);
        default: return kp_return(std::get<KpInstance>(instance), actions);
    }
}

InferenceResult empty_selection_result(const AnyInstance& instance, const std::string& mode) {
    InferenceResult r;
    r.mode = mode;
    r.best_return = score_on(instance, {});
    r.n_candidates = 0;
    return r;
}

InferenceResult pick_best(const BatchRolloutResult& rr, const std::string& mode,
                          const std::vector<double>* rescored = nullptr) {
    InferenceResult r;
    r.mode = mode;
    r.candidate_returns = rescored ? *rescored : rr.returns;
    r.n_candidates = static_cast<int>(r.candidate_returns.size());
    int best = 0;
    for (int i = 1; i < r.n_candidates; ++i)
        if (r.candidate_returns[i] > r.candidate_returns[best]) best = i;
    r.best_return = r.candidate_returns[best];
    r.best_actions = rr.actions[best];
    return r;
}

}  // namespace

InferenceResult infer_single(Network<float>& net, const AnyInstance& instance, Xoshiro256pp& rng,
                             int threads) {
    const std::vector<int> starts = all_starts(instance);
    if (starts.empty()) return empty_selection_result(instance, "single");
    const int pick = static_cast<int>(rng.below(starts.size()));
    Graph<float> g(&net.params(), threads);
    const AnyInstance* ptr = &instance;
    BatchRolloutResult rr =
        rollout_batch(g, net, {ptr}, {std::vector<int>{starts[pick]}}, DecodeMode::kGreedy);
    return pick_best(rr, "single");
}

InferenceResult infer_multi_greedy(Network<float>& net, const AnyInstance& instance,
                                   int threads) {
    const std::vector<int> starts = all_starts(instance);
    if (starts.empty()) return empty_selection_result(instance, "multi");
    Graph<float> g(&net.params(), threads);
    const AnyInstance* ptr = &instance;
    BatchRolloutResult rr = rollout_batch(g, net, {ptr}, {starts}, DecodeMode::kGreedy);
    return pick_best(rr, "multi");
}

InferenceResult infer_augmented(Network<float>& net, const AnyInstance& instance, int threads) {
    const std::vector<AnyInstance> variants = augment8(instance);
    const std::vector<int> starts = all_starts(instance);
    if (starts.empty()) return empty_selection_result(instance, "aug8");
    std::vector<const AnyInstance*> ptrs;
    ptrs.reserve(variants.size());
    for (const AnyInstance& v : variants) ptrs.push_back(&v);
    Graph<float> g(&net.params(), threads);
    BatchRolloutResult rr = rollout_batch(
        g, net, ptrs, std::vector<std::vector<int>>(variants.size(), starts), DecodeMode::kGreedy);
    std::vector<double> rescored(rr.actions.size());
    for (std::size_t i = 0; i < rr.actions.size(); ++i)
        rescored[i] = score_on(instance, rr.actions[i]);
    return pick_best(rr, "aug8", &rescored);
}

InferenceResult infer_sampling(Network<float>& net, const AnyInstance& instance, int k,
                               Xoshiro256pp& rng, int threads) {
    if (k < 1) throw ArgumentError("infer_sampling: k must be positive");
    const std::string mode = "sample:" + std::to_string(k);
    Graph<float> g(&net.params(), threads);
    std::vector<const AnyInstance*> ptrs(k, &instance);
    BatchRolloutResult rr;
    if (net.config().variant == Variant::kStartToken) {
        rr = start_token_rollout_batch(g, net, ptrs, DecodeMode::kSample, &rng);
    } else {
        const std::vector<int> starts = all_starts(instance);
        if (starts.empty()) return empty_selection_result(instance, mode);
        std::vector<std::vector<int>> start_rows(k);
        for (int i = 0; i < k; ++i)
            start_rows[i] = {starts[static_cast<std::size_t>(rng.below(starts.size()))]};
        rr = rollout_batch(g, net, ptrs, start_rows, DecodeMode::kSample, &rng);
    }
    return pick_best(rr, mode);
}

InferenceResult infer_start_token_greedy(Network<float>& net, const AnyInstance& instance,
                                         int threads) {
    Graph<float> g(&net.params(), threads);
    const AnyInstance* ptr = &instance;
    BatchRolloutResult rr = start_token_rollout_batch(g, net, {ptr}, DecodeMode::kGreedy);
    return pick_best(rr, "token_greedy");
}

}  // namespace pomo
