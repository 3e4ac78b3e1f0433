#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <vector>

#include "pomo/core/kernels.hpp"
#include "pomo/core/parallel.hpp"
#include "pomo/core/rng.hpp"
#include "pomo/instances/generate.hpp"
#include "pomo/model/rollout.hpp"
#include "pomo/oracle/oracle.hpp"
#include "pomo/train/loss.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void fill_random(pomo::MatF& m, pomo::Xoshiro256pp& rng) {
    for (float& v : m.data) v = static_cast<float>(rng.uniform() - 0.5);
}

void bench_matmul(int threads, int reps) {
    using namespace pomo;
    const int rows = 512, inner = 128, cols = 128;
    Xoshiro256pp rng(7);
    MatF a(rows, inner), b(inner, cols), serial(rows, cols), parallel(rows, cols);
    fill_random(a, rng);
    fill_random(b, rng);

    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) kernels::matmul(a, b, serial);
    const double ts = seconds_since(t0);

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) kernels::matmul_omp(a, b, parallel, false, threads);
    const double tp = seconds_since(t0);

    const double flops = 2.0 * rows * inner * cols * reps;
    const bool identical = serial.data == parallel.data;
    std::cout << "matmul " << rows << "x" << inner << "x" << cols << ": serial "
              << flops / ts / 1e9 << " GFLOP/s, " << threads << " threads " << flops / tp / 1e9
              << " GFLOP/s, bitwise " << (identical ? "equal" : "DIFFERENT") << "\n";
}

void bench_rollout(int threads, int reps) {
    using namespace pomo;
    ModelConfig cfg;
    cfg.d_h = 64;
    cfg.n_layers = 3;
    cfg.n_heads = 4;
    cfg.d_ff = 256;
    cfg.problem = ProblemKind::kTsp;
    Network<float> net(cfg, 11);

    Xoshiro256pp rng(13);
    std::vector<AnyInstance> instances;
    const int b = 16, m = 20;
    for (int i = 0; i < b; ++i) instances.emplace_back(generate_tsp(m, rng));
    std::vector<const AnyInstance*> ptrs;
    for (const AnyInstance& inst : instances) ptrs.push_back(&inst);
    std::vector<int> starts(m);
    std::iota(starts.begin(), starts.end(), 0);
    const std::vector<std::vector<int>> start_rows(b, starts);

    double forward_s = 0.0, backward_s = 0.0;
    for (int r = 0; r < reps; ++r) {
        Graph<float> g(&net.params(), threads);
        auto t0 = Clock::now();
        Xoshiro256pp sample_rng(100 + r);
        BatchRolloutResult rr =
            rollout_batch(g, net, ptrs, start_rows, DecodeMode::kSample, &sample_rng);
        forward_s += seconds_since(t0);

        Mat<double> returns(b, m);
        std::copy(rr.returns.begin(), rr.returns.end(), returns.data.begin());
        const AdvantageBatch adv = compute_advantages(returns);
        const std::vector<double> wd = policy_loss_weights(adv.advantages);
        const int loss = g.weighted_sum(rr.logprob_node, std::vector<float>(wd.begin(), wd.end()),
                                        1.0);
        t0 = Clock::now();
        net.params().zero_grads();
        g.backward(loss);
        backward_s += seconds_since(t0);
    }
    const double traj = static_cast<double>(b) * m * reps;
    std::cout << "tsp20 rollout (B=16, N=20, " << threads << " threads): "
              << traj / forward_s << " trajectories/s forward, backward adds "
              << backward_s / forward_s << "x forward time\n";
}

void bench_held_karp(int threads, int reps) {
    using namespace pomo;
    Xoshiro256pp rng(17);
    const TspInstance inst = generate_tsp(18, rng);
    auto t0 = Clock::now();
    OracleResult serial;
    for (int r = 0; r < reps; ++r) serial = held_karp_tsp(inst, 1);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    OracleResult parallel;
    for (int r = 0; r < reps; ++r) parallel = held_karp_tsp(inst, threads);
    const double tp = seconds_since(t0);
    const bool identical =
        serial.score == parallel.score && serial.certificate == parallel.certificate;
    std::cout << "held_karp m=18: serial " << ts / reps << " s, " << threads << " threads "
              << tp / reps << " s, result " << (identical ? "identical" : "DIFFERENT") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel and rollout benchmark"};
    int threads = pomo::max_threads();
    int reps = 5;
    app.add_option("--threads", threads, "parallel thread count");
    app.add_option("--reps", reps, "repetitions per benchmark");
    CLI11_PARSE(app, argc, argv);

    bench_matmul(threads, reps * 10);
    bench_rollout(threads, reps);
    bench_held_karp(threads, reps);
    return 0;
}
