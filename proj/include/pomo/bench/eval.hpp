#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pomo/instances/types.hpp"

namespace pomo {

// Inference sweep over a saved dataset. Per-instance and summary CSVs are
// returned as text; wall time lives in the manifest (and, opt-in, in the
// timing columns) so default output is byte-stable across reruns.
struct EvalRequest {
    std::string checkpoint_path;
    std::string dataset_path;
    std::vector<std::string> modes;  // single | multi | aug8 | sample:k | token_greedy
    std::uint64_t seed = 1;
    int threads = 1;
    bool with_timing = false;
};

struct EvalArtifacts {
    std::string per_instance_csv;
    std::string summary_csv;
    std::string manifest_json;
    std::vector<std::string> skipped;  // one note per skipped mode
};

EvalArtifacts run_eval(const EvalRequest& req);

// Classical solver sweep producing the same CSV shapes, so reports can join
// learned and classical rows. Exact solvers mark their rows as oracle rows.
struct SolveRequest {
    std::string dataset_path;
    std::string solver;  // held_karp | brute_force | farthest_insertion |
                         // kp_exact | kp_greedy | cvrp_reference
    std::uint64_t seed = 1;
    int threads = 1;
    bool with_timing = false;
    std::uint64_t kp_node_budget = 100'000'000;
};

EvalArtifacts run_solve(const SolveRequest& req);

// Joins summary CSVs: rows sharing a dataset hash gain a gap against the
// oracle row of that dataset (percentage for routing, absolute for KP).
struct ReportOutput {
    std::string text_table;
    std::string csv;
};

ReportOutput run_report(const std::vector<std::string>& csv_paths);

inline const char* kPerInstanceHeader = "instance_id,mode,best_score,n_candidates";
inline const char* kSummaryHeader =
    "method,problem,mean_score,gap,instances,seed,dataset_hash,is_oracle,wall_time_s";

}  // namespace pomo
