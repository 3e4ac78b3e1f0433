#include "pomo/bench/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pomo/core/io.hpp"
#include "pomo/core/parallel.hpp"
#include "pomo/infer/infer.hpp"
#include "pomo/instances/dataset_io.hpp"
#include "pomo/model/checkpoint.hpp"
#include "pomo/oracle/oracle.hpp"

#ifndef POMO_SOURCE_REV
#define POMO_SOURCE_REV "unknown"
#endif

namespace pomo {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Positive objective for CSV rows: tour length for routing, value for KP.
double score_of_return(ProblemKind kind, double ret) {
    return kind == ProblemKind::kKp ? ret : -ret;
}

struct ModeSpec {
    std::string name;
    int sample_k = 0;  // >0 for sample:k
};

ModeSpec parse_mode(const std::string& mode) {
    if (mode == "single" || mode == "multi" || mode == "aug8" || mode == "token_greedy")
        return {mode, 0};
    if (mode.rfind("sample:", 0) == 0) {
        const std::string num = mode.substr(7);
        try {
            std::size_t used = 0;
            const int k = std::stoi(num, &used);
            if (used == num.size() && k >= 1) return {mode, k};
        } catch (const std::exception&) {
        }
        throw ConfigError("eval: bad sample count in mode '" + mode + "'");
    }
    throw ConfigError("eval: unknown mode '" + mode +
                      "' (expected single|multi|aug8|sample:k|token_greedy)");
}

// First exception wins; OpenMP bodies must not leak exceptions.
class ErrorCollector {
public:
    void run(const std::function<void()>& fn) {
        try {
            fn();
        } catch (...) {
#pragma omp critical(pomo_eval_error)
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow_if_any() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::exception_ptr error_;
};

struct InstanceRow {
    double best_score = 0.0;
    int n_candidates = 0;
    double millis = 0.0;
};

std::string csv_rows(const std::vector<std::vector<InstanceRow>>& rows,
                     const std::vector<std::string>& mode_names, bool with_timing) {
    std::string out = kPerInstanceHeader;
    if (with_timing) out += ",millis";
    out += "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t m = 0; m < mode_names.size(); ++m) {
            const InstanceRow& r = rows[i][m];
            out += std::to_string(i) + "," + mode_names[m] + "," + format_double(r.best_score) +
                   "," + std::to_string(r.n_candidates);
            if (with_timing) out += "," + format_double(r.millis);
            out += "\n";
        }
    }
    return out;
}

std::string summary_line(const std::string& method, ProblemKind kind, double mean_score,
                         int instances, std::uint64_t seed, const std::string& dataset_hash,
                         bool is_oracle, bool with_timing, double wall_s) {
    std::string line = method;
    line += ",";
    line += to_string(kind);
    line += "," + format_double(mean_score) + ",";  // gap left to the report join
    line += "," + std::to_string(instances) + "," + std::to_string(seed) + "," + dataset_hash +
            "," + (is_oracle ? "1" : "0") + ",";
    if (with_timing) line += format_double(wall_s);
    return line + "\n";
}

}  // namespace

EvalArtifacts run_eval(const EvalRequest& req) {
    const Dataset ds = load_dataset(req.dataset_path);
    const std::string ds_hash = hex64(hash_file(req.dataset_path));
    CheckpointMeta meta;
    Network<float> net = load_checkpoint(req.checkpoint_path, &meta);
    if (net.config().problem != ds.kind)
        throw ConfigError("eval: checkpoint problem " +
                          std::string(to_string(net.config().problem)) +
                          " does not match dataset " + to_string(ds.kind));
    if (req.threads < 1) throw ConfigError("eval: threads must be positive");

    EvalArtifacts out;
    std::vector<ModeSpec> modes;
    for (const std::string& mode : req.modes) {
        ModeSpec spec = parse_mode(mode);
        if (spec.name == "aug8" && ds.kind == ProblemKind::kKp) {
            out.skipped.push_back("aug8 skipped: no coordinate augmentation for knapsack");
            continue;
        }
        if (spec.name == "token_greedy" && net.config().variant != Variant::kStartToken) {
            out.skipped.push_back("token_greedy skipped: checkpoint is not a START_TOKEN model");
            continue;
        }
        modes.push_back(std::move(spec));
    }

    const int n = ds.size();
    std::vector<std::vector<InstanceRow>> rows(n, std::vector<InstanceRow>(modes.size()));

    const auto t0 = Clock::now();
    // One worker per instance; each rollout stays single-threaded, so row
    // values are independent of the thread count.
    std::vector<Network<float>> nets;
    nets.reserve(req.threads);
    for (int t = 0; t < req.threads; ++t) nets.push_back(net);
    ErrorCollector errors;
    parallel_for_workers(n, req.threads, [&](std::int64_t i, int worker) {
        errors.run([&] {
            Network<float>& wnet = nets[worker];
            const AnyInstance& inst = ds.instances[i];
            for (std::size_t m = 0; m < modes.size(); ++m) {
                const auto s0 = Clock::now();
                InferenceResult res;
                if (modes[m].name == "single") {
                    Xoshiro256pp rng = Xoshiro256pp::stream(req.seed, 3'000'000 + i);
                    res = infer_single(wnet, inst, rng);
                } else if (modes[m].name == "multi") {
                    res = infer_multi_greedy(wnet, inst);
                } else if (modes[m].name == "aug8") {
                    res = infer_augmented(wnet, inst);
                } else if (modes[m].name == "token_greedy") {
                    res = infer_start_token_greedy(wnet, inst);
                } else {
                    Xoshiro256pp rng = Xoshiro256pp::stream(req.seed, 4'000'000 + i);
                    res = infer_sampling(wnet, inst, modes[m].sample_k, rng);
                }
                rows[i][m].best_score = score_of_return(ds.kind, res.best_return);
                rows[i][m].n_candidates = res.n_candidates;
                rows[i][m].millis =
                    std::chrono::duration<double, std::milli>(Clock::now() - s0).count();
            }
        });
    });
    errors.rethrow_if_any();
    const double wall_s = std::chrono::duration<double>(Clock::now() - t0).count();

    std::vector<std::string> mode_names;
    for (const ModeSpec& m : modes) mode_names.push_back(m.name);
    out.per_instance_csv = csv_rows(rows, mode_names, req.with_timing);

    out.summary_csv = kSummaryHeader;
    out.summary_csv += "\n";
    for (std::size_t m = 0; m < modes.size(); ++m) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += rows[i][m].best_score;
        const double mean = n > 0 ? sum / n : 0.0;
        out.summary_csv += summary_line("pomo_" + mode_names[m], ds.kind, mean, n, req.seed,
                                        ds_hash, false, req.with_timing, wall_s);
    }

    ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["command"] = "eval";
    manifest["source_rev"] = POMO_SOURCE_REV;
    manifest["dataset"] = {{"path", req.dataset_path}, {"hash", ds_hash}, {"instances", n}};
    manifest["checkpoint"] = {{"path", req.checkpoint_path},
                              {"hash", hex64(hash_file(req.checkpoint_path))},
                              {"epoch", meta.epoch}};
    manifest["modes"] = mode_names;
    manifest["skipped"] = out.skipped;
    manifest["seed"] = req.seed;
    manifest["threads"] = req.threads;
    manifest["wall_time_s"] = wall_s;
    out.manifest_json = manifest.dump(2) + "\n";
    return out;
}

EvalArtifacts run_solve(const SolveRequest& req) {
    const Dataset ds = load_dataset(req.dataset_path);
    const std::string ds_hash = hex64(hash_file(req.dataset_path));
    if (req.threads < 1) throw ConfigError("solve: threads must be positive");

    const std::string& solver = req.solver;
    const bool routing = ds.kind != ProblemKind::kKp;
    bool is_oracle = false;
    if (solver == "held_karp" || solver == "brute_force") {
        if (!routing || ds.kind != ProblemKind::kTsp)
            throw ConfigError("solve: " + solver + " applies to TSP datasets only");
        is_oracle = true;
    } else if (solver == "farthest_insertion") {
        if (ds.kind != ProblemKind::kTsp)
            throw ConfigError("solve: farthest_insertion applies to TSP datasets only");
    } else if (solver == "kp_exact") {
        if (ds.kind != ProblemKind::kKp)
            throw ConfigError("solve: kp_exact applies to knapsack datasets only");
        is_oracle = true;
    } else if (solver == "kp_greedy") {
        if (ds.kind != ProblemKind::kKp)
            throw ConfigError("solve: kp_greedy applies to knapsack datasets only");
    } else if (solver == "cvrp_reference") {
        if (ds.kind != ProblemKind::kCvrp)
            throw ConfigError("solve: cvrp_reference applies to CVRP datasets only");
    } else {
        throw ConfigError("solve: unknown solver '" + solver + "'");
    }

    const int n = ds.size();
    std::vector<InstanceRow> rows(n);
    const auto t0 = Clock::now();
    ErrorCollector errors;
    parallel_for(n, req.threads, [&](std::int64_t i) {
        errors.run([&] {
            const auto s0 = Clock::now();
            OracleResult res;
            if (solver == "held_karp")
                res = held_karp_tsp(std::get<TspInstance>(ds.instances[i]));
            else if (solver == "brute_force")
                res = brute_force_tsp(std::get<TspInstance>(ds.instances[i]));
            else if (solver == "farthest_insertion")
                res = farthest_insertion_tsp(std::get<TspInstance>(ds.instances[i]));
            else if (solver == "kp_exact")
                res = kp_exact(std::get<KpInstance>(ds.instances[i]), req.kp_node_budget);
            else if (solver == "kp_greedy")
                res = kp_greedy(std::get<KpInstance>(ds.instances[i]));
            else
                res = cvrp_reference(std::get<CvrpInstance>(ds.instances[i]));
            rows[i].best_score = res.score;
            rows[i].n_candidates = 1;
            rows[i].millis = std::chrono::duration<double, std::milli>(Clock::now() - s0).count();
        });
    });
    errors.rethrow_if_any();
    const double wall_s = std::chrono::duration<double>(Clock::now() - t0).count();

    EvalArtifacts out;
    std::string body = kPerInstanceHeader;
    if (req.with_timing) body += ",millis";
    body += "\n";
    for (int i = 0; i < n; ++i) {
        body += std::to_string(i) + "," + solver + "," + format_double(rows[i].best_score) + ",1";
        if (req.with_timing) body += "," + format_double(rows[i].millis);
        body += "\n";
    }
    out.per_instance_csv = std::move(body);

    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rows[i].best_score;
    out.summary_csv = kSummaryHeader;
    out.summary_csv += "\n";
    out.summary_csv += summary_line(solver, ds.kind, n > 0 ? sum / n : 0.0, n, req.seed, ds_hash,
                                    is_oracle, req.with_timing, wall_s);

    ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["command"] = "solve";
    manifest["source_rev"] = POMO_SOURCE_REV;
    manifest["dataset"] = {{"path", req.dataset_path}, {"hash", ds_hash}, {"instances", n}};
    manifest["solver"] = solver;
    manifest["seed"] = req.seed;
    manifest["threads"] = req.threads;
    manifest["wall_time_s"] = wall_s;
    out.manifest_json = manifest.dump(2) + "\n";
    return out;
}

namespace {

struct SummaryRow {
    std::string method;
    std::string problem;
    double mean_score = 0.0;
    std::string gap;  // kept textual: empty means unknown
    int instances = 0;
    std::string seed;
    std::string dataset_hash;
    bool is_oracle = false;
    std::string wall_time_s;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<SummaryRow> parse_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open summary CSV " + path, 0);
    std::string line;
    if (!std::getline(in, line)) return {};
    if (line != kSummaryHeader)
        throw SchemaError("summary CSV " + path + ": unexpected header '" + line + "'");
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 9)
            throw SchemaError("summary CSV " + path + ": expected 9 fields, got " +
                              std::to_string(f.size()));
        SummaryRow r;
        r.method = f[0];
        r.problem = f[1];
        r.mean_score = std::stod(f[2]);
        r.gap = f[3];
        r.instances = std::stoi(f[4]);
        r.seed = f[5];
        r.dataset_hash = f[6];
        r.is_oracle = f[7] == "1";
        r.wall_time_s = f[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

ReportOutput run_report(const std::vector<std::string>& csv_paths) {
    std::vector<SummaryRow> rows;
    for (const std::string& path : csv_paths) {
        std::vector<SummaryRow> part = parse_summary_csv(path);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    // Oracle mean per dataset hash; gaps only join rows on the same dataset.
    std::vector<std::pair<std::string, double>> oracle_means;
    for (const SummaryRow& r : rows)
        if (r.is_oracle) oracle_means.emplace_back(r.dataset_hash, r.mean_score);

    for (SummaryRow& r : rows) {
        if (r.is_oracle || !r.gap.empty()) continue;
        for (const auto& [hash, opt] : oracle_means) {
            if (hash != r.dataset_hash) continue;
            if (r.problem == "kp")
                r.gap = format_double(opt - r.mean_score);
            else if (opt != 0.0)
                r.gap = format_double(100.0 * (r.mean_score - opt) / opt);
            break;
        }
    }

    ReportOutput out;
    out.csv = kSummaryHeader;
    out.csv += "\n";
    std::ostringstream text;
    text << "method | problem | mean_score | gap | n | dataset\n";
    for (const SummaryRow& r : rows) {
        out.csv += r.method + "," + r.problem + "," + format_double(r.mean_score) + "," + r.gap +
                   "," + std::to_string(r.instances) + "," + r.seed + "," + r.dataset_hash + "," +
                   (r.is_oracle ? "1" : "0") + "," + r.wall_time_s + "\n";
        std::string gap_label = r.gap;
        if (!gap_label.empty()) gap_label += r.problem == "kp" ? " (abs)" : " %";
        text << r.method << " | " << r.problem << " | " << format_double(r.mean_score) << " | "
             << gap_label << " | " << r.instances << " | " << r.dataset_hash << "\n";
    }
    out.text_table = text.str();
    return out;
}

}  // namespace pomo
