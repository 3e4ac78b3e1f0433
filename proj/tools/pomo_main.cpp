#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pomo/bench/eval.hpp"
#include "pomo/core/error.hpp"
#include "pomo/core/io.hpp"
#include "pomo/instances/dataset_io.hpp"
#include "pomo/instances/generate.hpp"
#include "pomo/train/trainer.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pomo::Error("cannot open " + path + " for writing");
    out << text;
}

int run(int argc, char** argv) {
    CLI::App app{"Multi-start policy-gradient solver for TSP, CVRP and 0-1 knapsack"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    int threads = 1;
    std::string preset;
    app.add_option("--seed", seed, "RNG seed (default 1)");
    app.add_option("--threads", threads, "worker thread count (default 1)")
        ->check(CLI::PositiveNumber);
    app.add_option("--preset", preset, "config preset")->check(CLI::IsMember({"desk", "paper"}));

    auto* gen = app.add_subcommand("generate", "write a random instance dataset");
    std::string gen_kind = "tsp", gen_out;
    int gen_m = 20, gen_count = 100;
    bool gen_jsonl = false;
    int gen_divisor = 0;
    double gen_capacity = 0.0;
    gen->add_option("--kind", gen_kind, "tsp|cvrp|kp")->required();
    gen->add_option("--m", gen_m, "instance size")->required();
    gen->add_option("--count", gen_count, "number of instances")->required();
    gen->add_option("--out", gen_out, "output path")->required();
    gen->add_flag("--jsonl", gen_jsonl, "also write a JSONL mirror next to the output");
    gen->add_option("--cvrp-divisor", gen_divisor, "demand divisor override");
    gen->add_option("--kp-capacity", gen_capacity, "knapsack capacity override");

    auto* train = app.add_subcommand("train", "train a model from a JSON config");
    std::string train_config, train_resume, train_out_dir;
    train->add_option("config", train_config, "JSON config path")->required();
    train->add_option("--resume", train_resume, "checkpoint to continue from");
    train->add_option("--out-dir", train_out_dir, "override the config's out_dir");

    auto* eval = app.add_subcommand("eval", "run inference sweeps over a dataset");
    std::string eval_ckpt, eval_ds, eval_out, eval_summary, eval_manifest;
    std::vector<std::string> eval_modes;
    bool eval_timing = false;
    eval->add_option("--checkpoint", eval_ckpt)->required();
    eval->add_option("--dataset", eval_ds)->required();
    eval->add_option("--modes", eval_modes, "single|multi|aug8|sample:k|token_greedy")
        ->required()
        ->delimiter(',');
    eval->add_option("--out", eval_out, "per-instance CSV path")->required();
    eval->add_option("--summary", eval_summary, "summary CSV path");
    eval->add_option("--manifest", eval_manifest, "manifest JSON path");
    eval->add_flag("--with-timing", eval_timing, "include wall-clock columns in the CSVs");

    auto* solve = app.add_subcommand("solve", "run a classical solver over a dataset");
    std::string solve_ds, solve_name, solve_out, solve_summary, solve_manifest;
    bool solve_timing = false;
    std::uint64_t solve_budget = 100'000'000;
    solve->add_option("--dataset", solve_ds)->required();
    solve
        ->add_option("--solver", solve_name,
                     "held_karp|brute_force|farthest_insertion|kp_exact|kp_greedy|cvrp_reference")
        ->required();
    solve->add_option("--out", solve_out, "per-instance CSV path");
    solve->add_option("--summary", solve_summary, "summary CSV path")->required();
    solve->add_option("--manifest", solve_manifest, "manifest JSON path");
    solve->add_flag("--with-timing", solve_timing, "include wall-clock columns in the CSVs");
    solve->add_option("--kp-node-budget", solve_budget, "branch-and-bound node limit");

    auto* report = app.add_subcommand("report", "join summary CSVs and compute gaps");
    std::vector<std::string> report_paths;
    std::string report_out;
    report->add_option("csvs", report_paths, "summary CSV paths");
    report->add_option("--out", report_out, "machine-readable CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        pomo::GenerateOptions options;
        options.cvrp_divisor = gen_divisor;
        options.kp_capacity = gen_capacity;
        const pomo::ProblemKind kind = pomo::problem_kind_from_string(gen_kind);
        const pomo::Dataset ds = pomo::generate_dataset(kind, gen_m, gen_count, seed, options);
        pomo::save_dataset(ds, gen_out);
        if (gen_jsonl) pomo::save_dataset_jsonl(ds, gen_out + ".jsonl");
        std::cout << "wrote " << ds.size() << " " << gen_kind << " instances to " << gen_out
                  << "\n";
        return 0;
    }

    if (train->parsed()) {
        std::ifstream in(train_config);
        if (!in) throw pomo::ConfigError("cannot open config file " + train_config);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw pomo::ConfigError(train_config + ": not valid JSON: " + e.what());
        }
        if (!preset.empty()) j["preset"] = preset;
        if (app.count("--seed") > 0) j["seed"] = seed;
        if (!train_resume.empty()) j["resume"] = train_resume;
        if (!train_out_dir.empty()) j["out_dir"] = train_out_dir;
        const pomo::TrainConfig cfg = pomo::train_config_from_json(j.dump(), train_config);
        pomo::Trainer trainer(cfg, threads);
        const std::vector<pomo::EpochStats> stats = trainer.train();
        for (const pomo::EpochStats& s : stats)
            std::cout << pomo::epoch_csv_line(s, cfg.variant) << "\n";
        std::cout << "trained " << trainer.completed_epochs() << " epoch(s) into " << cfg.out_dir
                  << "\n";
        return 0;
    }

    if (eval->parsed()) {
        pomo::EvalRequest req;
        req.checkpoint_path = eval_ckpt;
        req.dataset_path = eval_ds;
        req.modes = eval_modes;
        req.seed = seed;
        req.threads = threads;
        req.with_timing = eval_timing;
        const pomo::EvalArtifacts art = pomo::run_eval(req);
        write_text(eval_out, art.per_instance_csv);
        if (!eval_summary.empty()) write_text(eval_summary, art.summary_csv);
        if (!eval_manifest.empty()) write_text(eval_manifest, art.manifest_json);
        for (const std::string& note : art.skipped) std::cerr << note << "\n";
        return 0;
    }

    if (solve->parsed()) {
        pomo::SolveRequest req;
        req.dataset_path = solve_ds;
        req.solver = solve_name;
        req.seed = seed;
        req.threads = threads;
        req.with_timing = solve_timing;
        req.kp_node_budget = solve_budget;
        const pomo::EvalArtifacts art = pomo::run_solve(req);
        if (!solve_out.empty()) write_text(solve_out, art.per_instance_csv);
        write_text(solve_summary, art.summary_csv);
        if (!solve_manifest.empty()) write_text(solve_manifest, art.manifest_json);
        return 0;
    }

    const pomo::ReportOutput rep = pomo::run_report(report_paths);
    std::cout << rep.text_table;
    if (!report_out.empty()) write_text(report_out, rep.csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const pomo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pomo::ArgumentError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pomo::UnsupportedProblem& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pomo::FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const pomo::SchemaError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const pomo::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const pomo::ResourceError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
