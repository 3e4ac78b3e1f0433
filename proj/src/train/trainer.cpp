#include "pomo/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "pomo/core/io.hpp"
#include "pomo/instances/generate.hpp"
#include "pomo/model/checkpoint.hpp"
#include "pomo/model/rollout.hpp"
#include "pomo/train/loss.hpp"

namespace pomo {

void TrainConfig::finalize() {
    model.problem = problem;
    model.variant = variant;
    validate();
}

void TrainConfig::validate() const {
    if (m < 2) throw ConfigError("train config: m must be at least 2");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be positive");
    if (starts_per_instance < 0)
        throw ConfigError("train config: starts_per_instance must be non-negative");
    if (!(learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be positive");
    if (weight_decay < 0.0) throw ConfigError("train config: weight_decay must be non-negative");
    if (epochs < 1) throw ConfigError("train config: epochs must be positive");
    if (instances_per_epoch < 1)
        throw ConfigError("train config: instances_per_epoch must be positive");
    if (!(lr_decay_factor > 0.0))
        throw ConfigError("train config: lr_decay_factor must be positive");
    if (lr_decay_epoch < 0) throw ConfigError("train config: lr_decay_epoch must be non-negative");
    if (checkpoint_every < 1) throw ConfigError("train config: checkpoint_every must be positive");
    if (out_dir.empty()) throw ConfigError("train config: out_dir must be set");
    if (model.problem != problem || model.variant != variant)
        throw ConfigError("train config: model problem/variant out of sync (call finalize)");
    model.validate();
}

void apply_preset(TrainConfig& cfg, const std::string& name) {
    if (name == "desk") {
        cfg.model.d_h = 64;
        cfg.model.n_layers = 3;
        cfg.model.n_heads = 4;
        cfg.model.d_ff = 256;
        cfg.instances_per_epoch = 10000;
    } else if (name == "paper") {
        cfg.model.d_h = 128;
        cfg.model.n_layers = 6;
        cfg.model.n_heads = 8;
        cfg.model.d_ff = 512;
        cfg.instances_per_epoch = 100000;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected desk|paper)");
    }
}

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& j, const std::string& key, const std::string& origin) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": bad value for key '" + key + "': " + e.what());
    }
}

void parse_model_block(const json& j, ModelConfig& m, const std::string& origin) {
    if (!j.is_object()) throw ConfigError(origin + ": 'model' must be an object");
    for (const auto& [key, val] : j.items()) {
        if (key == "d_h") m.d_h = get_as<int>(val, key, origin);
        else if (key == "n_layers") m.n_layers = get_as<int>(val, key, origin);
        else if (key == "n_heads") m.n_heads = get_as<int>(val, key, origin);
        else if (key == "d_ff") m.d_ff = get_as<int>(val, key, origin);
        else if (key == "logit_clip") m.logit_clip = get_as<double>(val, key, origin);
        else throw ConfigError(origin + ": unknown model key '" + key + "'");
    }
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");

    TrainConfig cfg;
    if (j.contains("preset")) apply_preset(cfg, get_as<std::string>(j["preset"], "preset", origin));

    for (const auto& [key, val] : j.items()) {
        if (key == "preset") continue;
        else if (key == "problem")
            cfg.problem = problem_kind_from_string(get_as<std::string>(val, key, origin));
        else if (key == "m") cfg.m = get_as<int>(val, key, origin);
        else if (key == "variant")
            cfg.variant = variant_from_string(get_as<std::string>(val, key, origin));
        else if (key == "model") parse_model_block(val, cfg.model, origin);
        else if (key == "batch_size") cfg.batch_size = get_as<int>(val, key, origin);
        else if (key == "starts_per_instance")
            cfg.starts_per_instance = get_as<int>(val, key, origin);
        else if (key == "learning_rate") cfg.learning_rate = get_as<double>(val, key, origin);
        else if (key == "weight_decay") cfg.weight_decay = get_as<double>(val, key, origin);
        else if (key == "epochs") cfg.epochs = get_as<int>(val, key, origin);
        else if (key == "instances_per_epoch")
            cfg.instances_per_epoch = get_as<int>(val, key, origin);
        else if (key == "lr_decay_factor") cfg.lr_decay_factor = get_as<double>(val, key, origin);
        else if (key == "lr_decay_epoch") cfg.lr_decay_epoch = get_as<int>(val, key, origin);
        else if (key == "checkpoint_every") cfg.checkpoint_every = get_as<int>(val, key, origin);
        else if (key == "out_dir") cfg.out_dir = get_as<std::string>(val, key, origin);
        else if (key == "seed") cfg.seed = get_as<std::uint64_t>(val, key, origin);
        else if (key == "cvrp_divisor") cfg.cvrp_divisor = get_as<int>(val, key, origin);
        else if (key == "kp_capacity") cfg.kp_capacity = get_as<double>(val, key, origin);
        else if (key == "resume") cfg.resume = get_as<std::string>(val, key, origin);
        else throw ConfigError(origin + ": unknown config key '" + key + "'");
    }
    cfg.finalize();
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return train_config_from_json(text, path);
}

Trainer::Trainer(const TrainConfig& cfg, int threads)
    : cfg_(cfg), threads_(threads), net_(cfg_.model, cfg_.seed),
      adam_(net_.params(), cfg_.learning_rate, cfg_.weight_decay) {
    cfg_.validate();
    if (threads_ < 1) throw ArgumentError("Trainer: threads must be positive");
    if (!cfg_.resume.empty()) {
        CheckpointMeta meta;
        load_checkpoint_into(cfg_.resume, net_, &meta);
        epoch_ = meta.epoch;
        if (cfg_.lr_decay_epoch > 0 && epoch_ >= cfg_.lr_decay_epoch)
            adam_.set_lr(cfg_.learning_rate * cfg_.lr_decay_factor);
    }
    if (cfg_.variant == Variant::kStartToken) {
        critic_ = std::make_unique<Network<float>>(cfg_.model, cfg_.seed);
        critic_->params().copy_values_from(net_.params());
    }
}

std::vector<AnyInstance> Trainer::make_instances(int count, Xoshiro256pp& rng) const {
    std::vector<AnyInstance> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        switch (cfg_.problem) {
            case ProblemKind::kTsp: out.emplace_back(generate_tsp(cfg_.m, rng)); break;
            case ProblemKind::kCvrp:
                out.emplace_back(generate_cvrp(cfg_.m, rng, cfg_.cvrp_divisor));
                break;
            case ProblemKind::kKp:
                out.emplace_back(generate_kp(cfg_.m, rng, cfg_.kp_capacity));
                break;
        }
    }
    return out;
}

std::vector<int> Trainer::start_set() const {
    int n = cfg_.m;
    if (cfg_.starts_per_instance > 0) n = std::min(cfg_.starts_per_instance, cfg_.m);
    std::vector<int> starts(n);
    // CVRP starts are action indices, so customers begin at 1.
    const int base = cfg_.problem == ProblemKind::kCvrp ? 1 : 0;
    std::iota(starts.begin(), starts.end(), base);
    return starts;
}

void Trainer::maybe_decay_lr() {
    if (cfg_.lr_decay_epoch > 0 && epoch_ == cfg_.lr_decay_epoch)
        adam_.set_lr(adam_.lr() * cfg_.lr_decay_factor);
}

EpochStats Trainer::run_epoch() {
    EpochStats stats = cfg_.variant == Variant::kStartToken ? epoch_start_token()
                                                            : epoch_multi_start();
    ++epoch_;
    stats.epoch = epoch_;
    maybe_decay_lr();
    return stats;
}

EpochStats Trainer::epoch_multi_start() {
    const auto t0 = std::chrono::steady_clock::now();
    const int e = epoch_ + 1;
    Xoshiro256pp gen_rng = Xoshiro256pp::stream(cfg_.seed, 1'000'000 + static_cast<std::uint64_t>(e));
    Xoshiro256pp samp_rng = Xoshiro256pp::stream(cfg_.seed, 2'000'000 + static_cast<std::uint64_t>(e));
    const std::vector<int> starts = start_set();
    const int n = static_cast<int>(starts.size());

    double sum_return = 0.0, sum_baseline = 0.0, sum_grad_norm = 0.0;
    std::int64_t n_returns = 0, n_baselines = 0;
    int batches = 0;

    int remaining = cfg_.instances_per_epoch;
    while (remaining > 0) {
        const int b = std::min(cfg_.batch_size, remaining);
        remaining -= b;
        const std::vector<AnyInstance> instances = make_instances(b, gen_rng);
        std::vector<const AnyInstance*> ptrs(b);
        for (int i = 0; i < b; ++i) ptrs[i] = &instances[i];
        const std::vector<std::vector<int>> start_rows(b, starts);

        Graph<float> g(&net_.params(), threads_);
        BatchRolloutResult rr =
            rollout_batch(g, net_, ptrs, start_rows, DecodeMode::kSample, &samp_rng);

        Mat<double> returns(b, n);
        std::copy(rr.returns.begin(), rr.returns.end(), returns.data.begin());
        AdvantageBatch adv = compute_advantages(returns);
        const std::vector<double> wd = policy_loss_weights(adv.advantages);
        const int loss = g.weighted_sum(rr.logprob_node,
                                        std::vector<float>(wd.begin(), wd.end()), 1.0);

        net_.params().zero_grads();
        g.backward(loss);
        const double gn = net_.params().grad_norm();
        if (!std::isfinite(gn))
            throw NumericError("training aborted: non-finite gradient at epoch " +
                               std::to_string(e) + ", batch " + std::to_string(batches));
        adam_.step();
        if (!net_.params().all_finite())
            throw NumericError("training aborted: non-finite parameter at epoch " +
                               std::to_string(e) + ", batch " + std::to_string(batches));

        sum_return += std::accumulate(rr.returns.begin(), rr.returns.end(), 0.0);
        n_returns += static_cast<std::int64_t>(rr.returns.size());
        sum_baseline += std::accumulate(adv.baselines.begin(), adv.baselines.end(), 0.0);
        n_baselines += static_cast<std::int64_t>(adv.baselines.size());
        sum_grad_norm += gn;
        ++batches;
    }

    EpochStats stats;
    stats.mean_return = sum_return / static_cast<double>(n_returns);
    stats.baseline_mean = sum_baseline / static_cast<double>(n_baselines);
    stats.grad_norm = sum_grad_norm / static_cast<double>(batches);
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

EpochStats Trainer::epoch_start_token() {
    const auto t0 = std::chrono::steady_clock::now();
    const int e = epoch_ + 1;
    Xoshiro256pp gen_rng = Xoshiro256pp::stream(cfg_.seed, 1'000'000 + static_cast<std::uint64_t>(e));
    Xoshiro256pp samp_rng = Xoshiro256pp::stream(cfg_.seed, 2'000'000 + static_cast<std::uint64_t>(e));

    double sum_return = 0.0, sum_baseline = 0.0, sum_grad_norm = 0.0;
    std::int64_t n_rows = 0, n_beats = 0;
    int batches = 0;

    int remaining = cfg_.instances_per_epoch;
    while (remaining > 0) {
        const int b = std::min(cfg_.batch_size, remaining);
        remaining -= b;
        const std::vector<AnyInstance> instances = make_instances(b, gen_rng);
        std::vector<const AnyInstance*> ptrs(b);
        for (int i = 0; i < b; ++i) ptrs[i] = &instances[i];

        // Critic rollout runs on its own graph; it is never differentiated.
        Graph<float> gc(&critic_->params(), threads_);
        BatchRolloutResult greedy =
            start_token_rollout_batch(gc, *critic_, ptrs, DecodeMode::kGreedy);

        Graph<float> g(&net_.params(), threads_);
        BatchRolloutResult sampled =
            start_token_rollout_batch(g, net_, ptrs, DecodeMode::kSample, &samp_rng);

        std::vector<float> w(b);
        const double scale = 1.0 / static_cast<double>(b);
        for (int i = 0; i < b; ++i) {
            const double advantage = sampled.returns[i] - greedy.returns[i];
            w[i] = static_cast<float>(-advantage * scale);
            if (sampled.returns[i] > greedy.returns[i]) ++n_beats;
        }
        const int loss = g.weighted_sum(sampled.logprob_node, std::move(w), 1.0);

        net_.params().zero_grads();
        g.backward(loss);
        const double gn = net_.params().grad_norm();
        if (!std::isfinite(gn))
            throw NumericError("training aborted: non-finite gradient at epoch " +
                               std::to_string(e) + ", batch " + std::to_string(batches));
        adam_.step();
        if (!net_.params().all_finite())
            throw NumericError("training aborted: non-finite parameter at epoch " +
                               std::to_string(e) + ", batch " + std::to_string(batches));

        sum_return += std::accumulate(sampled.returns.begin(), sampled.returns.end(), 0.0);
        sum_baseline += std::accumulate(greedy.returns.begin(), greedy.returns.end(), 0.0);
        n_rows += b;
        sum_grad_norm += gn;
        ++batches;
    }

    critic_->params().copy_values_from(net_.params());

    EpochStats stats;
    stats.mean_return = sum_return / static_cast<double>(n_rows);
    stats.baseline_mean = sum_baseline / static_cast<double>(n_rows);
    stats.grad_norm = sum_grad_norm / static_cast<double>(batches);
    stats.frac_sample_beats_greedy = static_cast<double>(n_beats) / static_cast<double>(n_rows);
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
}

std::string epoch_csv_header(Variant variant) {
    std::string h = "epoch,mean_return,baseline_mean,grad_norm,seconds";
    if (variant == Variant::kStartToken) h += ",frac_sample_beats_greedy";
    return h;
}

std::string epoch_csv_line(const EpochStats& s, Variant variant) {
    std::string line = std::to_string(s.epoch) + "," + format_double(s.mean_return) + "," +
                       format_double(s.baseline_mean) + "," + format_double(s.grad_norm) + "," +
                       format_double(s.seconds);
    if (variant == Variant::kStartToken)
        line += "," + format_double(s.frac_sample_beats_greedy);
    return line;
}

std::vector<EpochStats> Trainer::train() {
    namespace fs = std::filesystem;
    fs::create_directories(cfg_.out_dir);
    const fs::path log_path = fs::path(cfg_.out_dir) / "training_log.csv";
    const bool append = epoch_ > 0 && fs::exists(log_path);
    std::ofstream log(log_path, append ? std::ios::app : std::ios::trunc);
    if (!log) throw Error("cannot open " + log_path.string());
    if (!append) log << epoch_csv_header(cfg_.variant) << "\n";

    std::vector<EpochStats> all;
    while (epoch_ < cfg_.epochs) {
        EpochStats s = run_epoch();
        log << epoch_csv_line(s, cfg_.variant) << "\n";
        log.flush();
        if (epoch_ % cfg_.checkpoint_every == 0 || epoch_ == cfg_.epochs) {
            char name[32];
            std::snprintf(name, sizeof(name), "ckpt_epoch_%04d.ckpt", epoch_);
            save_checkpoint((fs::path(cfg_.out_dir) / name).string(), net_, epoch_, cfg_.seed);
        }
        save_checkpoint((fs::path(cfg_.out_dir) / "ckpt_last.ckpt").string(), net_, epoch_,
                        cfg_.seed);
        all.push_back(s);
    }
    return all;
}

}  // namespace pomo
