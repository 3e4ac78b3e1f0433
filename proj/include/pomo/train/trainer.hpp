#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pomo/instances/types.hpp"
#include "pomo/model/config.hpp"
#include "pomo/model/network.hpp"
#include "pomo/train/adam.hpp"

namespace pomo {

struct TrainConfig {
    ProblemKind problem = ProblemKind::kTsp;
    int m = 20;
    Variant variant = Variant::kPomo;
    ModelConfig model;            // problem/variant fields are overwritten on finalize
    int batch_size = 64;
    int starts_per_instance = 0;  // 0: one trajectory per node; ignored by START_TOKEN
    double learning_rate = 1e-4;
    double weight_decay = 1e-6;
    int epochs = 1;
    int instances_per_epoch = 10000;
    double lr_decay_factor = 1.0;
    int lr_decay_epoch = 0;       // one-time decay after this epoch; 0: never
    int checkpoint_every = 1;
    std::string out_dir = "run";
    std::uint64_t seed = 1;
    int cvrp_divisor = 0;         // 0: size default
    double kp_capacity = 0.0;     // 0: size default
    std::string resume;           // checkpoint path; empty: fresh start

    void finalize();              // copy problem/variant into model, then validate
    void validate() const;
};

// desk: small model and epoch budget for single-core runs; paper: full sizes.
void apply_preset(TrainConfig& cfg, const std::string& name);

TrainConfig train_config_from_json(const std::string& text, const std::string& origin);
TrainConfig load_train_config(const std::string& path);

struct EpochStats {
    int epoch = 0;
    double mean_return = 0.0;
    double baseline_mean = 0.0;
    double grad_norm = 0.0;
    double seconds = 0.0;
    // Fraction of sampled rollouts beating the critic's greedy rollout;
    // negative for runs without a critic.
    double frac_sample_beats_greedy = -1.0;
};

class Trainer {
public:
    explicit Trainer(const TrainConfig& cfg, int threads = 1);

    // Epoch loop with CSV logging and checkpoints under cfg.out_dir.
    std::vector<EpochStats> train();

    EpochStats run_epoch();
    Network<float>& net() { return net_; }
    const Network<float>* critic() const { return critic_.get(); }
    const TrainConfig& config() const { return cfg_; }
    int completed_epochs() const { return epoch_; }

private:
    EpochStats epoch_multi_start();
    EpochStats epoch_start_token();
    std::vector<AnyInstance> make_instances(int count, Xoshiro256pp& rng) const;
    std::vector<int> start_set() const;
    void maybe_decay_lr();

    TrainConfig cfg_;
    int threads_;
    Network<float> net_;
    std::unique_ptr<Network<float>> critic_;
    Adam<float> adam_;
    int epoch_ = 0;  // completed epochs, continues across resume
};

std::string epoch_csv_header(Variant variant);
std::string epoch_csv_line(const EpochStats& s, Variant variant);

}  // namespace pomo
