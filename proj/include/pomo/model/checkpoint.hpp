#pragma once

#include <cstdint>
#include <string>

#include "pomo/model/network.hpp"

namespace pomo {

struct CheckpointMeta {
    ModelConfig config;
    int epoch = 0;
    std::uint64_t seed = 0;
};

// Layout: "POMOCK1" magic, u32 header length, JSON header (config echo,
// problem, variant, epoch, seed, dtype, tensor shapes), then raw f32
// little-endian tensor data in declaration order.
void save_checkpoint(const std::string& path, const Network<float>& net, int epoch,
                     std::uint64_t seed);

CheckpointMeta peek_checkpoint(const std::string& path);

// Builds a network from the stored config and fills its parameters.
Network<float> load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

// Loads into an existing network; throws ConfigError when the stored config
// does not match net.config().
void load_checkpoint_into(const std::string& path, Network<float>& net,
                          CheckpointMeta* meta = nullptr);

}  // namespace pomo
