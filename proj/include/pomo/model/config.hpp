#pragma once

#include <cstdint>
#include <string>

#include "pomo/core/error.hpp"
#include "pomo/instances/types.hpp"

namespace pomo {

// kPomo fixes the first action per trajectory (multi-start); kStartToken
// lets the decoder pick it using the trainable token pair.
enum class Variant : std::uint8_t { kPomo = 0, kStartToken = 1 };

inline const char* to_string(Variant v) {
    return v == Variant::kPomo ? "POMO" : "START_TOKEN";
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "POMO") return Variant::kPomo;
    if (s == "START_TOKEN") return Variant::kStartToken;
    throw ArgumentError("unknown variant '" + s + "' (expected POMO|START_TOKEN)");
}

struct ModelConfig {
    int d_h = 128;
    int n_layers = 6;
    int n_heads = 8;
    int d_ff = 512;
    double logit_clip = 10.0;
    ProblemKind problem = ProblemKind::kTsp;
    Variant variant = Variant::kPomo;

    int d_k() const { return d_h / n_heads; }
    // Context is [mean, last, first] plus a remaining-capacity scalar for
    // CVRP and KP.
    int context_width() const {
        return 3 * d_h + (problem == ProblemKind::kTsp ? 0 : 1);
    }

    void validate() const {
        if (d_h <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0)
            throw ConfigError("model config: sizes must be positive");
        if (d_h % n_heads != 0)
            throw ConfigError("model config: d_h=" + std::to_string(d_h) +
                              " not divisible by n_heads=" + std::to_string(n_heads));
        if (logit_clip <= 0.0) throw ConfigError("model config: logit_clip must be positive");
    }

    bool operator==(const ModelConfig&) const = default;
};

}  // namespace pomo
