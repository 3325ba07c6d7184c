#pragma once

#include <optional>
#include <string>

#include "protofair/mlp.hpp"
#include "protofair/prototypes.hpp"

namespace protofair {

// Versioned JSON checkpoint: encoder config, the three parameter sets
// (layer shapes + row-major values) and, when present, the prototype bank.
// Doubles are written with enough digits to round-trip exactly.
struct Checkpoint {
    Model model;
    std::optional<PrototypeBank> bank;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace protofair
