#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "protofair/evaluation.hpp"
#include "protofair/synth_data.hpp"
#include "protofair/trainer.hpp"

namespace protofair {

// Every experiment knob, flat snake_case keys mirroring the JSON config.
// parse_config fills documented defaults and rejects unknown keys and
// out-of-range values with the offending key in the message.
struct ExperimentConfig {
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};

    // schedule
    std::string base_loss = "simclr";
    int total_epochs = 30;
    int warmup_epochs = 10;
    int batch_size = 64;
    double lambda_fair = 0.3;
    double temperature = 0.1;

    // optimizer
    double base_lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 1e-4;

    // prototypes
    int n_clusters = 10;          // K
    double proto_momentum = 0.99; // m
    int reinit_period = 5;        // R
    int kmeans_max_iters = 100;

    // queue
    int queue_batches = 8;  // M

    // model
    int input_dim = 16;
    std::vector<int> encoder_hidden = {64};
    int encoder_out_dim = 32;
    int head_hidden = 32;
    int embed_dim = 16;

    // data
    int n_samples = 4000;
    int n_content_classes = 2;
    double content_sep = 3.0;
    double bias_strength = 1.5;
    double group_corr = 0.8;
    double noise_sigma = 1.0;
    double aug_sigma = 0.3;
    double aug_dropout = 0.1;

    // probe
    int probe_epochs = 200;
    double probe_lr = 0.1;

    void validate() const;

    DatasetSpec dataset_spec(uint64_t seed) const;
    EncoderConfig encoder_config() const;
    AugmentConfig augment_config() const;
    ProbeConfig probe_config() const;
    // λ = 0 for the baseline variant, config λ for the treatment
    TrainerConfig trainer_config(uint64_t seed, double lambda) const;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

}  // namespace protofair
