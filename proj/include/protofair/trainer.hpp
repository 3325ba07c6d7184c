#pragma once

#include <functional>
#include <vector>

#include "protofair/feature_queue.hpp"
#include "protofair/losses.hpp"
#include "protofair/mlp.hpp"
#include "protofair/prototypes.hpp"
#include "protofair/rng.hpp"
#include "protofair/synth_data.hpp"

namespace protofair {

enum class BaseLoss { simclr, supcon };

struct TrainSchedule {
    int warmup_epochs = 10;
    int total_epochs = 30;
    int batch_size = 64;
    BaseLoss base_loss = BaseLoss::simclr;
    double lambda_fair = 0.3;
    double temperature = 0.1;
    uint64_t seed = 1;

    void validate() const;
};

struct OptimizerConfig {
    double base_lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 1e-4;

    void validate() const;
};

struct PrototypeConfig {
    int k = 10;
    double momentum = 0.99;
    int reinit_period = 5;
    int kmeans_max_iters = 100;
};

struct TrainerConfig {
    TrainSchedule schedule;
    OptimizerConfig optimizer;
    PrototypeConfig prototypes;
    int queue_batches = 8;  // M
    EncoderConfig encoder;
    AugmentConfig augment;
};

// lr(e) = base_lr · ½(1 + cos(π·e/total))
double cosine_lr(double base_lr, int epoch, int total_epochs);

// v ← momentum·v + grad + wd·param;  param ← param − lr·v
void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, const OptimizerConfig& opt, double lr);

struct EpochMetrics {
    int epoch = 0;
    double lr = 0.0;
    double mean_base_loss = 0.0;
    double mean_cf_loss = 0.0;  // unweighted L_CF; 0 during warmup
};

// Two-phase schedule: warmup epochs train the base SSL loss alone; at warmup
// end the prototypes are K-Means-initialized over the full training set's
// cluster embeddings, and from then on every batch runs assign → EMA →
// fairness loss → enqueue, with K-Means re-run every reinit_period epochs.
// The cluster head receives no gradient from any loss and keeps its initial
// weights; the optimizer covers the encoder and the contrastive head.
class Trainer {
public:
    Trainer(TrainerConfig config, Split train_data);

    Trainer(const Trainer&) = delete;  // trained_params_ points into model_
    Trainer& operator=(const Trainer&) = delete;

    std::vector<EpochMetrics> run();

    // Single-epoch step, exposed for schedule-level tests. Prototype
    // (re-)initialization is owned by run().
    EpochMetrics train_epoch(int epoch);

    const Model& model() const { return model_; }
    const PrototypeBank& bank() const { return bank_; }
    const FeatureQueue& queue() const { return queue_; }

    // Invoked after every prototype mutation (K-Means init and each EMA
    // update); used by invariant checks.
    std::function<void(const PrototypeBank&)> prototype_observer;

private:
    void init_prototypes(int epoch);
    void optimizer_step(const std::vector<diff::TensorPtr>& leaves, double lr);

    TrainerConfig cfg_;
    Split data_;
    Model model_;
    PrototypeBank bank_;
    FeatureQueue queue_;
    std::vector<Matrix*> trained_params_;  // θ and φ, fixed order
    std::vector<Matrix> velocities_;
    Rng shuffle_rng_;
    Rng augment_rng_;
    Rng kmeans_rng_;
};

}  // namespace protofair
