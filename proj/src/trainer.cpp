#include "protofair/trainer.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace protofair {

void TrainSchedule::validate() const {
    if (total_epochs < 1) throw ConfigError("total_epochs must be >= 1");
    if (warmup_epochs < 0 || warmup_epochs > total_epochs)
        throw ConfigError("warmup_epochs must be in [0, total_epochs], got " + std::to_string(warmup_epochs));
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2, got " + std::to_string(batch_size));
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (lambda_fair < 0.0) throw ConfigError("lambda_fair must be >= 0");
}

void OptimizerConfig::validate() const {
    if (!(base_lr > 0.0)) throw ConfigError("base_lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0,1)");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

double cosine_lr(double base_lr, int epoch, int total_epochs) {
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / total_epochs));
}

void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, const OptimizerConfig& opt, double lr) {
    if (!param.same_shape(grad) || !param.same_shape(velocity))
        throw ContractError("sgd_step: param/grad/velocity shapes differ");
    for (size_t i = 0; i < param.data.size(); ++i) {
        velocity.data[i] = opt.momentum * velocity.data[i] + grad.data[i] + opt.weight_decay * param.data[i];
        param.data[i] -= lr * velocity.data[i];
    }
}

Trainer::Trainer(TrainerConfig config, Split train_data)
    : cfg_(std::move(config)),
      data_(std::move(train_data)),
      model_([&] {
          cfg_.schedule.validate();
          cfg_.optimizer.validate();
          cfg_.augment.validate();
          Rng init_rng(Rng::derive(cfg_.schedule.seed, "init"));
          return init_model(cfg_.encoder, init_rng);
      }()),
      bank_(make_prototype_bank(cfg_.prototypes.k, cfg_.prototypes.momentum, cfg_.prototypes.reinit_period)),
      queue_(static_cast<size_t>(cfg_.queue_batches) * 2 * static_cast<size_t>(cfg_.schedule.batch_size)),
      shuffle_rng_(Rng::derive(cfg_.schedule.seed, "shuffle")),
      augment_rng_(Rng::derive(cfg_.schedule.seed, "augment")),
      kmeans_rng_(Rng::derive(cfg_.schedule.seed, "kmeans")) {
    if (data_.size() < 2) throw ConfigError("trainer: training split needs at least 2 samples");
    if (data_.x.cols != cfg_.encoder.input_dim)
        throw ConfigError("trainer: data dim " + std::to_string(data_.x.cols) + " does not match input_dim " +
                          std::to_string(cfg_.encoder.input_dim));
    // θ and φ are trained; ψ is not (it gets no gradient from any loss)
    for (auto* mlp : {&model_.encoder, &model_.contrastive_head}) {
        for (auto& w : mlp->weights) trained_params_.push_back(&w);
        for (auto& b : mlp->biases) trained_params_.push_back(&b);
    }
    for (Matrix* p : trained_params_) velocities_.emplace_back(p->rows, p->cols, 0.0);
}

void Trainer::init_prototypes(int epoch) {
    if (data_.size() < cfg_.prototypes.k)
        throw ConfigError("trainer: training split smaller than prototype count");
    const Matrix h = encode_values(model_.encoder, data_.x);
    const Matrix hbar = project_values(model_.cluster_head, h);
    bank_.init_from_features(hbar, epoch, kmeans_rng_, cfg_.prototypes.kmeans_max_iters);
    if (prototype_observer) prototype_observer(bank_);
}

EpochMetrics Trainer::train_epoch(int epoch) {
    const auto& sched = cfg_.schedule;
    const bool fairness_active = epoch >= sched.warmup_epochs;
    if (fairness_active) bank_.require_initialized();

    const double lr = cosine_lr(cfg_.optimizer.base_lr, epoch, sched.total_epochs);
    std::vector<int> perm(static_cast<size_t>(data_.size()));
    std::iota(perm.begin(), perm.end(), 0);
    shuffle_rng_.shuffle(perm);

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.lr = lr;
    int n_batches = 0;

    for (int start = 0; start < data_.size(); start += sched.batch_size) {
        const int b = std::min(sched.batch_size, data_.size() - start);
        Matrix raw(b, data_.x.cols);
        std::vector<int> targets, sensitive;
        for (int i = 0; i < b; ++i) {
            const int src = perm[static_cast<size_t>(start + i)];
            std::copy_n(data_.x.row(src).data(), data_.x.cols, raw.row(i).data());
            targets.push_back(data_.y[static_cast<size_t>(src)]);
            sensitive.push_back(data_.s[static_cast<size_t>(src)]);
        }
        auto [view1, view2] = augment_batch(raw, cfg_.augment, augment_rng_);

        // annotations are shared by both views, block-ordered like z
        std::vector<int> targets2(targets), sensitive2(sensitive);
        targets2.insert(targets2.end(), targets.begin(), targets.end());
        sensitive2.insert(sensitive2.end(), sensitive.begin(), sensitive.end());

        const BoundMlp theta = bind(model_.encoder, true);
        const BoundMlp phi = bind(model_.contrastive_head, true);
        auto x = diff::concat_rows(diff::constant(view1), diff::constant(view2));
        auto h = encode(theta, x);
        auto z = project(phi, h);

        auto base = sched.base_loss == BaseLoss::simclr ? losses::simclr_loss(z, sched.temperature)
                                                        : losses::supcon_loss(z, targets2, sched.temperature);

        diff::TensorPtr loss = base;
        double cf_value = 0.0;
        if (fairness_active) {
            const BoundMlp psi = bind(model_.cluster_head, false);
            auto hbar_detached = diff::detach(project(psi, h));  // assignment side never carries grad
            const Matrix& hbar = hbar_detached->value;
            const std::vector<int> assignments = bank_.assign(hbar);
            bank_.ema_update(hbar, assignments);
            if (prototype_observer) prototype_observer(bank_);

            losses::BatchAnnotations ann;
            ann.sensitive = sensitive2;
            ann.cluster = assignments;
            auto cf = losses::protofair_loss(z, ann, queue_.snapshot(), sched.temperature);
            cf_value = cf->scalar();
            // enqueue after the loss forward: the batch is not its own negative
            queue_.enqueue_batch(z->value, assignments, sensitive2);
            loss = losses::total_loss(base, cf, sched.lambda_fair);
        }

        diff::backward(loss);
        std::vector<diff::TensorPtr> leaves;
        leaves.insert(leaves.end(), theta.weights.begin(), theta.weights.end());
        leaves.insert(leaves.end(), theta.biases.begin(), theta.biases.end());
        leaves.insert(leaves.end(), phi.weights.begin(), phi.weights.end());
        leaves.insert(leaves.end(), phi.biases.begin(), phi.biases.end());
        optimizer_step(leaves, lr);

        metrics.mean_base_loss += base->scalar();
        metrics.mean_cf_loss += cf_value;
        ++n_batches;
    }
    metrics.mean_base_loss /= n_batches;
    metrics.mean_cf_loss /= n_batches;
    return metrics;
}

void Trainer::optimizer_step(const std::vector<diff::TensorPtr>& leaves, double lr) {
    if (leaves.size() != trained_params_.size()) throw ContractError("optimizer_step: leaf count mismatch");
    for (size_t i = 0; i < leaves.size(); ++i) {
        const Matrix grad = leaves[i]->has_grad() ? leaves[i]->grad : Matrix(trained_params_[i]->rows,
                                                                             trained_params_[i]->cols, 0.0);
        sgd_step(*trained_params_[i], grad, velocities_[i], cfg_.optimizer, lr);
    }
}

std::vector<EpochMetrics> Trainer::run() {
    std::vector<EpochMetrics> log;
    for (int epoch = 0; epoch < cfg_.schedule.total_epochs; ++epoch) {
        if (epoch >= cfg_.schedule.warmup_epochs) {
            if (!bank_.initialized)
                init_prototypes(epoch);  // warmup just ended
            else if (bank_.reinit_due(epoch))
                init_prototypes(epoch);
        }
        log.push_back(train_epoch(epoch));
    }
    return log;
}

}  // namespace protofair
