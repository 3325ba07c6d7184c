#pragma once

#include <optional>
#include <vector>

#include "protofair/autodiff.hpp"
#include "protofair/feature_queue.hpp"

namespace protofair::losses {

// Per-sample annotations for one (possibly two-view) batch. Cluster ids are
// plain integers — they arrive through the detach boundary and carry no
// gradient linkage.
struct BatchAnnotations {
    std::vector<int> sensitive;              // s_i ∈ {0,1}
    std::vector<int> cluster;                // k̂_i
    std::optional<std::vector<int>> target;  // supervised base loss only

    void validate(size_t batch_size) const;
};

struct LossConfig {
    double temperature = 0.1;  // τ > 0
    double lambda_fair = 0.3;  // λ ≥ 0

    void validate() const;
};

// P_i = { j ≠ i : same cluster, different sensitive group } plus the anchor
// set V = { i : |P_i| > 0 }.
struct PositiveSets {
    std::vector<std::vector<int>> per_sample;  // P_i
    std::vector<int> anchors;                  // V
};

PositiveSets positive_sets(const std::vector<int>& cluster, const std::vector<int>& sensitive);

// Same matching rule, batch sample i against every queue entry j.
PositiveSets queue_positive_sets(const std::vector<int>& cluster, const std::vector<int>& sensitive,
                                 const FeatureQueue::Snapshot& queue);

// Counterfactual pull within the batch:
//   mean over i∈V of mean over j∈P_i of −log( exp(z_i·z_j/τ) / Σ_{k≠i} exp(z_i·z_k/τ) ).
// Returns a gradient-free scalar 0 when V is empty.
diff::TensorPtr within_batch_loss(const diff::TensorPtr& z, const PositiveSets& ps, double tau);

// Cross-batch variant: positives and the (full-queue) denominator come from
// the snapshot; gradients flow only into z.
diff::TensorPtr cross_batch_loss(const diff::TensorPtr& z, const FeatureQueue::Snapshot& queue,
                                 const PositiveSets& ps, double tau);

// Within-batch plus cross-batch terms.
diff::TensorPtr protofair_loss(const diff::TensorPtr& z, const BatchAnnotations& ann,
                               const FeatureQueue::Snapshot& queue, double tau);

// NT-Xent on block-ordered views: rows [0,B) are view 1, [B,2B) view 2; the
// positive of each anchor is its other view, the denominator all non-self rows.
diff::TensorPtr simclr_loss(const diff::TensorPtr& z, double tau);

// Supervised contrastive loss ("mean over positives outside the log" form):
// positives are all non-self rows sharing the anchor's label; anchors with
// no positive are skipped.
diff::TensorPtr supcon_loss(const diff::TensorPtr& z, const std::vector<int>& targets, double tau);

// L = L_SSL + λ·L_CF
diff::TensorPtr total_loss(const diff::TensorPtr& base, const diff::TensorPtr& cf, double lambda);

}  // namespace protofair::losses
