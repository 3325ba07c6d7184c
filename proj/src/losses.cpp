#include "protofair/losses.hpp"

#include <cmath>
#include <string>

namespace protofair::losses {

namespace {

void check_unit_rows(const diff::TensorPtr& z, const char* op) {
    for (int r = 0; r < z->rows(); ++r) {
        const double nr = row_norm(z->value, r);
        if (std::abs(nr - 1.0) > 1e-6)
            throw ContractError(std::string(op) + ": row " + std::to_string(r) + " has norm " +
                                std::to_string(nr) + ", expected unit");
    }
}

void check_binary(const std::vector<int>& v, const char* what) {
    for (int x : v)
        if (x != 0 && x != 1) throw ContractError(std::string(what) + " must be binary, got " + std::to_string(x));
}

// Shared shape of every contrastive term here:
//   mean over anchors of [ logsumexp over that anchor's denominator −
//                          mean over positives of the similarity ]
// sim is the (already temperature-scaled) anchors×candidates similarity block,
// positives[r] indexes candidates for anchor r, mask flags denominator entries.
diff::TensorPtr contrastive_from_rows(const diff::TensorPtr& sim_rows,
                                      const std::vector<std::vector<int>>& positives,
                                      const std::vector<uint8_t>& denom_mask) {
    const int n_anchors = sim_rows->rows();
    const int n_candidates = sim_rows->cols();
    Matrix pos_weights(n_anchors, n_candidates, 0.0);
    for (int r = 0; r < n_anchors; ++r) {
        const auto& p = positives[static_cast<size_t>(r)];
        const double w = 1.0 / static_cast<double>(p.size());
        for (int j : p) pos_weights.at(r, j) = w;
    }
    auto lse = diff::masked_row_logsumexp(sim_rows, denom_mask);
    auto pos = diff::weighted_sum(sim_rows, std::move(pos_weights));
    auto per_anchor_sum = diff::add(diff::sum_all(lse), diff::scalar_mul(pos, -1.0));
    return diff::scalar_mul(per_anchor_sum, 1.0 / static_cast<double>(n_anchors));
}

}  // namespace

void BatchAnnotations::validate(size_t batch_size) const {
    if (sensitive.size() != batch_size || cluster.size() != batch_size)
        throw ContractError("BatchAnnotations: lengths must equal batch size " + std::to_string(batch_size));
    check_binary(sensitive, "sensitive attribute");
    for (int k : cluster)
        if (k < 0) throw ContractError("BatchAnnotations: negative cluster id");
    if (target && target->size() != batch_size)
        throw ContractError("BatchAnnotations: target length must equal batch size");
}

void LossConfig::validate() const {
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0, got " + std::to_string(temperature));
    if (lambda_fair < 0.0) throw ConfigError("lambda_fair must be >= 0, got " + std::to_string(lambda_fair));
}

PositiveSets positive_sets(const std::vector<int>& cluster, const std::vector<int>& sensitive) {
    if (cluster.size() != sensitive.size())
        throw ContractError("positive_sets: cluster and sensitive lengths differ");
    const int n = static_cast<int>(cluster.size());
    PositiveSets out;
    out.per_sample.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& p = out.per_sample[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j)
            if (j != i && cluster[static_cast<size_t>(j)] == cluster[static_cast<size_t>(i)] &&
                sensitive[static_cast<size_t>(j)] != sensitive[static_cast<size_t>(i)])
                p.push_back(j);
        if (!p.empty()) out.anchors.push_back(i);
    }
    return out;
}

PositiveSets queue_positive_sets(const std::vector<int>& cluster, const std::vector<int>& sensitive,
                                 const FeatureQueue::Snapshot& queue) {
    if (cluster.size() != sensitive.size())
        throw ContractError("queue_positive_sets: cluster and sensitive lengths differ");
    const int n = static_cast<int>(cluster.size());
    const int q = queue.size();
    PositiveSets out;
    out.per_sample.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& p = out.per_sample[static_cast<size_t>(i)];
        for (int j = 0; j < q; ++j)
            if (queue.cluster[static_cast<size_t>(j)] == cluster[static_cast<size_t>(i)] &&
                queue.sensitive[static_cast<size_t>(j)] != sensitive[static_cast<size_t>(i)])
                p.push_back(j);
        if (!p.empty()) out.anchors.push_back(i);
    }
    return out;
}

diff::TensorPtr within_batch_loss(const diff::TensorPtr& z, const PositiveSets& ps, double tau) {
    if (!(tau > 0.0)) throw ContractError("within_batch_loss: temperature must be > 0");
    const int b = z->rows();
    if (static_cast<int>(ps.per_sample.size()) != b)
        throw ContractError("within_batch_loss: positive sets sized for a different batch");
    if (ps.anchors.empty()) return diff::scalar_constant(0.0);
    check_unit_rows(z, "within_batch_loss");

    auto sim = diff::scalar_mul(diff::matmul_nt(z, z), 1.0 / tau);  // B×B
    auto sim_rows = diff::gather_rows(sim, ps.anchors);             // |V|×B

    const int n_anchors = static_cast<int>(ps.anchors.size());
    std::vector<std::vector<int>> positives(static_cast<size_t>(n_anchors));
    std::vector<uint8_t> mask(static_cast<size_t>(n_anchors) * b, 1);
    for (int r = 0; r < n_anchors; ++r) {
        const int i = ps.anchors[static_cast<size_t>(r)];
        positives[static_cast<size_t>(r)] = ps.per_sample[static_cast<size_t>(i)];
        mask[static_cast<size_t>(r) * b + i] = 0;  // denominator over k ≠ i
    }
    return contrastive_from_rows(sim_rows, positives, mask);
}

diff::TensorPtr cross_batch_loss(const diff::TensorPtr& z, const FeatureQueue::Snapshot& queue,
                                 const PositiveSets& ps, double tau) {
    if (!(tau > 0.0)) throw ContractError("cross_batch_loss: temperature must be > 0");
    if (static_cast<int>(ps.per_sample.size()) != z->rows())
        throw ContractError("cross_batch_loss: positive sets sized for a different batch");
    if (queue.empty() || ps.anchors.empty()) return diff::scalar_constant(0.0);
    check_unit_rows(z, "cross_batch_loss");

    // Queue side enters as a constant: stored values have no graph linkage.
    auto queue_z = diff::constant(queue.z);
    auto sim = diff::scalar_mul(diff::matmul_nt(z, queue_z), 1.0 / tau);  // B×Q
    auto sim_rows = diff::gather_rows(sim, ps.anchors);

    const int n_anchors = static_cast<int>(ps.anchors.size());
    std::vector<std::vector<int>> positives(static_cast<size_t>(n_anchors));
    for (int r = 0; r < n_anchors; ++r)
        positives[static_cast<size_t>(r)] = ps.per_sample[static_cast<size_t>(ps.anchors[static_cast<size_t>(r)])];
    // denominator sums over every queue entry
    std::vector<uint8_t> mask(static_cast<size_t>(n_anchors) * queue.size(), 1);
    return contrastive_from_rows(sim_rows, positives, mask);
}

diff::TensorPtr protofair_loss(const diff::TensorPtr& z, const BatchAnnotations& ann,
                               const FeatureQueue::Snapshot& queue, double tau) {
    ann.validate(static_cast<size_t>(z->rows()));
    const auto within_sets = positive_sets(ann.cluster, ann.sensitive);
    const auto queue_sets = queue_positive_sets(ann.cluster, ann.sensitive, queue);
    return diff::add(within_batch_loss(z, within_sets, tau), cross_batch_loss(z, queue, queue_sets, tau));
}

diff::TensorPtr simclr_loss(const diff::TensorPtr& z, double tau) {
    const int n = z->rows();
    if (n < 2 || n % 2 != 0)
        throw ContractError("simclr_loss: expected an even number of rows >= 2, got " + std::to_string(n));
    if (!(tau > 0.0)) throw ContractError("simclr_loss: temperature must be > 0");
    check_unit_rows(z, "simclr_loss");
    const int b = n / 2;

    auto sim = diff::scalar_mul(diff::matmul_nt(z, z), 1.0 / tau);
    std::vector<std::vector<int>> positives(static_cast<size_t>(n));
    std::vector<uint8_t> mask(static_cast<size_t>(n) * n, 1);
    for (int i = 0; i < n; ++i) {
        positives[static_cast<size_t>(i)] = {i < b ? i + b : i - b};
        mask[static_cast<size_t>(i) * n + i] = 0;
    }
    return contrastive_from_rows(sim, positives, mask);
}

diff::TensorPtr supcon_loss(const diff::TensorPtr& z, const std::vector<int>& targets, double tau) {
    const int n = z->rows();
    if (static_cast<int>(targets.size()) != n)
        throw ContractError("supcon_loss: targets length must equal row count");
    if (!(tau > 0.0)) throw ContractError("supcon_loss: temperature must be > 0");

    std::vector<std::vector<int>> per_sample(static_cast<size_t>(n));
    std::vector<int> anchors;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (j != i && targets[static_cast<size_t>(j)] == targets[static_cast<size_t>(i)])
                per_sample[static_cast<size_t>(i)].push_back(j);
        if (!per_sample[static_cast<size_t>(i)].empty()) anchors.push_back(i);
    }
    if (anchors.empty()) return diff::scalar_constant(0.0);
    check_unit_rows(z, "supcon_loss");

    auto sim = diff::scalar_mul(diff::matmul_nt(z, z), 1.0 / tau);
    auto sim_rows = diff::gather_rows(sim, anchors);
    const int n_anchors = static_cast<int>(anchors.size());
    std::vector<std::vector<int>> positives(static_cast<size_t>(n_anchors));
    std::vector<uint8_t> mask(static_cast<size_t>(n_anchors) * n, 1);
    for (int r = 0; r < n_anchors; ++r) {
        const int i = anchors[static_cast<size_t>(r)];
        positives[static_cast<size_t>(r)] = per_sample[static_cast<size_t>(i)];
        mask[static_cast<size_t>(r) * n + i] = 0;
    }
    return contrastive_from_rows(sim_rows, positives, mask);
}

diff::TensorPtr total_loss(const diff::TensorPtr& base, const diff::TensorPtr& cf, double lambda) {
    if (lambda < 0.0) throw ContractError("total_loss: lambda must be >= 0");
    return diff::add(base, diff::scalar_mul(cf, lambda));
}

}  // namespace protofair::losses
