#include "protofair/feature_queue.hpp"

#include <cmath>
#include <string>

namespace protofair {

FeatureQueue::FeatureQueue(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("feature queue: capacity must be positive");
}

void FeatureQueue::enqueue_batch(const Matrix& z, const std::vector<int>& cluster_ids,
                                 const std::vector<int>& sensitive) {
    if (static_cast<size_t>(z.rows) != cluster_ids.size() || cluster_ids.size() != sensitive.size())
        throw ContractError("enqueue_batch: rows=" + std::to_string(z.rows) + ", cluster_ids=" +
                            std::to_string(cluster_ids.size()) + ", sensitive=" + std::to_string(sensitive.size()) +
                            " must all agree");
    for (int r = 0; r < z.rows; ++r) {
        if (std::abs(row_norm(z, r) - 1.0) > 1e-6)
            throw ContractError("enqueue_batch: row " + std::to_string(r) + " is not unit-norm");
    }
    for (int r = 0; r < z.rows; ++r) {
        auto span = z.row(r);
        entries_.push_back({{span.begin(), span.end()}, cluster_ids[static_cast<size_t>(r)],
                            sensitive[static_cast<size_t>(r)]});
    }
    while (entries_.size() > capacity_) entries_.pop_front();
}

FeatureQueue::Snapshot FeatureQueue::snapshot() const {
    Snapshot s;
    const int n = static_cast<int>(entries_.size());
    const int d = n > 0 ? static_cast<int>(entries_.front().z.size()) : 0;
    s.z = Matrix(n, d);
    s.cluster.reserve(entries_.size());
    s.sensitive.reserve(entries_.size());
    int r = 0;
    for (const auto& e : entries_) {
        std::copy(e.z.begin(), e.z.end(), s.z.row(r).data());
        s.cluster.push_back(e.cluster);
        s.sensitive.push_back(e.sensitive);
        ++r;
    }
    return s;
}

}  // namespace protofair
