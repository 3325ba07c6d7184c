#pragma once

#include <deque>
#include <vector>

#include "protofair/matrix.hpp"

namespace protofair {

// FIFO store of detached (embedding, cluster id, sensitive attribute) tuples
// from recent batches. Entries are plain values with no graph linkage, so no
// gradient can ever flow back into whatever produced them. Capacity is an
// element cap (M batches × rows per batch); partial batches count by element.
class FeatureQueue {
public:
    struct Snapshot {
        Matrix z;  // |entries|×d, insertion order
        std::vector<int> cluster;
        std::vector<int> sensitive;
        bool empty() const { return z.rows == 0; }
        int size() const { return z.rows; }
    };

    explicit FeatureQueue(size_t capacity);

    // Appends the batch, then evicts oldest entries down to capacity.
    // z rows must be unit-norm; lengths must agree.
    void enqueue_batch(const Matrix& z, const std::vector<int>& cluster_ids,
                       const std::vector<int>& sensitive);

    Snapshot snapshot() const;

    size_t size() const { return entries_.size(); }
    size_t capacity() const { return capacity_; }

private:
    struct Entry {
        std::vector<double> z;
        int cluster;
        int sensitive;
    };

    size_t capacity_;
    std::deque<Entry> entries_;
};

}  // namespace protofair
