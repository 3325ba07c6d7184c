#pragma once

#include <vector>

#include "protofair/matrix.hpp"
#include "protofair/rng.hpp"

namespace protofair {

// Result of one spherical K-Means run. The per-iteration objective
// (Σ_i max_k cos(x_i, c_k), recorded after each assignment step) is kept so
// callers can check the monotonicity property.
struct KMeansResult {
    Matrix centroids;  // K×d, unit rows
    std::vector<int> assignment;
    std::vector<double> objective_per_iter;
    int iterations = 0;
};

// Cosine-space K-Means with k-means++ seeding. Alternates max-cosine
// assignment with normalized-mean centroid updates until the assignment
// reaches a fixpoint or max_iters. Empty clusters are reseeded to the point
// with the lowest max-cosine to the existing centroids.
KMeansResult spherical_kmeans(const Matrix& features, int k, Rng& rng, int max_iters = 100);

// K unit-norm prototypes tracked between K-Means re-initializations by EMA.
struct PrototypeBank {
    int k = 0;
    Matrix protos;  // K×d, every row unit-norm within 1e-10 after any mutation
    double momentum = 0.99;    // m ∈ [0,1)
    int reinit_period = 5;     // R, epochs
    int last_init_epoch = -1;
    bool initialized = false;

    // Runs K-Means over the full feature set and replaces all prototypes.
    void init_from_features(const Matrix& features, int epoch, Rng& rng, int max_iters = 100);

    // k̂_i = argmax_k h̄_i·c_k, ties broken by lowest index. Plain integers:
    // assignments never carry gradient.
    std::vector<int> assign(const Matrix& cluster_embeddings) const;

    // c_k ← normalize(m·c_k + (1−m)·mean of assigned rows); clusters with no
    // assigned samples keep their current prototype.
    void ema_update(const Matrix& cluster_embeddings, const std::vector<int>& assignments);

    bool reinit_due(int current_epoch) const;

    void require_initialized() const;
};

PrototypeBank make_prototype_bank(int k, double momentum, int reinit_period);

}  // namespace protofair
