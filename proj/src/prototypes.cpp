#include "protofair/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace protofair {

namespace {

constexpr double kDegenerateNorm = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_unit_rows(const Matrix& m, const char* what) {
    for (int r = 0; r < m.rows; ++r) {
        const double nr = row_norm(m, r);
        if (std::abs(nr - 1.0) > 1e-6)
            throw ContractError(std::string(what) + ": row " + std::to_string(r) + " has norm " +
                                std::to_string(nr) + ", expected unit");
    }
}

void normalize_row(Matrix& m, int r) {
    const double nr = row_norm(m, r);
    for (int c = 0; c < m.cols; ++c) m.at(r, c) /= nr;
}

// k-means++ on the sphere: squared chordal distance 2(1−cos) as the weight.
Matrix kmeanspp_seed(const Matrix& x, int k, Rng& rng) {
    const int n = x.rows, d = x.cols;
    Matrix centroids(k, d);
    std::vector<double> min_d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    int first = rng.uniform_int(n);
    std::copy_n(x.row(first).data(), d, centroids.row(0).data());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d2 = 2.0 * (1.0 - dot(x.row(i), centroids.row(c - 1)));
            min_d2[static_cast<size_t>(i)] = std::min(min_d2[static_cast<size_t>(i)], std::max(d2, 0.0));
            total += min_d2[static_cast<size_t>(i)];
        }
        int pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;  // guard against roundoff past the last bucket
            for (int i = 0; i < n; ++i) {
                acc += min_d2[static_cast<size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_int(n);  // all points coincide with chosen centroids
        }
        std::copy_n(x.row(pick).data(), d, centroids.row(c).data());
    }
    return centroids;
}

int argmax_cosine(const Matrix& centroids, std::span<const double> v) {
    int best = 0;
    double best_sim = dot(centroids.row(0), v);
    for (int c = 1; c < centroids.rows; ++c) {
        const double sim = dot(centroids.row(c), v);
        if (sim > best_sim) {  // strict: ties keep the lowest index
            best_sim = sim;
            best = c;
        }
    }
    return best;
}

}  // namespace

KMeansResult spherical_kmeans(const Matrix& features, int k, Rng& rng, int max_iters) {
    const int n = features.rows, d = features.cols;
    if (k < 2) throw ConfigError("spherical_kmeans: need k >= 2, got " + std::to_string(k));
    if (n < k)
        throw ConfigError("spherical_kmeans: " + std::to_string(n) + " points for k=" + std::to_string(k));
    check_unit_rows(features, "spherical_kmeans");

    KMeansResult res;
    res.centroids = kmeanspp_seed(features, k, rng);
    res.assignment.assign(static_cast<size_t>(n), -1);

    for (int iter = 0; iter < max_iters; ++iter) {
        // assignment step + objective
        bool changed = false;
        double objective = 0.0;
        for (int i = 0; i < n; ++i) {
            const int a = argmax_cosine(res.centroids, features.row(i));
            objective += dot(res.centroids.row(a), features.row(i));
            if (a != res.assignment[static_cast<size_t>(i)]) {
                res.assignment[static_cast<size_t>(i)] = a;
                changed = true;
            }
        }
        res.objective_per_iter.push_back(objective);
        res.iterations = iter + 1;
        if (!changed && iter > 0) break;  // fixpoint

        // update step: normalized mean per cluster
        Matrix sums(k, d, 0.0);
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            const int a = res.assignment[static_cast<size_t>(i)];
            counts[static_cast<size_t>(a)]++;
            for (int c = 0; c < d; ++c) sums.at(a, c) += features.at(i, c);
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) continue;  // reseeded below
            if (row_norm(sums, c) < kDegenerateNorm) continue;  // antipodal cancellation: keep old
            std::copy_n(sums.row(c).data(), d, res.centroids.row(c).data());
            normalize_row(res.centroids, c);
        }
        // reseed empty clusters to the most isolated point
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] != 0) continue;
            int worst = 0;
            double worst_sim = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                double max_sim = -std::numeric_limits<double>::infinity();
                for (int c2 = 0; c2 < k; ++c2) {
                    if (counts[static_cast<size_t>(c2)] == 0 && c2 >= c) continue;  // not yet reseeded
                    max_sim = std::max(max_sim, dot(res.centroids.row(c2), features.row(i)));
                }
                if (max_sim < worst_sim) {
                    worst_sim = max_sim;
                    worst = i;
                }
            }
            std::copy_n(features.row(worst).data(), d, res.centroids.row(c).data());
            counts[static_cast<size_t>(c)] = 1;
        }
    }
    return res;
}

PrototypeBank make_prototype_bank(int k, double momentum, int reinit_period) {
    if (k < 2) throw ConfigError("prototype bank: k must be >= 2, got " + std::to_string(k));
    if (momentum < 0.0 || momentum >= 1.0)
        throw ConfigError("prototype bank: momentum must be in [0,1), got " + std::to_string(momentum));
    if (reinit_period < 1)
        throw ConfigError("prototype bank: reinit period must be >= 1, got " + std::to_string(reinit_period));
    PrototypeBank b;
    b.k = k;
    b.momentum = momentum;
    b.reinit_period = reinit_period;
    return b;
}

void PrototypeBank::init_from_features(const Matrix& features, int epoch, Rng& rng, int max_iters) {
    KMeansResult res = spherical_kmeans(features, k, rng, max_iters);
    protos = std::move(res.centroids);
    last_init_epoch = epoch;
    initialized = true;
}

void PrototypeBank::require_initialized() const {
    if (!initialized) throw LifecycleError("prototype bank used before K-Means initialization");
}

std::vector<int> PrototypeBank::assign(const Matrix& cluster_embeddings) const {
    require_initialized();
    if (cluster_embeddings.cols != protos.cols)
        throw ContractError("assign: embedding dim " + std::to_string(cluster_embeddings.cols) +
                            " does not match prototype dim " + std::to_string(protos.cols));
    std::vector<int> out(static_cast<size_t>(cluster_embeddings.rows));
    for (int i = 0; i < cluster_embeddings.rows; ++i)
        out[static_cast<size_t>(i)] = argmax_cosine(protos, cluster_embeddings.row(i));
    return out;
}

void PrototypeBank::ema_update(const Matrix& cluster_embeddings, const std::vector<int>& assignments) {
    require_initialized();
    if (static_cast<size_t>(cluster_embeddings.rows) != assignments.size())
        throw ContractError("ema_update: rows and assignments differ in length");
    const int d = protos.cols;
    Matrix sums(k, d, 0.0);
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int i = 0; i < cluster_embeddings.rows; ++i) {
        const int a = assignments[static_cast<size_t>(i)];
        if (a < 0 || a >= k)
            throw ContractError("ema_update: assignment " + std::to_string(a) + " out of range [0," +
                                std::to_string(k) + ")");
        counts[static_cast<size_t>(a)]++;
        for (int c = 0; c < d; ++c) sums.at(a, c) += cluster_embeddings.at(i, c);
    }
    for (int p = 0; p < k; ++p) {
        if (counts[static_cast<size_t>(p)] == 0) continue;
        const double inv = 1.0 / counts[static_cast<size_t>(p)];
        Matrix blend(1, d);
        for (int c = 0; c < d; ++c) blend.at(0, c) = momentum * protos.at(p, c) + (1.0 - momentum) * sums.at(p, c) * inv;
        const double nr = row_norm(blend, 0);
        if (nr < kDegenerateNorm) continue;  // blend cancelled out; keep the old prototype
        for (int c = 0; c < d; ++c) protos.at(p, c) = blend.at(0, c) / nr;
    }
}

bool PrototypeBank::reinit_due(int current_epoch) const {
    require_initialized();
    return current_epoch - last_init_epoch >= reinit_period;
}

}  // namespace protofair
