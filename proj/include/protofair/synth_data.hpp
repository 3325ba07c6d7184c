#pragma once

#include <string>
#include <utility>
#include <vector>

#include "protofair/matrix.hpp"
#include "protofair/rng.hpp"

namespace protofair {

// Biased vector benchmark: class means sit on two orthogonal axes, a third
// axis carries a sensitive-group offset whose sign follows s, and s is
// correlated with the target on the training split only.
struct DatasetSpec {
    int n_samples = 4000;
    int input_dim = 16;
    int n_content_classes = 2;  // targets are binary throughout
    double content_sep = 3.0;   // distance of each class mean from the origin
    double bias_strength = 1.5; // β, magnitude of the sensitive-direction offset
    double group_corr = 0.8;    // ρ = P(s=1|y=1) = P(s=0|y=0) on the training split
    double noise_sigma = 1.0;
    uint64_t seed = 1;

    void validate() const;
};

struct AugmentConfig {
    double sigma = 0.3;    // additive Gaussian noise per coordinate
    double p_drop = 0.1;   // independent coordinate zeroing rate

    void validate() const;
};

struct Sample {
    std::vector<double> x;
    int y = 0;
    int s = 0;
};

struct Split {
    Matrix x;
    std::vector<int> y;
    std::vector<int> s;

    int size() const { return x.rows; }
};

struct Dataset {
    Split train;  // group-correlated per spec.group_corr
    Split val;    // balanced (ρ = 0.5)
    Split test;   // balanced (ρ = 0.5)
};

// 70/15/15 split; validation and test are resampled with balanced groups.
Dataset generate(const DatasetSpec& spec);

// Two noisy views of one sample; draws from rng in a fixed order.
std::pair<std::vector<double>, std::vector<double>> augment_sample(std::span<const double> x,
                                                                   const AugmentConfig& cfg, Rng& rng);

// Row-wise two-view augmentation of a batch.
std::pair<Matrix, Matrix> augment_batch(const Matrix& x, const AugmentConfig& cfg, Rng& rng);

// CSV with header x0,...,x{D-1},y,s. Errors carry the 1-based line number.
Split load_csv(const std::string& path);
void save_csv(const Split& split, const std::string& path);

}  // namespace protofair
