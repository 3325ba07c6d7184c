#pragma once

#include <array>
#include <vector>

#include "protofair/matrix.hpp"

namespace protofair {

struct ProbeConfig {
    int epochs = 200;
    double lr = 0.1;
};

struct GroupConfusion {
    int tp = 0, fp = 0, tn = 0, fn = 0;
};

struct EoResult {
    double eo = 0.0;       // 100 · max over y of |P(ŷ=1|y,s=0) − P(ŷ=1|y,s=1)|
    double tpr_gap = 0.0;  // ×100
    double fpr_gap = 0.0;  // ×100
};

struct ProbeResult {
    std::vector<double> weights;
    double bias = 0.0;
    double accuracy = 0.0;  // percent
    EoResult eo;
    std::array<GroupConfusion, 2> confusion;  // indexed by sensitive group
};

// Logistic regression by full-batch gradient descent with cross-entropy,
// zero-initialized (deterministic). Targets must contain both classes.
std::pair<std::vector<double>, double> train_linear_probe(const Matrix& embeddings,
                                                          const std::vector<int>& targets,
                                                          int epochs, double lr);

std::vector<int> probe_predict(const Matrix& embeddings, const std::vector<double>& weights, double bias);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& targets);  // percent

// Equalized odds as the larger of the cross-group TPR and FPR gaps. Every
// (y, s) cell must be populated; an empty cell raises DataError naming it.
EoResult equalized_odds(const std::vector<int>& predictions, const std::vector<int>& targets,
                        const std::vector<int>& sensitive);

std::array<GroupConfusion, 2> confusion_by_group(const std::vector<int>& predictions,
                                                 const std::vector<int>& targets,
                                                 const std::vector<int>& sensitive);

// Probe on frozen train embeddings, metrics on the test split.
ProbeResult evaluate_probe(const Matrix& train_embeddings, const std::vector<int>& train_targets,
                           const Matrix& test_embeddings, const std::vector<int>& test_targets,
                           const std::vector<int>& test_sensitive, const ProbeConfig& cfg);

}  // namespace protofair
