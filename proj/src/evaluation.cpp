#include "protofair/evaluation.hpp"

#include <cmath>
#include <string>

#include "protofair/error.hpp"

namespace protofair {

namespace {

void check_lengths(size_t a, size_t b, const char* what) {
    if (a != b) throw ContractError(std::string(what) + ": length mismatch");
}

void check_binary(const std::vector<int>& v, const char* what) {
    for (int x : v)
        if (x != 0 && x != 1) throw ContractError(std::string(what) + " must be binary, got " + std::to_string(x));
}

}  // namespace

std::pair<std::vector<double>, double> train_linear_probe(const Matrix& embeddings,
                                                          const std::vector<int>& targets, int epochs,
                                                          double lr) {
    const int n = embeddings.rows, d = embeddings.cols;
    check_lengths(static_cast<size_t>(n), targets.size(), "train_linear_probe");
    check_binary(targets, "targets");
    int positives = 0;
    for (int y : targets) positives += y;
    if (positives == 0 || positives == n)
        throw DataError("train_linear_probe: targets contain a single class, task is degenerate");

    std::vector<double> w(static_cast<size_t>(d), 0.0);
    double b = 0.0;
    std::vector<double> residual(static_cast<size_t>(n));
    for (int e = 0; e < epochs; ++e) {
        for (int i = 0; i < n; ++i) {
            double logit = b;
            for (int c = 0; c < d; ++c) logit += w[static_cast<size_t>(c)] * embeddings.at(i, c);
            const double p = 1.0 / (1.0 + std::exp(-logit));
            residual[static_cast<size_t>(i)] = p - targets[static_cast<size_t>(i)];
        }
        const double inv_n = 1.0 / n;
        double gb = 0.0;
        for (int i = 0; i < n; ++i) gb += residual[static_cast<size_t>(i)];
        b -= lr * gb * inv_n;
        for (int c = 0; c < d; ++c) {
            double g = 0.0;
            for (int i = 0; i < n; ++i) g += residual[static_cast<size_t>(i)] * embeddings.at(i, c);
            w[static_cast<size_t>(c)] -= lr * g * inv_n;
        }
    }
    return {std::move(w), b};
}

std::vector<int> probe_predict(const Matrix& embeddings, const std::vector<double>& weights, double bias) {
    if (static_cast<size_t>(embeddings.cols) != weights.size())
        throw ContractError("probe_predict: weight length does not match embedding dim");
    std::vector<int> preds(static_cast<size_t>(embeddings.rows));
    for (int i = 0; i < embeddings.rows; ++i) {
        double logit = bias;
        for (int c = 0; c < embeddings.cols; ++c) logit += weights[static_cast<size_t>(c)] * embeddings.at(i, c);
        preds[static_cast<size_t>(i)] = logit >= 0.0 ? 1 : 0;
    }
    return preds;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& targets) {
    check_lengths(predictions.size(), targets.size(), "accuracy");
    if (predictions.empty()) throw ContractError("accuracy: empty inputs");
    int correct = 0;
    for (size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == targets[i]) ++correct;
    return 100.0 * correct / static_cast<double>(predictions.size());
}

EoResult equalized_odds(const std::vector<int>& predictions, const std::vector<int>& targets,
                        const std::vector<int>& sensitive) {
    check_lengths(predictions.size(), targets.size(), "equalized_odds");
    check_lengths(predictions.size(), sensitive.size(), "equalized_odds");
    check_binary(predictions, "predictions");
    check_binary(targets, "targets");
    check_binary(sensitive, "sensitive");

    int count[2][2] = {};     // [y][s]
    int pos_pred[2][2] = {};  // predicted 1
    for (size_t i = 0; i < predictions.size(); ++i) {
        count[targets[i]][sensitive[i]]++;
        pos_pred[targets[i]][sensitive[i]] += predictions[i];
    }
    double rate[2][2];
    for (int y = 0; y < 2; ++y)
        for (int s = 0; s < 2; ++s) {
            if (count[y][s] == 0)
                throw DataError("equalized_odds: no samples with y=" + std::to_string(y) + ", s=" +
                                std::to_string(s) + "; rate undefined");
            rate[y][s] = static_cast<double>(pos_pred[y][s]) / count[y][s];
        }
    EoResult r;
    r.fpr_gap = 100.0 * std::abs(rate[0][0] - rate[0][1]);
    r.tpr_gap = 100.0 * std::abs(rate[1][0] - rate[1][1]);
    r.eo = std::max(r.tpr_gap, r.fpr_gap);
    return r;
}

std::array<GroupConfusion, 2> confusion_by_group(const std::vector<int>& predictions,
                                                 const std::vector<int>& targets,
                                                 const std::vector<int>& sensitive) {
    check_lengths(predictions.size(), targets.size(), "confusion_by_group");
    check_lengths(predictions.size(), sensitive.size(), "confusion_by_group");
    std::array<GroupConfusion, 2> out{};
    for (size_t i = 0; i < predictions.size(); ++i) {
        GroupConfusion& c = out[static_cast<size_t>(sensitive[i])];
        if (targets[i] == 1)
            (predictions[i] == 1 ? c.tp : c.fn)++;
        else
            (predictions[i] == 1 ? c.fp : c.tn)++;
    }
    return out;
}

ProbeResult evaluate_probe(const Matrix& train_embeddings, const std::vector<int>& train_targets,
                           const Matrix& test_embeddings, const std::vector<int>& test_targets,
                           const std::vector<int>& test_sensitive, const ProbeConfig& cfg) {
    ProbeResult res;
    auto [w, b] = train_linear_probe(train_embeddings, train_targets, cfg.epochs, cfg.lr);
    res.weights = std::move(w);
    res.bias = b;
    const auto preds = probe_predict(test_embeddings, res.weights, res.bias);
    res.accuracy = accuracy(preds, test_targets);
    res.eo = equalized_odds(preds, test_targets, test_sensitive);
    res.confusion = confusion_by_group(preds, test_targets, test_sensitive);
    return res;
}

}  // namespace protofair
