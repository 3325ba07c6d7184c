#include "protofair/mlp.hpp"

#include <cmath>
#include <string>

namespace protofair {

void EncoderConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) throw ConfigError(std::string(name) + " must be >= 1, got " + std::to_string(v));
    };
    positive(input_dim, "input_dim");
    positive(encoder_out_dim, "encoder_out_dim");
    positive(head_hidden, "head_hidden");
    positive(embed_dim, "embed_dim");
    for (int w : encoder_hidden) positive(w, "encoder_hidden entry");
}

std::vector<int> EncoderConfig::encoder_widths() const {
    std::vector<int> w{input_dim};
    w.insert(w.end(), encoder_hidden.begin(), encoder_hidden.end());
    w.push_back(encoder_out_dim);
    return w;
}

std::vector<int> EncoderConfig::head_widths() const { return {encoder_out_dim, head_hidden, embed_dim}; }

bool MlpParams::all_finite() const {
    for (const auto& w : weights)
        if (!w.all_finite()) return false;
    for (const auto& b : biases)
        if (!b.all_finite()) return false;
    return true;
}

MlpParams init_mlp(const std::vector<int>& widths, Rng& rng) {
    if (widths.size() < 2) throw ConfigError("init_mlp: need at least input and output widths");
    MlpParams p;
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l], fan_out = widths[l + 1];
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (double& v : w.data) v = rng.uniform(-a, a);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(1, fan_out, 0.0);
    }
    return p;
}

Model init_model(const EncoderConfig& config, Rng& rng) {
    config.validate();
    Model m;
    m.config = config;
    m.encoder = init_mlp(config.encoder_widths(), rng);
    m.contrastive_head = init_mlp(config.head_widths(), rng);
    m.cluster_head = init_mlp(config.head_widths(), rng);
    return m;
}

BoundMlp bind(const MlpParams& params, bool requires_grad) {
    BoundMlp b;
    for (const auto& w : params.weights) b.weights.push_back(diff::make_tensor(w, requires_grad));
    for (const auto& bs : params.biases) b.biases.push_back(diff::make_tensor(bs, requires_grad));
    return b;
}

diff::TensorPtr mlp_forward(const BoundMlp& mlp, const diff::TensorPtr& x) {
    if (mlp.weights.empty()) throw ContractError("mlp_forward: empty parameter set");
    if (x->cols() != mlp.weights.front()->rows())
        throw ContractError("mlp_forward: input width " + std::to_string(x->cols()) + " does not match layer width " +
                            std::to_string(mlp.weights.front()->rows()));
    diff::TensorPtr h = x;
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
        h = diff::add_row_bias(diff::matmul(h, mlp.weights[l]), mlp.biases[l]);
        if (l + 1 < mlp.weights.size()) h = diff::relu(h);
    }
    return h;
}

diff::TensorPtr encode(const BoundMlp& encoder, const diff::TensorPtr& x) { return mlp_forward(encoder, x); }

diff::TensorPtr project(const BoundMlp& head, const diff::TensorPtr& h) {
    return diff::l2_normalize_rows(mlp_forward(head, h));
}

Matrix encode_values(const MlpParams& encoder, const Matrix& x) {
    return mlp_forward(bind(encoder, false), diff::constant(x))->value;
}

Matrix project_values(const MlpParams& head, const Matrix& h) {
    return project(bind(head, false), diff::constant(h))->value;
}

}  // namespace protofair
