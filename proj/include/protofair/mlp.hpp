#pragma once

#include <vector>

#include "protofair/autodiff.hpp"
#include "protofair/matrix.hpp"
#include "protofair/rng.hpp"

namespace protofair {

// Widths of the shared encoder and the two projection heads. Both heads map
// the encoder output (dim m = encoder_out_dim) into the same d-dimensional
// embedding space.
struct EncoderConfig {
    int input_dim = 16;
    std::vector<int> encoder_hidden = {64};
    int encoder_out_dim = 32;
    int head_hidden = 32;
    int embed_dim = 16;

    void validate() const;
    std::vector<int> encoder_widths() const;  // input → hidden... → m
    std::vector<int> head_widths() const;     // m → head_hidden → d
};

// Plain parameter storage: layer l maps n×in to n×out via x·W_l + b_l,
// relu on hidden layers, identity on the output layer.
struct MlpParams {
    std::vector<Matrix> weights;  // in×out
    std::vector<Matrix> biases;   // 1×out

    int input_dim() const { return weights.empty() ? 0 : weights.front().rows; }
    int output_dim() const { return weights.empty() ? 0 : weights.back().cols; }
    size_t n_layers() const { return weights.size(); }
    bool all_finite() const;
};

// Glorot-uniform weights (a = sqrt(6/(fan_in+fan_out))), zero biases.
MlpParams init_mlp(const std::vector<int>& widths, Rng& rng);

// Encoder f_θ plus contrastive head g_φ and cluster head h_ψ.
struct Model {
    EncoderConfig config;
    MlpParams encoder;           // θ
    MlpParams contrastive_head;  // φ
    MlpParams cluster_head;      // ψ — receives no gradient from any loss, stays at init
};

Model init_model(const EncoderConfig& config, Rng& rng);

// Leaf tensors over one parameter set, valid for one computation graph.
struct BoundMlp {
    std::vector<diff::TensorPtr> weights;
    std::vector<diff::TensorPtr> biases;
};

BoundMlp bind(const MlpParams& params, bool requires_grad);

// MLP forward pass; relu after every layer except the last.
diff::TensorPtr mlp_forward(const BoundMlp& mlp, const diff::TensorPtr& x);

diff::TensorPtr encode(const BoundMlp& encoder, const diff::TensorPtr& x);

// MLP forward followed by row L2-normalization; used for both heads.
diff::TensorPtr project(const BoundMlp& head, const diff::TensorPtr& h);

// Value-only forward passes for frozen-parameter use (clustering, evaluation).
Matrix encode_values(const MlpParams& encoder, const Matrix& x);
Matrix project_values(const MlpParams& head, const Matrix& h);

}  // namespace protofair
