#include "protofair/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace protofair {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    const auto& data = j.at("data");
    if (data.size() != m.size()) throw DataError("checkpoint: matrix payload size mismatch");
    m.data = data.get<std::vector<double>>();
    return m;
}

json mlp_to_json(const MlpParams& p) {
    json layers = json::array();
    for (size_t l = 0; l < p.weights.size(); ++l)
        layers.push_back(json{{"weight", matrix_to_json(p.weights[l])}, {"bias", matrix_to_json(p.biases[l])}});
    return layers;
}

MlpParams mlp_from_json(const json& j) {
    MlpParams p;
    for (const auto& layer : j) {
        p.weights.push_back(matrix_from_json(layer.at("weight")));
        p.biases.push_back(matrix_from_json(layer.at("bias")));
    }
    return p;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const auto& cfg = ckpt.model.config;
    json j{{"version", kVersion},
           {"encoder_config",
            {{"input_dim", cfg.input_dim},
             {"encoder_hidden", cfg.encoder_hidden},
             {"encoder_out_dim", cfg.encoder_out_dim},
             {"head_hidden", cfg.head_hidden},
             {"embed_dim", cfg.embed_dim}}},
           {"encoder", mlp_to_json(ckpt.model.encoder)},
           {"contrastive_head", mlp_to_json(ckpt.model.contrastive_head)},
           {"cluster_head", mlp_to_json(ckpt.model.cluster_head)}};
    if (ckpt.bank) {
        j["prototypes"] = {{"k", ckpt.bank->k},
                           {"momentum", ckpt.bank->momentum},
                           {"reinit_period", ckpt.bank->reinit_period},
                           {"last_init_epoch", ckpt.bank->last_init_epoch},
                           {"initialized", ckpt.bank->initialized},
                           {"protos", matrix_to_json(ckpt.bank->protos)}};
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path);
    out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("checkpoint " + path + ": " + e.what());
    }
    try {
        if (j.at("version").get<int>() != kVersion)
            throw DataError("checkpoint " + path + ": unsupported version");
        Checkpoint ckpt;
        const auto& cj = j.at("encoder_config");
        ckpt.model.config.input_dim = cj.at("input_dim").get<int>();
        ckpt.model.config.encoder_hidden = cj.at("encoder_hidden").get<std::vector<int>>();
        ckpt.model.config.encoder_out_dim = cj.at("encoder_out_dim").get<int>();
        ckpt.model.config.head_hidden = cj.at("head_hidden").get<int>();
        ckpt.model.config.embed_dim = cj.at("embed_dim").get<int>();
        ckpt.model.encoder = mlp_from_json(j.at("encoder"));
        ckpt.model.contrastive_head = mlp_from_json(j.at("contrastive_head"));
        ckpt.model.cluster_head = mlp_from_json(j.at("cluster_head"));
        if (j.contains("prototypes")) {
            const auto& pj = j.at("prototypes");
            PrototypeBank bank;
            bank.k = pj.at("k").get<int>();
            bank.momentum = pj.at("momentum").get<double>();
            bank.reinit_period = pj.at("reinit_period").get<int>();
            bank.last_init_epoch = pj.at("last_init_epoch").get<int>();
            bank.initialized = pj.at("initialized").get<bool>();
            bank.protos = matrix_from_json(pj.at("protos"));
            ckpt.bank = std::move(bank);
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw DataError("checkpoint " + path + ": " + e.what());
    }
}

}  // namespace protofair
