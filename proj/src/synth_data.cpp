#include "protofair/synth_data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace protofair {

namespace {

Split sample_split(const DatasetSpec& spec, int n, double rho, Rng& rng) {
    Split split;
    split.x = Matrix(n, spec.input_dim);
    split.y.resize(static_cast<size_t>(n));
    split.s.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int y = rng.uniform() < 0.5 ? 0 : 1;
        const int s = rng.uniform() < rho ? y : 1 - y;
        // content mean on axis y, sensitive offset ±β on axis 2
        split.x.at(i, y) += spec.content_sep;
        split.x.at(i, 2) += spec.bias_strength * (s == 1 ? 1.0 : -1.0);
        for (int c = 0; c < spec.input_dim; ++c) split.x.at(i, c) += rng.normal(0.0, spec.noise_sigma);
        split.y[static_cast<size_t>(i)] = y;
        split.s[static_cast<size_t>(i)] = s;
    }
    return split;
}

}  // namespace

void DatasetSpec::validate() const {
    if (input_dim < 3)
        throw ConfigError("input_dim must be >= 3 (class axes plus sensitive axis), got " +
                          std::to_string(input_dim));
    if (n_samples < 20) throw ConfigError("n_samples must be >= 20, got " + std::to_string(n_samples));
    if (n_content_classes != 2)
        throw ConfigError("n_content_classes must be 2 (binary targets), got " + std::to_string(n_content_classes));
    if (!(content_sep > 0.0)) throw ConfigError("content_sep must be > 0");
    if (bias_strength < 0.0) throw ConfigError("bias_strength must be >= 0");
    if (group_corr < 0.5 || group_corr > 1.0)
        throw ConfigError("group_corr must be in [0.5, 1], got " + std::to_string(group_corr));
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
}

void AugmentConfig::validate() const {
    if (sigma < 0.0) throw ConfigError("aug_sigma must be >= 0");
    if (p_drop < 0.0 || p_drop > 1.0) throw ConfigError("aug_dropout must be in [0, 1]");
}

Dataset generate(const DatasetSpec& spec) {
    spec.validate();
    Rng rng(Rng::derive(spec.seed, "data"));
    const int n_train = static_cast<int>(std::lround(spec.n_samples * 0.70));
    const int n_val = static_cast<int>(std::lround(spec.n_samples * 0.15));
    const int n_test = spec.n_samples - n_train - n_val;
    Dataset ds;
    ds.train = sample_split(spec, n_train, spec.group_corr, rng);
    ds.val = sample_split(spec, n_val, 0.5, rng);
    ds.test = sample_split(spec, n_test, 0.5, rng);
    return ds;
}

std::pair<std::vector<double>, std::vector<double>> augment_sample(std::span<const double> x,
                                                                   const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    std::pair<std::vector<double>, std::vector<double>> views;
    for (auto* view : {&views.first, &views.second}) {
        view->resize(x.size());
        for (size_t c = 0; c < x.size(); ++c) (*view)[c] = x[c] + rng.normal(0.0, cfg.sigma);
        for (size_t c = 0; c < x.size(); ++c)
            if (rng.uniform() < cfg.p_drop) (*view)[c] = 0.0;
    }
    return views;
}

std::pair<Matrix, Matrix> augment_batch(const Matrix& x, const AugmentConfig& cfg, Rng& rng) {
    std::pair<Matrix, Matrix> out{Matrix(x.rows, x.cols), Matrix(x.rows, x.cols)};
    for (int r = 0; r < x.rows; ++r) {
        auto [v1, v2] = augment_sample(x.row(r), cfg, rng);
        std::copy(v1.begin(), v1.end(), out.first.row(r).data());
        std::copy(v2.begin(), v2.end(), out.second.row(r).data());
    }
    return out;
}

Split load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");

    // header: x0,...,x{D-1},y,s
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
    }
    if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "s")
        throw DataError(path + ": header must be x0,...,x{D-1},y,s");
    const int dim = static_cast<int>(header.size()) - 2;
    for (int c = 0; c < dim; ++c)
        if (header[static_cast<size_t>(c)] != "x" + std::to_string(c))
            throw DataError(path + ": unexpected header column '" + header[static_cast<size_t>(c)] + "'");

    std::vector<Sample> samples;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Sample sample;
        sample.x.reserve(static_cast<size_t>(dim));
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (static_cast<int>(fields.size()) != dim + 2)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim + 2) +
                            " fields, got " + std::to_string(fields.size()));
        for (int c = 0; c < dim; ++c) {
            const std::string& f = fields[static_cast<size_t>(c)];
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
                throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
            sample.x.push_back(v);
        }
        for (int lbl = 0; lbl < 2; ++lbl) {
            const std::string& f = fields[static_cast<size_t>(dim + lbl)];
            const char* name = lbl == 0 ? "y" : "s";
            if (f != "0" && f != "1")
                throw DataError(path + ":" + std::to_string(line_no) + ": " + name + " must be 0 or 1, got '" + f +
                                "'");
            (lbl == 0 ? sample.y : sample.s) = f == "1" ? 1 : 0;
        }
        samples.push_back(std::move(sample));
    }

    Split split;
    split.x = Matrix(static_cast<int>(samples.size()), dim);
    for (size_t i = 0; i < samples.size(); ++i) {
        std::copy(samples[i].x.begin(), samples[i].x.end(), split.x.row(static_cast<int>(i)).data());
        split.y.push_back(samples[i].y);
        split.s.push_back(samples[i].s);
    }
    return split;
}

void save_csv(const Split& split, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    for (int c = 0; c < split.x.cols; ++c) out << "x" << c << ",";
    out << "y,s\n";
    char buf[32];
    for (int r = 0; r < split.x.rows; ++r) {
        for (int c = 0; c < split.x.cols; ++c) {
            std::snprintf(buf, sizeof buf, "%.12g", split.x.at(r, c));
            out << buf << ',';
        }
        out << split.y[static_cast<size_t>(r)] << ',' << split.s[static_cast<size_t>(r)] << '\n';
    }
}

}  // namespace protofair
