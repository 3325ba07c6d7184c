#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "protofair/error.hpp"

namespace protofair {

// Dense row-major matrix of doubles. The plain value type underneath the
// autodiff tensors; also used directly wherever no gradients are involved.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rws) {
        Matrix m(static_cast<int>(rws.size()),
                 rws.size() ? static_cast<int>(rws.begin()->size()) : 0);
        int r = 0;
        for (const auto& row : rws) {
            if (static_cast<int>(row.size()) != m.cols)
                throw ContractError("Matrix::from_rows: ragged rows");
            int c = 0;
            for (double v : row) m.at(r, c++) = v;
            ++r;
        }
        return m;
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }

    size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double row_norm(const Matrix& m, int r) {
    double s = 0.0;
    for (double v : m.row(r)) s += v * v;
    return std::sqrt(s);
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

}  // namespace protofair
