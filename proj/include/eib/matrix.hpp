// matrix.hpp
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eib/error.hpp"

namespace eib {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.front().size();
        Matrix m(r, c);
        for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) fail(ErrorKind::DimensionMismatch, "ragged matrix rows");
            for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    [[nodiscard]] std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }

    [[nodiscard]] std::vector<std::vector<double>> to_rows() const {
        std::vector<std::vector<double>> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
        return out;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace eib
