#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace nlfa {

/// Dense row-major matrix of doubles. Plain value type, no views.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return v_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return v_[r * cols_ + c];
    }

    double* row_ptr(std::size_t r) { return v_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return v_.data() + r * cols_; }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    bool operator==(const Mat&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

/// Dense row-major binary mask, entries restricted to {0, 1}.
class MaskMat {
public:
    MaskMat() = default;
    MaskMat(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    std::uint8_t& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return v_[r * cols_ + c];
    }
    std::uint8_t operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return v_[r * cols_ + c];
    }

    std::size_t count_ones() const {
        std::size_t n = 0;
        for (auto b : v_) n += b;
        return n;
    }

    std::vector<std::uint8_t>& data() { return v_; }
    const std::vector<std::uint8_t>& data() const { return v_; }

    bool operator==(const MaskMat&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::uint8_t> v_;
};

}  // namespace nlfa
