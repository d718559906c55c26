#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dftforge/util.hpp"

namespace dftforge {

// Row-major dense matrix of doubles. Small fixed-architecture workloads only;
// no views, no broadcasting.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    void require_shape(std::size_t r, std::size_t c, const char* what) const {
        if (rows != r || cols != c)
            throw Error(std::string(what) + ": expected " + std::to_string(r) + "x" +
                        std::to_string(c) + ", got " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }

    bool all_finite() const {
        for (double v : a)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const char* what) const {
        if (!all_finite()) throw Error(std::string(what) + ": non-finite value");
    }
};

// out = A (r x k) * B^T with B (c x k); i.e. out[i][j] = dot(A.row(i), B.row(j)).
// Row-times-row keeps both operands on cache-friendly strides.
void matmul_abt(const Mat& A, const Mat& B, Mat& out);

// out = A^T (k x r)^T... out[i][j] = sum_s A[s][i] * B[s][j]; A (n x r), B (n x c).
void matmul_atb(const Mat& A, const Mat& B, Mat& out);

// out = A (r x k) * B (k x c).
void matmul_ab(const Mat& A, const Mat& B, Mat& out);

} // namespace dftforge
