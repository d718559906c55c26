#include "dftforge/tensor.hpp"

namespace dftforge {

void matmul_abt(const Mat& A, const Mat& B, Mat& out) {
    if (A.cols != B.cols) throw Error("matmul_abt: inner dimension mismatch");
    out = Mat(A.rows, B.rows);
    const std::size_t k = A.cols;
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        double* oi = out.row(i);
        for (std::size_t j = 0; j < B.rows; ++j) {
            const double* bj = B.row(j);
            double acc = 0.0;
            for (std::size_t s = 0; s < k; ++s) acc += ai[s] * bj[s];
            oi[j] = acc;
        }
    }
}

void matmul_atb(const Mat& A, const Mat& B, Mat& out) {
    if (A.rows != B.rows) throw Error("matmul_atb: outer dimension mismatch");
    out = Mat(A.cols, B.cols);
    for (std::size_t s = 0; s < A.rows; ++s) {
        const double* as = A.row(s);
        const double* bs = B.row(s);
        for (std::size_t i = 0; i < A.cols; ++i) {
            const double f = as[i];
            if (f == 0.0) continue;
            double* oi = out.row(i);
            for (std::size_t j = 0; j < B.cols; ++j) oi[j] += f * bs[j];
        }
    }
}

void matmul_ab(const Mat& A, const Mat& B, Mat& out) {
    if (A.cols != B.rows) throw Error("matmul_ab: inner dimension mismatch");
    out = Mat(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* ai = A.row(i);
        double* oi = out.row(i);
        for (std::size_t s = 0; s < A.cols; ++s) {
            const double f = ai[s];
            if (f == 0.0) continue;
            const double* bs = B.row(s);
            for (std::size_t j = 0; j < B.cols; ++j) oi[j] += f * bs[j];
        }
    }
}

} // namespace dftforge
