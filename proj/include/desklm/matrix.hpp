#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace desklm {

// Dense row-major double matrix. Value semantics; all hot paths below work
// on raw pointers so the compiler can vectorize.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    std::size_t size() const { return a.size(); }
    bool empty() const { return a.empty(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
};

inline bool all_finite(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

inline bool all_finite(const Matrix& m) { return all_finite(m.a.data(), m.a.size()); }

// C (m x n) += A (m x k) * B^T where B is (n x k). Eight independent
// accumulator chains per j-block keep the FMA pipeline full.
inline void matmul_nt(const double* A, const double* B, double* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* a = A + static_cast<std::size_t>(i) * k;
        double* c = C + static_cast<std::size_t>(i) * n;
        int j = 0;
        for (; j + 8 <= n; j += 8) {
            const double* b0 = B + static_cast<std::size_t>(j + 0) * k;
            const double* b1 = B + static_cast<std::size_t>(j + 1) * k;
            const double* b2 = B + static_cast<std::size_t>(j + 2) * k;
            const double* b3 = B + static_cast<std::size_t>(j + 3) * k;
            const double* b4 = B + static_cast<std::size_t>(j + 4) * k;
            const double* b5 = B + static_cast<std::size_t>(j + 5) * k;
            const double* b6 = B + static_cast<std::size_t>(j + 6) * k;
            const double* b7 = B + static_cast<std::size_t>(j + 7) * k;
            double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
            for (int t = 0; t < k; ++t) {
                const double av = a[t];
                s0 += av * b0[t];
                s1 += av * b1[t];
                s2 += av * b2[t];
                s3 += av * b3[t];
                s4 += av * b4[t];
                s5 += av * b5[t];
                s6 += av * b6[t];
                s7 += av * b7[t];
            }
            c[j + 0] += s0;
            c[j + 1] += s1;
            c[j + 2] += s2;
            c[j + 3] += s3;
            c[j + 4] += s4;
            c[j + 5] += s5;
            c[j + 6] += s6;
            c[j + 7] += s7;
        }
        for (; j < n; ++j) {
            const double* b = B + static_cast<std::size_t>(j) * k;
            double s = 0;
            for (int t = 0; t < k; ++t) s += a[t] * b[t];
            c[j] += s;
        }
    }
}

// C (m x n) += A (m x k) * B (k x n).
inline void matmul_nn(const double* A, const double* B, double* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        double* c = C + static_cast<std::size_t>(i) * n;
        const double* a = A + static_cast<std::size_t>(i) * k;
        for (int t = 0; t < k; ++t) {
            const double av = a[t];
            const double* b = B + static_cast<std::size_t>(t) * n;
            for (int j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

// C (k x n) += A^T * B where A is (m x k), B is (m x n). Used for weight
// gradients: dW += dZ^T * X without materializing the transpose.
inline void matmul_tn(const double* A, const double* B, double* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* a = A + static_cast<std::size_t>(i) * k;
        const double* b = B + static_cast<std::size_t>(i) * n;
        for (int t = 0; t < k; ++t) {
            const double av = a[t];
            double* c = C + static_cast<std::size_t>(t) * n;
            for (int j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

inline void matmul_nt(const Matrix& A, const Matrix& B, Matrix& C) {
    if (A.cols != B.cols || C.rows != A.rows || C.cols != B.rows)
        throw std::invalid_argument("matmul_nt: shape mismatch");
    matmul_nt(A.a.data(), B.a.data(), C.a.data(), A.rows, A.cols, B.rows);
}

inline void matmul_nn(const Matrix& A, const Matrix& B, Matrix& C) {
    if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols)
        throw std::invalid_argument("matmul_nn: shape mismatch");
    matmul_nn(A.a.data(), B.a.data(), C.a.data(), A.rows, A.cols, B.cols);
}

inline void matmul_tn(const Matrix& A, const Matrix& B, Matrix& C) {
    if (A.rows != B.rows || C.rows != A.cols || C.cols != B.cols)
        throw std::invalid_argument("matmul_tn: shape mismatch");
    matmul_tn(A.a.data(), B.a.data(), C.a.data(), A.rows, A.cols, B.cols);
}

inline double dot(const double* a, const double* b, int n) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace desklm
