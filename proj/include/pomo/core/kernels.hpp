#pragma once

#include <cassert>

#include "pomo/core/mat.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

// Matrix kernels. Every kernel keeps the floating-point accumulation order of
// one output row independent of how many rows the call covers, so a row
// computed inside a large batch is bit-identical to the same row computed
// alone. The _omp variants partition output rows across threads and therefore
// produce bit-identical results to their serial counterparts.
namespace pomo::kernels {

// C = A * B, or C += A * B when `acc`.
template <typename Real>
void matmul_rows(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc,
                 int row_begin, int row_end) {
    assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
    const int n = b.cols;
    const int k_dim = a.cols;
    for (int i = row_begin; i < row_end; ++i) {
        Real* ci = c.row(i);
        if (!acc)
            for (int j = 0; j < n; ++j) ci[j] = Real(0);
        const Real* ai = a.row(i);
        for (int k = 0; k < k_dim; ++k) {
            const Real aik = ai[k];
            const Real* bk = b.row(k);
            for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
}

template <typename Real>
void matmul(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc = false) {
    matmul_rows(a, b, c, acc, 0, a.rows);
}

template <typename Real>
void matmul_omp(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc = false,
                int threads = 0) {
#if defined(_OPENMP)
    if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < a.rows; ++i) matmul_rows(a, b, c, acc, i, i + 1);
#else
    (void)threads;
    matmul(a, b, c, acc);
#endif
}

// C = A * B^T (dot products of A-rows with B-rows).
template <typename Real>
void matmul_nt_rows(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc,
                    int row_begin, int row_end) {
    assert(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows);
    const int k_dim = a.cols;
    for (int i = row_begin; i < row_end; ++i) {
        const Real* ai = a.row(i);
        Real* ci = c.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const Real* bj = b.row(j);
            Real dot = Real(0);
            for (int k = 0; k < k_dim; ++k) dot += ai[k] * bj[k];
            ci[j] = acc ? ci[j] + dot : dot;
        }
    }
}

template <typename Real>
void matmul_nt(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc = false) {
    matmul_nt_rows(a, b, c, acc, 0, a.rows);
}

template <typename Real>
void matmul_nt_omp(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc = false,
                   int threads = 0) {
#if defined(_OPENMP)
    if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < a.rows; ++i) matmul_nt_rows(a, b, c, acc, i, i + 1);
#else
    (void)threads;
    matmul_nt(a, b, c, acc);
#endif
}

// C = A^T * B. C has a.cols rows; accumulation over A-rows runs in ascending
// order for every output element in both the serial and the omp variant.
template <typename Real>
void matmul_tn_rows(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc,
                    int row_begin, int row_end) {
    assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
    const int n = b.cols;
    for (int p = row_begin; p < row_end; ++p) {
        Real* cp = c.row(p);
        if (!acc)
            for (int j = 0; j < n; ++j) cp[j] = Real(0);
        for (int i = 0; i < a.rows; ++i) {
            const Real aip = a.at(i, p);
            const Real* bi = b.row(i);
            for (int j = 0; j < n; ++j) cp[j] += aip * bi[j];
        }
    }
}

template <typename Real>
void matmul_tn(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc = false) {
    matmul_tn_rows(a, b, c, acc, 0, a.cols);
}

template <typename Real>
void matmul_tn_omp(const Mat<Real>& a, const Mat<Real>& b, Mat<Real>& c, bool acc = false,
                   int threads = 0) {
#if defined(_OPENMP)
    if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int p = 0; p < a.cols; ++p) matmul_tn_rows(a, b, c, acc, p, p + 1);
#else
    (void)threads;
    matmul_tn(a, b, c, acc);
#endif
}

}  // namespace pomo::kernels
