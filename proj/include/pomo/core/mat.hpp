#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace pomo {

// Dense row-major matrix. Deliberately minimal: the kernels in
// core/kernels.hpp do the heavy lifting.
template <typename Real>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<Real> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, Real(0)) {}

    static Mat zeros(int r, int c) { return Mat(r, c); }

    Real* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const Real* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    Real& at(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return data[static_cast<std::size_t>(r) * cols + c];
    }
    Real at(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return data[static_cast<std::size_t>(r) * cols + c];
    }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    void set_zero() { std::fill(data.begin(), data.end(), Real(0)); }

    void resize(int r, int c) {
        rows = r;
        cols = c;
        data.assign(static_cast<std::size_t>(r) * c, Real(0));
    }

    bool same_shape(const Mat& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool all_finite() const {
        for (Real v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

using MatF = Mat<float>;
using MatD = Mat<double>;

}  // namespace pomo
