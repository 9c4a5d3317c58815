#ifndef EGOFILTER_MAT_HPP
#define EGOFILTER_MAT_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace egofilter {

// Dense row-major matrix. Rows index frequency bins, columns index frames
// throughout this project, so a row is contiguous along time.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return v.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<size_t>(r) * cols; }

    size_t size() const { return v.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline void require_same_shape(const Mat& a, const Mat& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace egofilter

#endif
