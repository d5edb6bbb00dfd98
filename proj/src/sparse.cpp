#include "ldesim/sparse.hpp"

#include "ldesim/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace ldesim {

void Csr::multiply(const double* x, double* y) const {
    kernels::spmv(rows, row_ptr.data(), col.data(), val.data(), x, y);
}

void Csr::multiply_transpose_add(const double* x, double* y) const {
    // Row-major scatter; not vectorized (irregular writes).
    for (int r = 0; r < rows; ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) y[col[k]] += val[k] * xr;
    }
}

Csr Csr::transposed() const {
    Csr t(cols, rows);
    t.col.resize(col.size());
    t.val.resize(val.size());
    std::vector<int> count(static_cast<std::size_t>(cols), 0);
    for (int k = 0; k < nnz(); ++k) count[col[k]]++;
    for (int c = 0; c < cols; ++c) t.row_ptr[c + 1] = t.row_ptr[c] + count[c];
    std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int r = 0; r < rows; ++r) {
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            int pos = next[col[k]]++;
            t.col[pos] = r;
            t.val[pos] = val[k];
        }
    }
    return t;
}

void CsrBuilder::add(int row, int col, double value) {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        throw std::out_of_range("CsrBuilder::add: index out of range");
    if (value == 0.0) return;
    entries_.push_back({row, col, value});
}

Csr CsrBuilder::build() const {
    std::vector<Entry> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    Csr m(rows_, cols_);
    m.col.reserve(sorted.size());
    m.val.reserve(sorted.size());
    std::size_t i = 0;
    for (int r = 0; r < rows_; ++r) {
        while (i < sorted.size() && sorted[i].row == r) {
            int c = sorted[i].col;
            double v = 0.0;
            while (i < sorted.size() && sorted[i].row == r && sorted[i].col == c) {
                v += sorted[i].val;
                ++i;
            }
            if (v != 0.0) {
                m.col.push_back(c);
                m.val.push_back(v);
            }
        }
        m.row_ptr[r + 1] = static_cast<int>(m.col.size());
    }
    return m;
}

} // namespace ldesim
