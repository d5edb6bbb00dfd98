#pragma once

#include <cstddef>
#include <vector>

namespace ldesim {

/// Compressed sparse row matrix. Column indices within a row are kept
/// sorted and duplicate-free (the builder merges duplicates by addition).
struct Csr {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;  // size rows + 1
    std::vector<int> col;
    std::vector<double> val;

    Csr() : row_ptr(1, 0) {}
    Csr(int r, int c) : rows(r), cols(c), row_ptr(static_cast<std::size_t>(r) + 1, 0) {}

    int nnz() const { return static_cast<int>(col.size()); }

    // y = A x
    void multiply(const double* x, double* y) const;
    // y += A^T x
    void multiply_transpose_add(const double* x, double* y) const;

    Csr transposed() const;
};

/// Triplet accumulator for building Csr matrices.
class CsrBuilder {
public:
    CsrBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}

    void add(int row, int col, double value);
    Csr build() const;

    int rows() const { return rows_; }
    int cols() const { return cols_; }

private:
    struct Entry {
        int row;
        int col;
        double val;
    };
    int rows_;
    int cols_;
    std::vector<Entry> entries_;
};

} // namespace ldesim
