#include "panda/similarity_kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "panda/error.hpp"

namespace panda::retrieval::kernels {

namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

inline double score_row(const double* row, double row_norm, const double* q, double q_norm, std::size_t dim) {
    if (row_norm == 0.0 || q_norm == 0.0) return 0.0;
    return std::clamp(dot(row, q, dim) / (row_norm * q_norm), -1.0, 1.0);
}

void check_shapes(std::span<const double> matrix, std::span<const double> norms, std::span<const double> query,
                  std::span<double> out) {
    if (out.size() != norms.size() || matrix.size() != norms.size() * query.size()) {
        throw DimMismatch(norms.size() * query.size(), matrix.size());
    }
}

}  // namespace

void cosine_scores_serial(std::span<const double> matrix, std::span<const double> norms,
                          std::span<const double> query, std::span<double> out) {
    check_shapes(matrix, norms, query, out);
    const std::size_t dim = query.size();
    const double q_norm = std::sqrt(dot(query.data(), query.data(), dim));
    for (std::size_t r = 0; r < norms.size(); ++r) {
        out[r] = score_row(matrix.data() + r * dim, norms[r], query.data(), q_norm, dim);
    }
}

void cosine_scores_omp(std::span<const double> matrix, std::span<const double> norms,
                       std::span<const double> query, std::span<double> out) {
    check_shapes(matrix, norms, query, out);
    const std::size_t dim = query.size();
    const double q_norm = std::sqrt(dot(query.data(), query.data(), dim));
    const auto rows = static_cast<std::ptrdiff_t>(norms.size());
    const double* m = matrix.data();
    const double* q = query.data();
    const double* n = norms.data();
    double* o = out.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        o[r] = score_row(m + static_cast<std::size_t>(r) * dim, n[r], q, q_norm, dim);
    }
}

}  // namespace panda::retrieval::kernels
