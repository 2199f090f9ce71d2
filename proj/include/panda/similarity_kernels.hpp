#pragma once

#include <cstddef>
#include <span>

namespace panda::retrieval::kernels {

// Cosine scores of `query` against every row of a row-major `matrix`
// (rows = norms.size(), cols = query.size()). Zero-norm rows or a zero
// query give 0. Both variants accumulate each dot product left to right,
// so they produce bit-identical scores; the serial one is the reference.

void cosine_scores_serial(std::span<const double> matrix, std::span<const double> norms,
                          std::span<const double> query, std::span<double> out);

void cosine_scores_omp(std::span<const double> matrix, std::span<const double> norms,
                       std::span<const double> query, std::span<double> out);

/// Rows at or above this count use the OpenMP kernel.
inline constexpr std::size_t kParallelThreshold = 2048;

}  // namespace panda::retrieval::kernels
