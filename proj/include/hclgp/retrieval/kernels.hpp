#pragma once

#include <cstddef>
#include <vector>

namespace hclgp::retrieval {

// Dot products of one query against n row-major rows of length d.
// Each row is summed in index order, so both forms agree bit for bit.
void cosine_scan(const double* rows, std::size_t n, std::size_t d,
                 const double* query, double* out);
void cosine_scan_serial(const double* rows, std::size_t n, std::size_t d,
                        const double* query, double* out);

// Full n x n similarity matrix of unit rows.
std::vector<double> pairwise_similarity(const double* rows, std::size_t n,
                                        std::size_t d);
std::vector<double> pairwise_similarity_serial(const double* rows, std::size_t n,
                                               std::size_t d);

}  // namespace hclgp::retrieval
