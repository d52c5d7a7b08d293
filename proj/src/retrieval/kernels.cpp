#include "hclgp/retrieval/kernels.hpp"

#include <algorithm>

namespace hclgp::retrieval {

namespace {

inline double dot(const double* a, const double* b, std::size_t d) {
  double s = 0;
  for (std::size_t j = 0; j < d; ++j) s += a[j] * b[j];
  return std::clamp(s, -1.0, 1.0);
}

}  // namespace

void cosine_scan(const double* rows, std::size_t n, std::size_t d,
                 const double* query, double* out) {
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) out[i] = dot(rows + i * d, query, d);
}

void cosine_scan_serial(const double* rows, std::size_t n, std::size_t d,
                        const double* query, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = dot(rows + i * d, query, d);
}

std::vector<double> pairwise_similarity(const double* rows, std::size_t n,
                                        std::size_t d) {
  std::vector<double> out(n * n);
  const long count = static_cast<long>(n);
  // Rows shrink towards the end; dynamic scheduling balances the triangle.
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < count; ++i) {
    out[i * n + i] = dot(rows + i * d, rows + i * d, d);
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = dot(rows + i * d, rows + j * d, d);
      out[i * n + j] = s;
      out[j * n + i] = s;
    }
  }
  return out;
}

std::vector<double> pairwise_similarity_serial(const double* rows, std::size_t n,
                                               std::size_t d) {
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = dot(rows + i * d, rows + i * d, d);
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = dot(rows + i * d, rows + j * d, d);
      out[i * n + j] = s;
      out[j * n + i] = s;
    }
  }
  return out;
}

}  // namespace hclgp::retrieval
