#include "hclgp/retrieval/ir_metrics.hpp"

#include "hclgp/core/error.hpp"

namespace hclgp::retrieval {

IrMetrics ir_metrics(const std::vector<std::vector<std::string>>& rankings,
                     const std::vector<std::set<std::string>>& relevants,
                     const std::vector<int>& ks) {
  if (rankings.size() != relevants.size()) {
    throw Error("rankings and relevance sets differ in length");
  }
  for (int k : ks) {
    if (k < 1) throw Error("R@k needs k >= 1");
  }
  IrMetrics m;
  for (int k : ks) m.recall_at[k] = 0;
  if (rankings.empty()) return m;

  std::map<int, int> hits_within;
  double rr_sum = 0;
  double ap_sum = 0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const auto& relevant = relevants[q];
    if (relevant.empty()) {
      throw Error("query " + std::to_string(q) + " has an empty relevant set");
    }
    int first = 0;
    int hits = 0;
    double precision_sum = 0;
    const auto& ranked = rankings[q];
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (!relevant.count(ranked[i])) continue;
      const int rank = static_cast<int>(i) + 1;
      if (first == 0) first = rank;
      ++hits;
      precision_sum += static_cast<double>(hits) / rank;
    }
    if (first > 0) rr_sum += 1.0 / first;
    if (hits > 0) ap_sum += precision_sum / hits;
    for (int k : ks) {
      if (first > 0 && first <= k) ++hits_within[k];
    }
  }
  const double n = static_cast<double>(rankings.size());
  m.mrr = rr_sum / n;
  m.map = ap_sum / n;
  for (int k : ks) m.recall_at[k] = hits_within[k] / n;
  return m;
}

}  // namespace hclgp::retrieval
