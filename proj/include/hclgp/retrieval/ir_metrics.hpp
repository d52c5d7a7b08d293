#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace hclgp::retrieval {

struct IrMetrics {
  double mrr = 0;
  double map = 0;
  std::map<int, double> recall_at;  // k -> fraction of queries with a hit in top k
};

// MRR: mean of 1/rank of the first relevant id (0 when none is retrieved).
// AP: mean of precision@i over the positions i holding a relevant id (0 when
// none); MAP is the mean AP. R@k: fraction of queries with at least one
// relevant id among the first k. Throws Error when a query has no relevant
// ids, the input sizes differ, or a k is below 1.
IrMetrics ir_metrics(const std::vector<std::vector<std::string>>& rankings,
                     const std::vector<std::set<std::string>>& relevants,
                     const std::vector<int>& ks);

}  // namespace hclgp::retrieval
