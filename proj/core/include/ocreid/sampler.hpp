#pragma once

#include <cstdint>
#include <vector>

#include "ocreid/dataset.hpp"

namespace ocreid {

struct BatchPlan {
  int P = 0;
  int K = 0;
  std::vector<std::vector<int>> batch_indices;  // each of length P*K
};

// Plans one epoch of PK batches over the train split: every batch holds P
// distinct identities with K instances each. Identities with fewer than K
// train samples are drawn with replacement so the batch shape stays fixed.
// Deterministic in (index, P, K, seed).
BatchPlan make_pk_sampler(const DatasetIndex& index, int P, int K, uint64_t seed);

}  // namespace ocreid
