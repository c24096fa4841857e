#include "ocreid/sampler.hpp"

#include <algorithm>
#include <map>

#include "ocreid/common.hpp"

namespace ocreid {

BatchPlan make_pk_sampler(const DatasetIndex& index, int P, int K, uint64_t seed) {
  if (P <= 0 || K <= 0) {
    throw ConfigError("PK sampler requires P >= 1 and K >= 1 (got P=" + std::to_string(P) +
                      ", K=" + std::to_string(K) + ")");
  }

  std::map<int, std::vector<int>> by_identity;
  size_t num_train = 0;
  for (size_t i = 0; i < index.records.size(); ++i) {
    if (index.records[i].split == Split::train) {
      by_identity[index.records[i].identity_id].push_back(static_cast<int>(i));
      ++num_train;
    }
  }
  const int num_ids = static_cast<int>(by_identity.size());
  if (P > num_ids) {
    throw ConfigError("P=" + std::to_string(P) + " exceeds the " + std::to_string(num_ids) +
                      " identities with train samples");
  }

  std::vector<int> identities;
  identities.reserve(by_identity.size());
  for (auto& [id, _] : by_identity) identities.push_back(id);

  Rng rng = make_rng(mix_seed(seed, "pk-sampler"));

  // Per-identity shuffled circular queues; replacement happens naturally when
  // a queue wraps before K fresh samples are available.
  std::map<int, std::vector<int>> queues;
  std::map<int, size_t> cursor;
  for (auto& [id, samples] : by_identity) {
    std::vector<int> q = samples;
    std::shuffle(q.begin(), q.end(), rng);
    queues[id] = std::move(q);
    cursor[id] = 0;
  }

  const size_t batch_size = static_cast<size_t>(P) * K;
  const size_t num_batches = std::max<size_t>(1, num_train / batch_size);

  BatchPlan plan;
  plan.P = P;
  plan.K = K;
  plan.batch_indices.reserve(num_batches);
  for (size_t b = 0; b < num_batches; ++b) {
    std::shuffle(identities.begin(), identities.end(), rng);
    std::vector<int> batch;
    batch.reserve(batch_size);
    for (int p = 0; p < P; ++p) {
      const int id = identities[static_cast<size_t>(p)];
      auto& q = queues[id];
      size_t& cur = cursor[id];
      for (int k = 0; k < K; ++k) {
        if (cur == q.size()) {
          std::shuffle(q.begin(), q.end(), rng);
          cur = 0;
        }
        batch.push_back(q[cur++]);
      }
    }
    plan.batch_indices.push_back(std::move(batch));
  }
  return plan;
}

}  // namespace ocreid
