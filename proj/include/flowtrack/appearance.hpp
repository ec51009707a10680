#pragma once

#include <cstddef>
#include <vector>

#include "flowtrack/geometry.hpp"

namespace flowtrack {

/// Fixed-length appearance descriptor, L2-normalized at construction.
/// Zero or non-finite input vectors are rejected.
class Embedding {
 public:
  explicit Embedding(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  size_t dim() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// 1 - dot(a,b) for unit vectors; in [0,2]. Dimension mismatch signals
/// corrupt embedding input.
double cosine_distance(const Embedding& a, const Embedding& b);

/// Track-side appearance memory. ema_alpha = 0 keeps the latest observation,
/// ema_alpha = 1 freezes the first one.
struct TrackAppearance {
  Embedding current;
  double ema_alpha = 0.0;
};

/// current <- normalize(alpha * current + (1 - alpha) * obs). A degenerate
/// blend (near-zero vector) falls back to the observation.
TrackAppearance update_track_appearance(const TrackAppearance& mem,
                                        const Embedding& obs);

/// Detection embeddings keyed by the embedding_id stored on each Detection.
struct EmbeddingTable {
  int dim = 0;
  std::vector<Embedding> entries;

  const Embedding* get(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= entries.size()) return nullptr;
    return &entries[static_cast<size_t>(id)];
  }
};

}  // namespace flowtrack
