#include "flowtrack/appearance.hpp"

#include <cmath>
#include <stdexcept>

namespace flowtrack {

namespace {
void normalize_inplace(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("Embedding: non-finite component");
    }
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm < 1e-12) {
    throw std::invalid_argument("Embedding: zero vector");
  }
  for (double& x : v) x /= norm;
}
}  // namespace

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("Embedding: empty vector");
  }
  normalize_inplace(values_);
}

double cosine_distance(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("cosine_distance: dimension mismatch");
  }
  double dot = 0.0;
  for (size_t i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
  return 1.0 - dot;
}

TrackAppearance update_track_appearance(const TrackAppearance& mem,
                                        const Embedding& obs) {
  if (mem.current.dim() != obs.dim()) {
    throw std::invalid_argument("update_track_appearance: dimension mismatch");
  }
  const double a = mem.ema_alpha;
  std::vector<double> blend(obs.dim());
  double sq = 0.0;
  for (size_t i = 0; i < obs.dim(); ++i) {
    blend[i] = a * mem.current.values()[i] + (1.0 - a) * obs.values()[i];
    sq += blend[i] * blend[i];
  }
  if (sq < 1e-20) {
    return TrackAppearance{obs, a};
  }
  return TrackAppearance{Embedding(std::move(blend)), a};
}

}  // namespace flowtrack
