#include "flowtrack/motion.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "flowtrack/io.hpp"

namespace flowtrack {

MotionField MotionField::dense(int width, int height, std::vector<float> u,
                               std::vector<float> v) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("MotionField::dense: non-positive grid size");
  }
  const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
  if (u.size() != n || v.size() != n) {
    throw std::invalid_argument("MotionField::dense: payload size mismatch");
  }
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i])) {
      throw std::invalid_argument("MotionField::dense: non-finite flow value");
    }
  }
  MotionField m;
  m.data_ = DenseGrid{width, height, std::move(u), std::move(v)};
  return m;
}

MotionField::Kind MotionField::kind() const {
  if (std::holds_alternative<Constant>(data_)) return Kind::constant;
  if (std::holds_alternative<Affine>(data_)) return Kind::affine;
  return Kind::dense_grid;
}

std::array<double, 2> MotionField::sample(double x, double y) const {
  if (const auto* c = std::get_if<Constant>(&data_)) {
    return {c->u, c->v};
  }
  if (const auto* a = std::get_if<Affine>(&data_)) {
    return {a->a * x + a->b * y + a->c, a->d * x + a->e * y + a->f};
  }
  const auto& g = std::get<DenseGrid>(data_);
  // Clamp into the node range so boxes at the image border stay warpable.
  x = std::clamp(x, 0.0, static_cast<double>(g.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(g.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, g.width - 1);
  const int y1 = std::min(y0 + 1, g.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  auto at = [&](const std::vector<float>& p, int xi, int yi) {
    return static_cast<double>(p[static_cast<size_t>(yi) * g.width + xi]);
  };
  auto lerp2 = [&](const std::vector<float>& p) {
    const double top = at(p, x0, y0) * (1.0 - fx) + at(p, x1, y0) * fx;
    const double bot = at(p, x0, y1) * (1.0 - fx) + at(p, x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
  };
  return {lerp2(g.u), lerp2(g.v)};
}

BBox warp_bbox(const BBox& box, const MotionField& field) {
  const auto d1 = field.sample(box.x1, box.y1);
  const auto d2 = field.sample(box.x2, box.y2);
  double nx1 = box.x1 + d1[0];
  double ny1 = box.y1 + d1[1];
  double nx2 = box.x2 + d2[0];
  double ny2 = box.y2 + d2[1];
  if (nx2 < nx1) std::swap(nx1, nx2);
  if (ny2 < ny1) std::swap(ny1, ny2);
  return BBox(nx1, ny1, nx2, ny2);
}

bool should_run_flow(int n_matched, int n_unmatched, const MotionPolicy& policy) {
  switch (policy.mode) {
    case MotionMode::none:
      return false;
    case MotionMode::always_flow:
      return true;
    case MotionMode::flow_on_trigger:
      return static_cast<double>(n_unmatched) >
             policy.trigger_ratio * static_cast<double>(n_matched);
  }
  return false;
}

MotionField FloDirMotionSource::fetch(int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.flo", frame);
  return read_flo((std::filesystem::path(dir_) / name).string());
}

AffineCsvMotionSource::AffineCsvMotionSource(const std::string& csv_path) {
  fields_ = read_flow_csv(csv_path);
}

std::unique_ptr<MotionSource> open_flow_dir(const std::string& dir) {
  const auto csv = std::filesystem::path(dir) / "flow.csv";
  if (std::filesystem::exists(csv)) {
    return std::make_unique<AffineCsvMotionSource>(csv.string());
  }
  return std::make_unique<FloDirMotionSource>(dir);
}

}  // namespace flowtrack
