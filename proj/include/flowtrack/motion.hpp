#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "flowtrack/geometry.hpp"

namespace flowtrack {

/// A queryable per-frame displacement field mapping frame t-1 positions to
/// displacements into frame t (forward flow). Three backings: a constant
/// (u,v), an affine form u = a*x + b*y + c, v = d*x + e*y + f, or a dense
/// row-major grid of (u,v) pairs sampled bilinearly.
class MotionField {
 public:
  enum class Kind { constant, affine, dense_grid };

  struct Constant {
    double u = 0.0, v = 0.0;
  };
  struct Affine {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0, f = 0.0;
  };
  struct DenseGrid {
    int width = 0, height = 0;
    std::vector<float> u;  // row-major, width*height each
    std::vector<float> v;
  };

  MotionField() : data_(Constant{}) {}

  static MotionField constant(double u, double v) {
    MotionField m;
    m.data_ = Constant{u, v};
    return m;
  }
  static MotionField affine(double a, double b, double c, double d, double e,
                            double f) {
    MotionField m;
    m.data_ = Affine{a, b, c, d, e, f};
    return m;
  }
  static MotionField dense(int width, int height, std::vector<float> u,
                           std::vector<float> v);

  Kind kind() const;
  const DenseGrid* grid() const { return std::get_if<DenseGrid>(&data_); }
  const Constant* as_constant() const { return std::get_if<Constant>(&data_); }

  /// Displacement at (x,y). Dense grids clamp the query into the valid grid
  /// domain and interpolate the four surrounding nodes bilinearly.
  std::array<double, 2> sample(double x, double y) const;

 private:
  std::variant<Constant, Affine, DenseGrid> data_;
};

inline MotionField identity_field() { return MotionField::constant(0.0, 0.0); }

/// Warp a box by sampling the field at its two corners. If warping inverts
/// the corner order, corners are swapped to keep the box valid.
BBox warp_bbox(const BBox& box, const MotionField& field);

enum class MotionMode { none, always_flow, flow_on_trigger };
enum class TriggerCounts { tracks, detections };

struct MotionPolicy {
  MotionMode mode = MotionMode::none;
  double trigger_ratio = 0.5;
  TriggerCounts trigger_counts = TriggerCounts::tracks;
};

/// Decide whether flow compensation is needed after an identity-motion
/// matching pass. flow_on_trigger fires iff n_unmatched > ratio * n_matched
/// (strict).
bool should_run_flow(int n_matched, int n_unmatched, const MotionPolicy& policy);

/// Per-frame provider of motion fields. field_for(t) describes the
/// transition from frame t-1 into frame t; implementations count fetches so
/// the fast variant's loading budget can be observed.
class MotionSource {
 public:
  virtual ~MotionSource() = default;
  MotionField field_for(int frame) {
    ++loads_;
    return fetch(frame);
  }
  long loads() const { return loads_; }

 protected:
  virtual MotionField fetch(int frame) = 0;

 private:
  long loads_ = 0;
};

class IdentityMotionSource final : public MotionSource {
 protected:
  MotionField fetch(int) override { return identity_field(); }
};

/// In-memory schedule; frames without an entry get the identity field.
class ScheduleMotionSource final : public MotionSource {
 public:
  explicit ScheduleMotionSource(std::map<int, MotionField> fields)
      : fields_(std::move(fields)) {}

 protected:
  MotionField fetch(int frame) override {
    auto it = fields_.find(frame);
    return it == fields_.end() ? identity_field() : it->second;
  }

 private:
  std::map<int, MotionField> fields_;
};

/// Directory of Middlebury %06d.flo files, read lazily per fetch.
class FloDirMotionSource final : public MotionSource {
 public:
  explicit FloDirMotionSource(std::string dir) : dir_(std::move(dir)) {}

 protected:
  MotionField fetch(int frame) override;

 private:
  std::string dir_;
};

/// Affine per-frame fields from a CSV sidecar (frame,a,b,c,d,e,f rows);
/// frames without a row get the identity field.
class AffineCsvMotionSource final : public MotionSource {
 public:
  explicit AffineCsvMotionSource(const std::string& csv_path);

 protected:
  MotionField fetch(int frame) override {
    auto it = fields_.find(frame);
    return it == fields_.end() ? identity_field() : it->second;
  }

 private:
  std::map<int, MotionField> fields_;
};

/// Picks the flow backing for a directory: flow.csv sidecar if present,
/// otherwise %06d.flo files.
std::unique_ptr<MotionSource> open_flow_dir(const std::string& dir);

}  // namespace flowtrack
