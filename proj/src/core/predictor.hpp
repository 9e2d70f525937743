#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "core/plane.hpp"
#include "core/volume.hpp"

namespace kswap {

// Which target slice a plane came from. Content-based predictors ignore it;
// the precomputed predictor uses it to look the answer up.
struct SliceContext {
  std::string_view volume_id;
  std::size_t slice_index = 0;
};

// Downstream model: H x W intensity plane in, H x W probability plane out.
// Implementations must be pure and callable from several threads at once.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual Plane predict(const Plane& slice, const SliceContext& context) const = 0;
};

// Calls the predictor and enforces its output contract (shape, [0,1], finite).
Plane checked_predict(const Predictor& predictor, const Plane& slice, const SliceContext& context);

struct BaselineSegmenterParams {
  double threshold = 0.35;
  int opening_radius = 1;
  bool keep_largest_component = true;
  double softness = 0.05;

  void validate() const;
};

// Logistic soft threshold followed by opening and largest-component cleanup.
Plane baseline_predict(const Plane& slice, const BaselineSegmenterParams& params);

class BaselinePredictor final : public Predictor {
 public:
  explicit BaselinePredictor(BaselineSegmenterParams params = {});
  std::string name() const override { return "baseline"; }
  Plane predict(const Plane& slice, const SliceContext& context) const override;
  const BaselineSegmenterParams& params() const { return params_; }

 private:
  BaselineSegmenterParams params_;
};

Plane precomputed_predict(std::size_t slice_index, const Volume& store);

// Serves stored probability maps. Built from one `.vol` (used for every
// target) or a directory of `<target_id>_prob.vol` files.
class PrecomputedPredictor final : public Predictor {
 public:
  explicit PrecomputedPredictor(Volume store);
  explicit PrecomputedPredictor(std::map<std::string, Volume> stores);
  static PrecomputedPredictor from_path(const std::filesystem::path& path);

  std::string name() const override { return "precomputed"; }
  Plane predict(const Plane& slice, const SliceContext& context) const override;

 private:
  std::optional<Volume> single_;
  std::map<std::string, Volume> by_id_;
};

// `baseline` or `precomputed:<path>`.
std::unique_ptr<Predictor> make_predictor(std::string_view spec,
                                          const BaselineSegmenterParams& baseline = {});

namespace morphology {

// Binary planes hold 0/1 bytes. Out-of-bounds neighbours are ignored.
std::vector<unsigned char> erode(const std::vector<unsigned char>& img, std::size_t rows,
                                 std::size_t cols, int radius);
std::vector<unsigned char> dilate(const std::vector<unsigned char>& img, std::size_t rows,
                                  std::size_t cols, int radius);
// Largest 4-connected component; ties go to the component met first in raster order.
std::vector<unsigned char> largest_component(const std::vector<unsigned char>& img,
                                             std::size_t rows, std::size_t cols);

}  // namespace morphology

}  // namespace kswap
