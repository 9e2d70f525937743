#include "core/predictor.hpp"

#include <cmath>
#include <vector>

#include "core/error.hpp"

namespace kswap {

namespace fs = std::filesystem;

Plane checked_predict(const Predictor& predictor, const Plane& slice, const SliceContext& context) {
  Plane out = predictor.predict(slice, context);
  require(out.same_shape(slice), ErrorCode::ShapeMismatch,
          "predictor '" + predictor.name() + "' returned " + out.shape_string() + " for a " +
              slice.shape_string() + " slice");
  for (double v : out.values)
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::Invariant,
            "predictor '" + predictor.name() + "' produced a value outside [0,1]");
  return out;
}

void BaselineSegmenterParams::validate() const {
  require(threshold > 0.0 && threshold < 1.0, ErrorCode::InvalidArgument,
          "baseline threshold must lie in (0,1)");
  require(opening_radius >= 0, ErrorCode::InvalidArgument, "opening radius must be >= 0");
  require(softness > 0.0, ErrorCode::InvalidArgument, "softness must be > 0");
}

namespace morphology {

namespace {

std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> out;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dy * dy + dx * dx <= radius * radius) out.emplace_back(dy, dx);
  return out;
}

template <bool Erode>
std::vector<unsigned char> apply(const std::vector<unsigned char>& img, std::size_t rows,
                                 std::size_t cols, int radius) {
  if (radius <= 0) return img;
  const auto offsets = disk_offsets(radius);
  std::vector<unsigned char> out(img.size());
  const auto r = static_cast<long>(rows);
  const auto c = static_cast<long>(cols);
  for (long y = 0; y < r; ++y) {
    for (long x = 0; x < c; ++x) {
      bool value = Erode;
      for (auto [dy, dx] : offsets) {
        const long yy = y + dy, xx = x + dx;
        if (yy < 0 || yy >= r || xx < 0 || xx >= c) continue;
        const bool on = img[static_cast<std::size_t>(yy * c + xx)] != 0;
        if constexpr (Erode) {
          if (!on) { value = false; break; }
        } else {
          if (on) { value = true; break; }
        }
      }
      out[static_cast<std::size_t>(y * c + x)] = value ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

std::vector<unsigned char> erode(const std::vector<unsigned char>& img, std::size_t rows,
                                 std::size_t cols, int radius) {
  return apply<true>(img, rows, cols, radius);
}

std::vector<unsigned char> dilate(const std::vector<unsigned char>& img, std::size_t rows,
                                  std::size_t cols, int radius) {
  return apply<false>(img, rows, cols, radius);
}

std::vector<unsigned char> largest_component(const std::vector<unsigned char>& img,
                                             std::size_t rows, std::size_t cols) {
  std::vector<int> label(img.size(), 0);
  std::vector<std::size_t> stack;
  int best_label = 0;
  std::size_t best_size = 0;
  int next = 0;
  for (std::size_t start = 0; start < img.size(); ++start) {
    if (img[start] == 0 || label[start] != 0) continue;
    ++next;
    std::size_t size = 0;
    stack.push_back(start);
    label[start] = next;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t y = p / cols, x = p % cols;
      auto visit = [&](std::size_t q) {
        if (img[q] != 0 && label[q] == 0) {
          label[q] = next;
          stack.push_back(q);
        }
      };
      if (y > 0) visit(p - cols);
      if (y + 1 < rows) visit(p + cols);
      if (x > 0) visit(p - 1);
      if (x + 1 < cols) visit(p + 1);
    }
    if (size > best_size) {
      best_size = size;
      best_label = next;
    }
  }
  std::vector<unsigned char> out(img.size(), 0);
  if (best_label == 0) return out;
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = label[i] == best_label ? 1 : 0;
  return out;
}

}  // namespace morphology

Plane baseline_predict(const Plane& slice, const BaselineSegmenterParams& params) {
  params.validate();
  Plane soft(slice.rows, slice.cols);
  std::vector<unsigned char> support(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const double v = slice.values[i];
    require(std::isfinite(v), ErrorCode::InvalidArgument, "slice contains non-finite values");
    soft.values[i] = 1.0 / (1.0 + std::exp(-(v - params.threshold) / params.softness));
    support[i] = soft.values[i] > 0.5 ? 1 : 0;
  }
  if (!params.keep_largest_component) return soft;

  const auto opened = morphology::dilate(
      morphology::erode(support, slice.rows, slice.cols, params.opening_radius), slice.rows,
      slice.cols, params.opening_radius);
  const auto keep = morphology::largest_component(opened, slice.rows, slice.cols);
  for (std::size_t i = 0; i < slice.size(); ++i)
    if (keep[i] == 0) soft.values[i] = 0.0;
  return soft;
}

BaselinePredictor::BaselinePredictor(BaselineSegmenterParams params) : params_(params) {
  params_.validate();
}

Plane BaselinePredictor::predict(const Plane& slice, const SliceContext&) const {
  return baseline_predict(slice, params_);
}

Plane precomputed_predict(std::size_t slice_index, const Volume& store) {
  require(store.kind() == VolumeKind::Probability, ErrorCode::InvalidArgument,
          "precomputed store '" + store.id() + "' is not a probability volume");
  return store.slice(slice_index);
}

PrecomputedPredictor::PrecomputedPredictor(Volume store) : single_(std::move(store)) {
  require(single_->kind() == VolumeKind::Probability, ErrorCode::InvalidArgument,
          "precomputed store '" + single_->id() + "' is not a probability volume");
}

PrecomputedPredictor::PrecomputedPredictor(std::map<std::string, Volume> stores)
    : by_id_(std::move(stores)) {
  for (const auto& [id, vol] : by_id_)
    require(vol.kind() == VolumeKind::Probability, ErrorCode::InvalidArgument,
            "precomputed store '" + id + "' is not a probability volume");
}

PrecomputedPredictor PrecomputedPredictor::from_path(const fs::path& path) {
  if (!fs::is_directory(path)) return PrecomputedPredictor(load_volume(path));
  std::map<std::string, Volume> stores;
  for (const auto& entry : fs::directory_iterator(path)) {
    const std::string stem = entry.path().stem().string();
    if (entry.path().extension() != ".vol" || stem.size() <= 5 ||
        stem.compare(stem.size() - 5, 5, "_prob") != 0)
      continue;
    stores.emplace(stem.substr(0, stem.size() - 5), load_volume(entry.path()));
  }
  require(!stores.empty(), ErrorCode::Io, "no *_prob.vol files in '" + path.string() + "'");
  return PrecomputedPredictor(std::move(stores));
}

Plane PrecomputedPredictor::predict(const Plane& slice, const SliceContext& context) const {
  const Volume* store = nullptr;
  if (single_) {
    store = &*single_;
  } else {
    auto it = by_id_.find(std::string(context.volume_id));
    require(it != by_id_.end(), ErrorCode::InvalidArgument,
            "no precomputed probabilities for '" + std::string(context.volume_id) + "'");
    store = &it->second;
  }
  require(store->shape().rows == slice.rows && store->shape().cols == slice.cols,
          ErrorCode::ShapeMismatch,
          "precomputed planes are " + std::to_string(store->shape().rows) + "x" +
              std::to_string(store->shape().cols) + ", slice is " + slice.shape_string());
  return precomputed_predict(context.slice_index, *store);
}

std::unique_ptr<Predictor> make_predictor(std::string_view spec,
                                          const BaselineSegmenterParams& baseline) {
  if (spec == "baseline") return std::make_unique<BaselinePredictor>(baseline);
  constexpr std::string_view prefix = "precomputed:";
  if (spec.starts_with(prefix))
    return std::make_unique<PrecomputedPredictor>(
        PrecomputedPredictor::from_path(fs::path(std::string(spec.substr(prefix.size())))));
  fail(ErrorCode::InvalidArgument,
       "unknown predictor '" + std::string(spec) + "' (expected baseline or precomputed:<path>)");
}

}  // namespace kswap
