#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/plane.hpp"

namespace kswap {

enum class VolumeKind { Intensity, Mask, Probability };

std::string_view to_string(VolumeKind kind);
VolumeKind volume_kind_from_string(std::string_view name);

struct Shape3 {
  std::size_t slices = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t voxels() const { return slices * rows * cols; }
  std::size_t plane_size() const { return rows * cols; }
  std::string to_string() const;
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

using Spacing = std::array<double, 3>;

// A scan, mask or probability map. Slice axis is axis 0, storage is float32
// C-order. Invariants on value ranges are checked at construction, so a
// Volume that exists is valid; it is never mutated afterwards.
class Volume {
 public:
  Volume(Shape3 shape, std::vector<float> data, Spacing spacing, std::string id, std::string domain,
         VolumeKind kind);

  // Builds a volume from per-slice planes (values are narrowed to float).
  static Volume from_planes(std::span<const Plane> planes, Spacing spacing, std::string id,
                            std::string domain, VolumeKind kind);

  const Shape3& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  const std::string& id() const { return id_; }
  const std::string& domain() const { return domain_; }
  VolumeKind kind() const { return kind_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> slice_data(std::size_t index) const;
  Plane slice(std::size_t index) const;

  // Same data under a different identity/kind; re-validates the invariants.
  Volume relabel(std::string id, std::string domain, VolumeKind kind) const;

 private:
  Shape3 shape_;
  std::vector<float> data_;
  Spacing spacing_;
  std::string id_;
  std::string domain_;
  VolumeKind kind_;
};

// A domain's scans with optional parallel ground-truth masks.
struct ScanCollection {
  std::string domain;
  std::vector<Volume> scans;
  std::vector<Volume> masks;  // empty, or one per scan

  bool has_masks() const { return !masks.empty(); }
  std::size_t size() const { return scans.size(); }
  void validate() const;
};

// Min-max rescale into [0,1]. Data already inside [0,1] is returned as is,
// a constant out-of-range volume maps to zeros.
std::vector<float> normalize_intensities(std::span<const float> values);

Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& volume, const std::filesystem::path& path);

// NIfTI-1 single file import (float32, int16 and uint8 payloads).
Volume load_nifti(const std::filesystem::path& path, VolumeKind kind = VolumeKind::Intensity);

// Loads every `<name>.vol` in a directory (sorted by name) as scans, pairing
// `<name>_mask.vol` when present. Files ending in `_prob.vol` are skipped.
ScanCollection load_collection(const std::filesystem::path& dir);

std::filesystem::path header_path(const std::filesystem::path& payload);

}  // namespace kswap
