#include "core/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "core/error.hpp"

namespace kswap {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(VolumeKind kind) {
  switch (kind) {
    case VolumeKind::Intensity: return "intensity";
    case VolumeKind::Mask: return "mask";
    case VolumeKind::Probability: return "probability";
  }
  return "intensity";
}

VolumeKind volume_kind_from_string(std::string_view name) {
  if (name == "intensity") return VolumeKind::Intensity;
  if (name == "mask") return VolumeKind::Mask;
  if (name == "probability") return VolumeKind::Probability;
  fail(ErrorCode::InvalidArgument, "unknown volume kind '" + std::string(name) + "'");
}

std::string Shape3::to_string() const {
  return std::to_string(slices) + "x" + std::to_string(rows) + "x" + std::to_string(cols);
}

namespace {

void check_values(std::span<const float> data, VolumeKind kind, const std::string& id) {
  std::size_t non_finite = 0;
  std::size_t out_of_range = 0;
  for (float v : data) {
    if (!std::isfinite(v)) {
      ++non_finite;
      continue;
    }
    switch (kind) {
      case VolumeKind::Mask:
        if (v != 0.0f && v != 1.0f) ++out_of_range;
        break;
      case VolumeKind::Intensity:
      case VolumeKind::Probability:
        if (v < 0.0f || v > 1.0f) ++out_of_range;
        break;
    }
  }
  if (non_finite > 0)
    fail(ErrorCode::Invariant,
         "volume '" + id + "' has " + std::to_string(non_finite) + " non-finite voxels");
  if (out_of_range > 0) {
    const char* rule = kind == VolumeKind::Mask ? "outside {0,1}" : "outside [0,1]";
    fail(ErrorCode::Invariant, std::string(to_string(kind)) + " volume '" + id + "' has " +
                                   std::to_string(out_of_range) + " voxels " + rule);
  }
}

}  // namespace

Volume::Volume(Shape3 shape, std::vector<float> data, Spacing spacing, std::string id,
               std::string domain, VolumeKind kind)
    : shape_(shape),
      data_(std::move(data)),
      spacing_(spacing),
      id_(std::move(id)),
      domain_(std::move(domain)),
      kind_(kind) {
  require(shape_.slices >= 1 && shape_.rows >= 1 && shape_.cols >= 1, ErrorCode::InvalidArgument,
          "volume '" + id_ + "' has an empty dimension (" + shape_.to_string() + ")");
  require(data_.size() == shape_.voxels(), ErrorCode::ShapeMismatch,
          "volume '" + id_ + "' holds " + std::to_string(data_.size()) + " values, shape " +
              shape_.to_string() + " needs " + std::to_string(shape_.voxels()));
  for (double s : spacing_)
    require(std::isfinite(s) && s > 0.0, ErrorCode::InvalidArgument,
            "volume '" + id_ + "' has non-positive spacing");
  check_values(data_, kind_, id_);
}

Volume Volume::from_planes(std::span<const Plane> planes, Spacing spacing, std::string id,
                           std::string domain, VolumeKind kind) {
  require(!planes.empty(), ErrorCode::InvalidArgument, "cannot build a volume from zero slices");
  const std::size_t rows = planes.front().rows;
  const std::size_t cols = planes.front().cols;
  std::vector<float> data;
  data.reserve(planes.size() * rows * cols);
  for (const Plane& p : planes) {
    require(p.rows == rows && p.cols == cols, ErrorCode::ShapeMismatch,
            "slice shapes differ: " + planes.front().shape_string() + " vs " + p.shape_string());
    for (double v : p.values) data.push_back(static_cast<float>(v));
  }
  return Volume({planes.size(), rows, cols}, std::move(data), spacing, std::move(id),
                std::move(domain), kind);
}

std::span<const float> Volume::slice_data(std::size_t index) const {
  require(index < shape_.slices, ErrorCode::InvalidArgument,
          "slice index " + std::to_string(index) + " out of range for '" + id_ + "' with " +
              std::to_string(shape_.slices) + " slices");
  return std::span<const float>(data_).subspan(index * shape_.plane_size(), shape_.plane_size());
}

Plane Volume::slice(std::size_t index) const {
  auto src = slice_data(index);
  Plane p(shape_.rows, shape_.cols);
  std::copy(src.begin(), src.end(), p.values.begin());
  return p;
}

Volume Volume::relabel(std::string id, std::string domain, VolumeKind kind) const {
  return Volume(shape_, data_, spacing_, std::move(id), std::move(domain), kind);
}

void ScanCollection::validate() const {
  if (masks.empty()) return;
  require(masks.size() == scans.size(), ErrorCode::ShapeMismatch,
          "collection '" + domain + "' has " + std::to_string(scans.size()) + " scans but " +
              std::to_string(masks.size()) + " masks");
  for (std::size_t i = 0; i < scans.size(); ++i) {
    require(masks[i].shape() == scans[i].shape(), ErrorCode::ShapeMismatch,
            "mask of '" + scans[i].id() + "' has shape " + masks[i].shape().to_string() +
                ", scan has " + scans[i].shape().to_string());
    require(masks[i].kind() == VolumeKind::Mask, ErrorCode::Invariant,
            "mask of '" + scans[i].id() + "' is not a mask volume");
  }
}

std::vector<float> normalize_intensities(std::span<const float> values) {
  std::vector<float> out(values.begin(), values.end());
  if (out.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(out.begin(), out.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo >= 0.0 && hi <= 1.0) return out;
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.0f);
    return out;
  }
  const double scale = 1.0 / (hi - lo);
  for (float& v : out) v = static_cast<float>(std::clamp((v - lo) * scale, 0.0, 1.0));
  return out;
}

fs::path header_path(const fs::path& payload) {
  fs::path p = payload;
  p += ".hdr";
  return p;
}

namespace {

std::vector<float> read_float32_le(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open payload '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() % 4 == 0, ErrorCode::Io,
          "payload '" + path.string() + "' size " + std::to_string(bytes.size()) +
              " is not a multiple of 4 bytes");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t word;
    std::memcpy(&word, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap32(word);
    out[i] = std::bit_cast<float>(word);
  }
  return out;
}

void write_float32_le(const fs::path& path, std::span<const float> data) {
  std::vector<char> bytes(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto word = std::bit_cast<std::uint32_t>(data[i]);
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap32(word);
    std::memcpy(bytes.data() + 4 * i, &word, 4);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "short write to '" + path.string() + "'");
}

bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Volume load_volume(const fs::path& path) {
  const std::string name = path.filename().string();
  if (has_suffix(name, ".nii")) return load_nifti(path);

  const fs::path hdr = header_path(path);
  std::ifstream hin(hdr);
  require(static_cast<bool>(hin), ErrorCode::Io, "cannot open header '" + hdr.string() + "'");
  json header;
  try {
    header = json::parse(hin);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, "malformed header '" + hdr.string() + "': " + e.what());
  }
  require(header.is_object(), ErrorCode::Io, "header '" + hdr.string() + "' is not an object");
  static const std::set<std::string> known{"shape", "spacing", "id", "domain", "kind"};
  for (const auto& [key, _] : header.items())
    require(known.count(key) == 1, ErrorCode::Io,
            "unknown header field '" + key + "' in '" + hdr.string() + "'");
  for (const auto& key : known)
    require(header.contains(key), ErrorCode::Io,
            "header '" + hdr.string() + "' lacks field '" + key + "'");

  Shape3 shape;
  Spacing spacing{};
  std::string id, domain;
  VolumeKind kind;
  try {
    const auto dims = header.at("shape").get<std::vector<long long>>();
    const auto sp = header.at("spacing").get<std::vector<double>>();
    require(dims.size() == 3 && sp.size() == 3, ErrorCode::Io,
            "header '" + hdr.string() + "' needs 3 shape and 3 spacing entries");
    for (long long d : dims)
      require(d >= 1, ErrorCode::Io, "header '" + hdr.string() + "' has a non-positive dimension");
    shape = {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
             static_cast<std::size_t>(dims[2])};
    spacing = {sp[0], sp[1], sp[2]};
    id = header.at("id").get<std::string>();
    domain = header.at("domain").get<std::string>();
    kind = volume_kind_from_string(header.at("kind").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, "bad header '" + hdr.string() + "': " + e.what());
  }

  std::vector<float> data = read_float32_le(path);
  require(data.size() == shape.voxels(), ErrorCode::Io,
          "payload '" + path.string() + "' has " + std::to_string(data.size()) +
              " floats, header shape " + shape.to_string() + " needs " +
              std::to_string(shape.voxels()));
  const auto non_finite = static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](float v) { return !std::isfinite(v); }));
  require(non_finite == 0, ErrorCode::Io,
          "payload '" + path.string() + "' has " + std::to_string(non_finite) +
              " non-finite voxels");
  if (kind == VolumeKind::Intensity) data = normalize_intensities(data);
  return Volume(shape, std::move(data), spacing, std::move(id), std::move(domain), kind);
}

void save_volume(const Volume& volume, const fs::path& path) {
  json header;
  header["shape"] = {volume.shape().slices, volume.shape().rows, volume.shape().cols};
  header["spacing"] = {volume.spacing()[0], volume.spacing()[1], volume.spacing()[2]};
  header["id"] = volume.id();
  header["domain"] = volume.domain();
  header["kind"] = std::string(to_string(volume.kind()));

  write_float32_le(path, volume.data());
  std::ofstream hout(header_path(path), std::ios::trunc);
  require(static_cast<bool>(hout), ErrorCode::Io,
          "cannot write '" + header_path(path).string() + "'");
  hout << header.dump(2) << '\n';
  require(static_cast<bool>(hout), ErrorCode::Io,
          "short write to '" + header_path(path).string() + "'");
}

namespace {

template <typename T>
T read_raw(const std::vector<char>& bytes, std::size_t offset, bool swap) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  if (swap) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    std::reverse(p, p + sizeof(T));
  }
  return value;
}

}  // namespace

Volume load_nifti(const fs::path& path, VolumeKind kind) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() >= 348, ErrorCode::Io, "'" + path.string() + "' is too short for NIfTI-1");

  bool swap = false;
  if (read_raw<std::int32_t>(bytes, 0, false) != 348) {
    swap = true;
    require(read_raw<std::int32_t>(bytes, 0, true) == 348, ErrorCode::Io,
            "'" + path.string() + "' is not a NIfTI-1 file");
  }
  const auto ndim = read_raw<std::int16_t>(bytes, 40, swap);
  require(ndim >= 1 && ndim <= 7, ErrorCode::Io, "'" + path.string() + "' has bad dim[0]");
  std::array<std::size_t, 3> dims{1, 1, 1};
  for (int d = 0; d < std::min<int>(ndim, 3); ++d) {
    const auto n = read_raw<std::int16_t>(bytes, 42 + 2 * d, swap);
    require(n >= 1, ErrorCode::Io, "'" + path.string() + "' has a non-positive dimension");
    dims[d] = static_cast<std::size_t>(n);
  }
  const auto datatype = read_raw<std::int16_t>(bytes, 70, swap);
  const auto vox_offset = static_cast<std::size_t>(read_raw<float>(bytes, 108, swap));
  float slope = read_raw<float>(bytes, 112, swap);
  const float inter = read_raw<float>(bytes, 116, swap);
  if (slope == 0.0f || !std::isfinite(slope)) slope = 1.0f;

  // NIfTI is x-fastest; (z, y, x) maps onto (slice, row, col) without reordering.
  const Shape3 shape{dims[2], dims[1], dims[0]};
  std::size_t item = 0;
  switch (datatype) {
    case 2: item = 1; break;
    case 4: item = 2; break;
    case 16: item = 4; break;
    default:
      fail(ErrorCode::Io, "'" + path.string() + "' has unsupported NIfTI datatype " +
                              std::to_string(datatype));
  }
  const std::size_t offset = std::max<std::size_t>(vox_offset, 348);
  require(bytes.size() >= offset + item * shape.voxels(), ErrorCode::Io,
          "'" + path.string() + "' payload is shorter than its dimensions require");

  std::vector<float> data(shape.voxels());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t at = offset + i * item;
    double raw = 0.0;
    switch (datatype) {
      case 2: raw = static_cast<unsigned char>(bytes[at]); break;
      case 4: raw = read_raw<std::int16_t>(bytes, at, swap); break;
      case 16: raw = read_raw<float>(bytes, at, swap); break;
    }
    data[i] = static_cast<float>(raw * slope + inter);
  }
  const auto non_finite = static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](float v) { return !std::isfinite(v); }));
  require(non_finite == 0, ErrorCode::Io,
          "'" + path.string() + "' has " + std::to_string(non_finite) + " non-finite voxels");
  if (kind == VolumeKind::Intensity) data = normalize_intensities(data);

  std::string id = path.stem().string();
  return Volume(shape, std::move(data), {1.0, 1.0, 1.0}, std::move(id), "", kind);
}

ScanCollection load_collection(const fs::path& dir) {
  require(fs::is_directory(dir), ErrorCode::Io, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> payloads;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const bool vol = has_suffix(name, ".vol") || has_suffix(name, ".nii");
    if (!vol) continue;
    const std::string stem = entry.path().stem().string();
    if (has_suffix(stem, "_mask") || has_suffix(stem, "_prob")) continue;
    payloads.push_back(entry.path());
  }
  std::sort(payloads.begin(), payloads.end());
  require(!payloads.empty(), ErrorCode::Io, "no volumes found in '" + dir.string() + "'");

  ScanCollection out;
  bool any_mask = false;
  std::vector<std::optional<Volume>> masks;
  for (const fs::path& p : payloads) {
    out.scans.push_back(load_volume(p));
    fs::path mask = p.parent_path() / (p.stem().string() + "_mask" + p.extension().string());
    if (fs::exists(mask)) {
      any_mask = true;
      Volume m = p.extension() == ".nii" ? load_nifti(mask, VolumeKind::Mask) : load_volume(mask);
      masks.emplace_back(std::move(m));
    } else {
      masks.emplace_back(std::nullopt);
    }
  }
  if (any_mask) {
    for (std::size_t i = 0; i < masks.size(); ++i) {
      require(masks[i].has_value(), ErrorCode::Io,
              "scan '" + payloads[i].string() + "' has no mask while others do");
      out.masks.push_back(std::move(*masks[i]));
    }
  }
  out.domain = out.scans.front().domain().empty() ? dir.filename().string()
                                                  : out.scans.front().domain();
  out.validate();
  return out;
}

}  // namespace kswap
