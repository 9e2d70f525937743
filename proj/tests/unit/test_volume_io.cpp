#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>

#include "core/error.hpp"
#include "core/volume.hpp"
#include "oracles.hpp"

using namespace kswap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_raw(const fs::path& p, const std::vector<float>& values, const std::string& header) {
  std::ofstream out(p, std::ios::binary);
  for (float v : values) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  std::ofstream(p.string() + ".hdr") << header;
}

std::string header(const std::string& shape, const std::string& kind = "intensity",
                   const std::string& extra = "") {
  return R"({"shape": )" + shape + R"(, "spacing": [1, 1, 1], "id": "v", "domain": "d", "kind": ")" +
         kind + "\"" + extra + "}";
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

void put16(std::vector<char>& b, std::size_t at, std::int16_t v) { std::memcpy(&b[at], &v, 2); }
void put32f(std::vector<char>& b, std::size_t at, float v) { std::memcpy(&b[at], &v, 4); }

}  // namespace

TEST_CASE("intensity volumes are min-max normalized on load") {
  TempDir dir("kswap_io_norm");
  std::vector<float> v(128);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 10.0f + 10.0f * float(i) / 127.0f;
  write_raw(dir.path / "a.vol", v, header("[2, 8, 8]"));
  const Volume a = load_volume(dir.path / "a.vol");
  const auto [lo, hi] = std::minmax_element(a.data().begin(), a.data().end());
  CHECK(*lo == 0.0f);
  CHECK(*hi == 1.0f);

  write_raw(dir.path / "c.vol", std::vector<float>(128, 5.0f), header("[2, 8, 8]"));
  const Volume c = load_volume(dir.path / "c.vol");
  for (float x : c.data()) CHECK(x == 0.0f);

  // Already inside [0,1]: left as is.
  std::mt19937_64 rng(1);
  std::vector<float> unit(128);
  for (auto& x : unit) x = float(std::uniform_real_distribution<double>(0.2, 0.7)(rng));
  write_raw(dir.path / "u.vol", unit, header("[2, 8, 8]"));
  const Volume u = load_volume(dir.path / "u.vol");
  CHECK(std::equal(unit.begin(), unit.end(), u.data().begin()));
}

TEST_CASE("load errors") {
  TempDir dir("kswap_io_err");
  write_raw(dir.path / "short.vol", std::vector<float>(100, 0.5f), header("[2, 8, 8]"));
  CHECK(code_of([&] { load_volume(dir.path / "short.vol"); }) == ErrorCode::Io);
  write_raw(dir.path / "extra.vol", std::vector<float>(128, 0.5f),
            header("[2, 8, 8]", "intensity", R"(, "units": "mm")"));
  CHECK(code_of([&] { load_volume(dir.path / "extra.vol"); }) == ErrorCode::Io);
  CHECK(code_of([&] { load_volume(dir.path / "missing.vol"); }) == ErrorCode::Io);

  std::vector<float> bad(128, 0.5f);
  bad[3] = std::nanf("");
  bad[9] = INFINITY;
  write_raw(dir.path / "nan.vol", bad, header("[2, 8, 8]"));
  try {
    load_volume(dir.path / "nan.vol");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("2 non-finite") != std::string::npos);
  }
  write_raw(dir.path / "mask.vol", std::vector<float>(128, 0.5f), header("[2, 8, 8]", "mask"));
  CHECK(code_of([&] { load_volume(dir.path / "mask.vol"); }) == ErrorCode::Invariant);
}

TEST_CASE("volume invariants") {
  CHECK(code_of([] { Volume({1, 1, 2}, {0.5f, 1.5f}, {1, 1, 1}, "p", "d", VolumeKind::Probability); }) ==
        ErrorCode::Invariant);
  CHECK(code_of([] { Volume({0, 8, 8}, {}, {1, 1, 1}, "e", "d", VolumeKind::Intensity); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { Volume({1, 1, 2}, {0.5f}, {1, 1, 1}, "s", "d", VolumeKind::Intensity); }) ==
        ErrorCode::ShapeMismatch);
  CHECK(code_of([] { Volume({1, 1, 1}, {0.5f}, {1, 0, 1}, "s", "d", VolumeKind::Intensity); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { Volume::from_planes({}, {1, 1, 1}, "z", "d", VolumeKind::Intensity); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("save then load is bit exact for every kind") {
  TempDir dir("kswap_io_rt");
  std::mt19937_64 rng(2);
  std::vector<float> values(3 * 9 * 10);
  for (auto& v : values) v = float(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  const Volume in({3, 9, 10}, values, {0.5, 1.25, 2.0}, "id-1", "dom", VolumeKind::Probability);
  save_volume(in, dir.path / "p.vol");
  const Volume out = load_volume(dir.path / "p.vol");
  CHECK(std::equal(in.data().begin(), in.data().end(), out.data().begin()));
  CHECK(out.spacing() == in.spacing());
  CHECK(out.id() == "id-1");
  CHECK(out.domain() == "dom");
  CHECK(out.kind() == VolumeKind::Probability);
  CHECK(fs::file_size(dir.path / "p.vol") == values.size() * 4);

  const Volume intensity = in.relabel("i", "dom", VolumeKind::Intensity);
  save_volume(intensity, dir.path / "i.vol");
  CHECK(load_volume(dir.path / "i.vol").data()[17] == intensity.data()[17]);

  std::vector<float> bits(90);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = float(i % 3 == 0);
  save_volume(Volume({1, 9, 10}, bits, {1, 1, 1}, "m", "dom", VolumeKind::Mask), dir.path / "m.vol");
  std::ifstream raw(dir.path / "m.vol", std::ios::binary);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    unsigned char b[4];
    raw.read(reinterpret_cast<char*>(b), 4);
    const float f = std::bit_cast<float>(std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
                                         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24);
    CHECK((f == 0.0f || f == 1.0f));
    CHECK(f == bits[i]);
  }
}

TEST_CASE("collections pair scans with masks and skip probability maps") {
  TempDir dir("kswap_io_coll");
  std::vector<float> ones(2 * 8 * 8, 1.0f), half(2 * 8 * 8, 0.5f);
  for (const char* name : {"b", "a"}) {
    save_volume(Volume({2, 8, 8}, half, {1, 1, 1}, name, "dom", VolumeKind::Intensity),
                dir.path / (std::string(name) + ".vol"));
    save_volume(Volume({2, 8, 8}, ones, {1, 1, 1}, name, "dom", VolumeKind::Mask),
                dir.path / (std::string(name) + "_mask.vol"));
  }
  save_volume(Volume({2, 8, 8}, half, {1, 1, 1}, "a", "dom", VolumeKind::Probability),
              dir.path / "a_prob.vol");
  const ScanCollection c = load_collection(dir.path);
  REQUIRE(c.size() == 2);
  CHECK(c.scans[0].id() == "a");
  CHECK(c.scans[1].id() == "b");
  CHECK(c.has_masks());
  CHECK(c.masks[1].kind() == VolumeKind::Mask);
  CHECK(c.domain == "dom");
  CHECK(code_of([&] { load_collection(dir.path / "nothing"); }) == ErrorCode::Io);
}

TEST_CASE("NIfTI import of int16 with scaling and of swapped float32") {
  TempDir dir("kswap_io_nii");
  // int16, 4 x 3 x 2 (x, y, z), slope 2, intercept 1, vox_offset 352.
  std::vector<char> b(352 + 24 * 2, 0);
  const std::int32_t hdr = 348;
  std::memcpy(&b[0], &hdr, 4);
  put16(b, 40, 3);
  put16(b, 42, 4);
  put16(b, 44, 3);
  put16(b, 46, 2);
  put16(b, 70, 4);
  put32f(b, 108, 352.0f);
  put32f(b, 112, 2.0f);
  put32f(b, 116, 1.0f);
  for (std::int16_t i = 0; i < 24; ++i) put16(b, 352 + 2 * std::size_t(i), i);
  std::ofstream(dir.path / "x.nii", std::ios::binary).write(b.data(), std::streamsize(b.size()));
  const Volume v = load_volume(dir.path / "x.nii");
  CHECK(v.shape() == Shape3{2, 3, 4});
  // Values 1..47 normalize to (x-1)/46; voxel (z=1, y=2, x=3) is raw 23.
  CHECK(v.data()[23] == 1.0f);
  CHECK(v.data()[0] == 0.0f);
  CHECK(v.data()[5] == doctest::Approx(10.0 / 46.0));

  // Big-endian float32 probability-range data.
  std::vector<char> f(348 + 4 + 8 * 4, 0);
  auto be32 = [&](std::size_t at, std::uint32_t x) {
    for (int k = 0; k < 4; ++k) f[at + k] = char((x >> (24 - 8 * k)) & 0xFF);
  };
  auto be16 = [&](std::size_t at, std::uint16_t x) {
    f[at] = char(x >> 8);
    f[at + 1] = char(x & 0xFF);
  };
  be32(0, 348);
  be16(40, 3);
  be16(42, 2);
  be16(44, 2);
  be16(46, 2);
  be16(70, 16);
  be32(108, std::bit_cast<std::uint32_t>(352.0f));
  for (int i = 0; i < 8; ++i) be32(352 + 4 * std::size_t(i), std::bit_cast<std::uint32_t>(i / 8.0f));
  std::ofstream(dir.path / "y.nii", std::ios::binary).write(f.data(), std::streamsize(f.size()));
  const Volume y = load_volume(dir.path / "y.nii");
  for (int i = 0; i < 8; ++i) CHECK(y.data()[std::size_t(i)] == i / 8.0f);

  std::vector<char> junk(400, 0);
  std::ofstream(dir.path / "z.nii", std::ios::binary).write(junk.data(), 400);
  CHECK(code_of([&] { load_volume(dir.path / "z.nii"); }) == ErrorCode::Io);
}
