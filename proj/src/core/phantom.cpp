#include "core/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <set>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/random.hpp"

namespace kswap {

void DomainParams::validate() const {
  require(gamma > 0.0 && bias_amplitude >= 0.0 && contrast_scale > 0.0 && noise_sigma >= 0.0,
          ErrorCode::InvalidArgument,
          "domain params need gamma > 0, bias >= 0, contrast > 0, noise >= 0");
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Subtle: return "subtle";
    case Severity::Medium: return "medium";
    case Severity::Severe: return "severe";
  }
  return "subtle";
}

Severity severity_from_string(std::string_view name) {
  if (name == "subtle") return Severity::Subtle;
  if (name == "medium") return Severity::Medium;
  if (name == "severe") return Severity::Severe;
  fail(ErrorCode::InvalidArgument,
       "unknown severity '" + std::string(name) + "' (expected subtle, medium or severe)");
}

DomainParams reference_domain() { return {1.0, 0.05, 1.0, 0.01, 0}; }

DomainParams tier_domain(Severity severity) {
  switch (severity) {
    case Severity::Subtle: return {1.08, 0.08, 0.95, 0.015, 0};
    case Severity::Medium: return {1.4, 0.25, 0.85, 0.02, 0};
    case Severity::Severe: return {2.2, 0.35, 0.70, 0.03, 0};
  }
  return reference_domain();
}

namespace {

double smoothstep(double lo, double hi, double x) {
  const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

struct Ellipsoid {
  double cz, cu, cv;  // centre in the rotated, axis-normalized frame
  double rz, ru, rv;

  double radius(double z, double u, double v) const {
    const double a = (z - cz) / rz, b = (u - cu) / ru, c = (v - cv) / rv;
    return std::sqrt(a * a + b * b + c * c);
  }
};

struct Anatomy {
  double cz, cy, cx, az, ay, ax, tilt;
  double wobble_amp[3], wobble_phase[3];
  double grey_thickness, white, grey, skull;
  int compartments;
  Ellipsoid ventricles[2];
  double ventricle_value;
  Ellipsoid nucleus;
  double nucleus_value;
};

Anatomy sample_anatomy(const Shape3& shape, std::uint64_t anatomy_seed) {
  Rng rng(derive_seed(anatomy_seed, 0xA7A7));
  const auto S = static_cast<double>(shape.slices);
  const auto R = static_cast<double>(shape.rows);
  const auto C = static_cast<double>(shape.cols);
  Anatomy a{};
  a.cz = (S - 1.0) / 2.0 + rng.uniform(-0.3, 0.3);
  a.cy = (R - 1.0) / 2.0 + rng.uniform(-0.04, 0.04) * R;
  a.cx = (C - 1.0) / 2.0 + rng.uniform(-0.04, 0.04) * C;
  a.az = S * rng.uniform(0.55, 0.75);
  a.ay = R * rng.uniform(0.27, 0.35);
  a.ax = C * rng.uniform(0.22, 0.31);
  a.tilt = rng.uniform(-0.3, 0.3);
  for (int k = 0; k < 3; ++k) {
    a.wobble_amp[k] = rng.uniform(0.0, 0.04);
    a.wobble_phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  a.grey_thickness = rng.uniform(0.15, 0.25);
  a.white = rng.uniform(0.78, 0.90);
  a.grey = rng.uniform(0.52, 0.64);
  a.skull = rng.uniform(0.20, 0.30);
  a.compartments = 2 + static_cast<int>(rng.below(3));
  const double spread = rng.uniform(0.10, 0.18);
  for (int side = 0; side < 2; ++side) {
    a.ventricles[side] = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                          (side == 0 ? -1.0 : 1.0) * spread, rng.uniform(0.35, 0.5),
                          rng.uniform(0.25, 0.35), rng.uniform(0.07, 0.1)};
  }
  a.ventricle_value = rng.uniform(0.40, 0.48);
  a.nucleus = {rng.uniform(-0.15, 0.15), rng.uniform(0.15, 0.3), rng.uniform(-0.2, 0.2),
               rng.uniform(0.3, 0.45),  rng.uniform(0.12, 0.18), rng.uniform(0.12, 0.18)};
  a.nucleus_value = rng.uniform(0.66, 0.72);
  return a;
}

}  // namespace

std::vector<float> generate_anatomy(const Shape3& shape, std::uint64_t anatomy_seed,
                                    std::vector<float>* mask) {
  require(shape.slices >= 4 && shape.rows >= 32 && shape.cols >= 32, ErrorCode::InvalidArgument,
          "phantom shape must be at least 4x32x32, got " + shape.to_string());
  const Anatomy a = sample_anatomy(shape, anatomy_seed);
  std::vector<float> out(shape.voxels(), 0.0f);
  if (mask != nullptr) mask->assign(shape.voxels(), 0.0f);
  const double ct = std::cos(a.tilt), st = std::sin(a.tilt);

  for (std::size_t z = 0; z < shape.slices; ++z) {
    const double dz = (static_cast<double>(z) - a.cz) / a.az;
    for (std::size_t y = 0; y < shape.rows; ++y) {
      for (std::size_t x = 0; x < shape.cols; ++x) {
        const double py = static_cast<double>(y) - a.cy, px = static_cast<double>(x) - a.cx;
        const double u = (py * ct + px * st) / a.ay;
        const double v = (-py * st + px * ct) / a.ax;
        const double theta = std::atan2(u, v);
        double wobble = 1.0;
        for (int k = 0; k < 3; ++k)
          wobble += a.wobble_amp[k] * std::cos((k + 2) * theta + a.wobble_phase[k]);
        const double rho = std::sqrt(u * u + v * v + dz * dz) / wobble;
        const std::size_t idx = (z * shape.rows + y) * shape.cols + x;

        if (rho <= 1.0) {
          const double inner = 1.0 - a.grey_thickness;
          const double t = smoothstep(inner - 0.04, inner + 0.04, rho);
          double value = a.white * (1.0 - t) + a.grey * t;
          if (a.compartments >= 3) {
            for (const auto& vent : a.ventricles) {
              const double w = 1.0 - smoothstep(0.8, 1.0, vent.radius(dz, u, v));
              value = value * (1.0 - w) + a.ventricle_value * w;
            }
          }
          if (a.compartments >= 4) {
            const double w = 1.0 - smoothstep(0.8, 1.0, a.nucleus.radius(dz, u, v));
            value = value * (1.0 - w) + a.nucleus_value * w;
          }
          value *= 1.0 - 0.35 * smoothstep(0.93, 1.0, rho);
          out[idx] = static_cast<float>(std::clamp(value, 0.0, 1.0));
          if (mask != nullptr) (*mask)[idx] = 1.0f;
        } else if (rho >= 1.10 && rho <= 1.20) {
          out[idx] = static_cast<float>(a.skull);
        }
      }
    }
  }
  return out;
}

std::pair<Volume, Volume> generate_scan(const Shape3& shape, std::uint64_t anatomy_seed,
                                        const DomainParams& domain, std::string id,
                                        std::string domain_name) {
  domain.validate();
  std::vector<float> mask;
  std::vector<float> anatomy = generate_anatomy(shape, anatomy_seed, &mask);

  // Smooth multiplicative field, fixed per scanner (domain seed).
  Rng field_rng(derive_seed(domain.seed, 0xB1A5));
  double fz[3], fy[3], fx[3], phase[3], weight[3], weight_sum = 0.0;
  for (int j = 0; j < 3; ++j) {
    fz[j] = field_rng.uniform(-0.5, 0.5);
    fy[j] = field_rng.uniform(-1.0, 1.0);
    fx[j] = field_rng.uniform(-1.0, 1.0);
    phase[j] = field_rng.uniform(0.0, 2.0 * std::numbers::pi);
    weight[j] = field_rng.uniform(0.5, 1.0);
    weight_sum += weight[j];
  }
  Rng noise_rng(derive_seed(domain.seed, anatomy_seed, 0x2015E));

  std::vector<float> data(anatomy.size());
  for (std::size_t z = 0; z < shape.slices; ++z)
    for (std::size_t y = 0; y < shape.rows; ++y)
      for (std::size_t x = 0; x < shape.cols; ++x) {
        const std::size_t idx = (z * shape.rows + y) * shape.cols + x;
        double b = 0.0;
        for (int j = 0; j < 3; ++j)
          b += weight[j] *
               std::cos(2.0 * std::numbers::pi *
                            (fz[j] * static_cast<double>(z) / static_cast<double>(shape.slices) +
                             fy[j] * static_cast<double>(y) / static_cast<double>(shape.rows) +
                             fx[j] * static_cast<double>(x) / static_cast<double>(shape.cols)) +
                        phase[j]);
        const double field = std::max(0.0, 1.0 + domain.bias_amplitude * b / weight_sum);
        double value = domain.contrast_scale * field *
                       std::pow(static_cast<double>(anatomy[idx]), domain.gamma);
        if (domain.noise_sigma > 0.0) value += domain.noise_sigma * noise_rng.normal();
        data[idx] = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }

  const Spacing spacing{1.0, 1.0, 1.0};
  Volume scan(shape, std::move(data), spacing, id, domain_name, VolumeKind::Intensity);
  Volume mask_volume(shape, std::move(mask), spacing, id + "_mask", domain_name, VolumeKind::Mask);
  return {std::move(scan), std::move(mask_volume)};
}

Benchmark generate_benchmark(int n_domains, int scans_per_domain, Severity severity,
                             std::uint64_t seed, const Shape3& shape) {
  require(n_domains >= 2 && scans_per_domain >= 2, ErrorCode::InvalidArgument,
          "a benchmark needs at least 2 domains with 2 scans each");
  const auto tier = static_cast<std::uint64_t>(severity) + 1;
  Benchmark out;
  out.severity = severity;
  out.seed = seed;

  std::set<std::uint64_t> used;
  for (int d = 0; d < n_domains; ++d) {
    DomainParams params = d == 0 ? reference_domain() : tier_domain(severity);
    params.seed = derive_seed(seed, tier * 1000 + static_cast<std::uint64_t>(d), 0xD0);
    out.params.push_back(params);
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < scans_per_domain; ++s) {
      std::uint64_t a = derive_seed(seed, tier * 1000 + static_cast<std::uint64_t>(d),
                                    static_cast<std::uint64_t>(s) + 1);
      while (!used.insert(a).second) a = mix64(a);
      seeds.push_back(a);
    }
    out.anatomy_seeds.push_back(std::move(seeds));
  }

  out.domains.resize(static_cast<std::size_t>(n_domains));
  for (int d = 0; d < n_domains; ++d) {
    const std::string name = std::string(to_string(severity)) +
                             (d == 0 ? std::string("-ref") : "-shift" + std::to_string(d));
    out.domains[d].domain = name;
    out.domains[d].scans.reserve(static_cast<std::size_t>(scans_per_domain));
  }

  const std::size_t total = static_cast<std::size_t>(n_domains) * scans_per_domain;
  std::vector<std::optional<std::pair<Volume, Volume>>> scans(total);
  parallel_for(total, [&](std::size_t k) {
    const std::size_t d = k / static_cast<std::size_t>(scans_per_domain);
    const std::size_t s = k % static_cast<std::size_t>(scans_per_domain);
    char id[64];
    std::snprintf(id, sizeof id, "%s-s%02zu", out.domains[d].domain.c_str(), s);
    scans[k].emplace(generate_scan(shape, out.anatomy_seeds[d][s], out.params[d], id,
                                   out.domains[d].domain));
  });
  for (std::size_t k = 0; k < total; ++k) {
    auto& coll = out.domains[k / static_cast<std::size_t>(scans_per_domain)];
    coll.scans.push_back(std::move(scans[k]->first));
    coll.masks.push_back(std::move(scans[k]->second));
  }
  return out;
}

nlohmann::json to_json(const DomainParams& p) {
  return {{"gamma", p.gamma},
          {"bias_amplitude", p.bias_amplitude},
          {"contrast_scale", p.contrast_scale},
          {"noise_sigma", p.noise_sigma},
          {"seed", p.seed}};
}

nlohmann::json manifest(const Benchmark& b) {
  nlohmann::json domains = nlohmann::json::array();
  for (std::size_t d = 0; d < b.domains.size(); ++d) {
    nlohmann::json scans = nlohmann::json::array();
    for (std::size_t s = 0; s < b.domains[d].scans.size(); ++s)
      scans.push_back({{"id", b.domains[d].scans[s].id()}, {"anatomy_seed", b.anatomy_seeds[d][s]}});
    domains.push_back({{"name", b.domains[d].domain},
                       {"role", d == 0 ? "reference" : "shifted"},
                       {"params", to_json(b.params[d])},
                       {"scans", std::move(scans)}});
  }
  const Shape3 shape = b.domains.front().scans.front().shape();
  return {{"schema", 1},
          {"severity", std::string(to_string(b.severity))},
          {"seed", b.seed},
          {"shape", {shape.slices, shape.rows, shape.cols}},
          {"rng", "mt19937_64 seeded via splitmix64 mixing"},
          {"domains", std::move(domains)}};
}

nlohmann::json tier_table() {
  auto strip = [](DomainParams p) {
    auto j = to_json(p);
    j.erase("seed");
    return j;
  };
  return {{"reference", strip(reference_domain())},
          {"subtle", strip(tier_domain(Severity::Subtle))},
          {"medium", strip(tier_domain(Severity::Medium))},
          {"severe", strip(tier_domain(Severity::Severe))}};
}

}  // namespace kswap
