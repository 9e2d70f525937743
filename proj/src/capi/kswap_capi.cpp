#include "kswap/kswap.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include <json.hpp>

#include "core/beta_search.hpp"
#include "core/digest.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/phantom.hpp"
#include "core/plot.hpp"

using kswap::ErrorCode;
using nlohmann::json;

struct kswap_volume {
  std::optional<kswap::Volume> owned;
  const kswap::Volume* view = nullptr;

  explicit kswap_volume(kswap::Volume v) : owned(std::move(v)), view(&*owned) {}
  explicit kswap_volume(const kswap::Volume* v) : view(v) {}
  kswap_volume(const kswap_volume&) = delete;
  kswap_volume& operator=(const kswap_volume&) = delete;
  const kswap::Volume& get() const { return *view; }
};

struct kswap_collection {
  kswap::ScanCollection data;
  std::vector<std::unique_ptr<kswap_volume>> scan_views;
  std::vector<std::unique_ptr<kswap_volume>> mask_views;

  explicit kswap_collection(kswap::ScanCollection c) : data(std::move(c)) { refresh(); }
  void refresh() {
    scan_views.clear();
    mask_views.clear();
    for (const auto& v : data.scans) scan_views.push_back(std::make_unique<kswap_volume>(&v));
    for (const auto& v : data.masks) mask_views.push_back(std::make_unique<kswap_volume>(&v));
  }
};

struct kswap_predictor {
  std::unique_ptr<kswap::Predictor> impl;
  std::string name;
};

struct kswap_assignment {
  kswap::DonorAssignment data;
};

struct kswap_benchmark {
  std::vector<std::unique_ptr<kswap_collection>> domains;
  json manifest;
};

namespace {

thread_local std::string last_error;

kswap_status to_status(ErrorCode code) { return static_cast<kswap_status>(code); }

kswap_status record(kswap_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs fn, mapping exceptions onto status codes and the thread's last error.
template <typename Fn>
kswap_status guarded(Fn&& fn) noexcept {
  try {
    last_error.clear();
    fn();
    return KSWAP_OK;
  } catch (const kswap::Error& e) {
    return record(to_status(e.code()), e.what());
  } catch (const json::exception& e) {
    return record(KSWAP_ERR_INVALID_ARGUMENT, std::string("bad JSON: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return record(KSWAP_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return record(KSWAP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(KSWAP_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(KSWAP_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  kswap::require(p != nullptr, ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

kswap::EvaluationConfig parse_config(const char* text) {
  kswap::EvaluationConfig cfg;
  if (text == nullptr || *text == '\0') return cfg;
  const json j = json::parse(text);
  kswap::require(j.is_object(), ErrorCode::InvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "mode") cfg.mode = kswap::evaluation_mode_from_string(value.get<std::string>());
    else if (key == "strategy")
      cfg.strategy = kswap::donor_strategy_from_string(value.get<std::string>());
    else if (key == "beta") cfg.transfer.beta = value.get<double>();
    else if (key == "n_mst") cfg.transfer.n_mst = value.get<int>();
    else if (key == "m") cfg.m = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "tolerance") cfg.surface.tolerance = value.get<double>();
    else if (key == "tolerance_in_mm") cfg.surface.tolerance_in_mm = value.get<bool>();
    else if (key == "threshold") cfg.transfer.binarize_threshold = value.get<double>();
    else if (key == "aggregation") {
      const auto name = value.get<std::string>();
      if (name == "mean-probability") cfg.transfer.aggregation = kswap::Aggregation::MeanProbability;
      else if (name == "mean-binarized") cfg.transfer.aggregation = kswap::Aggregation::MeanOfBinarized;
      else kswap::fail(ErrorCode::InvalidArgument, "unknown aggregation '" + name + "'");
    } else {
      kswap::fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

json config_json(const kswap::EvaluationConfig& cfg) {
  return {{"mode", std::string(kswap::to_string(cfg.mode))},
          {"strategy", std::string(kswap::to_string(cfg.strategy))},
          {"beta", cfg.transfer.beta},
          {"n_mst", cfg.transfer.n_mst},
          {"m", cfg.m},
          {"seed", cfg.seed},
          {"tolerance", cfg.surface.tolerance},
          {"tolerance_in_mm", cfg.surface.tolerance_in_mm},
          {"threshold", cfg.transfer.binarize_threshold},
          {"aggregation", cfg.transfer.aggregation == kswap::Aggregation::MeanProbability
                              ? "mean-probability"
                              : "mean-binarized"}};
}

kswap_volume* wrap(kswap::Volume v) { return new kswap_volume(std::move(v)); }

}  // namespace

extern "C" {

const char* kswap_version(void) { return "1.0.0"; }
const char* kswap_last_error(void) { return last_error.c_str(); }
void kswap_string_free(char* s) { std::free(s); }

void kswap_set_workers(size_t workers) { kswap::set_worker_count(workers); }
size_t kswap_workers(void) { return kswap::worker_count(); }

kswap_status kswap_volume_load(const char* path, kswap_volume** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(kswap::load_volume(path));
  });
}

kswap_status kswap_volume_save(const kswap_volume* volume, const char* path) {
  return guarded([&] {
    need(volume, "volume");
    need(path, "path");
    kswap::save_volume(volume->get(), path);
  });
}

kswap_status kswap_volume_create(size_t slices, size_t rows, size_t cols, const float* data,
                                 const double* spacing, const char* id, const char* domain,
                                 kswap_volume_kind kind, kswap_volume** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    kswap::require(kind >= KSWAP_INTENSITY && kind <= KSWAP_PROBABILITY,
                   ErrorCode::InvalidArgument, "unknown volume kind");
    const kswap::Shape3 shape{slices, rows, cols};
    std::vector<float> values(data, data + shape.voxels());
    kswap::Spacing sp{1.0, 1.0, 1.0};
    if (spacing != nullptr) sp = {spacing[0], spacing[1], spacing[2]};
    *out = wrap(kswap::Volume(shape, std::move(values), sp, id ? id : "", domain ? domain : "",
                              static_cast<kswap::VolumeKind>(kind)));
  });
}

void kswap_volume_free(kswap_volume* volume) { delete volume; }

void kswap_volume_shape(const kswap_volume* volume, size_t shape[3]) {
  const auto& s = volume->get().shape();
  shape[0] = s.slices;
  shape[1] = s.rows;
  shape[2] = s.cols;
}

void kswap_volume_spacing(const kswap_volume* volume, double spacing[3]) {
  const auto& s = volume->get().spacing();
  for (int i = 0; i < 3; ++i) spacing[i] = s[i];
}

const float* kswap_volume_data(const kswap_volume* volume) { return volume->get().data().data(); }
const char* kswap_volume_id(const kswap_volume* volume) { return volume->get().id().c_str(); }
const char* kswap_volume_domain(const kswap_volume* volume) {
  return volume->get().domain().c_str();
}
kswap_volume_kind kswap_volume_get_kind(const kswap_volume* volume) {
  return static_cast<kswap_volume_kind>(volume->get().kind());
}

kswap_status kswap_collection_load(const char* dir, kswap_collection** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new kswap_collection(kswap::load_collection(dir));
  });
}

kswap_status kswap_collection_create(const char* domain, kswap_collection** out) {
  return guarded([&] {
    need(out, "out");
    kswap::ScanCollection c;
    c.domain = domain ? domain : "";
    *out = new kswap_collection(std::move(c));
  });
}

kswap_status kswap_collection_add(kswap_collection* collection, const kswap_volume* scan,
                                  const kswap_volume* mask) {
  return guarded([&] {
    need(collection, "collection");
    need(scan, "scan");
    auto& c = collection->data;
    kswap::require(mask != nullptr || c.masks.empty(), ErrorCode::InvalidArgument,
                   "collection carries masks, a mask is required");
    kswap::require(mask == nullptr || c.masks.size() == c.scans.size(), ErrorCode::InvalidArgument,
                   "collection has unmasked scans, cannot add a mask");
    kswap::ScanCollection next = c;
    next.scans.push_back(scan->get());
    if (mask != nullptr) next.masks.push_back(mask->get());
    next.validate();
    c = std::move(next);
    collection->refresh();
  });
}

void kswap_collection_free(kswap_collection* collection) { delete collection; }

size_t kswap_collection_size(const kswap_collection* collection) {
  return collection->data.size();
}
const char* kswap_collection_domain(const kswap_collection* collection) {
  return collection->data.domain.c_str();
}
int kswap_collection_has_masks(const kswap_collection* collection) {
  return collection->data.has_masks() ? 1 : 0;
}
const kswap_volume* kswap_collection_scan(const kswap_collection* collection, size_t index) {
  return index < collection->scan_views.size() ? collection->scan_views[index].get() : nullptr;
}
const kswap_volume* kswap_collection_mask(const kswap_collection* collection, size_t index) {
  return index < collection->mask_views.size() ? collection->mask_views[index].get() : nullptr;
}

kswap_status kswap_predictor_create(const char* spec, kswap_predictor** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    auto impl = kswap::make_predictor(spec);
    auto name = impl->name();
    *out = new kswap_predictor{std::move(impl), std::move(name)};
  });
}

void kswap_predictor_free(kswap_predictor* predictor) { delete predictor; }
const char* kswap_predictor_name(const kswap_predictor* predictor) {
  return predictor->name.c_str();
}

kswap_status kswap_select_donors(const kswap_volume* target, const kswap_collection* sources,
                                 const char* strategy, int n, int m, uint64_t seed,
                                 kswap_assignment** out) {
  return guarded([&] {
    need(target, "target");
    need(sources, "sources");
    need(strategy, "strategy");
    need(out, "out");
    const std::string_view name = strategy;
    constexpr std::string_view random_prefix = "random:";
    kswap::DonorAssignment a;
    if (name.starts_with(random_prefix)) {
      const auto pool = kswap::donor_strategy_from_string(name.substr(random_prefix.size()));
      a = kswap::select_random(target->get(), sources->data, n, pool, m, seed);
    } else {
      a = kswap::select_donors(target->get(), sources->data, kswap::donor_strategy_from_string(name),
                               n, m, kswap::SrsimParams{});
    }
    *out = new kswap_assignment{std::move(a)};
  });
}

void kswap_assignment_free(kswap_assignment* assignment) { delete assignment; }

size_t kswap_assignment_depth(const kswap_assignment* assignment) {
  size_t depth = 0;
  for (const auto& s : assignment->data.per_slice) depth = std::max(depth, s.size());
  return depth;
}

kswap_status kswap_assignment_to_json(const kswap_assignment* assignment, char** out) {
  return guarded([&] {
    need(assignment, "assignment");
    need(out, "out");
    *out = dup_string(kswap::to_json(assignment->data).dump());
  });
}

kswap_status kswap_fda_swap(const double* source, const double* target, size_t rows, size_t cols,
                            double beta, double* out) {
  return guarded([&] {
    need(source, "source");
    need(target, "target");
    need(out, "out");
    kswap::Plane s(rows, cols), t(rows, cols);
    std::copy(source, source + rows * cols, s.values.begin());
    std::copy(target, target + rows * cols, t.values.begin());
    const kswap::Plane r = kswap::fda_swap(s, t, beta);
    std::copy(r.values.begin(), r.values.end(), out);
  });
}

kswap_status kswap_adapt_rank(const kswap_volume* target, const kswap_collection* sources,
                              const kswap_assignment* donors, double beta, size_t rank,
                              kswap_volume** out) {
  return guarded([&] {
    need(target, "target");
    need(sources, "sources");
    need(donors, "donors");
    need(out, "out");
    kswap::require(beta >= 0.0 && beta <= 1.0, ErrorCode::InvalidArgument,
                   "beta must lie in [0,1]");
    *out = wrap(kswap::adapt_with_rank(target->get(), sources->data, donors->data, beta, rank));
  });
}

kswap_status kswap_adapt_composite(const kswap_volume* target, const kswap_collection* sources,
                                   const kswap_assignment* donors, double beta,
                                   kswap_volume** out) {
  return guarded([&] {
    need(target, "target");
    need(sources, "sources");
    need(donors, "donors");
    need(out, "out");
    kswap::require(beta >= 0.0 && beta <= 1.0, ErrorCode::InvalidArgument,
                   "beta must lie in [0,1]");
    *out = wrap(kswap::adapt_composite(target->get(), sources->data, donors->data, beta));
  });
}

kswap_status kswap_transfer(const kswap_volume* target, const kswap_collection* sources,
                            const kswap_assignment* donors, double beta, int n_mst,
                            const kswap_predictor* predictor, kswap_volume** out,
                            char** warnings_json) {
  return guarded([&] {
    need(target, "target");
    need(sources, "sources");
    need(donors, "donors");
    need(predictor, "predictor");
    need(out, "out");
    kswap::TransferConfig cfg;
    cfg.beta = beta;
    cfg.n_mst = n_mst;
    auto result =
        kswap::multi_source_transfer(target->get(), sources->data, donors->data, cfg,
                                     *predictor->impl);
    if (warnings_json != nullptr) *warnings_json = dup_string(json(result.warnings).dump());
    *out = wrap(std::move(result.probabilities));
  });
}

kswap_status kswap_naive_predict(const kswap_volume* target, const kswap_predictor* predictor,
                                 kswap_volume** out) {
  return guarded([&] {
    need(target, "target");
    need(predictor, "predictor");
    need(out, "out");
    *out = wrap(kswap::naive_predict(target->get(), *predictor->impl));
  });
}

kswap_status kswap_binarize(const kswap_volume* probabilities, double threshold,
                            kswap_volume** out) {
  return guarded([&] {
    need(probabilities, "probabilities");
    need(out, "out");
    kswap::require(threshold > 0.0 && threshold < 1.0, ErrorCode::InvalidArgument,
                   "threshold must lie in (0,1)");
    *out = wrap(kswap::binarize(probabilities->get(), threshold));
  });
}

kswap_status kswap_surface_dice(const kswap_volume* pred, const kswap_volume* gt,
                                double tolerance, int tolerance_in_mm, double* out) {
  return guarded([&] {
    need(pred, "pred");
    need(gt, "gt");
    need(out, "out");
    *out = kswap::surface_dice(pred->get(), gt->get(), {tolerance, tolerance_in_mm != 0});
  });
}

kswap_status kswap_dice(const kswap_volume* pred, const kswap_volume* gt, double* out) {
  return guarded([&] {
    need(pred, "pred");
    need(gt, "gt");
    need(out, "out");
    *out = kswap::dice(pred->get(), gt->get());
  });
}

kswap_status kswap_evaluate(const kswap_collection* sources, const kswap_collection* targets,
                            const kswap_predictor* predictor, const char* config,
                            char** report_json) {
  return guarded([&] {
    need(sources, "sources");
    need(targets, "targets");
    need(predictor, "predictor");
    need(report_json, "report_json");
    const auto cfg = parse_config(config);
    const auto result = kswap::evaluate_pair(sources->data, targets->data, cfg, *predictor->impl);
    *report_json = dup_string(kswap::to_json(result).dump());
  });
}

kswap_status kswap_beta_search(const kswap_collection* const* sources,
                               const kswap_collection* const* targets, size_t n_pairs,
                               const double* grid, size_t n_grid, const kswap_predictor* predictor,
                               const char* config, const char* png_path, char** report_json) {
  return guarded([&] {
    need(predictor, "predictor");
    need(report_json, "report_json");
    kswap::require(n_pairs > 0, ErrorCode::InvalidArgument, "beta search needs at least one pair");
    need(sources, "sources");
    need(targets, "targets");
    std::vector<kswap::DomainPair> pairs;
    for (size_t i = 0; i < n_pairs; ++i) {
      need(sources[i], "source collection");
      need(targets[i], "target collection");
      pairs.push_back({&sources[i]->data, &targets[i]->data});
    }
    std::vector<double> betas = kswap::default_beta_grid();
    if (grid != nullptr) betas.assign(grid, grid + n_grid);
    const auto cfg = parse_config(config);
    const auto result = kswap::grid_search(pairs, betas, cfg, *predictor->impl);
    if (png_path != nullptr) kswap::render_curves_png(result.curves, png_path);
    json report = kswap::to_json(result);
    report["config"] = config_json(cfg);
    report["grid"] = betas;
    *report_json = dup_string(report.dump());
  });
}

kswap_status kswap_resolve_config(const char* config, char** resolved_json) {
  return guarded([&] {
    need(resolved_json, "resolved_json");
    *resolved_json = dup_string(config_json(parse_config(config)).dump());
  });
}

kswap_status kswap_benchmark_generate(int n_domains, int scans_per_domain, const char* severity,
                                      uint64_t seed, size_t slices, size_t rows, size_t cols,
                                      kswap_benchmark** out) {
  return guarded([&] {
    need(severity, "severity");
    need(out, "out");
    auto b = kswap::generate_benchmark(n_domains, scans_per_domain,
                                       kswap::severity_from_string(severity), seed,
                                       {slices, rows, cols});
    auto handle = std::make_unique<kswap_benchmark>();
    handle->manifest = kswap::manifest(b);
    for (auto& d : b.domains) handle->domains.push_back(std::make_unique<kswap_collection>(std::move(d)));
    *out = handle.release();
  });
}

void kswap_benchmark_free(kswap_benchmark* benchmark) { delete benchmark; }

size_t kswap_benchmark_domain_count(const kswap_benchmark* benchmark) {
  return benchmark->domains.size();
}

const kswap_collection* kswap_benchmark_domain(const kswap_benchmark* benchmark, size_t index) {
  return index < benchmark->domains.size() ? benchmark->domains[index].get() : nullptr;
}

kswap_status kswap_benchmark_manifest(const kswap_benchmark* benchmark, char** out) {
  return guarded([&] {
    need(benchmark, "benchmark");
    need(out, "out");
    *out = dup_string(benchmark->manifest.dump());
  });
}

kswap_status kswap_phantom_tiers(char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup_string(kswap::tier_table().dump());
  });
}

kswap_status kswap_file_sha256(const char* path, char** hex) {
  return guarded([&] {
    need(path, "path");
    need(hex, "hex");
    *hex = dup_string(kswap::file_sha256(path));
  });
}

}  // extern "C"
