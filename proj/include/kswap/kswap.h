#ifndef KSWAP_KSWAP_H
#define KSWAP_KSWAP_H

/* C interface to the kswap Fourier style-transfer toolkit.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a kswap_status; on failure the message is
 * available from kswap_last_error() (per thread, valid until the next call).
 * Strings returned through char** are owned by the caller and released with
 * kswap_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(KSWAP_BUILDING)
#    define KSWAP_API __declspec(dllexport)
#  else
#    define KSWAP_API __declspec(dllimport)
#  endif
#else
#  define KSWAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum kswap_status {
  KSWAP_OK = 0,
  KSWAP_ERR_INVALID_ARGUMENT = 2,
  KSWAP_ERR_IO = 3,
  KSWAP_ERR_SHAPE_MISMATCH = 4,
  KSWAP_ERR_INVARIANT = 5,
  KSWAP_ERR_INTERNAL = 6
} kswap_status;

typedef enum kswap_volume_kind {
  KSWAP_INTENSITY = 0,
  KSWAP_MASK = 1,
  KSWAP_PROBABILITY = 2
} kswap_volume_kind;

typedef struct kswap_volume kswap_volume;
typedef struct kswap_collection kswap_collection;
typedef struct kswap_predictor kswap_predictor;
typedef struct kswap_assignment kswap_assignment;
typedef struct kswap_benchmark kswap_benchmark;

KSWAP_API const char* kswap_version(void);
KSWAP_API const char* kswap_last_error(void);
KSWAP_API void kswap_string_free(char* s);

/* 0 restores the default (KSWAP_WORKERS, else hardware concurrency). */
KSWAP_API void kswap_set_workers(size_t workers);
KSWAP_API size_t kswap_workers(void);

/* ---- volumes ---- */

KSWAP_API kswap_status kswap_volume_load(const char* path, kswap_volume** out);
KSWAP_API kswap_status kswap_volume_save(const kswap_volume* volume, const char* path);
/* Copies `data` (slices*rows*cols floats, C order). spacing may be NULL (1,1,1). */
KSWAP_API kswap_status kswap_volume_create(size_t slices, size_t rows, size_t cols,
                                           const float* data, const double* spacing,
                                           const char* id, const char* domain,
                                           kswap_volume_kind kind, kswap_volume** out);
KSWAP_API void kswap_volume_free(kswap_volume* volume);

KSWAP_API void kswap_volume_shape(const kswap_volume* volume, size_t shape[3]);
KSWAP_API void kswap_volume_spacing(const kswap_volume* volume, double spacing[3]);
KSWAP_API const float* kswap_volume_data(const kswap_volume* volume);
KSWAP_API const char* kswap_volume_id(const kswap_volume* volume);
KSWAP_API const char* kswap_volume_domain(const kswap_volume* volume);
KSWAP_API kswap_volume_kind kswap_volume_get_kind(const kswap_volume* volume);

/* ---- collections ---- */

/* Every <name>.vol in dir, paired with <name>_mask.vol when present. */
KSWAP_API kswap_status kswap_collection_load(const char* dir, kswap_collection** out);
KSWAP_API kswap_status kswap_collection_create(const char* domain, kswap_collection** out);
/* Appends copies. mask may be NULL only while the collection has no masks. */
KSWAP_API kswap_status kswap_collection_add(kswap_collection* collection,
                                            const kswap_volume* scan, const kswap_volume* mask);
KSWAP_API void kswap_collection_free(kswap_collection* collection);

KSWAP_API size_t kswap_collection_size(const kswap_collection* collection);
KSWAP_API const char* kswap_collection_domain(const kswap_collection* collection);
KSWAP_API int kswap_collection_has_masks(const kswap_collection* collection);
/* Borrowed views, valid while the collection lives. */
KSWAP_API const kswap_volume* kswap_collection_scan(const kswap_collection* collection,
                                                    size_t index);
KSWAP_API const kswap_volume* kswap_collection_mask(const kswap_collection* collection,
                                                    size_t index);

/* ---- predictors ---- */

/* "baseline" or "precomputed:<file.vol | dir of <id>_prob.vol>". */
KSWAP_API kswap_status kswap_predictor_create(const char* spec, kswap_predictor** out);
KSWAP_API void kswap_predictor_free(kswap_predictor* predictor);
KSWAP_API const char* kswap_predictor_name(const kswap_predictor* predictor);

/* ---- donor selection ---- */

/* strategy: "3d", "2d", "2.5d" (ranked by SR-SIM) or "random:3d|2d|2.5d"
 * (seeded uniform draw from that candidate pool). m is the 2.5D half-window. */
KSWAP_API kswap_status kswap_select_donors(const kswap_volume* target,
                                           const kswap_collection* sources, const char* strategy,
                                           int n, int m, uint64_t seed, kswap_assignment** out);
KSWAP_API void kswap_assignment_free(kswap_assignment* assignment);
/* Largest donor count over the target slices. */
KSWAP_API size_t kswap_assignment_depth(const kswap_assignment* assignment);
KSWAP_API kswap_status kswap_assignment_to_json(const kswap_assignment* assignment, char** json);

/* ---- adaptation ---- */

/* One slice: amplitude swap inside the beta disk, clipped to [0,1]. */
KSWAP_API kswap_status kswap_fda_swap(const double* source, const double* target, size_t rows,
                                      size_t cols, double beta, double* out);
/* Each target slice adapted with its rank-th donor (last donor if fewer). */
KSWAP_API kswap_status kswap_adapt_rank(const kswap_volume* target,
                                        const kswap_collection* sources,
                                        const kswap_assignment* donors, double beta, size_t rank,
                                        kswap_volume** out);
/* Mean of the adapted slices over every donor of each slice. */
KSWAP_API kswap_status kswap_adapt_composite(const kswap_volume* target,
                                             const kswap_collection* sources,
                                             const kswap_assignment* donors, double beta,
                                             kswap_volume** out);
/* Multi-source transfer; warnings_json (may be NULL) receives a JSON array. */
KSWAP_API kswap_status kswap_transfer(const kswap_volume* target, const kswap_collection* sources,
                                      const kswap_assignment* donors, double beta, int n_mst,
                                      const kswap_predictor* predictor, kswap_volume** out,
                                      char** warnings_json);
KSWAP_API kswap_status kswap_naive_predict(const kswap_volume* target,
                                           const kswap_predictor* predictor, kswap_volume** out);
KSWAP_API kswap_status kswap_binarize(const kswap_volume* probabilities, double threshold,
                                      kswap_volume** out);

/* ---- metrics ---- */

KSWAP_API kswap_status kswap_surface_dice(const kswap_volume* pred, const kswap_volume* gt,
                                          double tolerance, int tolerance_in_mm, double* out);
KSWAP_API kswap_status kswap_dice(const kswap_volume* pred, const kswap_volume* gt, double* out);

/* ---- evaluation and beta search ----
 * config_json keys (all optional): mode, strategy, beta, n_mst, m, seed,
 * tolerance, tolerance_in_mm, threshold, aggregation. Unknown keys are errors. */

KSWAP_API kswap_status kswap_evaluate(const kswap_collection* sources,
                                      const kswap_collection* targets,
                                      const kswap_predictor* predictor, const char* config_json,
                                      char** report_json);
/* grid may be NULL (default grid). png_path may be NULL (no plot). */
KSWAP_API kswap_status kswap_beta_search(const kswap_collection* const* sources,
                                         const kswap_collection* const* targets, size_t n_pairs,
                                         const double* grid, size_t n_grid,
                                         const kswap_predictor* predictor,
                                         const char* config_json, const char* png_path,
                                         char** report_json);
/* The resolved configuration, with defaults filled in. */
KSWAP_API kswap_status kswap_resolve_config(const char* config_json, char** resolved_json);

/* ---- phantoms ---- */

KSWAP_API kswap_status kswap_benchmark_generate(int n_domains, int scans_per_domain,
                                                const char* severity, uint64_t seed,
                                                size_t slices, size_t rows, size_t cols,
                                                kswap_benchmark** out);
KSWAP_API void kswap_benchmark_free(kswap_benchmark* benchmark);
KSWAP_API size_t kswap_benchmark_domain_count(const kswap_benchmark* benchmark);
KSWAP_API const kswap_collection* kswap_benchmark_domain(const kswap_benchmark* benchmark,
                                                         size_t index);
KSWAP_API kswap_status kswap_benchmark_manifest(const kswap_benchmark* benchmark, char** json);
KSWAP_API kswap_status kswap_phantom_tiers(char** json);

/* ---- digests ---- */

KSWAP_API kswap_status kswap_file_sha256(const char* path, char** hex);

#ifdef __cplusplus
}
#endif

#endif
