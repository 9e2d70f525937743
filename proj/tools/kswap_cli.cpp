// kswap command-line front end. Talks to the library only through kswap.h.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kswap/kswap.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(kswap_status status, const std::string& what) {
  if (status != KSWAP_OK) throw Failure{status, what + ": " + kswap_last_error()};
}

[[noreturn]] void usage_error(const std::string& message) {
  throw Failure{KSWAP_ERR_INVALID_ARGUMENT, message};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using VolumePtr = std::unique_ptr<kswap_volume, Deleter<kswap_volume, kswap_volume_free>>;
using CollectionPtr =
    std::unique_ptr<kswap_collection, Deleter<kswap_collection, kswap_collection_free>>;
using PredictorPtr =
    std::unique_ptr<kswap_predictor, Deleter<kswap_predictor, kswap_predictor_free>>;
using AssignmentPtr =
    std::unique_ptr<kswap_assignment, Deleter<kswap_assignment, kswap_assignment_free>>;
using BenchmarkPtr =
    std::unique_ptr<kswap_benchmark, Deleter<kswap_benchmark, kswap_benchmark_free>>;

std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  kswap_string_free(s);
  return out;
}

VolumePtr load_volume(const std::string& path) {
  kswap_volume* v = nullptr;
  check(kswap_volume_load(path.c_str(), &v), "loading " + path);
  return VolumePtr(v);
}

CollectionPtr load_collection(const std::string& dir) {
  kswap_collection* c = nullptr;
  check(kswap_collection_load(dir.c_str(), &c), "loading " + dir);
  return CollectionPtr(c);
}

PredictorPtr make_predictor(const std::string& spec) {
  kswap_predictor* p = nullptr;
  check(kswap_predictor_create(spec.c_str(), &p), "predictor " + spec);
  return PredictorPtr(p);
}

void save_volume(const kswap_volume* v, const fs::path& path) {
  check(kswap_volume_save(v, path.string().c_str()), "writing " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{KSWAP_ERR_IO, "cannot write " + path.string()};
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{KSWAP_ERR_IO, "cannot create " + dir.string() + ": " + ec.message()};
}

// Every run leaves one run_manifest.json next to its outputs.
class RunManifest {
 public:
  RunManifest(std::string command, fs::path out_dir)
      : command_(std::move(command)), out_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {}

  json& config() { return config_; }

  // Files are hashed individually; directories contribute every regular file.
  void input(const std::string& path) {
    const fs::path p(path);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) hash(f);
    } else if (fs::is_regular_file(p, ec)) {
      hash(p);
      const fs::path hdr = fs::path(p.string() + ".hdr");
      if (fs::is_regular_file(hdr, ec)) hash(hdr);
    }
  }

  void output(const fs::path& path) { outputs_.push_back(fs::relative(path, out_).generic_string()); }

  void write() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json inputs = json::array();
    for (const auto& [path, digest] : inputs_) inputs.push_back({{"path", path}, {"sha256", digest}});
    json m{{"schema", 1},         {"command", command_},
           {"version", kswap_version()}, {"config", config_},
           {"inputs", inputs},    {"outputs", outputs_},
           {"workers", kswap_workers()}, {"wall_time", wall}};
    write_text(out_ / "run_manifest.json", m.dump(2) + "\n");
  }

 private:
  void hash(const fs::path& f) {
    char* hex = nullptr;
    check(kswap_file_sha256(f.string().c_str(), &hex), "hashing " + f.string());
    inputs_.emplace_back(f.generic_string(), take(hex));
  }

  std::string command_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  json config_ = json::object();
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
};

void write_report(RunManifest& manifest, const fs::path& path, const json& report) {
  write_text(path, report.dump(2) + "\n");
  manifest.output(path);
}

// Defaults and where they come from: [published] values are the method's
// reported settings, [design] values are this toolkit's own choices.
struct Options {
  std::string out;
  double beta = 0.03;            // [published]
  std::string strategy = "3d";   // [published]
  int n_mst = 7;                 // [published]
  int m = 2;                     // [published]
  std::uint64_t seed = 42;       // [design]
  std::string predictor = "baseline";
  std::string mode = "srsim-mst";
  double tolerance = 1.0;        // [design]
  double threshold = 0.5;        // [design]
  std::string aggregation = "mean-probability";
};

void add_transfer_options(CLI::App* cmd, Options& o, bool with_beta = true) {
  if (with_beta)
    cmd->add_option("--beta", o.beta, "Low-frequency disk radius fraction [published: 0.03]")
        ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--strategy", o.strategy, "Donor search: 3d, 2d or 2.5d [published: 3d]")
      ->check(CLI::IsMember({"3d", "2d", "2.5d"}));
  cmd->add_option("--n-mst", o.n_mst, "Donors averaged per slice [published: 7]")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--m", o.m, "2.5D half-window in slices [published: 2]")
      ->check(CLI::NonNegativeNumber);
}

void add_evaluation_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--predictor", o.predictor,
                  "baseline | precomputed:<path> [design: baseline threshold segmenter]");
  cmd->add_option("--mode", o.mode,
                  "naive|none|swap-single|mst|srsim-mst [design: srsim-mst, the full method]")
      ->check(CLI::IsMember({"naive", "none", "swap-single", "mst", "srsim-mst"}));
  cmd->add_option("--seed", o.seed, "Seed for random donor draws [design: 42]");
  cmd->add_option("--tolerance", o.tolerance, "Surface Dice tolerance in voxels [design: 1]")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--threshold", o.threshold, "Probability binarization threshold [design: 0.5]")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--aggregation", o.aggregation,
                  "mean-probability | mean-binarized [published: mean-probability]")
      ->check(CLI::IsMember({"mean-probability", "mean-binarized"}));
}

std::string eval_config(const Options& o) {
  const json cfg{{"mode", o.mode},        {"strategy", o.strategy},
                 {"beta", o.beta},        {"n_mst", o.n_mst},
                 {"m", o.m},              {"seed", o.seed},
                 {"tolerance", o.tolerance}, {"threshold", o.threshold},
                 {"aggregation", o.aggregation}};
  char* resolved = nullptr;
  check(kswap_resolve_config(cfg.dump().c_str(), &resolved), "configuration");
  return take(resolved);
}

AssignmentPtr select(const kswap_volume* target, const kswap_collection* sources,
                     const std::string& strategy, int n, int m, std::uint64_t seed) {
  kswap_assignment* a = nullptr;
  check(kswap_select_donors(target, sources, strategy.c_str(), n, m, seed, &a),
        "selecting donors");
  return AssignmentPtr(a);
}

json assignment_json(const kswap_assignment* a) {
  char* text = nullptr;
  check(kswap_assignment_to_json(a, &text), "donor report");
  return json::parse(take(text));
}

// ---- commands ----

int cmd_adapt(const Options& o, const std::string& target_path, const std::string& sources_dir) {
  const fs::path out(o.out);
  make_dir(out);
  RunManifest manifest("adapt", out);
  manifest.config() = {{"target", target_path}, {"sources", sources_dir}, {"beta", o.beta},
                       {"strategy", o.strategy}, {"n_mst", o.n_mst},    {"m", o.m}};
  manifest.input(target_path);
  manifest.input(sources_dir);

  const auto target = load_volume(target_path);
  const auto sources = load_collection(sources_dir);
  const auto donors = select(target.get(), sources.get(), o.strategy, o.n_mst, o.m, o.seed);

  const std::size_t depth = kswap_assignment_depth(donors.get());
  for (std::size_t r = 0; r < depth; ++r) {
    kswap_volume* v = nullptr;
    check(kswap_adapt_rank(target.get(), sources.get(), donors.get(), o.beta, r, &v), "adapting");
    VolumePtr adapted(v);
    char name[64];
    std::snprintf(name, sizeof name, "adapted_donor%02zu.vol", r);
    save_volume(adapted.get(), out / name);
    manifest.output(out / name);
  }
  kswap_volume* v = nullptr;
  check(kswap_adapt_composite(target.get(), sources.get(), donors.get(), o.beta, &v), "adapting");
  VolumePtr composite(v);
  save_volume(composite.get(), out / "adapted_composite.vol");
  manifest.output(out / "adapted_composite.vol");

  json report{{"schema", 1}, {"beta", o.beta}, {"donors", assignment_json(donors.get())}};
  write_report(manifest, out / "donors.json", report);
  manifest.write();
  std::cout << "adapted " << kswap_volume_id(target.get()) << " with " << depth
            << " donor rank(s) -> " << out.string() << "\n";
  return 0;
}

int cmd_donors(const Options& o, const std::string& target_path, const std::string& sources_dir) {
  const fs::path out(o.out);
  make_dir(out);
  RunManifest manifest("donors", out);
  manifest.config() = {{"target", target_path}, {"sources", sources_dir},
                       {"strategy", o.strategy}, {"n_mst", o.n_mst}, {"m", o.m}};
  manifest.input(target_path);
  manifest.input(sources_dir);

  const auto target = load_volume(target_path);
  const auto sources = load_collection(sources_dir);
  const auto donors = select(target.get(), sources.get(), o.strategy, o.n_mst, o.m, o.seed);
  json report{{"schema", 1}, {"donors", assignment_json(donors.get())}};
  write_report(manifest, out / "donors.json", report);
  manifest.write();
  const auto& first = report["donors"]["per_slice"][0];
  if (!first.empty())
    std::cout << "slice 0 top donor " << first[0]["scan_id"].get<std::string>() << " score "
              << first[0]["score"].get<double>() << "\n";
  return 0;
}

int cmd_evaluate(const Options& o, const std::string& sources_dir, const std::string& targets_dir) {
  const fs::path out(o.out);
  make_dir(out);
  RunManifest manifest("evaluate", out);
  const std::string config = eval_config(o);
  manifest.config() = json::parse(config);
  manifest.config()["sources"] = sources_dir;
  manifest.config()["targets"] = targets_dir;
  manifest.config()["predictor"] = o.predictor;
  if (o.mode != "srsim-mst" && o.mode != "naive" && o.mode != "none")
    manifest.config()["donor_choice"] = "seeded uniform random";
  manifest.input(sources_dir);
  manifest.input(targets_dir);

  const auto sources = load_collection(sources_dir);
  const auto targets = load_collection(targets_dir);
  const auto predictor = make_predictor(o.predictor);
  char* text = nullptr;
  check(kswap_evaluate(sources.get(), targets.get(), predictor.get(), config.c_str(), &text),
        "evaluating");
  json report = json::parse(take(text));
  report["predictor"] = o.predictor;
  write_report(manifest, out / "evaluation.json", report);
  manifest.write();
  std::printf("%s %s surface_dice %.4f dice %.4f\n", report["pair"].get<std::string>().c_str(),
              report["mode"].get<std::string>().c_str(), report["surface_dice"].get<double>(),
              report["dice"].get<double>());
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error("bad beta grid entry '" + item + "'");
    }
  }
  if (grid.empty()) usage_error("beta grid is empty");
  return grid;
}

int cmd_beta_search(const Options& o, const std::vector<std::string>& sources_dirs,
                    const std::vector<std::string>& targets_dirs, const std::string& grid_text) {
  if (sources_dirs.size() != targets_dirs.size())
    usage_error("--sources and --targets must be given the same number of times");
  const fs::path out(o.out);
  make_dir(out);
  RunManifest manifest("beta-search", out);
  const std::string config = eval_config(o);
  manifest.config() = json::parse(config);
  manifest.config().erase("beta");
  manifest.config()["predictor"] = o.predictor;
  json pairs = json::array();
  for (std::size_t i = 0; i < sources_dirs.size(); ++i) {
    pairs.push_back({{"sources", sources_dirs[i]}, {"targets", targets_dirs[i]}});
    manifest.input(sources_dirs[i]);
    manifest.input(targets_dirs[i]);
  }
  manifest.config()["pairs"] = pairs;

  std::vector<double> grid;
  if (!grid_text.empty()) grid = parse_grid(grid_text);
  manifest.config()["grid"] = grid_text.empty() ? json("default") : json(grid);

  std::vector<CollectionPtr> owned;
  std::vector<const kswap_collection*> src, tgt;
  for (std::size_t i = 0; i < sources_dirs.size(); ++i) {
    owned.push_back(load_collection(sources_dirs[i]));
    src.push_back(owned.back().get());
    owned.push_back(load_collection(targets_dirs[i]));
    tgt.push_back(owned.back().get());
  }
  const auto predictor = make_predictor(o.predictor);
  const fs::path png = out / "beta_curves.png";
  char* text = nullptr;
  check(kswap_beta_search(src.data(), tgt.data(), src.size(), grid.empty() ? nullptr : grid.data(),
                          grid.size(), predictor.get(), config.c_str(), png.string().c_str(),
                          &text),
        "beta search");
  json report = json::parse(take(text));
  report["config"].erase("beta");
  write_report(manifest, out / "beta_search.json", report);
  manifest.output(png);
  manifest.write();
  if (report.contains("averaged_optimal"))
    std::printf("averaged-optimal beta %.4g over %zu pair(s)\n",
                report["averaged_optimal"].get<double>(), report["curves"].size());
  for (const auto& f : report["failures"])
    std::fprintf(stderr, "skipped %s: %s\n", f["pair"].get<std::string>().c_str(),
                 f["reason"].get<std::string>().c_str());
  return report["curves"].empty() ? KSWAP_ERR_SHAPE_MISMATCH : 0;
}

int cmd_phantom(const std::string& out_dir, const std::vector<std::string>& severities,
                int n_domains, int scans, std::uint64_t seed, const std::vector<std::size_t>& shape) {
  if (shape.size() != 3) usage_error("--shape takes three sizes: slices rows cols");
  const fs::path out(out_dir);
  make_dir(out);
  RunManifest manifest("phantom", out);
  manifest.config() = {{"severity", severities}, {"domains", n_domains}, {"scans", scans},
                       {"seed", seed},           {"shape", shape}};

  char* tiers_text = nullptr;
  check(kswap_phantom_tiers(&tiers_text), "tier table");
  json index{{"schema", 1}, {"tiers", json::parse(take(tiers_text))}, {"benchmarks", json::array()}};

  for (const auto& severity : severities) {
    kswap_benchmark* b = nullptr;
    check(kswap_benchmark_generate(n_domains, scans, severity.c_str(), seed, shape[0], shape[1],
                                   shape[2], &b),
          "generating " + severity + " phantoms");
    BenchmarkPtr bench(b);
    for (std::size_t d = 0; d < kswap_benchmark_domain_count(b); ++d) {
      const kswap_collection* c = kswap_benchmark_domain(b, d);
      const fs::path dir = out / kswap_collection_domain(c);
      make_dir(dir);
      for (std::size_t s = 0; s < kswap_collection_size(c); ++s) {
        const kswap_volume* scan = kswap_collection_scan(c, s);
        const std::string id = kswap_volume_id(scan);
        save_volume(scan, dir / (id + ".vol"));
        save_volume(kswap_collection_mask(c, s), dir / (id + "_mask.vol"));
        manifest.output(dir / (id + ".vol"));
        manifest.output(dir / (id + "_mask.vol"));
      }
    }
    char* m = nullptr;
    check(kswap_benchmark_manifest(b, &m), "benchmark manifest");
    index["benchmarks"].push_back(json::parse(take(m)));
  }
  write_report(manifest, out / "benchmark.json", index);
  manifest.write();
  std::cout << "wrote " << severities.size() << " tier(s) to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kswap: training-free Fourier amplitude style transfer for volumetric scans"};
  app.require_subcommand(1);
  std::size_t workers = 0;
  app.add_option("--workers", workers,
                 "Worker threads, 0 = KSWAP_WORKERS or all cores [design: 0]");

  Options o;
  std::string target, sources, targets, grid_text;
  std::vector<std::string> sources_list, targets_list;

  auto* adapt = app.add_subcommand("adapt", "Adapt one target scan towards a source domain");
  adapt->add_option("--target", target, "Target scan (.vol or .nii)")->required();
  adapt->add_option("--sources", sources, "Directory of source-domain scans")->required();
  adapt->add_option("--out", o.out, "Output directory")->required();
  add_transfer_options(adapt, o);

  auto* donors = app.add_subcommand("donors", "Rank style donors for a target scan");
  donors->add_option("--target", target, "Target scan (.vol or .nii)")->required();
  donors->add_option("--sources", sources, "Directory of source-domain scans")->required();
  donors->add_option("--out", o.out, "Output directory")->required();
  add_transfer_options(donors, o, false);

  auto* evaluate = app.add_subcommand("evaluate", "Score one source->target domain pair");
  evaluate->add_option("--sources", sources, "Directory of source-domain scans")->required();
  evaluate->add_option("--targets", targets, "Directory of target scans with masks")->required();
  evaluate->add_option("--out", o.out, "Output directory")->required();
  add_transfer_options(evaluate, o);
  add_evaluation_options(evaluate, o);

  auto* beta = app.add_subcommand("beta-search", "Grid-search beta over domain pairs");
  beta->add_option("--sources", sources_list, "Source directory, once per pair")->required();
  beta->add_option("--targets", targets_list, "Target directory, once per pair")->required();
  beta->add_option("--grid", grid_text,
                   "Comma-separated betas [published grid incl. 0.03: 0.01,0.02,0.03,0.05,0.07,0.10]");
  beta->add_option("--out", o.out, "Output directory")->required();
  add_transfer_options(beta, o, false);
  add_evaluation_options(beta, o);

  std::vector<std::string> severities{"subtle", "medium", "severe"};
  int n_domains = 2, scans = 4;
  std::uint64_t phantom_seed = 42;
  std::vector<std::size_t> shape{8, 128, 128};
  std::string phantom_out;
  auto* phantom = app.add_subcommand("phantom", "Generate synthetic multi-domain benchmarks");
  phantom->add_option("--out", phantom_out, "Output directory")->required();
  phantom->add_option("--severity", severities, "Tiers to generate [design: all three]")
      ->check(CLI::IsMember({"subtle", "medium", "severe"}));
  phantom->add_option("--domains", n_domains, "Domains per tier [design: 2]")
      ->check(CLI::Range(2, 64));
  phantom->add_option("--scans", scans, "Scans per domain [design: 4]")->check(CLI::Range(2, 1024));
  phantom->add_option("--seed", phantom_seed, "Benchmark seed [design: 42]");
  phantom->add_option("--shape", shape, "Slices rows cols [design: 8 128 128]")->expected(3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return KSWAP_ERR_INVALID_ARGUMENT;
  }

  try {
    kswap_set_workers(workers);
    if (*adapt) return cmd_adapt(o, target, sources);
    if (*donors) return cmd_donors(o, target, sources);
    if (*evaluate) return cmd_evaluate(o, sources, targets);
    if (*beta) return cmd_beta_search(o, sources_list, targets_list, grid_text);
    if (*phantom) return cmd_phantom(phantom_out, severities, n_domains, scans, phantom_seed, shape);
  } catch (const Failure& f) {
    std::cerr << "kswap: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "kswap: " << e.what() << "\n";
    return KSWAP_ERR_INTERNAL;
  }
  return 0;
}
