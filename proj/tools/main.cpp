#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ftsweep/analysis.hpp"
#include "ftsweep/config.hpp"
#include "ftsweep/pipeline.hpp"
#include "ftsweep/plots.hpp"
#include "ftsweep/registry.hpp"
#include "ftsweep/sweep.hpp"

namespace {

using namespace ftsweep;

/// Layer math needs only the IR; stock architectures get it from their
/// manifests without allocating weight buffers.
ModelIR ir_for(const std::string& arch, const ArchDescriptor& desc) {
  try {
    return detail::manifest_ir(arch, desc.input_size, desc.feature_dim, 3);
  } catch (const UnknownArchitectureError&) {
    LoadOptions opts;
    return BackboneRegistry::instance().load(arch, opts)->ir();
  }
}

void register_custom_backbones(const AppConfig& cfg) {
  for (const auto& arch : cfg.sweep.architectures) {
    if (arch == "tinycnn" && !BackboneRegistry::instance().has(arch)) {
      const std::size_t input = cfg.data.source == "synthetic" ? cfg.data.synthetic.image_size
                                                               : cfg.data.image_size;
      register_builtin_tiny(input);
    }
  }
}

int cmd_fetch(const AppConfig& cfg, bool no_download) {
  if (cfg.data.source != "catalog") {
    throw ConfigError("fetch needs [data] source = \"catalog\"");
  }
  if (cfg.data.endpoint.empty()) {
    throw ConfigError("[data] endpoint is required to fetch cutouts");
  }
  if (no_download) {
    throw ConfigError("fetch downloads cutouts; drop --no-download");
  }
  CatalogParseReport report;
  auto entries = parse_catalog(cfg.data.catalog, {}, &report);
  for (const auto& m : report.messages) std::fprintf(stderr, "warning: %s\n", m.c_str());
  entries = detail::select_subset(std::move(entries), cfg.data.subset, cfg.data.random_subset,
                                  cfg.data.split_seed);
  const CutoutClient client(cfg.data.cache_dir, cfg.data.cutout_params());
  const FetchSummary summary = client.fetch_all(entries, cfg.data.fetch_workers);
  std::printf("cached %zu, fetched %zu, failed %zu\n", summary.cached, summary.fetched,
              summary.failed);
  if (summary.failed > 0) {
    std::printf("failed entries recorded in %s\n",
                (cfg.data.cache_dir / "failures.csv").string().c_str());
  }
  return 0;
}

int cmd_prepare(const AppConfig& cfg, bool no_download) {
  const PreparedData data = prepare_data(cfg, !no_download);
  for (const auto& w : data.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("samples: %llu (train %zu, val %zu)",
              static_cast<unsigned long long>(data.stats.total), data.train.size(),
              data.val.size());
  if (data.dropped > 0) std::printf(", dropped %zu", data.dropped);
  std::printf("\n");
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::printf("  %-6s count %-6llu share %.3f weight %.4f\n", std::string(kClassNames[c]).c_str(),
                static_cast<unsigned long long>(data.stats.counts[c]), data.stats.fractions[c],
                data.weights.for_class(static_cast<ObjectClass>(c)));
  }
  return 0;
}

int cmd_sweep(const AppConfig& cfg, bool no_download, bool dry_run, bool resume,
              bool mock_trainer) {
  if (cfg.sweep.architectures.empty()) {
    throw ConfigError("[sweep] architectures must list at least one backbone");
  }
  register_custom_backbones(cfg);
  const auto& registry = BackboneRegistry::instance();

  SweepRequest req;
  req.architectures = cfg.sweep.architectures;
  req.schedule = cfg.sweep.schedule;
  req.train = cfg.train;
  req.pretrained = cfg.weights.pretrained;
  req.weights_dir = cfg.weights.dir;
  req.resume = resume;
  req.store_path = cfg.store_path();
  req.manifest_path = cfg.manifest_path();

  if (dry_run) {
    std::printf("%-16s %6s %18s %16s\n", "architecture", "depth", "trainable_params",
                "total_params");
    for (const auto& arch : req.architectures) {
      const ArchDescriptor& desc = registry.describe(arch);
      const auto schedule = detail::resolve_schedule(req, desc);
      const ModelIR ir = ir_for(arch, desc);
      for (const std::size_t depth : schedule) {
        const FreezePlan plan = make_freeze_plan(ir, depth);
        std::printf("%-16s %6zu %18zu %16zu\n", arch.c_str(), depth, plan.trainable_params,
                    plan.total_params);
      }
    }
    return 0;
  }

  const std::string trainer_kind = mock_trainer ? "mock" : cfg.sweep.trainer;
  const auto trainer = make_trainer(trainer_kind);

  const PreparedData data = prepare_data(cfg, !no_download);
  for (const auto& w : data.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  const SweepSummary summary = run_sweep(req, *trainer, data.train, data.val);
  std::printf("rungs: planned %zu, executed %zu, skipped %zu, failed %zu\n", summary.planned,
              summary.executed, summary.skipped, summary.failed);
  for (const auto& r : summary.records) {
    if (r.status == "ok") {
      std::printf("  %-16s depth %-4zu val_acc %.4f (epoch %zu)\n", r.architecture.c_str(),
                  r.depth, r.best_val_accuracy, r.best_epoch);
    } else {
      std::printf("  %-16s depth %-4zu FAILED: %s\n", r.architecture.c_str(), r.depth,
                  r.error.c_str());
    }
  }
  return summary.failed > 0 ? 2 : 0;
}

int cmd_report(const AppConfig& cfg) {
  RunStore store(cfg.store_path());
  if (!store.exists()) {
    throw StoreMissingError("no run store at " + cfg.store_path().string() +
                            "; run a sweep first");
  }
  RunStore::LoadReport load_report;
  const auto records = store.load(&load_report);
  for (const auto& w : load_report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  const Report report = build_report(records, cfg.analysis.dip_delta, cfg.analysis.near_peak_eps);
  const auto dir = cfg.report_dir();
  std::filesystem::create_directories(dir);
  write_report_csv(report, dir / "report.csv");
  write_report_markdown(report, dir / "report.md");
  write_report_json(report, dir / "report.json");
  const PlotResult plots = write_plots(records, dir);
  for (const auto& w : plots.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  std::printf("%-16s %6s %12s %8s %8s %8s %-12s\n", "architecture", "depth", "params", "l-ratio",
              "p-ratio", "acc%", "shape");
  for (const auto& r : report.rows) {
    std::printf("%-16s %6zu %12zu %8s %8s %8s %-12s\n", r.architecture.c_str(), r.best_depth,
                r.trainable_params, format_ratio(r.layer_ratio).c_str(),
                format_ratio(r.param_ratio).c_str(), format_percent(r.val_accuracy).c_str(),
                r.shape ? std::string(shape_name(*r.shape)).c_str() : "unclassified");
  }
  std::printf("report written to %s\n", dir.string().c_str());
  return load_report.corrupted > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depth-sweep harness for layer-wise fine-tuning of image classifiers"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::string cache_dir_override, weights_dir_override;
  std::int64_t seed_override = -1;
  bool no_download = false, dry_run = false, resume = false, mock_trainer = false;

  app.add_option("--config", config_path, "TOML config file")->required();
  app.add_option("--cache-dir", cache_dir_override, "override [data] cache_dir");
  app.add_option("--weights-dir", weights_dir_override, "override [weights] dir");
  app.add_option("--seed", seed_override, "override every seed in the config");
  app.add_flag("--no-download", no_download, "never touch the network; cache misses fail");
  app.add_flag("--dry-run", dry_run, "print the rung table without training");
  app.add_flag("--resume", resume, "continue an interrupted sweep in place");
  app.add_flag("--mock-trainer", mock_trainer, "substitute the deterministic mock trainer");

  auto* fetch_cmd = app.add_subcommand("fetch", "download catalog cutouts into the cache");
  auto* prepare_cmd = app.add_subcommand("prepare", "load, split, and summarize the dataset");
  auto* sweep_cmd = app.add_subcommand("sweep", "train the depth ladder of each architecture");
  auto* report_cmd = app.add_subcommand("report", "build report files and plots from the store");

  CLI11_PARSE(app, argc, argv);

  try {
    AppConfig cfg = load_config(config_path);
    if (!cache_dir_override.empty()) cfg.data.cache_dir = cache_dir_override;
    if (!weights_dir_override.empty()) cfg.weights.dir = weights_dir_override;
    if (seed_override >= 0) {
      const auto seed = static_cast<std::uint64_t>(seed_override);
      cfg.train.seed = seed;
      cfg.data.split_seed = seed;
      cfg.data.synthetic.seed = seed;
    }

    if (fetch_cmd->parsed()) return cmd_fetch(cfg, no_download);
    if (prepare_cmd->parsed()) return cmd_prepare(cfg, no_download);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, no_download, dry_run, resume, mock_trainer);
    if (report_cmd->parsed()) return cmd_report(cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
