#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "ftsweep/catalog.hpp"
#include "ftsweep/config.hpp"
#include "ftsweep/cutout.hpp"
#include "ftsweep/errors.hpp"
#include "ftsweep/image.hpp"
#include "ftsweep/rng.hpp"
#include "ftsweep/split.hpp"
#include "ftsweep/synthetic.hpp"
#include "ftsweep/trainer.hpp"

namespace ftsweep {

struct PreparedData {
  Dataset train;
  Dataset val;
  ClassStats stats;   // over every loaded sample, before the split
  WeightMap weights;  // training loss weights under the configured scheme
  std::vector<std::string> warnings;
  std::size_t dropped = 0;  // catalog rows lost to fetch or decode failures
};

namespace detail {

/// First N rows, or a seed-stable N-row sample keeping catalog order.
inline std::vector<CatalogEntry> select_subset(std::vector<CatalogEntry> entries, std::size_t n,
                                               bool random, std::uint64_t seed) {
  if (n == 0 || n >= entries.size()) return entries;
  if (!random) {
    entries.resize(n);
    return entries;
  }
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, "subset"));
  rng.shuffle(order);
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<CatalogEntry> out;
  out.reserve(n);
  for (const std::size_t i : order) out.push_back(std::move(entries[i]));
  return out;
}

inline void split_samples(std::vector<ImageSample> samples, double fraction, std::uint64_t seed,
                          PreparedData& out) {
  std::vector<ObjectClass> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.label);
  out.stats = class_distribution(std::span<const ObjectClass>(labels));

  SplitResult split = stratified_split(labels, fraction, seed);
  for (const auto& w : split.warnings) out.warnings.push_back(w);
  out.train.reserve(split.train.size());
  out.val.reserve(split.val.size());
  for (const std::size_t i : split.train) out.train.push_back(std::move(samples[i]));
  for (const std::size_t i : split.val) out.val.push_back(std::move(samples[i]));
}

}  // namespace detail

/// Loads the configured dataset (synthetic render or cached catalog cutouts),
/// stratifies it into train/val, and derives the class weights. With
/// `allow_download` false a cache miss marks the entry failed instead of
/// touching the network.
inline PreparedData prepare_data(const AppConfig& cfg, bool allow_download = true) {
  PreparedData out;
  std::vector<ImageSample> samples;

  if (cfg.data.source == "synthetic") {
    samples = make_synthetic_dataset(cfg.data.synthetic);
  } else {
    CatalogParseReport report;
    auto entries = parse_catalog(cfg.data.catalog, {}, &report);
    for (const auto& m : report.messages) out.warnings.push_back(m);
    if (entries.empty()) {
      throw EmptyDatasetError("catalog " + cfg.data.catalog.string() + " has no usable rows");
    }
    entries = detail::select_subset(std::move(entries), cfg.data.subset, cfg.data.random_subset,
                                    cfg.data.split_seed);

    HttpTransport transport = nullptr;
    if (!allow_download) {
      transport = [](const std::string&) {
        return HttpResponse{0, {}, "downloads disabled"};
      };
    }
    const CutoutClient client(cfg.data.cache_dir, cfg.data.cutout_params(), std::move(transport));

    for (const auto& entry : entries) {
      try {
        auto bytes = client.fetch(entry);
        ImageSample sample;
        sample.object_id = entry.object_id;
        sample.label = entry.label;
        sample.size = cfg.data.image_size;
        try {
          sample.pixels = preprocess_image(bytes, cfg.data.image_size);
        } catch (const DecodeError&) {
          // cached payload went bad after the signature check: one refetch
          if (!allow_download) throw;
          bytes = client.refetch(entry);
          sample.pixels = preprocess_image(bytes, cfg.data.image_size);
        }
        samples.push_back(std::move(sample));
      } catch (const Error& e) {
        out.dropped++;
        out.warnings.push_back("entry " + entry.object_id + " dropped: " + e.what());
      }
    }
    if (samples.empty()) {
      throw EmptyDatasetError("no catalog entries could be loaded from the cache" +
                              std::string(allow_download ? " or the network" : ""));
    }
  }

  detail::split_samples(std::move(samples), cfg.data.train_fraction, cfg.data.split_seed, out);
  out.weights = lenient_class_weights(out.stats, cfg.train.weight_scheme, &out.warnings);
  return out;
}

}  // namespace ftsweep
