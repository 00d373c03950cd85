#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftsweep/csv.hpp"
#include "ftsweep/errors.hpp"

namespace ftsweep {

/// The three sky-object categories, in canonical index order.
enum class ObjectClass : int { kGalaxy = 0, kQso = 1, kStar = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{
    "GALAXY", "QSO", "STAR"};

inline std::string_view class_name(ObjectClass c) {
  return kClassNames[static_cast<std::size_t>(c)];
}

inline std::optional<ObjectClass> parse_class(std::string_view s) {
  std::string upper;
  upper.reserve(s.size());
  for (char c : s) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (upper == kClassNames[i]) return static_cast<ObjectClass>(i);
  }
  return std::nullopt;
}

/// One sky object from the tabular catalog.
struct CatalogEntry {
  std::string object_id;
  double ra = 0.0;   // degrees, [0, 360)
  double dec = 0.0;  // degrees, [-90, 90]
  ObjectClass label = ObjectClass::kGalaxy;
};

/// Column names in the catalog CSV; override when the survey export differs.
struct CatalogColumns {
  std::string ra = "ra";
  std::string dec = "dec";
  std::string label = "class";
  std::string id = "objid";  // optional column
};

struct CatalogParseReport {
  std::size_t rows_total = 0;
  std::size_t rows_accepted = 0;
  std::size_t rows_bad_coordinate = 0;
  std::size_t rows_unknown_label = 0;
  std::vector<std::string> messages;
};

namespace detail {
inline std::optional<double> parse_double(const std::string& s) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}
}  // namespace detail

/// Parse a catalog CSV into entries, input order preserved. Rows with
/// out-of-bounds or unparsable coordinates, or labels outside the three
/// categories, are rejected and counted; a missing required column is fatal.
inline std::vector<CatalogEntry> parse_catalog(const CsvTable& table,
                                               const CatalogColumns& columns = {},
                                               CatalogParseReport* report = nullptr) {
  const int ra_col = table.column(columns.ra);
  const int dec_col = table.column(columns.dec);
  const int label_col = table.column(columns.label);
  const int id_col = table.column(columns.id);
  if (ra_col < 0) throw MissingColumnError("catalog is missing column '" + columns.ra + "'");
  if (dec_col < 0) throw MissingColumnError("catalog is missing column '" + columns.dec + "'");
  if (label_col < 0) throw MissingColumnError("catalog is missing column '" + columns.label + "'");

  CatalogParseReport local;
  CatalogParseReport& rep = report != nullptr ? *report : local;
  rep = CatalogParseReport{};

  std::vector<CatalogEntry> entries;
  entries.reserve(table.rows.size());
  const std::size_t min_cols =
      static_cast<std::size_t>(std::max({ra_col, dec_col, label_col})) + 1;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    rep.rows_total++;
    if (row.size() < min_cols) {
      rep.rows_bad_coordinate++;
      rep.messages.push_back("row " + std::to_string(r + 1) + ": too few fields");
      continue;
    }
    const auto ra = detail::parse_double(row[static_cast<std::size_t>(ra_col)]);
    const auto dec = detail::parse_double(row[static_cast<std::size_t>(dec_col)]);
    if (!ra || !dec || *ra < 0.0 || *ra >= 360.0 || *dec < -90.0 || *dec > 90.0) {
      rep.rows_bad_coordinate++;
      rep.messages.push_back("row " + std::to_string(r + 1) + ": bad coordinate");
      continue;
    }
    const auto label = parse_class(row[static_cast<std::size_t>(label_col)]);
    if (!label) {
      rep.rows_unknown_label++;
      rep.messages.push_back("row " + std::to_string(r + 1) + ": unknown label '" +
                             row[static_cast<std::size_t>(label_col)] + "'");
      continue;
    }
    CatalogEntry entry;
    entry.ra = *ra;
    entry.dec = *dec;
    entry.label = *label;
    if (id_col >= 0 && static_cast<std::size_t>(id_col) < row.size()) {
      entry.object_id = row[static_cast<std::size_t>(id_col)];
    } else {
      entry.object_id = "row" + std::to_string(r + 1);
    }
    entries.push_back(std::move(entry));
    rep.rows_accepted++;
  }
  return entries;
}

inline std::vector<CatalogEntry> parse_catalog(const std::filesystem::path& path,
                                               const CatalogColumns& columns = {},
                                               CatalogParseReport* report = nullptr) {
  return parse_catalog(read_csv(path), columns, report);
}

/// Per-category counts and shares.
struct ClassStats {
  std::array<std::uint64_t, kNumClasses> counts{};
  std::array<double, kNumClasses> fractions{};
  std::uint64_t total = 0;
};

inline ClassStats class_distribution(std::span<const CatalogEntry> entries) {
  if (entries.empty()) throw EmptyDatasetError("class_distribution on empty catalog");
  ClassStats stats;
  for (const auto& e : entries) {
    stats.counts[static_cast<std::size_t>(e.label)]++;
  }
  stats.total = entries.size();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    stats.fractions[c] = static_cast<double>(stats.counts[c]) / static_cast<double>(stats.total);
  }
  return stats;
}

inline ClassStats class_distribution(std::span<const ObjectClass> labels) {
  if (labels.empty()) throw EmptyDatasetError("class_distribution on empty label list");
  ClassStats stats;
  for (ObjectClass l : labels) stats.counts[static_cast<std::size_t>(l)]++;
  stats.total = labels.size();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    stats.fractions[c] = static_cast<double>(stats.counts[c]) / static_cast<double>(stats.total);
  }
  return stats;
}

enum class WeightScheme { kInverseFrequency, kNone };

inline std::optional<WeightScheme> parse_weight_scheme(std::string_view s) {
  if (s == "inverse_frequency") return WeightScheme::kInverseFrequency;
  if (s == "none") return WeightScheme::kNone;
  return std::nullopt;
}

/// Per-category loss multipliers.
struct WeightMap {
  std::array<double, kNumClasses> weights{1.0, 1.0, 1.0};

  double operator[](std::size_t c) const { return weights[c]; }
  double for_class(ObjectClass c) const { return weights[static_cast<std::size_t>(c)]; }
};

/// Inverse frequency: w_c = N / (C * n_c), so that w_c * n_c is equal for
/// every category. Scheme none yields unit weights.
inline WeightMap compute_class_weights(const ClassStats& stats, WeightScheme scheme) {
  WeightMap map;
  if (scheme == WeightScheme::kNone) return map;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (stats.counts[c] == 0) {
      throw ZeroCountError("inverse-frequency weights need a nonzero count for class " +
                           std::string(kClassNames[c]));
    }
    map.weights[c] = static_cast<double>(stats.total) /
                     (static_cast<double>(kNumClasses) * static_cast<double>(stats.counts[c]));
  }
  return map;
}

/// Same weighting, but tolerant of classes absent from the data: the balance
/// is computed over the classes actually present and absent classes weigh
/// zero, since no sample can draw on them. Subsampled catalogs routinely
/// lose the rarest class, which should degrade a run, not abort it.
inline WeightMap lenient_class_weights(const ClassStats& stats, WeightScheme scheme,
                                       std::vector<std::string>* warnings = nullptr) {
  if (scheme == WeightScheme::kNone) return WeightMap{};
  std::size_t present = 0;
  for (const auto count : stats.counts) present += count > 0 ? 1 : 0;
  if (present == kNumClasses) return compute_class_weights(stats, scheme);
  WeightMap map;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (stats.counts[c] == 0) {
      map.weights[c] = 0.0;
      if (warnings != nullptr) {
        warnings->push_back("class " + std::string(kClassNames[c]) +
                            " has no samples and gets weight zero");
      }
      continue;
    }
    map.weights[c] = static_cast<double>(stats.total) /
                     (static_cast<double>(present) * static_cast<double>(stats.counts[c]));
  }
  return map;
}

}  // namespace ftsweep
