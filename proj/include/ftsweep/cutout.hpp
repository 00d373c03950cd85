#pragma once

#include <httplib.h>

#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ftsweep/catalog.hpp"
#include "ftsweep/csv.hpp"
#include "ftsweep/errors.hpp"
#include "ftsweep/hash.hpp"

namespace ftsweep {

/// Cutout request geometry plus service location.
struct CutoutParams {
  double scale = 0.1;  // arcsec per pixel; 0.1 keeps the object centered and tight
  std::size_t width = 2048;
  std::size_t height = 2048;
  std::string endpoint;  // SkyServer-compatible ImgCutout URL, e.g.
                         // https://skyserver.sdss.org/dr16/SkyServerWS/ImgCutout/getjpeg
  int retries = 3;
  int timeout_seconds = 30;
};

struct HttpResponse {
  int status = 0;
  std::vector<std::uint8_t> body;
  std::string error;  // transport-level failure, empty on success
};

/// Seam for tests: maps a full request URL to a response.
using HttpTransport = std::function<HttpResponse(const std::string& url)>;

inline HttpTransport default_http_transport(int timeout_seconds) {
  return [timeout_seconds](const std::string& url) -> HttpResponse {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      return HttpResponse{0, {}, "malformed URL: " + url};
    }
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_follow_location(true);
    auto res = client.Get(path);
    if (!res) return HttpResponse{0, {}, httplib::to_string(res.error())};
    HttpResponse out;
    out.status = res->status;
    out.body.assign(res->body.begin(), res->body.end());
    return out;
  };
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Content-addressed on-disk cache of raw cutout bytes. Files are written to
/// a temp name and renamed into place, so concurrent writers are safe.
class CutoutCache {
 public:
  explicit CutoutCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  static std::string key(double ra, double dec, double scale, std::size_t width,
                         std::size_t height) {
    std::string material = detail::format_double(ra) + "|" + detail::format_double(dec) + "|" +
                           detail::format_double(scale) + "|" + std::to_string(width) + "|" +
                           std::to_string(height);
    return sha256_hex(material);
  }

  std::filesystem::path path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".jpg");
  }

  std::optional<std::vector<std::uint8_t>> load(const std::string& key) const {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
  }

  void store(const std::string& key, std::span<const std::uint8_t> bytes) const {
    const auto path = path_for(key);
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + "." + std::to_string(std::hash<std::thread::id>{}(
                                               std::this_thread::get_id())) + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw IoError("cannot write cache file " + tmp);
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
  }

  void evict(const std::string& key) const {
    std::error_code ec;
    std::filesystem::remove(path_for(key), ec);
  }

 private:
  std::filesystem::path dir_;
};

struct FetchSummary {
  std::size_t cached = 0;
  std::size_t fetched = 0;
  std::size_t failed = 0;
  // (object_id, reason) for every failed entry; also written to failures.csv
  std::vector<std::pair<std::string, std::string>> failures;
};

/// Fetches cutouts through the cache, hitting the network only on misses.
class CutoutClient {
 public:
  CutoutClient(std::filesystem::path cache_dir, CutoutParams params,
               HttpTransport transport = nullptr)
      : cache_(std::move(cache_dir)),
        params_(std::move(params)),
        transport_(transport ? std::move(transport)
                             : default_http_transport(params_.timeout_seconds)) {}

  const CutoutCache& cache() const { return cache_; }
  const CutoutParams& params() const { return params_; }

  std::string url_for(const CatalogEntry& entry) const {
    return params_.endpoint + "?ra=" + detail::format_double(entry.ra) +
           "&dec=" + detail::format_double(entry.dec) +
           "&scale=" + detail::format_double(params_.scale) +
           "&width=" + std::to_string(params_.width) +
           "&height=" + std::to_string(params_.height);
  }

  std::string key_for(const CatalogEntry& entry) const {
    return CutoutCache::key(entry.ra, entry.dec, params_.scale, params_.width, params_.height);
  }

  /// Cache hit or one network fetch. Throws FetchFailedError with the entry
  /// id after the configured retries.
  std::vector<std::uint8_t> fetch(const CatalogEntry& entry) const {
    const auto key = key_for(entry);
    if (auto cached = cache_.load(key)) {
      if (looks_like_image(*cached)) return *cached;
      cache_.evict(key);  // corrupt cache entry: refetch below
    }
    return fetch_from_network(entry, key);
  }

  /// Like fetch(), but when a cached payload later fails to decode the
  /// caller can force one evict-and-refetch pass.
  std::vector<std::uint8_t> refetch(const CatalogEntry& entry) const {
    const auto key = key_for(entry);
    cache_.evict(key);
    return fetch_from_network(entry, key);
  }

  /// Populate the cache for a whole catalog with bounded parallelism.
  /// Failed entries are recorded, not fatal; a failures.csv manifest is
  /// written into the cache directory.
  FetchSummary fetch_all(std::span<const CatalogEntry> entries, std::size_t parallelism = 4) const {
    FetchSummary summary;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, entries.size()));

    auto work = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= entries.size()) return;
        const auto& entry = entries[i];
        const auto key = key_for(entry);
        const bool was_cached = cache_.load(key).has_value();
        try {
          fetch(entry);
          std::lock_guard<std::mutex> lock(mu);
          if (was_cached) summary.cached++;
          else summary.fetched++;
        } catch (const FetchFailedError& e) {
          std::lock_guard<std::mutex> lock(mu);
          summary.failed++;
          summary.failures.emplace_back(entry.object_id, e.what());
        }
      }
    };

    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    write_failures_manifest(summary);
    return summary;
  }

  static bool looks_like_image(std::span<const std::uint8_t> bytes) {
    // JPEG SOI or PNG signature; full decode happens downstream
    if (bytes.size() < 4) return false;
    if (bytes[0] == 0xFF && bytes[1] == 0xD8) return true;
    if (bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G') return true;
    return false;
  }

 private:
  std::vector<std::uint8_t> fetch_from_network(const CatalogEntry& entry,
                                               const std::string& key) const {
    const std::string url = url_for(entry);
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, params_.retries); ++attempt) {
      HttpResponse resp = transport_(url);
      if (resp.status == 200 && !resp.body.empty()) {
        cache_.store(key, resp.body);
        return std::move(resp.body);
      }
      last_error = !resp.error.empty() ? resp.error : "HTTP status " + std::to_string(resp.status);
    }
    throw FetchFailedError("cutout fetch failed for " + entry.object_id + ": " + last_error);
  }

  void write_failures_manifest(const FetchSummary& summary) const {
    const auto path = cache_.dir() / "failures.csv";
    std::ofstream out(path, std::ios::trunc);
    out << "objid,reason\n";
    for (const auto& [id, reason] : summary.failures) {
      out << csv_escape(id) << "," << csv_escape(reason) << "\n";
    }
  }

  CutoutCache cache_;
  CutoutParams params_;
  HttpTransport transport_;
};

}  // namespace ftsweep
