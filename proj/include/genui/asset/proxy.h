#pragma once

// Serves the /image and /gen assets referenced by generated pages.

#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "genui/asset/image.h"
#include "genui/asset/request.h"

namespace genui::asset {

class ProviderFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FetchedImage {
  std::string bytes;
  std::string media_type;
};

class ImageProvider {
 public:
  virtual ~ImageProvider() = default;
  virtual std::string name() const = 0;
  // Throws ProviderFailure (or any std::exception) on failure.
  virtual FetchedImage fetch(const AssetRequest& req, int long_edge) = 0;
};

// Deterministic stand-in: generated images are a solid color derived from
// the prompt hash at the requested aspect; search images are square
// two-color stripes derived from the query hash.
class MockImageProvider : public ImageProvider {
 public:
  std::string name() const override { return "mock"; }
  FetchedImage fetch(const AssetRequest& req, int long_edge) override;
};

// Calls GET <endpoint>?q=<text>&aspect=<ratio>&size=<long edge> and expects
// image bytes back. The credential is read from `key_env` per request and
// sent as a bearer token. Images are passed through, not resized.
class HttpImageProvider : public ImageProvider {
 public:
  HttpImageProvider(std::string name, std::string endpoint, std::string key_env,
                    std::chrono::milliseconds timeout = std::chrono::seconds(10));
  std::string name() const override { return name_; }
  FetchedImage fetch(const AssetRequest& req, int long_edge) override;

 private:
  std::string name_;
  std::string endpoint_;
  std::string key_env_;
  std::chrono::milliseconds timeout_;
};

struct AssetRecord {
  AssetRequest request;
  std::shared_ptr<const std::string> bytes;
  std::string media_type;
  std::chrono::system_clock::time_point created;
  std::string provider;  // "fallback" when the provider failed
  int width = 0;
  int height = 0;
  bool fallback = false;
  bool cache_hit = false;
  bool oversize = false;  // passthrough image larger than the thumbnail bound
  std::string failure;    // provider error message for fallbacks
};

// Content-addressed on-disk cache: blobs/<sha256> plus an append-only
// index.jsonl. An empty directory path keeps everything in memory.
class AssetCache {
 public:
  explicit AssetCache(std::filesystem::path dir = {},
                      std::chrono::seconds ttl = std::chrono::hours(24 * 7));

  std::optional<AssetRecord> lookup(const std::string& key) const;
  void insert(const std::string& key, const AssetRecord& rec);
  std::size_t size() const;

 private:
  struct Entry {
    AssetRecord record;
    std::string digest;
  };
  void load_index();

  std::filesystem::path dir_;
  std::chrono::seconds ttl_;
  mutable std::shared_mutex mu_;
  mutable std::map<std::string, Entry> entries_;  // bytes filled lazily
};

struct AssetOptions {
  int long_edge = 512;
  std::filesystem::path cache_dir;  // empty: in-memory cache
  std::chrono::seconds ttl = std::chrono::hours(24 * 7);
};

class AssetService {
 public:
  AssetService(std::shared_ptr<ImageProvider> search_provider,
               std::shared_ptr<ImageProvider> gen_provider, AssetOptions opts = {});

  // Raw query strings as received. Throw BadRequest; never throw for
  // provider failures (those produce a fallback record).
  AssetRecord handle_image(std::string_view raw_query);
  AssetRecord handle_gen(std::string_view raw_query);
  AssetRecord get(const AssetRequest& req);

  const AssetOptions& options() const { return opts_; }

 private:
  AssetRecord produce(const AssetRequest& req, ImageProvider& provider);
  AssetRecord fallback(const AssetRequest& req, const std::string& why) const;

  std::shared_ptr<ImageProvider> search_;
  std::shared_ptr<ImageProvider> gen_;
  AssetOptions opts_;
  AssetCache cache_;
  std::mutex inflight_mu_;
  std::map<std::string, std::shared_future<AssetRecord>> inflight_;
};

}  // namespace genui::asset
