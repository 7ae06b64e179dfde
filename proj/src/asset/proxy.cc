#include "genui/asset/proxy.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "genui/net/http_client.h"
#include "genui/util/digest.h"
#include "genui/util/files.h"
#include "genui/util/strings.h"

namespace genui::asset {

using Json = nlohmann::json;
using Clock = std::chrono::system_clock;

namespace {

Rgb color_from(std::uint64_t h) {
  return {static_cast<std::uint8_t>(h >> 16), static_cast<std::uint8_t>(h >> 8),
          static_cast<std::uint8_t>(h)};
}

std::string striped_png(int side, std::uint64_t h, std::string_view description) {
  Rgb a = color_from(h);
  Rgb b = color_from(splitmix64(h));
  int stripe = 8 + static_cast<int>((h >> 32) % 56);
  std::string px;
  px.reserve(static_cast<std::size_t>(side) * side * 3);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const Rgb& c = ((x + y) / stripe) % 2 ? b : a;
      px.push_back(static_cast<char>(c.r));
      px.push_back(static_cast<char>(c.g));
      px.push_back(static_cast<char>(c.b));
    }
  }
  return encode_png(side, side, px, description);
}

std::int64_t to_millis(Clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

std::string cache_key(const std::string& provider, const AssetRequest& req) {
  return provider + '\n' + req.key();
}

}  // namespace

FetchedImage MockImageProvider::fetch(const AssetRequest& req, int long_edge) {
  std::uint64_t h = fnv1a64(req.key());
  if (req.kind == AssetKind::kSearchImage) {
    return {striped_png(long_edge, h, req.text), "image/png"};
  }
  auto [w, hgt] = dimensions(req.aspect, long_edge);
  return {solid_png(w, hgt, color_from(h), req.text), "image/png"};
}

HttpImageProvider::HttpImageProvider(std::string name, std::string endpoint, std::string key_env,
                                     std::chrono::milliseconds timeout)
    : name_(std::move(name)),
      endpoint_(std::move(endpoint)),
      key_env_(std::move(key_env)),
      timeout_(timeout) {}

FetchedImage HttpImageProvider::fetch(const AssetRequest& req, int long_edge) {
  std::string url = endpoint_;
  url += endpoint_.find('?') == std::string::npos ? '?' : '&';
  url += "q=" + url_encode(req.text) + "&aspect=" + url_encode(to_string(req.aspect)) +
         "&size=" + std::to_string(long_edge);
  net::Headers headers;
  if (!key_env_.empty()) {
    const char* key = std::getenv(key_env_.c_str());
    if (!key || !*key) throw ProviderFailure(name_ + ": credential " + key_env_ + " is not set");
    headers["Authorization"] = std::string("Bearer ") + key;
  }
  auto resp = net::http_get(url, headers, timeout_);
  if (!resp.error.empty()) throw ProviderFailure(name_ + ": " + resp.error);
  if (!resp.ok()) throw ProviderFailure(name_ + ": HTTP " + std::to_string(resp.status));
  auto info = sniff_image(resp.body);
  if (!info) throw ProviderFailure(name_ + ": response is not a recognized image");
  return {std::move(resp.body), info->media_type};
}

AssetCache::AssetCache(std::filesystem::path dir, std::chrono::seconds ttl)
    : dir_(std::move(dir)), ttl_(ttl) {
  if (!dir_.empty()) {
    std::filesystem::create_directories(dir_ / "blobs");
    load_index();
  }
}

void AssetCache::load_index() {
  std::ifstream in(dir_ / "index.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;  // torn final line
    Entry e;
    e.digest = j.value("sha256", "");
    auto blob = dir_ / "blobs" / e.digest;
    if (e.digest.empty() || !std::filesystem::exists(blob)) continue;
    AssetRecord& r = e.record;
    r.request.kind = j.value("kind", "") == "generated_image" ? AssetKind::kGeneratedImage
                                                              : AssetKind::kSearchImage;
    r.request.text = j.value("text", "");
    r.request.aspect = parse_aspect(j.value("aspect", "1:1")).value_or(Aspect::k1x1);
    r.provider = j.value("provider", "");
    r.media_type = j.value("media_type", "");
    r.width = j.value("width", 0);
    r.height = j.value("height", 0);
    r.oversize = j.value("oversize", false);
    r.created = Clock::time_point(std::chrono::milliseconds(j.value("created", std::int64_t{0})));
    entries_[j.value("key", "")] = std::move(e);
  }
}

std::optional<AssetRecord> AssetCache::lookup(const std::string& key) const {
  std::string digest;
  AssetRecord rec;
  {
    std::shared_lock lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    if (Clock::now() - it->second.record.created > ttl_) return std::nullopt;
    rec = it->second.record;
    digest = it->second.digest;
  }
  if (!rec.bytes) {
    // Loaded from the index; bytes stay on disk until first use.
    try {
      rec.bytes = std::make_shared<const std::string>(read_file(dir_ / "blobs" / digest));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    std::unique_lock lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end() && it->second.digest == digest) it->second.record.bytes = rec.bytes;
  }
  return rec;
}

void AssetCache::insert(const std::string& key, const AssetRecord& rec) {
  Entry e{rec, sha256_hex(*rec.bytes)};
  if (!dir_.empty()) {
    auto blob = dir_ / "blobs" / e.digest;
    if (!std::filesystem::exists(blob)) write_file_atomic(blob, *rec.bytes);
  }
  std::unique_lock lock(mu_);
  if (!dir_.empty()) {
    Json j{{"key", key},
           {"kind", to_string(rec.request.kind)},
           {"text", rec.request.text},
           {"aspect", to_string(rec.request.aspect)},
           {"provider", rec.provider},
           {"sha256", e.digest},
           {"media_type", rec.media_type},
           {"created", to_millis(rec.created)},
           {"width", rec.width},
           {"height", rec.height},
           {"oversize", rec.oversize}};
    append_line(dir_ / "index.jsonl", j.dump());
  }
  entries_[key] = std::move(e);
}

std::size_t AssetCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

AssetService::AssetService(std::shared_ptr<ImageProvider> search_provider,
                           std::shared_ptr<ImageProvider> gen_provider, AssetOptions opts)
    : search_(std::move(search_provider)),
      gen_(std::move(gen_provider)),
      opts_(std::move(opts)),
      cache_(opts_.cache_dir, opts_.ttl) {}

AssetRecord AssetService::handle_image(std::string_view raw_query) {
  return get(parse_image_query(raw_query));
}

AssetRecord AssetService::handle_gen(std::string_view raw_query) {
  return get(parse_gen_query(raw_query));
}

AssetRecord AssetService::get(const AssetRequest& req) {
  ImageProvider& provider = req.kind == AssetKind::kSearchImage ? *search_ : *gen_;
  const std::string key = cache_key(provider.name(), req);
  if (auto hit = cache_.lookup(key)) {
    hit->cache_hit = true;
    return *hit;
  }

  std::shared_future<AssetRecord> waiting;
  std::promise<AssetRecord> promise;
  {
    std::lock_guard lock(inflight_mu_);
    auto it = inflight_.find(key);
    if (it != inflight_.end()) {
      waiting = it->second;
    } else {
      // A flight that finished between the lookup above and this lock has
      // already inserted into the cache.
      if (auto hit = cache_.lookup(key)) {
        hit->cache_hit = true;
        return *hit;
      }
      inflight_.emplace(key, promise.get_future().share());
    }
  }
  if (waiting.valid()) {
    AssetRecord rec = waiting.get();
    rec.cache_hit = !rec.fallback;
    return rec;
  }

  AssetRecord rec = produce(req, provider);
  if (!rec.fallback) cache_.insert(key, rec);
  promise.set_value(rec);
  {
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key);
  }
  return rec;
}

AssetRecord AssetService::produce(const AssetRequest& req, ImageProvider& provider) {
  FetchedImage img;
  try {
    img = provider.fetch(req, opts_.long_edge);
  } catch (const std::exception& e) {
    return fallback(req, e.what());
  }
  auto info = sniff_image(img.bytes);
  AssetRecord rec;
  rec.request = req;
  rec.media_type = info ? info->media_type : img.media_type;
  rec.width = info ? info->width : 0;
  rec.height = info ? info->height : 0;
  rec.oversize = std::max(rec.width, rec.height) > opts_.long_edge;
  rec.bytes = std::make_shared<const std::string>(std::move(img.bytes));
  rec.created = Clock::now();
  rec.provider = provider.name();
  return rec;
}

AssetRecord AssetService::fallback(const AssetRequest& req, const std::string& why) const {
  auto [w, h] = req.kind == AssetKind::kGeneratedImage ? dimensions(req.aspect, opts_.long_edge)
                                                       : std::pair{opts_.long_edge, opts_.long_edge};
  AssetRecord rec;
  rec.request = req;
  rec.bytes = std::make_shared<const std::string>(solid_png(w, h, {0x9e, 0x9e, 0x9e}, req.text));
  rec.media_type = "image/png";
  rec.width = w;
  rec.height = h;
  rec.created = Clock::now();
  rec.provider = "fallback";
  rec.fallback = true;
  rec.failure = why;
  return rec;
}

}  // namespace genui::asset
