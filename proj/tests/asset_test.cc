#include <gtest/gtest.h>
#include <zlib.h>

#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

#include "genui/asset/grammar.h"
#include "genui/asset/proxy.h"
#include "genui/html/dom.h"

using namespace genui;
using namespace genui::asset;

namespace {

// Reads width/height straight from the IHDR chunk and inflates the IDAT
// stream, independent of the library's sniffer.
struct DecodedPng {
  std::uint32_t width = 0, height = 0;
  std::size_t raw_size = 0;
  std::string text;
};

std::uint32_t be32(const std::string& s, std::size_t at) {
  return (std::uint32_t(std::uint8_t(s[at])) << 24) | (std::uint32_t(std::uint8_t(s[at + 1])) << 16) |
         (std::uint32_t(std::uint8_t(s[at + 2])) << 8) | std::uint32_t(std::uint8_t(s[at + 3]));
}

DecodedPng decode_png(const std::string& png) {
  DecodedPng out;
  EXPECT_EQ(png.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8));
  std::string idat;
  for (std::size_t at = 8; at + 8 <= png.size();) {
    std::uint32_t len = be32(png, at);
    std::string type = png.substr(at + 4, 4);
    std::string body = png.substr(at + 8, len);
    std::uint32_t crc = be32(png, at + 8 + len);
    uLong expect = crc32(0, reinterpret_cast<const Bytef*>(png.data() + at + 4), len + 4);
    EXPECT_EQ(crc, expect) << type;
    if (type == "IHDR") {
      out.width = be32(body, 0);
      out.height = be32(body, 4);
    } else if (type == "IDAT") {
      idat += body;
    } else if (type == "tEXt") {
      out.text = body;
    }
    at += 12 + len;
  }
  std::string raw(static_cast<std::size_t>(out.height) * (1 + 3 * out.width) + 16, '\0');
  uLongf raw_len = raw.size();
  EXPECT_EQ(uncompress(reinterpret_cast<Bytef*>(raw.data()), &raw_len,
                       reinterpret_cast<const Bytef*>(idat.data()), idat.size()),
            Z_OK);
  out.raw_size = raw_len;
  return out;
}

class CountingProvider : public ImageProvider {
 public:
  explicit CountingProvider(std::chrono::milliseconds delay = {}, bool fail = false)
      : delay_(delay), fail_(fail) {}
  std::string name() const override { return "counting"; }
  FetchedImage fetch(const AssetRequest& req, int long_edge) override {
    calls.fetch_add(1);
    std::this_thread::sleep_for(delay_);
    if (fail_) throw ProviderFailure("provider down");
    return inner_.fetch(req, long_edge);
  }
  std::atomic<int> calls{0};

 private:
  MockImageProvider inner_;
  std::chrono::milliseconds delay_;
  bool fail_;
};

AssetService mock_service(AssetOptions opts = {}) {
  auto mock = std::make_shared<MockImageProvider>();
  return AssetService(mock, mock, std::move(opts));
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("genui_asset_" + name + "_" +
                                                     std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(AssetRequestTest, AcceptsExactlyTheFiveAspects) {
  const std::pair<const char*, std::pair<int, int>> accepted[] = {
      {"1:1", {1, 1}}, {"3:4", {3, 4}}, {"4:3", {4, 3}}, {"9:16", {9, 16}}, {"16:9", {16, 9}}};
  for (auto [name, ratio] : accepted) {
    AssetRequest r = parse_gen_query(std::string("prompt=cat&aspect=") + name);
    EXPECT_EQ(to_string(r.aspect), name);
  }
  for (const char* bad : {"2:1", "1:2", "16:10", "4:5", "1", "", "16/9", "16:9 ", "01:1"}) {
    EXPECT_THROW(parse_gen_query(std::string("prompt=cat&aspect=") + bad), BadRequest) << bad;
  }
}

TEST(AssetRequestTest, DefaultsTo1x1AndDecodesText) {
  AssetRequest r = parse_gen_query("prompt=a+happy+dog");
  EXPECT_EQ(r.aspect, Aspect::k1x1);
  EXPECT_EQ(r.text, "a happy dog");
  AssetRequest s = parse_image_query("query=Albert%20Einstein%20physicist");
  EXPECT_EQ(s.kind, AssetKind::kSearchImage);
  EXPECT_EQ(s.text, "Albert Einstein physicist");
}

TEST(AssetRequestTest, RejectsMissingEmptyOrUndecodable) {
  EXPECT_THROW(parse_image_query(""), BadRequest);
  EXPECT_THROW(parse_image_query("query="), BadRequest);
  EXPECT_THROW(parse_image_query("query=%20%20"), BadRequest);
  EXPECT_THROW(parse_image_query("query=%zz"), BadRequest);
  EXPECT_THROW(parse_image_query("query=%C3"), BadRequest);
  EXPECT_THROW(parse_gen_query("aspect=3:4"), BadRequest);
}

TEST(AssetServiceTest, GeneratedImagesMatchAspect) {
  for (int edge : {512, 300, 97}) {
    AssetOptions opts;
    opts.long_edge = edge;
    AssetService svc = mock_service(opts);
    for (const char* a : {"1:1", "3:4", "4:3", "9:16", "16:9"}) {
      AssetRecord rec = svc.handle_gen(std::string("prompt=sunset&aspect=") + a);
      DecodedPng png = decode_png(*rec.bytes);
      auto ratio = *parse_aspect(a);
      double rw = 0, rh = 0;
      std::sscanf(a, "%lf:%lf", &rw, &rh);
      double scale = edge / std::max(rw, rh);
      EXPECT_LE(std::abs(png.width - rw * scale), 1.0) << a << " @" << edge;
      EXPECT_LE(std::abs(png.height - rh * scale), 1.0) << a << " @" << edge;
      EXPECT_EQ(std::max(png.width, png.height), static_cast<std::uint32_t>(edge));
      EXPECT_EQ(png.raw_size, std::size_t(png.height) * (1 + 3 * png.width));
      EXPECT_EQ(rec.width, static_cast<int>(png.width));
      EXPECT_EQ(rec.media_type, "image/png");
      (void)ratio;
    }
  }
}

TEST(AssetServiceTest, MockIsSolidColorFromPromptHash) {
  AssetService svc = mock_service();
  AssetRecord a = svc.handle_gen("prompt=cat");
  AssetRecord b = svc.handle_gen("prompt=dog");
  EXPECT_NE(*a.bytes, *b.bytes);
  DecodedPng png = decode_png(*a.bytes);
  EXPECT_EQ(png.width, 512u);
  EXPECT_EQ(png.height, 512u);
}

TEST(AssetServiceTest, MockBytesArePureFunctionOfRequest) {
  AssetService one = mock_service();
  AssetService two = mock_service();
  for (const char* q : {"query=Albert%20Einstein%20physicist", "query=mountain+lake"}) {
    EXPECT_EQ(*one.handle_image(q).bytes, *two.handle_image(q).bytes);
  }
  EXPECT_EQ(*one.handle_gen("prompt=x&aspect=9:16").bytes,
            *two.handle_gen("prompt=x&aspect=9%3A16").bytes);
  EXPECT_NE(*one.handle_gen("prompt=x&aspect=9:16").bytes,
            *one.handle_gen("prompt=x&aspect=16:9").bytes);
}

TEST(AssetServiceTest, RepeatedQueryHitsCache) {
  auto counting = std::make_shared<CountingProvider>();
  AssetService svc(counting, counting);
  AssetRecord first = svc.handle_image("query=Albert%20Einstein%20physicist");
  AssetRecord second = svc.handle_image("query=Albert+Einstein+physicist");
  EXPECT_FALSE(first.cache_hit);
  EXPECT_TRUE(second.cache_hit);
  EXPECT_EQ(*first.bytes, *second.bytes);
  EXPECT_EQ(counting->calls.load(), 1);
}

TEST(AssetServiceTest, ConcurrentColdRequestsSingleFlight) {
  for (int round = 0; round < 5; ++round) {
    auto counting = std::make_shared<CountingProvider>(std::chrono::milliseconds(20));
    AssetService svc(counting, counting);
    constexpr int kThreads = 32;
    std::barrier start(kThreads);
    std::vector<std::string> results(kThreads);
    std::vector<std::thread> threads;
    for (int i = 0; i < kThreads; ++i) {
      threads.emplace_back([&, i] {
        start.arrive_and_wait();
        results[i] = *svc.handle_gen("prompt=a+happy+dog&aspect=16:9").bytes;
      });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(counting->calls.load(), 1);
    for (const auto& r : results) EXPECT_EQ(r, results[0]);
  }
}

TEST(AssetServiceTest, ProviderFailureYieldsFallback) {
  auto down = std::make_shared<CountingProvider>(std::chrono::milliseconds(0), true);
  AssetService svc(down, down);
  AssetRecord rec = svc.handle_gen("prompt=a+happy+dog&aspect=4:3");
  EXPECT_TRUE(rec.fallback);
  EXPECT_EQ(rec.provider, "fallback");
  EXPECT_EQ(rec.failure, "provider down");
  DecodedPng png = decode_png(*rec.bytes);
  EXPECT_EQ(png.width, 512u);
  EXPECT_EQ(png.height, 384u);
  EXPECT_NE(png.text.find("a happy dog"), std::string::npos);
  // Fallbacks are not cached; the next request retries the provider.
  svc.handle_gen("prompt=a+happy+dog&aspect=4:3");
  EXPECT_EQ(down->calls.load(), 2);
  // Deterministic fallback bytes.
  EXPECT_EQ(*rec.bytes, *svc.handle_gen("prompt=a+happy+dog&aspect=4:3").bytes);
}

TEST(AssetServiceTest, BadRequestPropagates) {
  AssetService svc = mock_service();
  EXPECT_THROW(svc.handle_gen("prompt=cat&aspect=2:1"), BadRequest);
  EXPECT_THROW(svc.handle_image("query="), BadRequest);
}

TEST(AssetCacheTest, PersistsAcrossInstances) {
  auto dir = temp_dir("persist");
  auto counting = std::make_shared<CountingProvider>();
  AssetOptions opts;
  opts.cache_dir = dir;
  std::string bytes;
  {
    AssetService svc(counting, counting, opts);
    bytes = *svc.handle_image("query=lighthouse").bytes;
  }
  AssetService again(counting, counting, opts);
  AssetRecord rec = again.handle_image("query=lighthouse");
  EXPECT_TRUE(rec.cache_hit);
  EXPECT_EQ(*rec.bytes, bytes);
  EXPECT_EQ(rec.width, 512);
  EXPECT_EQ(counting->calls.load(), 1);
  EXPECT_TRUE(std::filesystem::exists(dir / "index.jsonl"));
  std::filesystem::remove_all(dir);
}

TEST(AssetCacheTest, ExpiredEntriesAreRefetched) {
  auto counting = std::make_shared<CountingProvider>();
  AssetOptions opts;
  opts.ttl = std::chrono::seconds(0);
  AssetService svc(counting, counting, opts);
  svc.handle_image("query=x");
  std::this_thread::sleep_for(std::chrono::milliseconds(5));
  svc.handle_image("query=x");
  EXPECT_EQ(counting->calls.load(), 2);
}

TEST(AssetCacheTest, KeyIncludesProvider) {
  AssetCache cache;
  AssetRecord rec;
  rec.bytes = std::make_shared<const std::string>("x");
  rec.created = std::chrono::system_clock::now();
  cache.insert("mock\nkey", rec);
  EXPECT_TRUE(cache.lookup("mock\nkey"));
  EXPECT_FALSE(cache.lookup("other\nkey"));
}

TEST(SrcGrammarTest, FlagsBrokenAssetUrls) {
  auto doc = html::parse(
      "<html><body>"
      "<img src=\"/gen?prompt=cat&amp;aspect=3:4\">"
      "<img src=\"/gen?aspect=3:4\">"
      "<img src=\"/image?query=\">"
      "<img src=\"/gen?prompt=cat&amp;aspect=2:1\">"
      "<img src=\"/image?query=ok\">"
      "</body></html>");
  auto diags = validate_src_grammar(doc);
  ASSERT_EQ(diags.size(), 3u);
  EXPECT_EQ(diags[0].locus, "/html[0]/body[0]/img[1]");
  EXPECT_EQ(diags[1].locus, "/html[0]/body[0]/img[2]");
  EXPECT_EQ(diags[2].locus, "/html[0]/body[0]/img[3]");
  for (const auto& d : diags) EXPECT_EQ(d.severity, post::Severity::kFlagged);
}
