#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "squit/error.hpp"
#include "squit/kb.hpp"

using namespace squit;
namespace fs = std::filesystem;

namespace {

const char* kGoodBody = R"json({
  "head": {"vars": ["item", "label"]},
  "results": {"bindings": [
    {"item": {"type": "uri", "value": "http://www.wikidata.org/entity/Q172241"},
     "label": {"type": "literal", "value": "Pulp Fiction", "xml:lang": "en"}},
    {"item": {"type": "uri", "value": "http://www.wikidata.org/entity/Q172241"},
     "label": {"type": "literal", "value": "Pulp  Fiction (film)", "xml:lang": "en"}},
    {"item": {"type": "uri", "value": "http://www.wikidata.org/entity/Q47703"},
     "label": {"type": "literal", "value": "The Godfather", "xml:lang": "en"}},
    {"item": {"type": "uri", "value": "http://www.wikidata.org/entity/Q1"}}
  ]}
})json";

class LocalEndpoint : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get("/ok", [](const httplib::Request& req, httplib::Response& res) {
      if (req.get_param_value("query").find("wd:Q11424") == std::string::npos) {
        res.status = 400;
        return;
      }
      res.set_content(kGoodBody, "application/sparql-results+json");
    });
    server_.Get("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<html>not json</html>", "text/html");
    });
    server_.Get("/nobindings", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"results": {}})", "application/json");
    });
    server_.Get("/busy", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(LocalEndpoint, FetchesEntitiesAndWritesCache) {
  auto cache = fs::temp_directory_path() / "squit_fetch_cache.jsonl";
  fs::remove(cache);
  FetchOptions options;
  options.cache_path = cache.string();
  options.timeout_seconds = 5;
  auto slice = fetch_slice(url("/ok"), "film", 10, options);
  ASSERT_EQ(slice.entities.size(), 2u);
  EXPECT_EQ(slice.entities[0].id, "Q172241");
  EXPECT_EQ(slice.entities[0].labels,
            (std::vector<std::string>{"Pulp Fiction", "Pulp Fiction (film)"}));
  EXPECT_EQ(slice.entities[0].entity_type, "film");
  EXPECT_TRUE(slice.predicates.empty());
  ASSERT_TRUE(fs::exists(cache));
  EXPECT_EQ(load_entities(cache.string()), slice.entities);
}

TEST_F(LocalEndpoint, LimitTruncates) {
  auto slice = fetch_slice(url("/ok"), "film", 1);
  EXPECT_EQ(slice.entities.size(), 1u);
}

TEST_F(LocalEndpoint, MalformedPayloadIsProtocolError) {
  EXPECT_THROW(fetch_slice(url("/garbage"), "film", 5), ProtocolError);
  EXPECT_THROW(fetch_slice(url("/nobindings"), "film", 5), ProtocolError);
}

TEST_F(LocalEndpoint, Non2xxIsStatusError) {
  try {
    fetch_slice(url("/busy"), "film", 5);
    FAIL() << "expected StatusError";
  } catch (const StatusError& e) {
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_THROW(fetch_slice(url("/missing"), "film", 5), StatusError);
}

TEST(Fetch, UnreachableIsRetryableAndWritesNoCache) {
  auto cache = fs::temp_directory_path() / "squit_fetch_nocache.jsonl";
  fs::remove(cache);
  FetchOptions options;
  options.cache_path = cache.string();
  options.timeout_seconds = 2;
  // Port 9 on loopback is closed in the sandbox; the connect is refused.
  EXPECT_THROW(fetch_slice("http://127.0.0.1:9/sparql", "film", 5, options), RetryableError);
  EXPECT_FALSE(fs::exists(cache));
}

TEST(Fetch, ContractViolations) {
  EXPECT_THROW(fetch_slice("http://127.0.0.1:9/sparql", "film", 0), ContractError);
  EXPECT_THROW(fetch_slice("http://127.0.0.1:9/sparql", "", 5), ContractError);
  EXPECT_THROW(fetch_slice("not a url", "film", 5), ContractError);
}

TEST(Fetch, QueryUsesKnownClassOrLabel) {
  EXPECT_NE(entity_query("person", 3).find("wd:Q5 ."), std::string::npos);
  EXPECT_NE(entity_query("person", 3).find("LIMIT 3"), std::string::npos);
  EXPECT_NE(entity_query("Q42", 3).find("wd:Q42"), std::string::npos);
  EXPECT_NE(entity_query("space \"probe\"", 3).find(R"("space \"probe\""@en)"), std::string::npos);
}
