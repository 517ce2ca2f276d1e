#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "negograph/pipeline.hpp"
#include "negograph/service.hpp"
#include "support.hpp"

using namespace negograph;
using json = nlohmann::json;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::shared_ptr<const NegotiationModel> model =
        make_model(negograph::testing::tiny_config(), negograph::testing::toy_corpus());
    service_ = std::make_unique<NegotiationService>(model, KeywordTagger::builtin());
    server_ = std::make_unique<HttpServer>(*service_);
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(30, 0);
    // wait until the listener accepts
    for (int i = 0; i < 200; ++i) {
      if (client_->Get("/healthz")) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  json post(const std::string& path, const json& body, int expected = 200) {
    auto res = client_->Post(path.c_str(), body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expected) << path << ": " << res->body;
    return json::parse(res->body);
  }

  std::unique_ptr<NegotiationService> service_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(HttpTest, Healthz) {
  auto res = client_->Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  const auto j = json::parse(res->body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["v"], 1);
}

TEST_F(HttpTest, FullNegotiation) {
  const auto created = post("/sessions", {{"v", 1}, {"scenario", {{"listed_price", 40}, {"buyer_target_price", 36}}}});
  const std::string id = created["session"];
  const auto msg = post("/sessions/" + id + "/message", {{"v", 1}, {"text", "hi, would you take $30?"}});
  EXPECT_NEAR(msg["price_state"]["buyer_proposal"]["fraction"].get<double>(), 0.75, 1e-15);
  post("/sessions/" + id + "/action", {{"action", "offer"}, {"amount", 35}});
  const auto done = post("/sessions/" + id + "/action", {{"action", "accept"}});
  EXPECT_NEAR(done["outcome"]["ratio"].get<double>(), -0.25, 1e-15);

  auto res = client_->Get(("/sessions/" + id + "/trace").c_str());
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_TRUE(json::parse(res->body)["trace"]["nodes"].is_array());

  const auto again = post("/sessions/" + id + "/message", {{"text", "hello?"}}, 409);
  EXPECT_TRUE(again["error"].is_string());
}

TEST_F(HttpTest, ErrorsAreJson) {
  auto res = client_->Get("/sessions/nope/trace");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  const auto j = json::parse(res->body);
  EXPECT_EQ(j["v"], 1);
  EXPECT_TRUE(j["error"].is_string());

  auto bad = client_->Post("/sessions", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  post("/sessions", {{"scenario", {{"listed_price", 10}, {"buyer_target_price", 10}}}}, 400);
}

TEST_F(HttpTest, PreflightIsAllowed) {
  auto res = client_->Options("/sessions");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_NE(res->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}
