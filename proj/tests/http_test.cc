// Copyright 2026 The etlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "etlab/victim.h"
#include "httplib.h"
#include "json.hpp"

namespace etlab {
namespace {

class HttpTest : public testing::Test {
 protected:
  HttpTest()
      : data_(GenSynth(SynthOptions{.num_classes = 2, .n_per_class = 10}, 2)),
        vocab_(BuildVocab(data_)),
        model_(InitModel(Architecture{}, vocab_, 2, 2)),
        service_(model_, vocab_, DefenceConfig::None()),
        server_(service_) {
    port_ = server_.Start("127.0.0.1", 0);
  }
  ~HttpTest() override { server_.Stop(); }

  std::string Url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  Dataset data_;
  Vocab vocab_;
  Model model_;
  VictimService service_;
  HttpServer server_;
  int port_ = 0;
};

TEST_F(HttpTest, PredictReturnsResponse) {
  httplib::Client raw("127.0.0.1", port_);
  const auto res = raw.Post("/v1/predict", R"({"text":"hello world"})",
                            "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto body = nlohmann::json::parse(res->body);
  EXPECT_EQ(body["probs"].size(), 2u);
  EXPECT_EQ(body["api_version"], std::string(kApiVersion));
  EXPECT_TRUE(body["predicted"].is_number_integer());
}

TEST_F(HttpTest, MalformedJsonIs400) {
  httplib::Client raw("127.0.0.1", port_);
  const auto res = raw.Post("/v1/predict", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_TRUE(nlohmann::json::parse(res->body).contains("error"));
  const auto missing = raw.Post("/v1/predict", R"({"txt":"a"})", "application/json");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 400);
}

TEST_F(HttpTest, MeterEndpointReportsCount) {
  HttpClient client(Url());
  for (int i = 0; i < 5; ++i) client.Predict(data_[i].text);
  EXPECT_EQ(client.MeterCount(), 5u);
  httplib::Client raw("127.0.0.1", port_);
  const auto res = raw.Get("/v1/meter");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body)["count"], 5);
}

TEST_F(HttpTest, MatchesInProcessClient) {
  VictimService local(model_, vocab_, DefenceConfig::None());
  InProcessClient in_process(local);
  HttpClient remote(Url());
  for (size_t i = 0; i < data_.size(); ++i) {
    const auto a = in_process.Predict(data_[i].text);
    const auto b = remote.Predict(data_[i].text);
    EXPECT_EQ(a.probs, b.probs);
    EXPECT_EQ(a.predicted, b.predicted);
  }
}

TEST(HttpClientTest, ConnectionFailureIsTransportError) {
  // Bind then stop to obtain a port with nothing listening.
  const Dataset d = GenSynth(SynthOptions{.num_classes = 2, .n_per_class = 2}, 1);
  const Vocab v = BuildVocab(d);
  VictimService svc(InitModel(Architecture{}, v, 2, 0), v, DefenceConfig::None());
  int port;
  {
    HttpServer s(svc);
    port = s.Start("127.0.0.1", 0);
    s.Stop();
  }
  HttpClient client("http://127.0.0.1:" + std::to_string(port), 1.0);
  EXPECT_THROW(client.Predict("x"), TransportError);
}

TEST(HttpServerTest, WritesMeterFileOnStop) {
  const Dataset d = GenSynth(SynthOptions{.num_classes = 2, .n_per_class = 2}, 1);
  const Vocab v = BuildVocab(d);
  VictimService svc(InitModel(Architecture{}, v, 2, 0), v, DefenceConfig::None());
  const auto path = std::filesystem::path(testing::TempDir()) / "meter.json";
  {
    HttpServer s(svc, path.string());
    const int port = s.Start("127.0.0.1", 0);
    HttpClient c("http://127.0.0.1:" + std::to_string(port));
    c.Predict("a");
    c.Predict("b");
    s.Stop();
  }
  std::ifstream in(path);
  EXPECT_EQ(nlohmann::json::parse(in)["count"], 2);
}

TEST(HttpServerTest, BindFailureIsError) {
  const Dataset d = GenSynth(SynthOptions{.num_classes = 2, .n_per_class = 2}, 1);
  const Vocab v = BuildVocab(d);
  VictimService svc(InitModel(Architecture{}, v, 2, 0), v, DefenceConfig::None());
  HttpServer s(svc);
  EXPECT_THROW(s.Bind("256.0.0.1", 0), Error);
}

}  // namespace
}  // namespace etlab
