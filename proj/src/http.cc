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

#include <fstream>
#include <mutex>

#include "etlab/victim.h"
#include "httplib.h"

namespace etlab {
namespace {

void ReplyJson(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, int status, const std::string& msg) {
  ReplyJson(res, status, {{"error", msg}});
}

}  // namespace

// ---------------------------------------------------------------------------
// Server

struct HttpServer::Impl {
  VictimService& service;
  std::string meter_file;
  httplib::Server server;
  std::thread thread;
  std::once_flag flushed;

  Impl(VictimService& s, std::string file)
      : service(s), meter_file(std::move(file)) {}

  void FlushMeter() {
    if (meter_file.empty()) return;
    std::ofstream out(meter_file, std::ios::trunc);
    out << nlohmann::json{{"count", service.meter_count()}}.dump() << '\n';
  }
};

HttpServer::HttpServer(VictimService& service, std::string meter_file)
    : impl_(std::make_unique<Impl>(service, std::move(meter_file))) {
  auto& srv = impl_->server;
  srv.set_tcp_nodelay(true);
  srv.set_keep_alive_timeout(1);
  Impl* impl = impl_.get();
  srv.Post("/v1/predict", [impl](const httplib::Request& req,
                                 httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      ReplyError(res, 400, std::string("malformed JSON: ") + e.what());
      return;
    }
    if (!body.is_object() || !body.contains("text") ||
        !body["text"].is_string()) {
      ReplyError(res, 400, "body must be {\"text\": string}");
      return;
    }
    try {
      ReplyJson(res, 200,
                ToJson(impl->service.Predict(body["text"].get<std::string>())));
    } catch (const std::exception& e) {
      ReplyError(res, 500, e.what());
    }
  });
  srv.Get("/v1/meter", [impl](const httplib::Request&, httplib::Response& res) {
    ReplyJson(res, 200, {{"count", impl->service.meter_count()}});
  });
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::Listen() { impl_->server.listen_after_bind(); }

int HttpServer::Start(const std::string& host, int port) {
  const int bound = Bind(host, port);
  impl_->thread = std::thread([this] { Listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  std::call_once(impl_->flushed, [this] { impl_->FlushMeter(); });
}

// ---------------------------------------------------------------------------
// Client

struct HttpClient::Impl {
  httplib::Client client;
  explicit Impl(const std::string& url) : client(url) {}
};

HttpClient::HttpClient(const std::string& url, double timeout_seconds)
    : impl_(std::make_unique<Impl>(url)) {
  if (!impl_->client.is_valid()) throw InvalidArgument("bad victim url " + url);
  const auto usec = static_cast<long>(timeout_seconds * 1e6);
  const auto d = std::chrono::microseconds(usec);
  impl_->client.set_connection_timeout(d);
  impl_->client.set_read_timeout(d);
  impl_->client.set_write_timeout(d);
  impl_->client.set_keep_alive(true);
  impl_->client.set_tcp_nodelay(true);
}

HttpClient::~HttpClient() = default;

namespace {

nlohmann::json ParseReply(const httplib::Result& res, const char* what) {
  if (!res) {
    throw TransportError(std::string(what) + ": " + httplib::to_string(res.error()));
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string(what) + ": reply is not JSON");
  }
  if (res->status != 200) {
    throw Error(std::string(what) + ": HTTP " + std::to_string(res->status) +
                ": " + body.value("error", std::string("unknown error")));
  }
  return body;
}

}  // namespace

PredictionResponse HttpClient::Predict(std::string_view text) {
  const nlohmann::json req = {{"text", std::string(text)}};
  auto res = impl_->client.Post("/v1/predict", req.dump(), "application/json");
  return PredictionResponseFromJson(ParseReply(res, "predict"));
}

uint64_t HttpClient::MeterCount() {
  auto res = impl_->client.Get("/v1/meter");
  const auto body = ParseReply(res, "meter");
  try {
    return body.at("count").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("meter: ") + e.what());
  }
}

}  // namespace etlab
