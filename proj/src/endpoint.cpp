#include "infoqa/endpoint.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace infoqa::orch {

void ModelEndpoint::validate() const {
  if (base_url.empty()) throw std::invalid_argument("ModelEndpoint: base_url is empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw std::invalid_argument("ModelEndpoint: temperature must be in [0, 2]");
  }
  if (max_tokens < 1) throw std::invalid_argument("ModelEndpoint: max_tokens must be >= 1");
  if (max_retries < 0) throw std::invalid_argument("ModelEndpoint: max_retries must be >= 0");
}

struct HttpChatClient::Impl {
  ModelEndpoint endpoint;
  std::string host;  // scheme://host[:port]
  std::string path_prefix;

  explicit Impl(ModelEndpoint ep) : endpoint(std::move(ep)) {
    endpoint.validate();
    // split base_url into origin and path prefix
    const std::string& url = endpoint.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      throw std::invalid_argument("ModelEndpoint: base_url must include a scheme");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      host = url;
    } else {
      host = url.substr(0, path_start);
      path_prefix = url.substr(path_start);
      while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();
    }
  }
};

HttpChatClient::HttpChatClient(ModelEndpoint endpoint)
    : impl_(std::make_unique<Impl>(std::move(endpoint))) {}

HttpChatClient::~HttpChatClient() = default;

ChatReply HttpChatClient::chat(const std::string& system, const std::string& user,
                               std::optional<double> temperature_override) {
  const ModelEndpoint& ep = impl_->endpoint;
  const double temperature = temperature_override.value_or(ep.temperature);

  nlohmann::json body;
  body["model"] = ep.model_name;
  body["messages"] = nlohmann::json::array();
  if (!system.empty()) body["messages"].push_back({{"role", "system"}, {"content", system}});
  body["messages"].push_back({{"role", "user"}, {"content", user}});
  body["temperature"] = temperature;
  body["max_tokens"] = ep.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!ep.api_key_env.empty()) {
    if (const char* key = std::getenv(ep.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto start = std::chrono::steady_clock::now();
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
    if (attempt > 0) {
      const double backoff = ep.backoff_initial_s * static_cast<double>(1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
    }

    httplib::Client client(impl_->host);
    client.set_connection_timeout(std::chrono::duration<double>(ep.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(ep.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(ep.timeout_s));

    auto res = client.Post(impl_->path_prefix + "/chat/completions", headers, payload,
                           "application/json");
    if (!res) {
      last_failure = "connection failure: " + httplib::to_string(res.error());
      continue;  // transport-level failure, retry
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("chat: HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw ProtocolError("chat: response body is not JSON");
    }
    ChatReply reply;
    try {
      reply.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("chat: response lacks choices[0].message.content");
    }
    if (doc.contains("usage")) {
      reply.usage.prompt_tokens = doc["usage"].value("prompt_tokens", -1);
      reply.usage.completion_tokens = doc["usage"].value("completion_tokens", -1);
    }
    reply.retries = attempt;
    reply.temperature = temperature;
    reply.latency_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    return reply;
  }
  throw TransportError("chat: retries exhausted, last failure: " + last_failure);
}

}  // namespace infoqa::orch
