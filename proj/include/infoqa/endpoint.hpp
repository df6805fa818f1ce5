#pragma once

/**
 * Pluggable chat backend. HttpChatClient speaks the OpenAI-compatible
 * chat-completions wire format with bounded retries and exponential backoff;
 * the mock models implement the same interface for hermetic runs.
 */

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace infoqa::orch {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelEndpoint {
  std::string base_url;          // e.g. http://host:port/v1
  std::string model_name;
  std::string api_key_env;       // environment variable holding the bearer token
  double temperature = 0.2;
  int max_tokens = 4096;
  double timeout_s = 60.0;
  int max_retries = 3;
  double backoff_initial_s = 0.25;  // doubles per retry

  void validate() const;
};

struct ChatUsage {
  int prompt_tokens = -1;
  int completion_tokens = -1;
};

struct ChatReply {
  std::string text;
  ChatUsage usage;
  int retries = 0;
  double latency_ms = 0.0;
  double temperature = 0.0;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatReply chat(const std::string& system, const std::string& user,
                         std::optional<double> temperature_override = std::nullopt) = 0;
};

/// POST {base_url}/chat/completions; retries 429/5xx/timeouts with
/// exponential backoff up to max_retries; reads choices[0].message.content.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(ModelEndpoint endpoint);
  ~HttpChatClient() override;

  ChatReply chat(const std::string& system, const std::string& user,
                 std::optional<double> temperature_override = std::nullopt) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace infoqa::orch
