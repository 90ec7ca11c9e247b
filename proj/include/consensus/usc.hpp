/*
 * Copyright 2026 The consensus-select Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Universal Self-Consistency baseline: an LLM judge picks the most consistent
// response from one prompt that lists every candidate.
//
// The HTTP layer sits behind JudgeTransport so tests can script replies.

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "consensus/selection.hpp"

namespace consensus {

struct JudgeEndpointConfig {
  std::string url;
  std::string model_name;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_retries = 2;
  std::optional<std::string> auth_token;
  std::chrono::milliseconds initial_backoff{1000};

  void validate() const;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{0};
};

struct HttpReply {
  enum class Outcome { kCompleted, kTimeout, kConnectionFailed };
  Outcome outcome = Outcome::kCompleted;
  int status = 0;
  std::string body;
  std::string error;
};

class JudgeTransport {
 public:
  virtual ~JudgeTransport() = default;
  virtual HttpReply post(const HttpRequest& request) = 0;
};

// cpp-httplib client. https:// URLs need a build with OpenSSL.
class HttplibTransport final : public JudgeTransport {
 public:
  HttpReply post(const HttpRequest& request) override;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

std::string build_usc_prompt(std::span<const std::string> texts);

// 0-based index from the last "Path<digits>" or "Path <digits>" in the reply.
// Throws NoPathToken or IndexOutOfRange.
std::size_t parse_usc_reply(std::string_view reply, std::size_t n);

inline constexpr std::string_view kUscSystemPrompt = "You are a helpful assistant.";

// {"model": ..., "messages": [{"role":"system",...},{"role":"user",...}]}
std::string build_usc_request_body(std::string_view model, std::string_view prompt);

// choices[0].message.content of a chat-completion reply. Throws JudgeFormatError.
std::string extract_reply_content(std::string_view body);

struct UscOutcome {
  SelectionResult result;
  std::size_t attempts = 0;
};

// One judge request with retry on timeout and 5xx (exponential backoff from
// cfg.initial_backoff). Throws TransportError or JudgeFormatError (with the
// parse failure as cause()).
UscOutcome usc_select_detailed(std::span<const std::string> texts, const JudgeEndpointConfig& cfg,
                               JudgeTransport& transport, const Sleeper& sleeper = {});

SelectionResult usc_select(std::span<const std::string> texts, const JudgeEndpointConfig& cfg,
                           JudgeTransport& transport, const Sleeper& sleeper = {});

}  // namespace consensus
