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

#include "consensus/usc.hpp"

#include <cctype>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "consensus/error.hpp"

namespace consensus {
namespace {

using nlohmann::json;

bool is_retryable(const HttpReply& reply) {
  return reply.outcome == HttpReply::Outcome::kTimeout ||
         (reply.outcome == HttpReply::Outcome::kCompleted && reply.status >= 500 && reply.status <= 599);
}

void default_sleep(std::chrono::milliseconds delay) { std::this_thread::sleep_for(delay); }

// "scheme://host[:port]" and "/path" parts of a URL.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

void JudgeEndpointConfig::validate() const {
  if (url.empty()) throw Error(ErrorKind::kInvalidArgument, "judge endpoint URL is empty");
  if (timeout.count() <= 0) throw Error(ErrorKind::kInvalidArgument, "judge timeout must be positive");
}

HttpReply HttplibTransport::post(const HttpRequest& request) {
  const auto [base, path] = split_url(request.url);
  HttpReply reply;
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (base.rfind("https://", 0) == 0) {
    reply.outcome = HttpReply::Outcome::kConnectionFailed;
    reply.error = "https is not supported by this build";
    return reply;
  }
#endif
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  for (const auto& [name, value] : request.headers) headers.emplace(name, value);
  auto result = client.Post(path, headers, request.body, "application/json");
  if (!result) {
    const auto err = result.error();
    reply.outcome = (err == httplib::Error::Read || err == httplib::Error::Write ||
                     err == httplib::Error::ConnectionTimeout)
                        ? HttpReply::Outcome::kTimeout
                        : HttpReply::Outcome::kConnectionFailed;
    reply.error = httplib::to_string(err);
    return reply;
  }
  reply.status = result->status;
  reply.body = result->body;
  return reply;
}

std::string build_usc_prompt(std::span<const std::string> texts) {
  if (texts.size() < 2) throw Error(ErrorKind::kTooFewCandidates, "USC prompt needs at least 2 responses");
  std::string prompt =
      "Here are multiple reasoning paths for a task. Select the most consistent and plausible path based on "
      "consensus:\n\n";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    prompt += "Path " + std::to_string(i + 1) + ": " + texts[i] + "\n";
  }
  prompt += "Which path is the most consistent? Conclude your explanation with the answer in a 'Path{number}' format.";
  return prompt;
}

std::size_t parse_usc_reply(std::string_view reply, std::size_t n) {
  constexpr std::string_view kToken = "Path";
  std::optional<std::string_view> digits;
  for (std::size_t pos = reply.find(kToken); pos != std::string_view::npos; pos = reply.find(kToken, pos + 1)) {
    std::size_t p = pos + kToken.size();
    if (p < reply.size() && reply[p] == ' ') ++p;
    const std::size_t start = p;
    while (p < reply.size() && std::isdigit(static_cast<unsigned char>(reply[p]))) ++p;
    if (p > start) digits = reply.substr(start, p - start);
  }
  if (!digits) throw Error(ErrorKind::kNoPathToken, "judge reply names no path");
  // Long digit runs are out of range regardless of n.
  if (digits->size() > 9) throw Error(ErrorKind::kIndexOutOfRange, "path number out of range");
  const std::size_t number = std::stoul(std::string(*digits));
  if (number < 1 || number > n) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "judge picked Path" + std::to_string(number) + " but there are " + std::to_string(n) + " paths");
  }
  return number - 1;
}

std::string build_usc_request_body(std::string_view model, std::string_view prompt) {
  json body = {{"model", model},
               {"messages",
                json::array({{{"role", "system"}, {"content", kUscSystemPrompt}},
                             {{"role", "user"}, {"content", prompt}}})}};
  return body.dump();
}

std::string extract_reply_content(std::string_view body) {
  const json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) throw Error(ErrorKind::kJudgeFormatError, "judge reply is not JSON");
  const json* content = nullptr;
  if (parsed.contains("choices") && parsed["choices"].is_array() && !parsed["choices"].empty()) {
    const json& first = parsed["choices"][0];
    if (first.contains("message") && first["message"].contains("content")) content = &first["message"]["content"];
  }
  if (content == nullptr || !content->is_string()) {
    throw Error(ErrorKind::kJudgeFormatError, "judge reply has no choices[0].message.content string");
  }
  return content->get<std::string>();
}

UscOutcome usc_select_detailed(std::span<const std::string> texts, const JudgeEndpointConfig& cfg,
                               JudgeTransport& transport, const Sleeper& sleeper) {
  cfg.validate();
  HttpRequest request;
  request.url = cfg.url;
  request.timeout = cfg.timeout;
  request.body = build_usc_request_body(cfg.model_name, build_usc_prompt(texts));
  request.headers.emplace_back("Content-Type", "application/json");
  if (cfg.auth_token) request.headers.emplace_back("Authorization", "Bearer " + *cfg.auth_token);

  const Sleeper& sleep = sleeper ? sleeper : Sleeper(default_sleep);
  std::chrono::milliseconds backoff = cfg.initial_backoff;
  UscOutcome outcome;
  HttpReply reply;
  for (;;) {
    ++outcome.attempts;
    reply = transport.post(request);
    if (!is_retryable(reply) || outcome.attempts > cfg.max_retries) break;
    sleep(backoff);
    backoff *= 2;
  }

  if (reply.outcome != HttpReply::Outcome::kCompleted) {
    throw Error(ErrorKind::kTransportError, "judge request failed after " + std::to_string(outcome.attempts) +
                                                " attempt(s): " + reply.error);
  }
  if (reply.status < 200 || reply.status > 299) {
    throw Error(ErrorKind::kTransportError, "judge returned HTTP " + std::to_string(reply.status) + " after " +
                                                std::to_string(outcome.attempts) + " attempt(s)");
  }

  const std::string content = extract_reply_content(reply.body);
  std::size_t winner = 0;
  try {
    winner = parse_usc_reply(content, texts.size());
  } catch (const Error& e) {
    throw Error(ErrorKind::kJudgeFormatError, e.kind(), e.what());
  }

  SelectionResult& result = outcome.result;
  result.method = Method::kUsc;
  result.winner_index = winner;
  result.scores.assign(texts.size(), 0.0);
  result.scores[winner] = 1.0;
  result.confidence = 1.0 / static_cast<double>(texts.size());
  return outcome;
}

SelectionResult usc_select(std::span<const std::string> texts, const JudgeEndpointConfig& cfg,
                           JudgeTransport& transport, const Sleeper& sleeper) {
  return usc_select_detailed(texts, cfg, transport, sleeper).result;
}

}  // namespace consensus
