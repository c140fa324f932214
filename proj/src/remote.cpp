// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "vgs/remote.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "vgs/seed.hpp"

namespace vgs {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

// Accepts "http://host:port/prefix"; httplib wants the path separately.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

EndpointConfig proposer_endpoint_from_env(EndpointConfig base) {
  base.base_url = env_or("PROPOSER_URL", base.base_url);
  base.api_key = env_or("API_KEY", base.api_key);
  if (base.path.empty()) base.path = "/v1/completions";
  return base;
}

EndpointConfig verifier_endpoint_from_env(EndpointConfig base) {
  base.base_url = env_or("VERIFIER_URL", base.base_url);
  base.api_key = env_or("API_KEY", base.api_key);
  if (base.path.empty()) base.path = "/score";
  return base;
}

std::string render_prompt(std::string_view prompt_template, std::string_view question) {
  constexpr std::string_view kSlot = "{question}";
  std::string out;
  std::size_t start = 0;
  while (true) {
    const auto pos = prompt_template.find(kSlot, start);
    if (pos == std::string_view::npos) {
      out.append(prompt_template.substr(start));
      break;
    }
    out.append(prompt_template.substr(start, pos - start));
    out.append(question);
    start = pos + kSlot.size();
  }
  return out;
}

// --- JsonEndpoint -------------------------------------------------------------

JsonEndpoint::JsonEndpoint(EndpointConfig config)
    : config_(std::move(config)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(
          static_cast<std::ptrdiff_t>(std::max<std::uint32_t>(1, config_.max_in_flight)))) {
  if (config_.base_url.empty()) throw BackendError("endpoint URL is not configured", false);
}

nlohmann::json JsonEndpoint::post(const nlohmann::json& body) const {
  SemaphoreGuard guard(*in_flight_);
  const auto [host, prefix] = split_url(config_.base_url);
  const std::string path = prefix + config_.path;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  const auto timeout_us =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout).count();
  std::string last_error;
  for (std::uint32_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      retries_.fetch_add(1);
      std::this_thread::sleep_for(config_.backoff * (1LL << (attempt - 1)));
    }
    requests_.fetch_add(1);

    httplib::Client client(host);
    client.set_connection_timeout(timeout_us / 1000000, timeout_us % 1000000);
    client.set_read_timeout(timeout_us / 1000000, timeout_us % 1000000);
    client.set_write_timeout(timeout_us / 1000000, timeout_us % 1000000);

    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = fmt::format("transport error: {}", httplib::to_string(res.error()));
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendError(fmt::format("{} returned HTTP {}: {}", path, res->status, res->body),
                         false);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw BackendError(fmt::format("malformed JSON from {}: {}", path, e.what()), false);
    }
  }
  throw BackendError(fmt::format("{} failed after {} retries ({})", path, config_.max_retries,
                                 last_error),
                     true);
}

// --- RemoteProposer -------------------------------------------------------------

RemoteProposer::RemoteProposer(EndpointConfig config) : endpoint_(std::move(config)) {}

nlohmann::json RemoteProposer::build_request(const ProposeRequest& request) const {
  const auto& cfg = endpoint_.config();
  std::string prompt = render_prompt(cfg.prompt_template, request.question.text);
  prompt += cfg.step_delimiter;
  if (!request.trajectory.steps.empty()) {
    prompt += request.trajectory.joined_text(cfg.step_delimiter);
    prompt += cfg.step_delimiter;
  }
  // Remote samplers take a signed 63-bit seed.
  const auto sample_seed =
      static_cast<std::int64_t>(node_seed(request) & 0x7fffffffffffffffULL);
  return {
      {"model", cfg.model},
      {"prompt", prompt},
      {"max_tokens", cfg.max_tokens},
      {"temperature", cfg.temperature},
      {"top_p", cfg.top_p},
      {"stop", nlohmann::json::array({cfg.step_delimiter})},
      {"seed", sample_seed},
  };
}

GenerationStep RemoteProposer::parse_response(const nlohmann::json& response) const {
  const auto& cfg = endpoint_.config();
  if (!response.is_object() || !response.contains("choices") ||
      !response["choices"].is_array() || response["choices"].empty()) {
    throw BackendError("completion response has no choices", false);
  }
  const auto& choice = response["choices"][0];
  if (!choice.is_object() || !choice.contains("text") || !choice["text"].is_string()) {
    throw BackendError("completion choice has no text", false);
  }
  std::string text = choice["text"].get<std::string>();
  bool ended_on_delimiter = false;
  if (const auto pos = text.find(cfg.step_delimiter); pos != std::string::npos) {
    ended_on_delimiter = true;
    text.resize(pos);
  }

  std::string finish_reason;
  if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
    finish_reason = choice["finish_reason"].get<std::string>();
  }
  // vLLM reports stop_reason = null when generation ended on EOS.
  const bool eos = finish_reason == "stop" && !ended_on_delimiter &&
                   choice.contains("stop_reason") && choice["stop_reason"].is_null();

  GenerationStep step;
  step.token_count = (text.size() + 3) / 4;
  if (response.contains("usage") && response["usage"].is_object()) {
    const auto& usage = response["usage"];
    if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number_unsigned()) {
      step.token_count = usage["completion_tokens"].get<std::uint64_t>();
    }
  }
  step.is_terminal =
      eos || (!cfg.terminal_pattern.empty() && text.find(cfg.terminal_pattern) != std::string::npos);
  step.hit_token_cap = !step.is_terminal && finish_reason == "length";
  step.text = std::move(text);
  return step;
}

GenerationStep RemoteProposer::propose(const ProposeRequest& request) const {
  return parse_response(endpoint_.post(build_request(request)));
}

// --- RemoteVerifier -------------------------------------------------------------

RemoteVerifier::RemoteVerifier(EndpointConfig config, JsonEndpoint::WarningSink warn)
    : endpoint_(std::move(config)), warn_(std::move(warn)) {
  if (!warn_) {
    warn_ = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  }
}

nlohmann::json RemoteVerifier::build_request(const Question& question,
                                             const Trajectory& trajectory) const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trajectory.steps) steps.push_back(s.text);
  return {{"prompt", render_prompt(endpoint_.config().prompt_template, question.text)},
          {"steps", std::move(steps)}};
}

Verdict RemoteVerifier::parse_response(const nlohmann::json& response,
                                       std::size_t expected_steps) const {
  if (!response.is_object() || !response.contains("scores") || !response["scores"].is_array()) {
    throw BackendError("score response has no scores array", false);
  }
  const auto& raw = response["scores"];
  if (raw.empty()) throw BackendError("no scores", false);
  if (raw.size() != expected_steps) {
    throw BackendError(
        fmt::format("expected {} scores, got {}", expected_steps, raw.size()), false);
  }
  Verdict v;
  v.step_scores.reserve(raw.size());
  for (const auto& s : raw) {
    if (!s.is_number()) throw BackendError("non-numeric score", false);
    double x = s.get<double>();
    if (!std::isfinite(x)) throw BackendError("non-finite score", false);
    if (x < 0.0 || x > 1.0) {
      clamped_.fetch_add(1);
      warn_(fmt::format("score {} outside [0, 1] clamped", x));
      x = std::clamp(x, 0.0, 1.0);
    }
    v.step_scores.push_back(x);
  }
  v.score = v.step_scores.back();
  return v;
}

Verdict RemoteVerifier::score(const Question& question, const Trajectory& trajectory,
                              std::uint64_t /*seed*/) const {
  return parse_response(endpoint_.post(build_request(question, trajectory)),
                        trajectory.steps.size());
}

}  // namespace vgs
