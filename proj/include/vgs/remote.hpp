// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vgs/backends.hpp"

namespace vgs {

inline constexpr std::string_view kQwenPromptTemplate =
    "{question}\nPlease reason step by step, and put your final answer within \\boxed{}";

/// Connection and sampling settings for one HTTP endpoint.
struct EndpointConfig {
  std::string base_url;  // scheme://host:port
  std::string path;
  std::string model;
  std::string api_key;  // sent as a bearer token when non-empty
  std::string prompt_template = std::string(kQwenPromptTemplate);
  double temperature = 0.8;
  double top_p = 1.0;
  std::uint32_t max_tokens = 2048;
  std::string step_delimiter = std::string(kDefaultStepDelimiter);
  std::string terminal_pattern = std::string(kDefaultTerminalPattern);
  std::chrono::milliseconds timeout{30000};
  std::uint32_t max_retries = 3;
  std::chrono::milliseconds backoff{200};
  std::uint32_t max_in_flight = 8;
};

/// Proposer endpoint settings from PROPOSER_URL / API_KEY.
EndpointConfig proposer_endpoint_from_env(EndpointConfig base = {});
/// Verifier endpoint settings from VERIFIER_URL / API_KEY.
EndpointConfig verifier_endpoint_from_env(EndpointConfig base = {});

/// `{question}` in the template replaced by the question text.
std::string render_prompt(std::string_view prompt_template, std::string_view question);

/// JSON POST with bounded retries and exponential backoff. Transport errors,
/// 429 and 5xx are retried; other statuses and unparsable bodies are fatal.
class JsonEndpoint {
 public:
  using WarningSink = std::function<void(std::string_view)>;

  explicit JsonEndpoint(EndpointConfig config);

  nlohmann::json post(const nlohmann::json& body) const;

  [[nodiscard]] const EndpointConfig& config() const { return config_; }
  [[nodiscard]] std::uint64_t retries() const { return retries_.load(); }
  [[nodiscard]] std::uint64_t requests() const { return requests_.load(); }

 private:
  EndpointConfig config_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  mutable std::atomic<std::uint64_t> retries_{0};
  mutable std::atomic<std::uint64_t> requests_{0};
};

/// OpenAI-compatible /v1/completions proposer: one request per step with the
/// step delimiter as stop sequence.
class RemoteProposer final : public Proposer {
 public:
  explicit RemoteProposer(EndpointConfig config);

  GenerationStep propose(const ProposeRequest& request) const override;

  /// Request body for the next step of `request.trajectory`.
  [[nodiscard]] nlohmann::json build_request(const ProposeRequest& request) const;
  /// Turns a completions response into a step. Throws BackendError on a
  /// malformed body.
  [[nodiscard]] GenerationStep parse_response(const nlohmann::json& response) const;

  [[nodiscard]] const JsonEndpoint& endpoint() const { return endpoint_; }

 private:
  JsonEndpoint endpoint_;
};

/// PRM endpoint: POST {"prompt", "steps"} -> {"scores"}; uses the last score.
class RemoteVerifier final : public Verifier {
 public:
  explicit RemoteVerifier(EndpointConfig config,
                          JsonEndpoint::WarningSink warn = nullptr);

  Verdict score(const Question& question, const Trajectory& trajectory,
                std::uint64_t seed) const override;

  [[nodiscard]] nlohmann::json build_request(const Question& question,
                                             const Trajectory& trajectory) const;
  [[nodiscard]] Verdict parse_response(const nlohmann::json& response,
                                       std::size_t expected_steps) const;

  [[nodiscard]] const JsonEndpoint& endpoint() const { return endpoint_; }
  [[nodiscard]] std::uint64_t clamped_scores() const { return clamped_.load(); }

 private:
  JsonEndpoint endpoint_;
  JsonEndpoint::WarningSink warn_;
  mutable std::atomic<std::uint64_t> clamped_{0};
};

}  // namespace vgs
