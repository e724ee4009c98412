#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "beqh/core.hpp"
#include "beqh/dataset.hpp"
#include "beqh/normalize.hpp"

namespace beqh::generate {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kDefaultTemplate =
    "Translate the following statement into a Lean 4 theorem using Mathlib. "
    "Give only the theorem statement, with `sorry` as its proof.\n\n"
    "{context}"
    "Natural language statement:\n{informal}\n\n"
    "Lean 4 statement:\n";

struct EndpointConfig {
  std::string url;         // full URL of an OpenAI-style completions route
  std::string token_env;   // name of the variable holding the bearer token
  std::string model_id;
  double temperature = 0.0;
  int n = 1;
  int max_tokens = 512;
  int max_attempts = 4;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{120};
  std::string prompt_template{kDefaultTemplate};
};

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || (url.compare(0, scheme_end, "http") != 0 && url.compare(0, scheme_end, "https") != 0)) {
    throw Error(ErrorCode::InvalidArgument, "endpoint must be an http(s) URL: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// `{informal}` and `{context}` placeholders; context is followed by a blank
/// line when present.
inline std::string render_prompt(std::string_view tmpl, const dataset::Problem& p) {
  std::string context = p.context_mode == ContextMode::None || p.context.empty()
                            ? std::string()
                            : normalize::prepare_context(p.context, p.context_mode) + "\n\n";
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    if (tmpl.compare(pos, 10, "{informal}") == 0) {
      out += p.informal;
      pos += 10;
    } else if (tmpl.compare(pos, 9, "{context}") == 0) {
      out += context;
      pos += 9;
    } else {
      out += tmpl[pos++];
    }
  }
  return out;
}

struct Completions {
  std::vector<std::string> texts;
  int attempts = 0;
};

inline bool retryable(int status) { return status == 429 || status >= 500; }

/// One prompt, n completions. Connection failures, 429 and 5xx are retried
/// with exponential backoff; other 4xx fail at once.
inline Completions complete(const EndpointConfig& cfg, const std::string& prompt,
                            const std::function<void(std::chrono::milliseconds)>& sleep =
                                [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (cfg.url.empty()) {
    throw Error(ErrorCode::OfflineMode,
                "no endpoint configured: pass --endpoint URL (an OpenAI-style completions route) to generate candidates");
  }
  ParsedUrl u = parse_url(cfg.url);
  httplib::Client client(u.scheme_host_port);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout).count());
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout).count());
  httplib::Headers headers;
  if (!cfg.token_env.empty()) {
    if (const char* tok = std::getenv(cfg.token_env.c_str()); tok && *tok) {
      headers.emplace("Authorization", std::string("Bearer ") + tok);
    }
  }
  ordered_json body{{"model", cfg.model_id},
                    {"prompt", prompt},
                    {"n", cfg.n},
                    {"temperature", cfg.temperature},
                    {"max_tokens", cfg.max_tokens}};
  std::string payload = body.dump();

  Completions out;
  std::string last_error;
  auto delay = cfg.backoff;
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    out.attempts = attempt;
    auto res = client.Post(u.path, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      auto j = ordered_json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array()) {
        throw Error(ErrorCode::EndpointError, "endpoint reply has no choices array");
      }
      for (const auto& c : j["choices"]) {
        if (c.contains("text") && c["text"].is_string()) out.texts.push_back(c["text"].get<std::string>());
        else if (c.contains("message") && c["message"].contains("content")) {
          out.texts.push_back(c["message"]["content"].get<std::string>());
        }
      }
      return out;
    } else {
      last_error = "HTTP " + std::to_string(res->status);
      if (!retryable(res->status)) break;
    }
    if (attempt < cfg.max_attempts) {
      sleep(delay);
      delay *= 2;
    }
  }
  throw Error(ErrorCode::EndpointError, "endpoint failed after " + std::to_string(out.attempts) + " attempt(s): " + last_error);
}

struct GenerateResult {
  std::vector<CandidatePool> pools;
  std::vector<std::string> warnings;
  std::optional<std::string> failure;  // set when a request failed; pools hold the problems done before it
};

inline GenerateResult generate_candidates(const std::vector<dataset::Problem>& problems, const EndpointConfig& cfg,
                                          const std::function<void(std::chrono::milliseconds)>& sleep =
                                              [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (cfg.url.empty()) {
    throw Error(ErrorCode::OfflineMode,
                "no endpoint configured: pass --endpoint URL (an OpenAI-style completions route) to generate candidates");
  }
  if (cfg.n < 1) throw Error(ErrorCode::InvalidArgument, "--n must be at least 1");
  GenerateResult result;
  for (const auto& p : problems) {
    Completions c;
    try {
      c = complete(cfg, render_prompt(cfg.prompt_template, p), sleep);
    } catch (const Error& e) {
      result.failure = "problem " + p.problem_id + ": " + e.what();
      break;
    }
    if (static_cast<int>(c.texts.size()) < cfg.n) {
      result.warnings.push_back("problem " + p.problem_id + ": endpoint returned " + std::to_string(c.texts.size()) +
                                " of " + std::to_string(cfg.n) + " completions");
    }
    CandidatePool pool;
    pool.problem_id = p.problem_id;
    pool.informal = p.informal;
    pool.context = p.context_mode == ContextMode::None ? p.context : normalize::prepare_context(p.context, p.context_mode);
    pool.context_mode = p.context_mode;
    for (auto& t : c.texts) {
      Candidate cand;
      cand.index = pool.candidates.size();
      cand.raw_text = std::move(t);
      pool.candidates.push_back(std::move(cand));
    }
    pool.gen_config.model_id = cfg.model_id;
    pool.gen_config.temperature = cfg.temperature;
    pool.gen_config.num_samples = static_cast<int>(pool.candidates.size());
    pool.gen_config.decode_mode = dataset::decode_mode_for(cfg.temperature, cfg.n);
    result.pools.push_back(std::move(pool));
  }
  return result;
}

}  // namespace beqh::generate
