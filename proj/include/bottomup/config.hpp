// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "bottomup/fixture_store.hpp"
#include "bottomup/pipeline.hpp"

namespace bottomup {

// INI configuration.
//
//   [backends]     kind = mock | http, mock_scenario, chat_url, chat_model,
//                  chat_image_mode = base64 | url, detect_url, score_url,
//                  search_url, timeout_seconds, http_retries
//   [perception]   retries, partial, degrade_on_failure
//   [verification] object_threshold, attribute_threshold, relation_threshold,
//                  iou_floor, concurrent, max_concurrency
//   [guard]        k_examples, examples_dir
//   [commonsense]  top_k, search_concurrency, rewrite_queries
//   [answer]       kind = binary | freeform, insufficiency_markers (comma list)
//   [pipeline]     ablate (comma list), parallelism, continue_on_error,
//                  max_tokens, seed, prompts_dir
//
// Every key can be overridden by the environment variable
// BOTTOMUP_<SECTION>_<KEY> (upper case). Credentials are environment-only
// and a config file that carries one is rejected.

struct BackendSettings {
    std::string kind = "mock";
    std::filesystem::path mock_scenario;
    std::string chat_url;
    std::string chat_model;
    std::string chat_image_mode = "base64";
    std::string detect_url;
    std::string score_url;
    std::string search_url;
    double timeout_seconds = 60;
    int http_retries = 2;
};

struct AppConfig {
    BackendSettings backends;
    PipelineConfig pipeline;
    std::filesystem::path prompts_dir;
    std::filesystem::path examples_dir;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Parses INI text. Relative paths resolve against base_dir. Throws ConfigError.
AppConfig parse_config(std::string_view ini_text, const std::filesystem::path& base_dir,
                       const EnvLookup& env = process_env);

/// Defaults when `path` is empty; environment overrides apply either way.
/// Throws ConfigError or IoError.
AppConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env = process_env);

/// Live backends per config, optionally wrapped by a fixture store. Replay
/// mode never constructs live clients, so it never touches the network.
Services build_services(const AppConfig& config, std::shared_ptr<FixtureStore> store = nullptr);

}  // namespace bottomup
