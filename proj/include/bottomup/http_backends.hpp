// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "bottomup/backends.hpp"

// Live HTTP clients for the four service contracts.
//
// Chat:       OpenAI-style chat completion. POST {"model", "messages": [{"role":
//             "user", "content": [{"type": "text", "text"}, {"type":
//             "image_url", "image_url": {"url"}}]}], "max_tokens", "seed"};
//             reply read from choices[0].message.content.
// Detect:     POST {"image": {"base64", "media_kind"}, "phrase"} ->
//             {"detections": [{"box": [x0, y0, x1, y1], "confidence", "phrase"}]}
// Similarity: POST {"image": {"base64", "media_kind"}, "region": [x0, y0, x1, y1],
//             "text"} -> {"score"}
// Search:     Serper-style. POST {"q", "num"} with header X-API-KEY ->
//             {"organic": [{"title", "link", "snippet", "position"}]}
//
// Credentials are read from the environment at call time, never from config.
namespace bottomup::http {

inline constexpr const char* kChatKeyEnv = "BOTTOMUP_CHAT_API_KEY";
inline constexpr const char* kDetectKeyEnv = "BOTTOMUP_DETECT_API_KEY";
inline constexpr const char* kScoreKeyEnv = "BOTTOMUP_SCORE_API_KEY";
inline constexpr const char* kSearchKeyEnv = "BOTTOMUP_SEARCH_API_KEY";

struct Endpoint {
    std::string url;
    std::string api_key_env;
    double timeout_seconds = 60;
    /// Extra attempts after a connection failure, 429 or 5xx.
    int retries = 2;
};

enum class ImageMode { Base64, Url };

std::string base64_encode(std::string_view data);

class HttpChat : public ChatModel {
public:
    HttpChat(Endpoint endpoint, std::string model, ImageMode image_mode = ImageMode::Base64);
    std::string complete_raw(const ChatRequest& request) override;

    /// The JSON body sent for `request`.
    std::string request_body(const ChatRequest& request) const;

private:
    Endpoint endpoint_;
    std::string model_;
    ImageMode image_mode_;
};

class HttpDetector : public PhraseDetector {
public:
    explicit HttpDetector(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::vector<Detection> detect_raw(const ImageRef& image, const std::string& phrase) override;

private:
    Endpoint endpoint_;
};

class HttpScorer : public SimilarityScorer {
public:
    explicit HttpScorer(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    double score_raw(const ImageRef& image, const Box& region, const std::string& text) override;

private:
    Endpoint endpoint_;
};

class HttpSearch : public SearchProvider {
public:
    explicit HttpSearch(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::vector<FactSnippet> search_raw(const std::string& query, std::size_t top_k) override;

private:
    Endpoint endpoint_;
};

}  // namespace bottomup::http
