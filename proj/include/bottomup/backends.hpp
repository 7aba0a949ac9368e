// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bottomup/geometry.hpp"

namespace bottomup {

/// An image handed to the backends: a file on disk, inline bytes, or a URL
/// the remote service fetches itself.
class ImageRef {
public:
    enum class Source { File, Inline, Url };

    ImageRef() = default;

    static ImageRef from_file(std::filesystem::path path);
    static ImageRef from_bytes(std::string bytes, std::string media_kind);
    static ImageRef from_url(std::string url, std::string media_kind = "");

    Source source() const { return source_; }
    const std::filesystem::path& path() const { return path_; }
    const std::string& url() const { return url_; }
    const std::string& media_kind() const { return media_kind_; }
    /// Human-readable origin, for traces.
    std::string describe() const;

    /// Raw image bytes. Throws IoError for unreadable files and
    /// InvalidRequest for URL images.
    std::string bytes() const;
    /// SHA-256 (hex) of the bytes; URL images digest their URL.
    std::string digest() const;

private:
    Source source_ = Source::Inline;
    std::filesystem::path path_;
    std::string url_;
    std::string payload_;
    std::string media_kind_;
};

struct ChatRequest {
    std::optional<ImageRef> image;
    /// Prompt parts in order; the wire message is their concatenation.
    std::vector<std::string> segments;
    int max_tokens = 1024;
    std::optional<std::uint64_t> seed;

    /// Segments joined by a blank line.
    std::string joined() const;
    /// Throws InvalidRequest unless at least one segment is non-empty.
    void validate() const;
};

struct Detection {
    Box box;
    double confidence = 0;
    std::string phrase;

    bool operator==(const Detection&) const = default;
};

struct FactSnippet {
    std::string title;
    std::string snippet;
    std::string source_url;
    int rank = 0;

    bool operator==(const FactSnippet&) const = default;
};

enum class BackendKind { Chat, Detect, Similarity, Search };

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view s);

// Service contracts. Implementations return raw service output; the free
// functions below apply the contract checks, normalization and filtering so
// mocks, replays and live clients behave identically.

class ChatModel {
public:
    virtual ~ChatModel() = default;
    virtual std::string complete_raw(const ChatRequest& request) = 0;
};

class PhraseDetector {
public:
    virtual ~PhraseDetector() = default;
    /// `phrase` is already normalized (see normalize_phrase).
    virtual std::vector<Detection> detect_raw(const ImageRef& image, const std::string& phrase) = 0;
};

class SimilarityScorer {
public:
    virtual ~SimilarityScorer() = default;
    virtual double score_raw(const ImageRef& image, const Box& region, const std::string& text) = 0;
};

class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<FactSnippet> search_raw(const std::string& query, std::size_t top_k) = 0;
};

/// Throws InvalidRequest, ReplyEmpty, or whatever the backend throws.
std::string chat_complete(ChatModel& model, const ChatRequest& request);

/// Lowercase, whitespace-collapsed phrase sent to detectors.
std::string normalize_phrase(std::string_view phrase);

/// Detections with confidence >= threshold, best first. Ties go to the
/// smaller box, then the lexicographically smaller box. Throws OutOfRange for
/// malformed detections.
std::vector<Detection> detect_phrase(PhraseDetector& detector, const ImageRef& image, std::string_view phrase,
                                     double threshold);

/// Throws OutOfRange when the backend leaves [0, 1].
double score_similarity(SimilarityScorer& scorer, const ImageRef& image, const Box& region, std::string_view text);

/// At most top_k snippets in rank order. top_k == 0 never reaches the backend.
std::vector<FactSnippet> web_search(SearchProvider& provider, std::string_view query, std::size_t top_k);

std::string sha256_hex(std::string_view data);

// Canonical request/response text. These strings are what fixtures store and
// what request digests are computed over.
namespace wire {

std::string chat_request(const ChatRequest& request);
std::string detect_request(const ImageRef& image, const std::string& phrase);
std::string similarity_request(const ImageRef& image, const Box& region, const std::string& text);
std::string search_request(const std::string& query, std::size_t top_k);

std::string chat_response(const std::string& reply);
std::string detect_response(const std::vector<Detection>& detections);
std::string similarity_response(double score);
std::string search_response(const std::vector<FactSnippet>& snippets);

std::string parse_chat_response(std::string_view text);
std::vector<Detection> parse_detect_response(std::string_view text);
double parse_similarity_response(std::string_view text);
std::vector<FactSnippet> parse_search_response(std::string_view text);

}  // namespace wire

}  // namespace bottomup
