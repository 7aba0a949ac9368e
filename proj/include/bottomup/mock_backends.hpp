// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bottomup/backends.hpp"

// Deterministic in-process backends for tests, demos and fixture recording.
namespace bottomup::mock {

/// Returns scripted replies in order; throws BackendError once exhausted.
class ScriptedChat : public ChatModel {
public:
    explicit ScriptedChat(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    std::string complete_raw(const ChatRequest& request) override;

    std::size_t calls() const;
    std::vector<ChatRequest> requests() const;

private:
    mutable std::mutex mutex_;
    std::vector<std::string> replies_;
    std::vector<ChatRequest> requests_;
};

/// Replies with the first rule whose needles all occur in the joined prompt.
/// Stateless per call, so it is safe under concurrency and replay.
class RuleChat : public ChatModel {
public:
    struct Rule {
        std::vector<std::string> needles;
        std::string reply;
    };

    RuleChat() = default;
    explicit RuleChat(std::vector<Rule> rules, std::optional<std::string> fallback = std::nullopt)
        : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

    void add(std::vector<std::string> needles, std::string reply);
    void set_fallback(std::string reply) { fallback_ = std::move(reply); }

    std::string complete_raw(const ChatRequest& request) override;
    std::size_t calls() const { return calls_.load(); }

private:
    std::vector<Rule> rules_;
    std::optional<std::string> fallback_;
    std::atomic<std::size_t> calls_{0};
};

/// Phrase -> detections table. Keys are normalized like detect_phrase does.
class TableDetector : public PhraseDetector {
public:
    void add(std::string_view phrase, Detection detection);
    std::vector<Detection> detect_raw(const ImageRef& image, const std::string& phrase) override;
    std::size_t calls() const { return calls_.load(); }

private:
    std::map<std::string, std::vector<Detection>> table_;
    std::atomic<std::size_t> calls_{0};
};

/// Text -> score table with a default for unknown texts.
class TableScorer : public SimilarityScorer {
public:
    explicit TableScorer(double fallback = 0.5) : fallback_(fallback) {}

    void set(std::string text, double score) { table_[std::move(text)] = score; }
    void set_fallback(double score) { fallback_ = score; }
    double score_raw(const ImageRef& image, const Box& region, const std::string& text) override;
    std::size_t calls() const { return calls_.load(); }

private:
    double fallback_;
    std::map<std::string, double> table_;
    std::atomic<std::size_t> calls_{0};
};

/// Query -> snippets table. Queries listed as failing raise SearchUnavailable;
/// unknown queries return nothing.
class TableSearch : public SearchProvider {
public:
    void add(std::string query, FactSnippet snippet);
    void fail(std::string query) { failing_.insert(std::move(query)); }
    void fail_all(bool on = true) { fail_all_ = on; }

    std::vector<FactSnippet> search_raw(const std::string& query, std::size_t top_k) override;
    std::size_t calls() const { return calls_.load(); }
    std::vector<std::string> queries() const;

private:
    std::map<std::string, std::vector<FactSnippet>> table_;
    std::set<std::string> failing_;
    bool fail_all_ = false;
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex mutex_;
    std::vector<std::string> queries_;
};

/// The four mocks loaded from one scenario file.
///
/// {
///   "chat":     {"rules": [{"match": ["...", "..."], "reply": "..."}], "fallback": "..."},
///   "detector": {"<phrase>": [{"box": [x0, y0, x1, y1], "confidence": 0.9}]},
///   "scorer":   {"default": 0.5, "texts": {"<relation phrase>": 0.8}},
///   "search":   {"results": {"<query>": [{"title": "", "snippet": "", "source_url": ""}]},
///                "fail": ["<query>"]}
/// }
struct Scenario {
    RuleChat chat;
    TableDetector detector;
    TableScorer scorer;
    TableSearch search;
};

/// Throws ConfigError or IoError.
std::unique_ptr<Scenario> load_scenario(const std::filesystem::path& path);
std::unique_ptr<Scenario> parse_scenario(std::string_view json_text);

}  // namespace bottomup::mock
