// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "bottomup/backends.hpp"

namespace bottomup {

struct FixtureRecord {
    BackendKind backend_kind = BackendKind::Chat;
    std::string request_digest;
    std::string request;
    std::string response;

    bool operator==(const FixtureRecord&) const = default;
};

/// SHA-256 of the canonical request text.
std::string request_digest(std::string_view canonical_request);

FixtureRecord make_record(BackendKind kind, std::string request, std::string response = {});

enum class FixtureMode {
    Record,       // every call goes live and is appended
    Replay,       // strict: unknown requests raise ReplayMiss
    Passthrough,  // replay when known, otherwise live call + append
};

/// Line-delimited store of recorded backend exchanges. Reads run
/// concurrently; appends are serialized.
class FixtureStore {
public:
    /// Record mode creates the file when missing; Replay requires it.
    /// Throws StoreCorrupt or IoError.
    FixtureStore(std::filesystem::path path, FixtureMode mode);
    /// Not backed by a file.
    explicit FixtureStore(FixtureMode mode);

    FixtureStore(const FixtureStore&) = delete;
    FixtureStore& operator=(const FixtureStore&) = delete;

    FixtureMode mode() const { return mode_; }
    const std::optional<std::filesystem::path>& path() const { return path_; }

    /// Record mode appends `record` and returns its response; the replay
    /// modes return the stored response with the same digest.
    /// Throws ReplayMiss when nothing matches.
    std::string roundtrip(const FixtureRecord& record);

    std::optional<std::string> lookup(BackendKind kind, const std::string& digest) const;
    void append(const FixtureRecord& record);

    std::size_t size() const;
    std::vector<FixtureRecord> records() const;

    static std::string encode_line(const FixtureRecord& record);
    /// Throws StoreCorrupt naming `line_number`.
    static FixtureRecord decode_line(std::string_view line, std::size_t line_number);

private:
    static std::string key(BackendKind kind, const std::string& digest);

    FixtureMode mode_;
    std::optional<std::filesystem::path> path_;
    mutable std::shared_mutex mutex_;
    std::vector<FixtureRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    std::ofstream out_;
};

// Decorators that route a backend through a fixture store. `live` may be null
// in Replay mode.

class FixtureChat : public ChatModel {
public:
    FixtureChat(ChatModel* live, std::shared_ptr<FixtureStore> store);
    std::string complete_raw(const ChatRequest& request) override;

private:
    ChatModel* live_;
    std::shared_ptr<FixtureStore> store_;
};

class FixtureDetector : public PhraseDetector {
public:
    FixtureDetector(PhraseDetector* live, std::shared_ptr<FixtureStore> store);
    std::vector<Detection> detect_raw(const ImageRef& image, const std::string& phrase) override;

private:
    PhraseDetector* live_;
    std::shared_ptr<FixtureStore> store_;
};

class FixtureScorer : public SimilarityScorer {
public:
    FixtureScorer(SimilarityScorer* live, std::shared_ptr<FixtureStore> store);
    double score_raw(const ImageRef& image, const Box& region, const std::string& text) override;

private:
    SimilarityScorer* live_;
    std::shared_ptr<FixtureStore> store_;
};

class FixtureSearch : public SearchProvider {
public:
    FixtureSearch(SearchProvider* live, std::shared_ptr<FixtureStore> store);
    std::vector<FactSnippet> search_raw(const std::string& query, std::size_t top_k) override;

private:
    SearchProvider* live_;
    std::shared_ptr<FixtureStore> store_;
};

}  // namespace bottomup
