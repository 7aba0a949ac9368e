// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "bottomup/backends.hpp"
#include "bottomup/config.hpp"
#include "bottomup/mock_backends.hpp"
#include "bottomup/pipeline.hpp"
#include "bottomup/scene_graph.hpp"

// Shared fixtures for the unit and acceptance tests.
namespace bottomup::testing {

std::filesystem::path source_dir();
std::filesystem::path demo_dir();
std::filesystem::path golden_dir();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Golden comparison: returns true when `actual` equals the file. With
/// BOTTOMUP_UPDATE_GOLDEN=1 set the file is rewritten first.
bool matches_golden(const std::filesystem::path& path, const std::string& actual);

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// A small inline image; the bytes only feed request digests.
ImageRef tiny_image(const std::string& tag = "img");

/// Random valid graph: unique ids, non-empty names, no dangling endpoints.
/// Type names, attribute texts and predicates include spaces, quotes,
/// backslashes and non-ASCII text.
SceneGraph random_graph(std::mt19937_64& rng, std::size_t max_objects = 6);

/// Mock detector and scorer with random coverage of `sg`: each type name is
/// found with some probability (sometimes below threshold), attribute
/// phrases land on or off their object, relation scores straddle the
/// threshold.
struct RandomGrounding {
    mock::TableDetector detector;
    mock::TableScorer scorer{0.0};
};
void randomize_grounding(RandomGrounding& g, const SceneGraph& sg, std::mt19937_64& rng);
void randomize_grounding(mock::TableDetector& detector, mock::TableScorer& scorer, const SceneGraph& sg,
                         std::mt19937_64& rng);

/// Random lowercase sentence over a small vocabulary, with occasional
/// capitals and punctuation.
std::string random_sentence(std::mt19937_64& rng, std::size_t max_words = 9);

/// Text that identifies each default prompt.
inline constexpr const char* kNeedleP1 = "extract a partial scene graph";
inline constexpr const char* kNeedleP3 = "potential conflict between the visual content and question";
inline constexpr const char* kNeedleP4 = "deduce the commonsense claim";
inline constexpr const char* kNeedleP5 = "verify the faithfulness of each claim";
inline constexpr const char* kNeedleP6Perception = "first determine whether the content available";
inline constexpr const char* kNeedleP6Knowledge = "and the verified commonsense claims, please answer";

/// Chat decorator that keeps every request it forwards.
class RecordingChat : public ChatModel {
public:
    explicit RecordingChat(std::shared_ptr<ChatModel> inner) : inner_(std::move(inner)) {}
    std::string complete_raw(const ChatRequest& request) override;
    std::vector<std::string> prompts() const;
    std::size_t calls() const;

private:
    std::shared_ptr<ChatModel> inner_;
    mutable std::mutex mutex_;
    std::vector<std::string> prompts_;
};

/// The cat/bus scene with rules keyed only on the prompt kind, so every
/// stage combination gets a reply. The cat is not detected, the guard
/// reports an object conflict, the perception-level answer is
/// insufficient, and the second of two claims is a hallucination.
struct CatBusWorld {
    std::shared_ptr<RecordingChat> chat;
    std::shared_ptr<mock::TableDetector> detector;
    std::shared_ptr<mock::TableScorer> scorer;
    std::shared_ptr<mock::TableSearch> search;
    Services services;
};
inline constexpr const char* kCatBusAdjusted = "What does the sign near the front of the bus mean?";
inline constexpr const char* kCatBusDirectReply = "The cat is black.";
inline constexpr const char* kCatBusKnowledgeReply = "It is a stop arm. Drivers must stop.";
inline constexpr const char* kCatBusClaim1 = "A red sign on the side of a school bus is a stop arm.";
inline constexpr const char* kCatBusClaim2 = "A stop arm means the bus is out of service.";
CatBusWorld cat_bus_world();

/// `n` generated cases with question "Case NN: ...", each with its own
/// random graph, grounding, guard verdict, sufficiency, claims, labels
/// and search failures. Deterministic in `seed`.
struct RandomWorld {
    std::shared_ptr<mock::RuleChat> chat;
    std::shared_ptr<mock::TableDetector> detector;
    std::shared_ptr<mock::TableScorer> scorer;
    std::shared_ptr<mock::TableSearch> search;
    std::vector<BatchCase> cases;
    Services services() const;
};
RandomWorld random_world(std::uint64_t seed, std::size_t n);

/// The cat/bus query against the demo scenario with ask.ini, case id
/// "cat_bus". Live mocks, no fixture store.
PipelineResult run_demo_cat_bus();

/// Demo config (data/demo/config.ini or ask.ini) with paths resolved.
AppConfig demo_config(const std::string& name = "config.ini");

/// The cat/bus question shipped with the demo scenario.
inline constexpr const char* kCatBusQuestion = "What color is the cat sitting near the front of the bus?";

}  // namespace bottomup::testing
