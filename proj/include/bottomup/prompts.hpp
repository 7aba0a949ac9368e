// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bottomup {

enum class Stage { P1, P3, P4, P5, P6Perception, P6Knowledge };

inline constexpr std::array<Stage, 6> kAllStages = {Stage::P1, Stage::P3, Stage::P4,
                                                    Stage::P5, Stage::P6Perception, Stage::P6Knowledge};

std::string_view to_string(Stage stage);
/// Asset file name, e.g. "p6_knowledge.txt".
std::string_view asset_name(Stage stage);
/// Slots the pipeline fills for `stage`.
const std::set<std::string>& expected_slots(Stage stage);
/// Every slot name a template may use: question, scene_graph, claims, facts, examples.
const std::set<std::string>& known_slots();

/// A prompt body with `{name}` slot markers. Braces that do not enclose a
/// known slot name (JSON samples, for instance) are literal text.
class PromptTemplate {
public:
    PromptTemplate(Stage stage, std::string body);

    Stage stage() const { return stage_; }
    const std::string& body() const { return body_; }
    const std::set<std::string>& required_slots() const { return required_; }

private:
    Stage stage_;
    std::string body_;
    std::set<std::string> required_;
};

using SlotMap = std::map<std::string, std::string>;

/// Single-pass substitution; values are never rescanned for markers. A
/// marker alone on its line with an empty value removes the whole line.
/// Throws MissingSlot or UnknownSlot.
std::string render_prompt(const PromptTemplate& tmpl, const SlotMap& slots);

/// One template per stage, defaulting to the shipped assets.
class PromptSet {
public:
    static PromptSet defaults();

    /// Replaces stages whose asset file exists in `dir`. Throws InvalidTemplate
    /// when an override lacks a slot its stage needs.
    void override_from(const std::filesystem::path& dir);
    void set(PromptTemplate tmpl);
    const PromptTemplate& get(Stage stage) const;

private:
    std::map<Stage, PromptTemplate> templates_;
};

/// Worked question-validation examples shown to the model in context.
class GuardExamples {
public:
    static GuardExamples defaults();
    /// Loads example_1.txt, example_2.txt, ... until the first gap.
    static GuardExamples load(const std::filesystem::path& dir);
    explicit GuardExamples(std::vector<std::string> items) : items_(std::move(items)) {}

    std::size_t size() const { return items_.size(); }
    const std::vector<std::string>& items() const { return items_; }
    /// In-context block for the first k examples; empty for k == 0.
    /// Throws std::out_of_range when k exceeds size().
    std::string render(std::size_t k) const;

private:
    std::vector<std::string> items_;
};

namespace assets {
/// Shipped text asset by relative name ("prompts/p1.txt"); empty when absent.
std::string_view get(std::string_view name);
}  // namespace assets

}  // namespace bottomup
