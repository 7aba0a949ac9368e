// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

MissingSlot::MissingSlot(std::vector<std::string> names)
    : Error("missing prompt slot(s): " + text::join(names, ", ")), names_(std::move(names)) {}

UnknownSlot::UnknownSlot(std::vector<std::string> names)
    : Error("unknown prompt slot(s): " + text::join(names, ", ")), names_(std::move(names)) {}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::P1: return "P1";
        case Stage::P3: return "P3";
        case Stage::P4: return "P4";
        case Stage::P5: return "P5";
        case Stage::P6Perception: return "P6_perception";
        case Stage::P6Knowledge: return "P6_knowledge";
    }
    return "?";
}

std::string_view asset_name(Stage stage) {
    switch (stage) {
        case Stage::P1: return "p1.txt";
        case Stage::P3: return "p3.txt";
        case Stage::P4: return "p4.txt";
        case Stage::P5: return "p5.txt";
        case Stage::P6Perception: return "p6_perception.txt";
        case Stage::P6Knowledge: return "p6_knowledge.txt";
    }
    return "";
}

const std::set<std::string>& known_slots() {
    static const std::set<std::string> slots{"question", "scene_graph", "claims", "facts", "examples"};
    return slots;
}

const std::set<std::string>& expected_slots(Stage stage) {
    static const std::map<Stage, std::set<std::string>> table{
        {Stage::P1, {"question"}},
        {Stage::P3, {"examples", "scene_graph", "question"}},
        {Stage::P4, {"scene_graph", "question"}},
        {Stage::P5, {"claims", "facts"}},
        {Stage::P6Perception, {"scene_graph", "question"}},
        {Stage::P6Knowledge, {"scene_graph", "claims", "question"}},
    };
    return table.at(stage);
}

namespace {

// A marker is '{' identifier '}' where identifier is a known slot name.
struct Marker {
    std::size_t begin;
    std::size_t end;  // one past '}'
    std::string name;
};

std::vector<Marker> find_markers(std::string_view body) {
    std::vector<Marker> out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < body.size() && (std::islower(static_cast<unsigned char>(body[j])) || body[j] == '_')) ++j;
        if (j == i + 1 || j >= body.size() || body[j] != '}') continue;
        std::string name(body.substr(i + 1, j - i - 1));
        if (known_slots().contains(name)) out.push_back({i, j + 1, std::move(name)});
    }
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.generic_string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

PromptTemplate::PromptTemplate(Stage stage, std::string body) : stage_(stage), body_(std::move(body)) {
    for (const auto& m : find_markers(body_)) required_.insert(m.name);
}

std::string render_prompt(const PromptTemplate& tmpl, const SlotMap& slots) {
    std::vector<std::string> missing;
    for (const auto& name : tmpl.required_slots()) {
        if (!slots.contains(name)) missing.push_back(name);
    }
    if (!missing.empty()) throw MissingSlot(std::move(missing));
    std::vector<std::string> unknown;
    for (const auto& [name, value] : slots) {
        if (!tmpl.required_slots().contains(name)) unknown.push_back(name);
    }
    if (!unknown.empty()) throw UnknownSlot(std::move(unknown));

    const std::string& body = tmpl.body();
    std::string out;
    out.reserve(body.size());
    std::size_t pos = 0;
    for (const auto& m : find_markers(body)) {
        const std::string& value = slots.at(m.name);
        const std::size_t line_begin = body.rfind('\n', m.begin == 0 ? 0 : m.begin - 1);
        const std::size_t ls = (line_begin == std::string::npos || m.begin == 0) ? 0 : line_begin + 1;
        const std::size_t le = body.find('\n', m.end);
        const bool alone = text::is_blank(std::string_view(body).substr(ls, m.begin - ls)) &&
                           text::is_blank(std::string_view(body).substr(m.end, (le == std::string::npos ? body.size() : le) - m.end));
        if (value.empty() && alone && ls >= pos) {
            out.append(body, pos, ls - pos);
            pos = le == std::string::npos ? body.size() : le + 1;
            continue;
        }
        out.append(body, pos, m.begin - pos);
        out += value;
        pos = m.end;
    }
    out.append(body, pos, std::string::npos);
    return out;
}

PromptSet PromptSet::defaults() {
    PromptSet set;
    for (Stage s : kAllStages) {
        const auto body = assets::get("prompts/" + std::string(asset_name(s)));
        if (body.empty()) throw InvalidTemplate("shipped prompt asset for " + std::string(to_string(s)) + " is missing");
        set.set(PromptTemplate(s, std::string(body)));
    }
    return set;
}

void PromptSet::set(PromptTemplate tmpl) {
    const auto& expected = expected_slots(tmpl.stage());
    if (tmpl.required_slots() != expected) {
        throw InvalidTemplate("prompt for " + std::string(to_string(tmpl.stage())) + " must use exactly the slots {" +
                              text::join(std::vector<std::string>(expected.begin(), expected.end()), "}, {") + "}");
    }
    const Stage s = tmpl.stage();
    templates_.insert_or_assign(s, std::move(tmpl));
}

void PromptSet::override_from(const std::filesystem::path& dir) {
    for (Stage s : kAllStages) {
        const auto p = dir / std::string(asset_name(s));
        if (std::filesystem::exists(p)) set(PromptTemplate(s, read_file(p)));
    }
}

const PromptTemplate& PromptSet::get(Stage stage) const { return templates_.at(stage); }

GuardExamples GuardExamples::defaults() {
    std::vector<std::string> items;
    for (int i = 1;; ++i) {
        const auto body = assets::get("guard_examples/example_" + std::to_string(i) + ".txt");
        if (body.empty()) break;
        items.emplace_back(body);
    }
    return GuardExamples(std::move(items));
}

GuardExamples GuardExamples::load(const std::filesystem::path& dir) {
    std::vector<std::string> items;
    for (int i = 1;; ++i) {
        const auto p = dir / ("example_" + std::to_string(i) + ".txt");
        if (!std::filesystem::exists(p)) break;
        items.push_back(read_file(p));
    }
    return GuardExamples(std::move(items));
}

std::string GuardExamples::render(std::size_t k) const {
    if (k > items_.size()) {
        throw std::out_of_range("requested " + std::to_string(k) + " in-context examples but only " +
                                std::to_string(items_.size()) + " are available");
    }
    if (k == 0) return {};
    std::string out = "Next, I will provide several examples to help you understand this task more clearly:";
    for (std::size_t i = 0; i < k; ++i) {
        std::string item = items_[i];
        while (!item.empty() && item.back() == '\n') item.pop_back();
        out += "\n- - - - - - - - - - - - - - - - - - - -\n[Example-" + std::to_string(i + 1) + "]\n" + item;
    }
    return out;
}

}  // namespace bottomup
