// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/mock_backends.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bottomup/errors.hpp"

namespace bottomup::mock {

using nlohmann::json;

std::string ScriptedChat::complete_raw(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    const std::size_t n = requests_.size();
    requests_.push_back(request);
    if (n >= replies_.size()) {
        throw BackendError(500, "scripted chat exhausted after " + std::to_string(replies_.size()) + " replies");
    }
    return replies_[n];
}

std::size_t ScriptedChat::calls() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
}

std::vector<ChatRequest> ScriptedChat::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

void RuleChat::add(std::vector<std::string> needles, std::string reply) {
    rules_.push_back({std::move(needles), std::move(reply)});
}

std::string RuleChat::complete_raw(const ChatRequest& request) {
    ++calls_;
    const std::string prompt = request.joined();
    for (const auto& rule : rules_) {
        bool all = true;
        for (const auto& needle : rule.needles) {
            if (prompt.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) return rule.reply;
    }
    if (fallback_) return *fallback_;
    throw BackendError(404, "no mock chat rule matches prompt: " + prompt.substr(0, 160));
}

void TableDetector::add(std::string_view phrase, Detection detection) {
    const std::string key = normalize_phrase(phrase);
    if (detection.phrase.empty()) detection.phrase = key;
    table_[key].push_back(std::move(detection));
}

std::vector<Detection> TableDetector::detect_raw(const ImageRef&, const std::string& phrase) {
    ++calls_;
    const auto it = table_.find(normalize_phrase(phrase));
    return it == table_.end() ? std::vector<Detection>{} : it->second;
}

double TableScorer::score_raw(const ImageRef&, const Box&, const std::string& text) {
    ++calls_;
    const auto it = table_.find(text);
    return it == table_.end() ? fallback_ : it->second;
}

void TableSearch::add(std::string query, FactSnippet snippet) {
    auto& list = table_[std::move(query)];
    if (snippet.rank == 0) snippet.rank = static_cast<int>(list.size()) + 1;
    list.push_back(std::move(snippet));
}

std::vector<FactSnippet> TableSearch::search_raw(const std::string& query, std::size_t top_k) {
    ++calls_;
    {
        std::lock_guard lock(mutex_);
        queries_.push_back(query);
    }
    if (fail_all_ || failing_.contains(query)) throw SearchUnavailable("search provider unavailable for: " + query);
    const auto it = table_.find(query);
    if (it == table_.end()) return {};
    std::vector<FactSnippet> out = it->second;
    std::stable_sort(out.begin(), out.end(), [](const FactSnippet& a, const FactSnippet& b) { return a.rank < b.rank; });
    if (out.size() > top_k) out.resize(top_k);
    return out;
}

std::vector<std::string> TableSearch::queries() const {
    std::lock_guard lock(mutex_);
    return queries_;
}

std::unique_ptr<Scenario> parse_scenario(std::string_view json_text) {
    const json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("mock scenario is not a JSON object");
    auto scenario = std::make_unique<Scenario>();
    try {
        if (j.contains("chat")) {
            const json& chat = j["chat"];
            for (const auto& rule : chat.value("rules", json::array())) {
                scenario->chat.add(rule.at("match").get<std::vector<std::string>>(),
                                   rule.at("reply").get<std::string>());
            }
            if (chat.contains("fallback")) scenario->chat.set_fallback(chat["fallback"].get<std::string>());
        }
        if (j.contains("detector")) {
            for (const auto& [phrase, dets] : j["detector"].items()) {
                for (const auto& d : dets) {
                    const auto b = d.at("box").get<std::vector<double>>();
                    if (b.size() != 4) throw ConfigError("detector box for \"" + phrase + "\" needs four numbers");
                    scenario->detector.add(phrase, {{b[0], b[1], b[2], b[3]}, d.at("confidence").get<double>(),
                                                    d.value("phrase", "")});
                }
            }
        }
        if (j.contains("scorer")) {
            const json& sc = j["scorer"];
            scenario->scorer.set_fallback(sc.value("default", 0.5));
            const json texts = sc.value("texts", json::object());
            for (const auto& [t, s] : texts.items()) scenario->scorer.set(t, s.get<double>());
        }
        if (j.contains("search")) {
            const json& se = j["search"];
            const json results = se.value("results", json::object());
            for (const auto& [q, list] : results.items()) {
                for (const auto& s : list) {
                    scenario->search.add(q, {s.value("title", ""), s.value("snippet", ""), s.value("source_url", ""),
                                             s.value("rank", 0)});
                }
            }
            for (const auto& q : se.value("fail", json::array())) scenario->search.fail(q.get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed mock scenario: ") + e.what());
    }
    return scenario;
}

std::unique_ptr<Scenario> load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read mock scenario " + path.generic_string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace bottomup::mock
