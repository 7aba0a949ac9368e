// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bottomup/errors.hpp"
#include "bottomup/http_backends.hpp"
#include "bottomup/mock_backends.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

namespace pt = boost::property_tree;

std::optional<std::string> process_env(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
}

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"backends",
         {"kind", "mock_scenario", "chat_url", "chat_model", "chat_image_mode", "detect_url", "score_url", "search_url",
          "timeout_seconds", "http_retries"}},
        {"perception", {"retries", "partial", "degrade_on_failure"}},
        {"verification",
         {"object_threshold", "attribute_threshold", "relation_threshold", "iou_floor", "concurrent", "max_concurrency"}},
        {"guard", {"k_examples", "examples_dir"}},
        {"commonsense", {"top_k", "search_concurrency", "rewrite_queries"}},
        {"answer", {"kind", "insufficiency_markers"}},
        {"pipeline", {"ablate", "parallelism", "continue_on_error", "max_tokens", "seed", "prompts_dir"}},
    };
    return s;
}

bool looks_like_credential(const std::string& key) {
    const std::string k = text::to_lower(key);
    for (const char* bad : {"api_key", "apikey", "secret", "password", "credential", "bearer"}) {
        if (k.find(bad) != std::string::npos) return true;
    }
    return false;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

bool to_bool(const std::string& v, const std::string& at) {
    const std::string s = text::to_lower(text::trim(v));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(at + ": expected a boolean, got \"" + v + "\"");
}

long long to_int(const std::string& v, const std::string& at, long long min) {
    try {
        std::size_t used = 0;
        const long long n = std::stoll(text::trim(v), &used);
        if (used != text::trim(v).size()) throw std::invalid_argument("trailing");
        if (n < min) throw ConfigError(at + ": must be at least " + std::to_string(min));
        return n;
    } catch (const std::logic_error&) {
        throw ConfigError(at + ": expected an integer, got \"" + v + "\"");
    }
}

double to_double(const std::string& v, const std::string& at) {
    try {
        std::size_t used = 0;
        const double d = std::stod(text::trim(v), &used);
        if (used != text::trim(v).size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::logic_error&) {
        throw ConfigError(at + ": expected a number, got \"" + v + "\"");
    }
}

std::vector<std::string> to_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = text::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::filesystem::path resolve(const std::string& v, const std::filesystem::path& base) {
    std::filesystem::path p(text::trim(v));
    if (p.empty() || p.is_absolute()) return p;
    return base / p;
}

void apply(AppConfig& c, const std::string& section, const std::string& key, const std::string& value,
           const std::filesystem::path& base) {
    const std::string at = where(section, key);
    const std::string v = text::trim(value);
    BackendSettings& b = c.backends;
    PipelineConfig& p = c.pipeline;
    if (section == "backends") {
        if (key == "kind") {
            if (v != "mock" && v != "http") throw ConfigError(at + ": expected mock or http");
            b.kind = v;
        } else if (key == "mock_scenario") {
            b.mock_scenario = resolve(v, base);
        } else if (key == "chat_url") {
            b.chat_url = v;
        } else if (key == "chat_model") {
            b.chat_model = v;
        } else if (key == "chat_image_mode") {
            if (v != "base64" && v != "url") throw ConfigError(at + ": expected base64 or url");
            b.chat_image_mode = v;
        } else if (key == "detect_url") {
            b.detect_url = v;
        } else if (key == "score_url") {
            b.score_url = v;
        } else if (key == "search_url") {
            b.search_url = v;
        } else if (key == "timeout_seconds") {
            b.timeout_seconds = to_double(v, at);
            if (b.timeout_seconds <= 0) throw ConfigError(at + ": must be positive");
        } else if (key == "http_retries") {
            b.http_retries = static_cast<int>(to_int(v, at, 0));
        }
    } else if (section == "perception") {
        if (key == "retries") p.perception_retries = static_cast<int>(to_int(v, at, 0));
        if (key == "partial") p.partial_scene_graph = to_bool(v, at);
        if (key == "degrade_on_failure") p.degrade_on_perception_failure = to_bool(v, at);
    } else if (section == "verification") {
        if (key == "object_threshold") p.verify.object_threshold = to_double(v, at);
        if (key == "attribute_threshold") p.verify.attribute_threshold = to_double(v, at);
        if (key == "relation_threshold") p.verify.relation_threshold = to_double(v, at);
        if (key == "iou_floor") p.verify.iou_floor = to_double(v, at);
        if (key == "concurrent") p.verify.concurrent = to_bool(v, at);
        if (key == "max_concurrency") p.verify.max_concurrency = static_cast<std::size_t>(to_int(v, at, 1));
    } else if (section == "guard") {
        if (key == "k_examples") p.k_examples = static_cast<std::size_t>(to_int(v, at, 0));
        if (key == "examples_dir") c.examples_dir = resolve(v, base);
    } else if (section == "commonsense") {
        if (key == "top_k") p.top_k = static_cast<std::size_t>(to_int(v, at, 0));
        if (key == "search_concurrency") p.search_concurrency = static_cast<std::size_t>(to_int(v, at, 1));
        if (key == "rewrite_queries") p.rewrite_queries = to_bool(v, at);
    } else if (section == "answer") {
        if (key == "kind") {
            if (v != "binary" && v != "freeform") throw ConfigError(at + ": expected binary or freeform");
            p.answer_kind = answer_kind_from_string(v);
        }
        if (key == "insufficiency_markers") p.insufficiency_markers = to_list(v);
    } else if (section == "pipeline") {
        if (key == "ablate") p.flags = AblationFlags::without(to_list(v));
        if (key == "parallelism") p.parallelism = static_cast<std::size_t>(to_int(v, at, 1));
        if (key == "continue_on_error") p.continue_on_error = to_bool(v, at);
        if (key == "max_tokens") p.max_tokens = static_cast<int>(to_int(v, at, 1));
        if (key == "seed") {
            if (v.empty()) {
                p.seed.reset();
            } else {
                p.seed = static_cast<std::uint64_t>(to_int(v, at, 0));
            }
        }
        if (key == "prompts_dir") c.prompts_dir = resolve(v, base);
    }
}

std::string env_name(const std::string& section, const std::string& key) {
    std::string n = "BOTTOMUP_" + section + "_" + key;
    for (char& ch : n) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return n;
}

void apply_env(AppConfig& c, const EnvLookup& env) {
    const auto cwd = std::filesystem::current_path();
    for (const auto& [section, keys] : schema()) {
        for (const auto& key : keys) {
            if (auto v = env(env_name(section, key))) apply(c, section, key, *v, cwd);
        }
    }
}

}  // namespace

AppConfig parse_config(std::string_view ini_text, const std::filesystem::path& base_dir, const EnvLookup& env) {
    pt::ptree tree;
    std::istringstream in{std::string(ini_text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    AppConfig c;
    for (const auto& [section, node] : tree) {
        if (node.empty() && !node.data().empty()) {
            throw ConfigError("config: key \"" + section + "\" must sit inside a [section]");
        }
        const auto known = schema().find(section);
        if (known == schema().end()) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : node) {
            if (looks_like_credential(key)) {
                throw ConfigError("config: " + where(section, key) +
                                  " looks like a credential; set credentials through environment variables only");
            }
            if (!known->second.contains(key)) throw ConfigError("config: unknown key " + where(section, key));
            apply(c, section, key, value.data(), base_dir);
        }
    }
    apply_env(c, env);
    c.pipeline.validate();
    return c;
}

AppConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
    if (!path) {
        AppConfig c;
        apply_env(c, env);
        c.pipeline.validate();
        return c;
    }
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw IoError("cannot read config " + path->generic_string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path->parent_path().empty() ? std::filesystem::path(".") : path->parent_path(), env);
}

namespace {

// Keeps the live backend alive alongside its fixture wrapper.
template <class Iface, class Wrapper>
std::shared_ptr<Iface> wrap(std::shared_ptr<Iface> live, const std::shared_ptr<FixtureStore>& store) {
    if (!store) return live;
    struct Holder : Wrapper {
        Holder(std::shared_ptr<Iface> l, std::shared_ptr<FixtureStore> s) : Wrapper(l.get(), std::move(s)), keep(std::move(l)) {}
        std::shared_ptr<Iface> keep;
    };
    return std::make_shared<Holder>(std::move(live), store);
}

}  // namespace

Services build_services(const AppConfig& config, std::shared_ptr<FixtureStore> store) {
    std::shared_ptr<ChatModel> chat;
    std::shared_ptr<PhraseDetector> detector;
    std::shared_ptr<SimilarityScorer> scorer;
    std::shared_ptr<SearchProvider> search;
    const bool live = !store || store->mode() != FixtureMode::Replay;
    const BackendSettings& b = config.backends;
    if (live && b.kind == "mock") {
        if (b.mock_scenario.empty()) throw ConfigError("[backends] kind = mock needs mock_scenario");
        std::shared_ptr<mock::Scenario> scenario = mock::load_scenario(b.mock_scenario);
        chat = std::shared_ptr<ChatModel>(scenario, &scenario->chat);
        detector = std::shared_ptr<PhraseDetector>(scenario, &scenario->detector);
        scorer = std::shared_ptr<SimilarityScorer>(scenario, &scenario->scorer);
        search = std::shared_ptr<SearchProvider>(scenario, &scenario->search);
    } else if (live) {
        auto endpoint = [&](const std::string& url, const char* key_env, const char* what) {
            if (url.empty()) throw ConfigError(std::string("[backends] ") + what + " is required for kind = http");
            return http::Endpoint{url, key_env, b.timeout_seconds, b.http_retries};
        };
        chat = std::make_shared<http::HttpChat>(endpoint(b.chat_url, http::kChatKeyEnv, "chat_url"), b.chat_model,
                                                b.chat_image_mode == "url" ? http::ImageMode::Url : http::ImageMode::Base64);
        const AblationFlags& f = config.pipeline.flags;
        if (f.vpv) {
            detector = std::make_shared<http::HttpDetector>(endpoint(b.detect_url, http::kDetectKeyEnv, "detect_url"));
            scorer = std::make_shared<http::HttpScorer>(endpoint(b.score_url, http::kScoreKeyEnv, "score_url"));
        }
        if (f.cv) search = std::make_shared<http::HttpSearch>(endpoint(b.search_url, http::kSearchKeyEnv, "search_url"));
    }

    Services s;
    s.chat = wrap<ChatModel, FixtureChat>(chat, store);
    s.detector = wrap<PhraseDetector, FixtureDetector>(detector, store);
    s.scorer = wrap<SimilarityScorer, FixtureScorer>(scorer, store);
    s.search = wrap<SearchProvider, FixtureSearch>(search, store);
    if (!config.prompts_dir.empty()) s.prompts.override_from(config.prompts_dir);
    if (!config.examples_dir.empty()) s.examples = GuardExamples::load(config.examples_dir);
    return s;
}

}  // namespace bottomup
