// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "bottomup/text.hpp"

namespace bottomup::testing {

namespace fs = std::filesystem;

fs::path source_dir() { return fs::path(BOTTOMUP_SOURCE_DIR); }
fs::path demo_dir() { return source_dir() / "data" / "demo"; }
fs::path golden_dir() { return source_dir() / "tests" / "golden"; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

bool matches_golden(const fs::path& path, const std::string& actual) {
    const char* update = std::getenv("BOTTOMUP_UPDATE_GOLDEN");
    if (update != nullptr && std::string(update) == "1") write_file(path, actual);
    if (!fs::exists(path)) return false;
    return read_file(path) == actual;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("bottomup-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

ImageRef tiny_image(const std::string& tag) { return ImageRef::from_bytes("\x89PNG-test-" + tag, "png"); }

namespace {

const std::vector<std::string> kTypes = {"Hat", "Person", "dog", "traffic light", "Bus", "cat \"Tom\"", "tür",
                                         "back\\slash", "{brace}", "surf board"};
const std::vector<std::string> kAttrKeys = {"color", "text", "material", "size", "state", "shape"};
const std::vector<std::string> kAttrValues = {"blue", "LOVE", "dark red", "ÄÖÜ", "a \"quoted\" word", "50%",
                                              "x, y", "line\\break", "…", "ok"};
const std::vector<std::string> kPredicates = {"above", "next to", "holding", "on top of", "left of", "wears",
                                              "near \"front\""};

const std::vector<std::string> kWords = {"what", "color", "is", "the", "cat", "dog", "bus", "sitting", "near",
                                         "front", "of", "a", "red", "blue", "hat", "on", "table", "are",
                                         "there", "four", "persons", "beach", "man", "riding"};

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

}  // namespace

SceneGraph random_graph(std::mt19937_64& rng, std::size_t max_objects) {
    SceneGraph sg;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_objects)(rng);
    std::vector<ObjectId> ids;
    ObjectId next = std::uniform_int_distribution<ObjectId>(1, 5)(rng);
    for (std::size_t i = 0; i < n; ++i) {
        SgObject o;
        o.id = next;
        next += std::uniform_int_distribution<ObjectId>(1, 3)(rng);
        o.type_name = pick(rng, kTypes);
        const std::size_t attrs = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
        for (std::size_t a = 0; a < attrs; ++a) o.attributes[pick(rng, kAttrKeys)] = pick(rng, kAttrValues);
        ids.push_back(o.id);
        sg.objects.push_back(std::move(o));
    }
    std::shuffle(sg.objects.begin(), sg.objects.end(), rng);
    if (!ids.empty()) {
        const std::size_t rels = std::uniform_int_distribution<std::size_t>(0, ids.size() + 1)(rng);
        for (std::size_t r = 0; r < rels; ++r) {
            sg.relations.push_back({pick(rng, ids), pick(rng, ids), pick(rng, kPredicates)});
        }
    }
    return sg;
}

void randomize_grounding(RandomGrounding& g, const SceneGraph& sg, std::mt19937_64& rng) {
    randomize_grounding(g.detector, g.scorer, sg, rng);
}

void randomize_grounding(mock::TableDetector& detector, mock::TableScorer& scorer, const SceneGraph& sg,
                         std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::map<std::string, Box> placed;
    for (const auto& o : sg.objects) {
        const std::string phrase = normalize_phrase(o.type_name);
        if (placed.contains(phrase)) continue;
        const double x = std::floor(unit(rng) * 500);
        const double y = std::floor(unit(rng) * 400);
        const Box box{x, y, x + 20 + std::floor(unit(rng) * 100), y + 20 + std::floor(unit(rng) * 80)};
        placed[phrase] = box;
        const double roll = unit(rng);
        if (roll < 0.6) detector.add(phrase, {box, 0.4 + 0.6 * unit(rng), phrase});
        else if (roll < 0.8) detector.add(phrase, {box, 0.3 * unit(rng), phrase});
        if (unit(rng) < 0.3) detector.add(phrase, {{0, 0, 5, 5}, 0.36 + 0.5 * unit(rng), phrase});
    }
    for (const auto& o : sg.objects) {
        const auto it = placed.find(normalize_phrase(o.type_name));
        for (const auto& [key, value] : o.attributes) {
            const std::string phrase = normalize_phrase(value + " " + o.type_name);
            const double roll = unit(rng);
            if (roll < 0.5) detector.add(phrase, {it->second, 0.3 + 0.7 * unit(rng), phrase});
            else if (roll < 0.7) detector.add(phrase, {{600, 440, 640, 480}, 0.9, phrase});
        }
    }
    for (const auto& r : sg.relations) scorer.set(relation_phrase(sg, r), unit(rng));
}

std::string RecordingChat::complete_raw(const ChatRequest& request) {
    {
        std::lock_guard lock(mutex_);
        prompts_.push_back(request.joined());
    }
    return inner_->complete_raw(request);
}

std::vector<std::string> RecordingChat::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

std::size_t RecordingChat::calls() const {
    std::lock_guard lock(mutex_);
    return prompts_.size();
}

namespace {

std::string graph_reply(const SceneGraph& sg) { return "Here is the scene graph.\n" + canonicalize(sg); }

}  // namespace

CatBusWorld cat_bus_world() {
    SceneGraph sg;
    sg.objects = {{1, "Bus", {{"color", "yellow"}}}, {2, "Cat", {{"color", "black"}}}, {3, "Sign", {{"color", "red"}}}};
    sg.relations = {{2, 1, "sitting near the front of"}, {3, 1, "on front of"}};
    const std::string claims = std::string("[Claim 1]: ") + kCatBusClaim1 + "\n[Claim 2]: " + kCatBusClaim2;
    std::vector<mock::RuleChat::Rule> rules{
        {{kNeedleP1}, graph_reply(sg)},
        {{kNeedleP3}, std::string("Conclusion: There is an object conflict: the cat does not appear.\n"
                                  "Output Question: \"") +
                          kCatBusAdjusted + "\""},
        {{kNeedleP4}, "[Commonsense Claims]\n" + claims},
        {{kNeedleP5}, "[Claim 1]: x\n[Label]: Non-hallucination\n[Claim 2]: y\n[Label]: Hallucination"},
        {{kNeedleP6Perception}, "What the sign means is unanswerable from the image alone."},
        {{kNeedleP6Knowledge}, kCatBusKnowledgeReply},
        {{kCatBusQuestion}, kCatBusDirectReply},
    };
    CatBusWorld w;
    w.chat = std::make_shared<RecordingChat>(std::make_shared<mock::RuleChat>(std::move(rules)));
    w.detector = std::make_shared<mock::TableDetector>();
    w.detector->add("bus", {{0, 100, 600, 400}, 0.92, "bus"});
    w.detector->add("yellow bus", {{0, 100, 600, 400}, 0.88, "yellow bus"});
    w.detector->add("sign", {{40, 150, 90, 200}, 0.71, "sign"});
    w.detector->add("red sign", {{40, 150, 90, 200}, 0.64, "red sign"});
    w.scorer = std::make_shared<mock::TableScorer>(0.8);
    w.search = std::make_shared<mock::TableSearch>();
    w.search->add(kCatBusClaim1, {"Stop arm", "A stop arm extends from a school bus.", "https://example.org/a", 1});
    w.search->add(kCatBusClaim2, {"Stop arm", "Drivers must stop for an extended stop arm.", "https://example.org/b", 1});
    w.services.chat = w.chat;
    w.services.detector = w.detector;
    w.services.scorer = w.scorer;
    w.services.search = w.search;
    return w;
}

Services RandomWorld::services() const {
    Services s;
    s.chat = chat;
    s.detector = detector;
    s.scorer = scorer;
    s.search = search;
    return s;
}

RandomWorld random_world(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    RandomWorld w;
    w.detector = std::make_shared<mock::TableDetector>();
    w.scorer = std::make_shared<mock::TableScorer>(0.5);
    w.search = std::make_shared<mock::TableSearch>();
    std::vector<mock::RuleChat::Rule> rules;
    const char* kinds[] = {"object", "attribute", "relationship"};
    for (std::size_t i = 0; i < n; ++i) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "Case %02zu:", i);
        const std::string question = std::string(tag) + " is the " + random_sentence(rng, 4) + " visible?";
        w.cases.push_back({tag, ImageRef::from_bytes("img-" + std::to_string(i % 5), "image/png"), question});

        // Graph names are prefixed per case so grounding tables never collide.
        SceneGraph sg = random_graph(rng, 5);
        for (auto& o : sg.objects) o.type_name = "c" + std::to_string(i) + " " + o.type_name;
        randomize_grounding(*w.detector, *w.scorer, sg, rng);

        rules.push_back({{kNeedleP1, tag}, graph_reply(sg)});
        std::string adjusted = question;
        std::string verdict = "There is no conflict.";
        if (rng() % 2 == 0) {
            verdict = std::string("There is an ") + kinds[rng() % 3] + " conflict here.";
            adjusted = std::string(tag) + " what is " + random_sentence(rng, 3) + "?";
        }
        rules.push_back({{kNeedleP3, tag}, "Conclusion: " + verdict + "\nOutput Question: \"" + adjusted + "\""});
        const bool sufficient = rng() % 3 == 0;
        rules.push_back({{kNeedleP6Perception, tag},
                         sufficient ? std::string(rng() % 2 ? "Yes." : "No.") : "This is unanswerable from the image."});
        std::string claims;
        std::string labels;
        const std::size_t nclaims = rng() % 4;
        for (std::size_t c = 1; c <= nclaims; ++c) {
            const std::string text =
                text::collapse_whitespace(std::string(tag) + " claim " + std::to_string(c) + " " + random_sentence(rng, 5));
            claims += "[Claim " + std::to_string(c) + "]: " + text + "\n";
            if (rng() % 5 == 0) {
                w.search->fail(text);
            } else {
                w.search->add(text, {"t" + std::to_string(c), "snippet " + std::to_string(c), "", 1});
                labels += std::string("[Label]: ") + (rng() % 2 ? "Non-hallucination" : "Hallucination") + "\n";
            }
        }
        rules.push_back({{kNeedleP4, tag}, claims.empty() ? "No claims." : claims});
        rules.push_back({{kNeedleP5, tag}, labels});
        rules.push_back({{kNeedleP6Knowledge, tag}, rng() % 2 ? "Yes, it is." : "No, it is not."});
        rules.push_back({{tag}, "Yes."});
    }
    w.chat = std::make_shared<mock::RuleChat>(std::move(rules));
    return w;
}

PipelineResult run_demo_cat_bus() {
    const AppConfig cfg = demo_config("ask.ini");
    const Services services = build_services(cfg);
    return run_query(services, ImageRef::from_file(demo_dir() / "images" / "street.png"), kCatBusQuestion, cfg.pipeline,
                     "cat_bus");
}

std::string random_sentence(std::mt19937_64& rng, std::size_t max_words) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_words)(rng);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        std::string w = pick(rng, kWords);
        if (std::uniform_int_distribution<int>(0, 5)(rng) == 0) w[0] = static_cast<char>(std::toupper(w[0]));
        if (std::uniform_int_distribution<int>(0, 7)(rng) == 0) w += ",";
        if (!s.empty()) s += std::uniform_int_distribution<int>(0, 6)(rng) == 0 ? "  " : " ";
        s += w;
    }
    if (!s.empty() && std::uniform_int_distribution<int>(0, 1)(rng) == 0) s += "?";
    return s;
}

AppConfig demo_config(const std::string& name) { return load_config(demo_dir() / name, [](const std::string&) {
    return std::optional<std::string>();
}); }

}  // namespace bottomup::testing
