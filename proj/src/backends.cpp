// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/backends.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

#include <openssl/evp.h>

#include <json.hpp>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

using nlohmann::json;

namespace {

std::string media_kind_for(const std::filesystem::path& path) {
    std::string ext = text::to_lower(path.extension().string());
    if (!ext.empty() && ext.front() == '.') ext.erase(0, 1);
    if (ext == "jpg") return "jpeg";
    return ext.empty() ? "octet-stream" : ext;
}

}  // namespace

ImageRef ImageRef::from_file(std::filesystem::path path) {
    ImageRef ref;
    ref.source_ = Source::File;
    ref.media_kind_ = media_kind_for(path);
    ref.path_ = std::move(path);
    return ref;
}

ImageRef ImageRef::from_bytes(std::string bytes, std::string media_kind) {
    if (bytes.empty()) throw InvalidRequest("inline image payload is empty");
    ImageRef ref;
    ref.source_ = Source::Inline;
    ref.payload_ = std::move(bytes);
    ref.media_kind_ = std::move(media_kind);
    return ref;
}

ImageRef ImageRef::from_url(std::string url, std::string media_kind) {
    ImageRef ref;
    ref.source_ = Source::Url;
    ref.url_ = std::move(url);
    ref.media_kind_ = std::move(media_kind);
    return ref;
}

std::string ImageRef::describe() const {
    switch (source_) {
        case Source::File: return path_.generic_string();
        case Source::Url: return url_;
        case Source::Inline: return "<inline " + std::to_string(payload_.size()) + " bytes>";
    }
    return {};
}

std::string ImageRef::bytes() const {
    switch (source_) {
        case Source::Inline: return payload_;
        case Source::Url: throw InvalidRequest("image " + url_ + " is only available by URL");
        case Source::File: break;
    }
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError("cannot read image " + path_.generic_string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string ImageRef::digest() const {
    if (source_ == Source::Url) return sha256_hex("url:" + url_);
    return sha256_hex(bytes());
}

std::string ChatRequest::joined() const { return text::join(segments, "\n\n"); }

void ChatRequest::validate() const {
    const bool any = std::any_of(segments.begin(), segments.end(), [](const auto& s) { return !text::is_blank(s); });
    if (!any) throw InvalidRequest("chat request has no non-empty text segment");
}

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::Chat: return "Chat";
        case BackendKind::Detect: return "Detect";
        case BackendKind::Similarity: return "Similarity";
        case BackendKind::Search: return "Search";
    }
    return "Unknown";
}

BackendKind backend_kind_from_string(std::string_view s) {
    if (s == "Chat") return BackendKind::Chat;
    if (s == "Detect") return BackendKind::Detect;
    if (s == "Similarity") return BackendKind::Similarity;
    if (s == "Search") return BackendKind::Search;
    throw StoreCorrupt("unknown backend kind \"" + std::string(s) + "\"");
}

std::string chat_complete(ChatModel& model, const ChatRequest& request) {
    request.validate();
    std::string reply = model.complete_raw(request);
    if (text::is_blank(reply)) throw ReplyEmpty();
    return reply;
}

std::string normalize_phrase(std::string_view phrase) { return text::to_lower(text::collapse_whitespace(phrase)); }

std::vector<Detection> detect_phrase(PhraseDetector& detector, const ImageRef& image, std::string_view phrase,
                                     double threshold) {
    const std::string normalized = normalize_phrase(phrase);
    if (normalized.empty()) throw InvalidRequest("detection phrase is empty");
    std::vector<Detection> kept;
    for (auto& d : detector.detect_raw(image, normalized)) {
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
            throw OutOfRange("detector confidence " + std::to_string(d.confidence) + " outside [0, 1]");
        }
        if (!d.box.valid()) throw OutOfRange("detector returned a degenerate box for \"" + normalized + "\"");
        if (d.confidence >= threshold) kept.push_back(std::move(d));
    }
    std::sort(kept.begin(), kept.end(), [](const Detection& a, const Detection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.box.area() != b.box.area()) return a.box.area() < b.box.area();
        return a.box < b.box;
    });
    return kept;
}

double score_similarity(SimilarityScorer& scorer, const ImageRef& image, const Box& region, std::string_view text) {
    if (text::is_blank(text)) throw InvalidRequest("similarity text is empty");
    if (!region.valid()) throw InvalidRequest("similarity region is degenerate");
    const double score = scorer.score_raw(image, region, std::string(text));
    if (!(score >= 0.0 && score <= 1.0)) {
        throw OutOfRange("similarity score " + std::to_string(score) + " outside [0, 1]");
    }
    return score;
}

std::vector<FactSnippet> web_search(SearchProvider& provider, std::string_view query, std::size_t top_k) {
    if (top_k == 0) return {};
    auto snippets = provider.search_raw(std::string(query), top_k);
    std::stable_sort(snippets.begin(), snippets.end(),
                     [](const FactSnippet& a, const FactSnippet& b) { return a.rank < b.rank; });
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        if (snippets[i].rank < 1 || (i > 0 && snippets[i].rank == snippets[i - 1].rank)) {
            throw BackendError(200, "search results carry invalid or repeated rank " +
                                        std::to_string(snippets[i].rank));
        }
    }
    if (snippets.size() > top_k) snippets.resize(top_k);
    return snippets;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::ostringstream out;
    out << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(md[i]);
    return out.str();
}

namespace wire {

namespace {

json image_json(const ImageRef& image) { return {{"digest", image.digest()}, {"media_kind", image.media_kind()}}; }

json box_json(const Box& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

Box box_from(const json& j) {
    if (!j.is_array() || j.size() != 4) throw BackendError(-1, "box must be a four-number array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json parse_body(std::string_view text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw BackendError(-1, "malformed response body: " + std::string(text.substr(0, 200)));
    }
    return j;
}

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

std::string chat_request(const ChatRequest& request) {
    json j;
    j["kind"] = "chat";
    j["image"] = request.image ? image_json(*request.image) : json(nullptr);
    j["segments"] = request.segments;
    j["max_tokens"] = request.max_tokens;
    j["seed"] = request.seed ? json(*request.seed) : json(nullptr);
    return dump(j);
}

std::string detect_request(const ImageRef& image, const std::string& phrase) {
    return dump({{"kind", "detect"}, {"image", image_json(image)}, {"phrase", phrase}});
}

std::string similarity_request(const ImageRef& image, const Box& region, const std::string& text) {
    return dump({{"kind", "similarity"}, {"image", image_json(image)}, {"region", box_json(region)}, {"text", text}});
}

std::string search_request(const std::string& query, std::size_t top_k) {
    return dump({{"kind", "search"}, {"query", query}, {"top_k", top_k}});
}

std::string chat_response(const std::string& reply) { return dump({{"reply", reply}}); }

std::string detect_response(const std::vector<Detection>& detections) {
    json arr = json::array();
    for (const auto& d : detections) {
        arr.push_back({{"box", box_json(d.box)}, {"confidence", d.confidence}, {"phrase", d.phrase}});
    }
    return dump({{"detections", arr}});
}

std::string similarity_response(double score) { return dump({{"score", score}}); }

std::string search_response(const std::vector<FactSnippet>& snippets) {
    json arr = json::array();
    for (const auto& s : snippets) {
        arr.push_back({{"rank", s.rank}, {"snippet", s.snippet}, {"source_url", s.source_url}, {"title", s.title}});
    }
    return dump({{"snippets", arr}});
}

std::string parse_chat_response(std::string_view text) {
    const json j = parse_body(text);
    if (!j.contains("reply") || !j["reply"].is_string()) throw BackendError(-1, "chat response lacks \"reply\"");
    return j["reply"].get<std::string>();
}

std::vector<Detection> parse_detect_response(std::string_view text) {
    const json j = parse_body(text);
    if (!j.contains("detections") || !j["detections"].is_array()) {
        throw BackendError(-1, "detect response lacks \"detections\"");
    }
    std::vector<Detection> out;
    try {
        for (const auto& d : j["detections"]) {
            out.push_back({box_from(d.at("box")), d.at("confidence").get<double>(), d.value("phrase", "")});
        }
    } catch (const json::exception& e) {
        throw BackendError(-1, std::string("malformed detection: ") + e.what());
    }
    return out;
}

double parse_similarity_response(std::string_view text) {
    const json j = parse_body(text);
    if (!j.contains("score") || !j["score"].is_number()) throw BackendError(-1, "similarity response lacks \"score\"");
    return j["score"].get<double>();
}

std::vector<FactSnippet> parse_search_response(std::string_view text) {
    const json j = parse_body(text);
    if (!j.contains("snippets") || !j["snippets"].is_array()) {
        throw BackendError(-1, "search response lacks \"snippets\"");
    }
    std::vector<FactSnippet> out;
    try {
        for (const auto& s : j["snippets"]) {
            out.push_back({s.value("title", ""), s.value("snippet", ""), s.value("source_url", ""),
                           s.at("rank").get<int>()});
        }
    } catch (const json::exception& e) {
        throw BackendError(-1, std::string("malformed snippet: ") + e.what());
    }
    return out;
}

}  // namespace wire

}  // namespace bottomup
