// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "bottomup/http_backends.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <openssl/evp.h>

#include <httplib.h>
#include <json.hpp>

#include "bottomup/errors.hpp"

namespace bottomup::http {

using nlohmann::json;

std::string base64_encode(std::string_view data) {
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

namespace {

struct Response {
    int status;
    std::string body;
};

std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint url \"" + url + "\" lacks a scheme");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

std::string credential(const Endpoint& ep) {
    if (ep.api_key_env.empty()) return {};
    const char* v = std::getenv(ep.api_key_env.c_str());
    return v ? std::string(v) : std::string();
}

// POSTs `body`, retrying connection failures, 429 and 5xx. Throws
// TransportError when no response was ever received.
Response post_json(const Endpoint& ep, const std::string& body, const httplib::Headers& headers) {
    const auto [base, path] = split_url(ep.url);
    httplib::Client client(base);
    const auto secs = static_cast<time_t>(ep.timeout_seconds);
    const auto usecs = static_cast<time_t>((ep.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    Response last{0, {}};
    std::string transport_failure;
    for (int attempt = 0; attempt <= ep.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            transport_failure = httplib::to_string(res.error());
            continue;
        }
        last = {res->status, res->body};
        transport_failure.clear();
        if (res->status != 429 && res->status < 500) break;
    }
    if (!transport_failure.empty()) throw TransportError("POST " + ep.url + " failed: " + transport_failure);
    return last;
}

httplib::Headers bearer(const Endpoint& ep) {
    httplib::Headers h;
    if (const auto key = credential(ep); !key.empty()) h.emplace("Authorization", "Bearer " + key);
    return h;
}

json parse_or_throw(const Response& r) {
    if (r.status < 200 || r.status >= 300) throw BackendError(r.status, r.body);
    json j = json::parse(r.body, nullptr, false);
    if (j.is_discarded()) throw BackendError(r.status, "response is not JSON: " + r.body.substr(0, 200));
    return j;
}

json image_payload(const ImageRef& image) {
    return {{"base64", base64_encode(image.bytes())}, {"media_kind", image.media_kind()}};
}

}  // namespace

HttpChat::HttpChat(Endpoint endpoint, std::string model, ImageMode image_mode)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), image_mode_(image_mode) {}

std::string HttpChat::request_body(const ChatRequest& request) const {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", request.joined()}});
    if (request.image) {
        std::string url;
        if (image_mode_ == ImageMode::Url && request.image->source() == ImageRef::Source::Url) {
            url = request.image->url();
        } else {
            url = "data:image/" + request.image->media_kind() + ";base64," + base64_encode(request.image->bytes());
        }
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
    json body{{"model", model_},
              {"messages", json::array({{{"role", "user"}, {"content", content}}})},
              {"max_tokens", request.max_tokens}};
    if (request.seed) body["seed"] = *request.seed;
    return body.dump();
}

std::string HttpChat::complete_raw(const ChatRequest& request) {
    const json j = parse_or_throw(post_json(endpoint_, request_body(request), bearer(endpoint_)));
    try {
        const json& message = j.at("choices").at(0).at("message");
        const json& content = message.at("content");
        if (content.is_string()) return content.get<std::string>();
        std::string out;
        for (const auto& part : content) {
            if (part.value("type", "") == "text") out += part.value("text", "");
        }
        return out;
    } catch (const json::exception&) {
        throw BackendError(200, "chat response lacks choices[0].message.content");
    }
}

std::vector<Detection> HttpDetector::detect_raw(const ImageRef& image, const std::string& phrase) {
    const json body{{"image", image_payload(image)}, {"phrase", phrase}};
    const json j = parse_or_throw(post_json(endpoint_, body.dump(), bearer(endpoint_)));
    return wire::parse_detect_response(j.dump());
}

double HttpScorer::score_raw(const ImageRef& image, const Box& region, const std::string& text) {
    const json body{{"image", image_payload(image)},
                    {"region", json::array({region.x_min, region.y_min, region.x_max, region.y_max})},
                    {"text", text}};
    const json j = parse_or_throw(post_json(endpoint_, body.dump(), bearer(endpoint_)));
    return wire::parse_similarity_response(j.dump());
}

std::vector<FactSnippet> HttpSearch::search_raw(const std::string& query, std::size_t top_k) {
    httplib::Headers headers;
    if (const auto key = credential(endpoint_); !key.empty()) headers.emplace("X-API-KEY", key);
    const json body{{"q", query}, {"num", top_k}};
    Response r;
    try {
        r = post_json(endpoint_, body.dump(), headers);
    } catch (const TransportError& e) {
        throw SearchUnavailable(e.what());
    }
    if (r.status == 429 || r.status >= 500) {
        throw SearchUnavailable("search provider returned " + std::to_string(r.status));
    }
    const json j = parse_or_throw(r);
    std::vector<FactSnippet> out;
    int fallback_rank = 0;
    for (const auto& item : j.value("organic", json::array())) {
        ++fallback_rank;
        out.push_back({item.value("title", ""), item.value("snippet", ""), item.value("link", ""),
                       item.value("position", fallback_rank)});
    }
    return out;
}

}  // namespace bottomup::http
