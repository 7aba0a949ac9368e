// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/fixture_store.hpp"

#include <mutex>

#include <json.hpp>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"

namespace bottomup {

using nlohmann::json;

std::string request_digest(std::string_view canonical_request) { return sha256_hex(canonical_request); }

FixtureRecord make_record(BackendKind kind, std::string request, std::string response) {
    FixtureRecord rec;
    rec.backend_kind = kind;
    rec.request_digest = request_digest(request);
    rec.request = std::move(request);
    rec.response = std::move(response);
    return rec;
}

FixtureStore::FixtureStore(FixtureMode mode) : mode_(mode) {}

FixtureStore::FixtureStore(std::filesystem::path path, FixtureMode mode) : mode_(mode), path_(path) {
    std::error_code ec;
    const bool exists = std::filesystem::exists(path, ec);
    if (!exists && mode == FixtureMode::Replay) {
        throw IoError("fixture store " + path.generic_string() + " does not exist");
    }
    if (exists) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read fixture store " + path.generic_string());
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (text::is_blank(line)) continue;
            FixtureRecord rec = decode_line(line, n);
            const std::string k = key(rec.backend_kind, rec.request_digest);
            index_.try_emplace(k, records_.size());
            records_.push_back(std::move(rec));
        }
    }
    if (mode != FixtureMode::Replay) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
        out_.open(path, std::ios::binary | std::ios::app);
        if (!out_) throw IoError("cannot open fixture store " + path.generic_string() + " for writing");
    }
}

std::string FixtureStore::key(BackendKind kind, const std::string& digest) {
    return std::string(to_string(kind)) + ":" + digest;
}

std::string FixtureStore::roundtrip(const FixtureRecord& record) {
    if (mode_ == FixtureMode::Record) {
        append(record);
        return record.response;
    }
    if (auto hit = lookup(record.backend_kind, record.request_digest)) return *hit;
    if (mode_ == FixtureMode::Replay) throw ReplayMiss(std::string(to_string(record.backend_kind)), record.request_digest);
    append(record);
    return record.response;
}

std::optional<std::string> FixtureStore::lookup(BackendKind kind, const std::string& digest) const {
    std::shared_lock lock(mutex_);
    const auto it = index_.find(key(kind, digest));
    if (it == index_.end()) return std::nullopt;
    return records_[it->second].response;
}

void FixtureStore::append(const FixtureRecord& record) {
    std::unique_lock lock(mutex_);
    index_.try_emplace(key(record.backend_kind, record.request_digest), records_.size());
    records_.push_back(record);
    if (out_.is_open()) {
        out_ << encode_line(record) << '\n';
        out_.flush();
        if (!out_) throw IoError("failed writing fixture store");
    }
}

std::size_t FixtureStore::size() const {
    std::shared_lock lock(mutex_);
    return records_.size();
}

std::vector<FixtureRecord> FixtureStore::records() const {
    std::shared_lock lock(mutex_);
    return records_;
}

std::string FixtureStore::encode_line(const FixtureRecord& record) {
    json j{{"backend_kind", to_string(record.backend_kind)},
           {"request_digest", record.request_digest},
           {"request", record.request},
           {"response", record.response}};
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

FixtureRecord FixtureStore::decode_line(std::string_view line, std::size_t line_number) {
    const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    const std::string where = "fixture line " + std::to_string(line_number);
    if (j.is_discarded() || !j.is_object()) throw StoreCorrupt(where + " is not a JSON object");
    for (const char* field : {"backend_kind", "request_digest", "request", "response"}) {
        if (!j.contains(field) || !j[field].is_string()) {
            throw StoreCorrupt(where + " lacks string field \"" + field + "\"");
        }
    }
    FixtureRecord rec;
    try {
        rec.backend_kind = backend_kind_from_string(j["backend_kind"].get<std::string>());
    } catch (const StoreCorrupt& e) {
        throw StoreCorrupt(where + ": " + e.what());
    }
    rec.request_digest = j["request_digest"].get<std::string>();
    rec.request = j["request"].get<std::string>();
    rec.response = j["response"].get<std::string>();
    if (request_digest(rec.request) != rec.request_digest) {
        throw StoreCorrupt(where + ": request_digest does not match request");
    }
    return rec;
}

namespace {

// Failures of the live backend are stored too, so a replay reproduces them.
std::string error_response(const std::string& type, const std::string& message, int status = 0) {
    return json{{"error", {{"type", type}, {"message", message}, {"status", status}}}}.dump(
        -1, ' ', false, json::error_handler_t::replace);
}

void rethrow_recorded_error(const std::string& response) {
    const json j = json::parse(response, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("error")) return;
    const json& e = j["error"];
    const std::string type = e.value("type", "");
    const std::string message = e.value("message", "");
    if (type == "SearchUnavailable") throw SearchUnavailable(message);
    if (type == "TransportError") throw TransportError(message);
    if (type == "BackendError") throw BackendError(e.value("status", 0), message);
    throw StoreCorrupt("recorded error of unknown type \"" + type + "\"");
}

template <class LiveCall, class Decode>
auto through_store(FixtureStore& store, bool has_live, BackendKind kind, std::string request, LiveCall live_call,
                   Decode decode) {
    const std::string digest = request_digest(request);
    auto decode_guarded = [&](const std::string& response) {
        rethrow_recorded_error(response);
        try {
            return decode(response);
        } catch (const BackendError& e) {
            throw StoreCorrupt("recorded " + std::string(to_string(kind)) + " response for " + digest +
                               " is malformed: " + e.body());
        }
    };
    if (store.mode() != FixtureMode::Record) {
        if (auto hit = store.lookup(kind, digest)) return decode_guarded(*hit);
        if (store.mode() == FixtureMode::Replay) throw ReplayMiss(std::string(to_string(kind)), digest);
    }
    if (!has_live) throw Error("no live " + std::string(to_string(kind)) + " backend configured for recording");

    std::string response;
    try {
        response = live_call();
    } catch (const SearchUnavailable& e) {
        store.append({kind, digest, request, error_response("SearchUnavailable", e.what())});
        throw;
    } catch (const TransportError& e) {
        store.append({kind, digest, request, error_response("TransportError", e.what())});
        throw;
    } catch (const BackendError& e) {
        store.append({kind, digest, request, error_response("BackendError", e.body(), e.status())});
        throw;
    }
    store.append({kind, digest, request, response});
    return decode(response);
}

}  // namespace

FixtureChat::FixtureChat(ChatModel* live, std::shared_ptr<FixtureStore> store)
    : live_(live), store_(std::move(store)) {}

std::string FixtureChat::complete_raw(const ChatRequest& request) {
    return through_store(
        *store_, live_ != nullptr, BackendKind::Chat, wire::chat_request(request),
        [&] { return wire::chat_response(live_->complete_raw(request)); },
        [](const std::string& r) { return wire::parse_chat_response(r); });
}

FixtureDetector::FixtureDetector(PhraseDetector* live, std::shared_ptr<FixtureStore> store)
    : live_(live), store_(std::move(store)) {}

std::vector<Detection> FixtureDetector::detect_raw(const ImageRef& image, const std::string& phrase) {
    return through_store(
        *store_, live_ != nullptr, BackendKind::Detect, wire::detect_request(image, phrase),
        [&] { return wire::detect_response(live_->detect_raw(image, phrase)); },
        [](const std::string& r) { return wire::parse_detect_response(r); });
}

FixtureScorer::FixtureScorer(SimilarityScorer* live, std::shared_ptr<FixtureStore> store)
    : live_(live), store_(std::move(store)) {}

double FixtureScorer::score_raw(const ImageRef& image, const Box& region, const std::string& text) {
    return through_store(
        *store_, live_ != nullptr, BackendKind::Similarity, wire::similarity_request(image, region, text),
        [&] { return wire::similarity_response(live_->score_raw(image, region, text)); },
        [](const std::string& r) { return wire::parse_similarity_response(r); });
}

FixtureSearch::FixtureSearch(SearchProvider* live, std::shared_ptr<FixtureStore> store)
    : live_(live), store_(std::move(store)) {}

std::vector<FactSnippet> FixtureSearch::search_raw(const std::string& query, std::size_t top_k) {
    return through_store(
        *store_, live_ != nullptr, BackendKind::Search, wire::search_request(query, top_k),
        [&] { return wire::search_response(live_->search_raw(query, top_k)); },
        [](const std::string& r) { return wire::parse_search_response(r); });
}

}  // namespace bottomup
