// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/scene_graph.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "bottomup/errors.hpp"
#include "bottomup/text.hpp"
#include "loose_json.hpp"

namespace bottomup {

using detail::LooseValue;

const SgObject* SceneGraph::find(ObjectId id) const {
    for (const auto& o : objects) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

std::size_t SceneGraph::attribute_count() const {
    std::size_t n = 0;
    for (const auto& o : objects) n += o.attributes.size();
    return n;
}

std::string_view to_string(FindingKind kind) {
    switch (kind) {
        case FindingKind::DuplicateId: return "DuplicateId";
        case FindingKind::DanglingEndpoint: return "DanglingEndpoint";
        case FindingKind::EmptyTypeName: return "EmptyTypeName";
        case FindingKind::EmptyPredicate: return "EmptyPredicate";
    }
    return "Unknown";
}

std::size_t ValidationReport::count(FindingKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(), [kind](const Finding& f) { return f.kind == kind; }));
}

std::string ValidationReport::summary() const {
    std::string out;
    for (const auto& f : findings) {
        out += std::string(to_string(f.kind)) + " at " + f.location + ": " + f.message + "\n";
    }
    return out;
}

std::string_view extract_brace_block(std::string_view text) {
    const std::size_t start = text.find('{');
    if (start == std::string_view::npos) throw NoJsonFound();
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return text.substr(start, i - start + 1);
    }
    throw NoJsonFound();
}

namespace {

ObjectId parse_id(const LooseValue* v, const std::string& where) {
    if (v == nullptr) throw SchemaMismatch(where + " is missing");
    if (!v->is_scalar()) throw SchemaMismatch(where + " must be an integer");
    const std::string s = text::trim(v->text);
    ObjectId id = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw SchemaMismatch(where + " must be an integer, got \"" + v->text + "\"");
    }
    if (id <= 0) throw SchemaMismatch(where + " must be positive");
    return id;
}

std::string parse_name(const LooseValue* v, const std::string& where) {
    if (v == nullptr) throw SchemaMismatch(where + " is missing");
    if (!v->is_scalar()) throw SchemaMismatch(where + " must be a string");
    return v->text;
}

std::string attribute_text(const LooseValue& v, const std::string& where) {
    if (v.is_scalar()) return v.text;
    if (v.kind == LooseValue::Kind::Array) {
        std::vector<std::string> parts;
        for (const auto& item : v.items) {
            if (!item.is_scalar()) throw SchemaMismatch(where + " must hold scalar values");
            parts.push_back(item.text);
        }
        return text::join(parts, ", ");
    }
    throw SchemaMismatch(where + " must be a string");
}

const LooseValue& require_array(const LooseValue& root, std::initializer_list<std::string_view> keys) {
    for (auto key : keys) {
        if (const auto* v = root.member_icase(key)) {
            if (v->kind != LooseValue::Kind::Array) {
                throw SchemaMismatch("\"" + std::string(key) + "\" must be an array");
            }
            return *v;
        }
    }
    throw SchemaMismatch("scene graph lacks a \"" + std::string(*keys.begin()) + "\" array");
}

}  // namespace

SceneGraph parse_scene_graph(std::string_view text) {
    const std::string_view block = extract_brace_block(text);
    const LooseValue top = detail::parse_loose(block);
    if (top.kind != LooseValue::Kind::Object) throw SchemaMismatch("scene graph must be a JSON object");

    const LooseValue* root = &top;
    for (auto key : {"Scene Graphs", "Scene Graph", "scene_graph", "scene_graphs", "SceneGraph"}) {
        if (const auto* inner = top.member_icase(key); inner && inner->kind == LooseValue::Kind::Object) {
            root = inner;
            break;
        }
    }

    const LooseValue& objects = require_array(*root, {"objects"});
    const LooseValue& relations = require_array(*root, {"relationships", "relations"});

    SceneGraph sg;
    for (std::size_t i = 0; i < objects.items.size(); ++i) {
        const LooseValue& o = objects.items[i];
        const std::string where = "objects[" + std::to_string(i) + "]";
        if (o.kind != LooseValue::Kind::Object) throw SchemaMismatch(where + " must be an object");
        SgObject obj;
        obj.id = parse_id(o.member_icase("id"), where + ".id");
        obj.type_name = parse_name(o.member_icase("type"), where + ".type");
        if (const auto* attrs = o.member_icase("attributes")) {
            if (attrs->kind != LooseValue::Kind::Object) {
                throw SchemaMismatch(where + ".attributes must be an object");
            }
            for (const auto& [name, value] : attrs->members) {
                obj.attributes.insert_or_assign(name, attribute_text(value, where + ".attributes." + name));
            }
        }
        sg.objects.push_back(std::move(obj));
    }
    for (std::size_t i = 0; i < relations.items.size(); ++i) {
        const LooseValue& r = relations.items[i];
        const std::string where = "relationships[" + std::to_string(i) + "]";
        if (r.kind != LooseValue::Kind::Object) throw SchemaMismatch(where + " must be an object");
        SgRelation rel;
        rel.source = parse_id(r.member_icase("source"), where + ".source");
        rel.target = parse_id(r.member_icase("target"), where + ".target");
        rel.relation = parse_name(r.member_icase("relation"), where + ".relation");
        sg.relations.push_back(std::move(rel));
    }
    return sg;
}

ValidationReport validate_scene_graph(const SceneGraph& sg) {
    ValidationReport report;
    std::set<ObjectId> seen;
    for (std::size_t i = 0; i < sg.objects.size(); ++i) {
        const auto& o = sg.objects[i];
        const std::string where = "objects[" + std::to_string(i) + "]";
        if (!seen.insert(o.id).second) {
            report.findings.push_back({FindingKind::DuplicateId, where + ".id",
                                       "object id " + std::to_string(o.id) + " already used"});
        }
        if (text::is_blank(o.type_name)) {
            report.findings.push_back({FindingKind::EmptyTypeName, where + ".type", "object type is empty"});
        }
    }
    for (std::size_t i = 0; i < sg.relations.size(); ++i) {
        const auto& r = sg.relations[i];
        const std::string where = "relationships[" + std::to_string(i) + "]";
        if (!seen.contains(r.source)) {
            report.findings.push_back({FindingKind::DanglingEndpoint, where + ".source",
                                       "no object with id " + std::to_string(r.source)});
        }
        if (!seen.contains(r.target)) {
            report.findings.push_back({FindingKind::DanglingEndpoint, where + ".target",
                                       "no object with id " + std::to_string(r.target)});
        }
        if (text::is_blank(r.relation)) {
            report.findings.push_back({FindingKind::EmptyPredicate, where + ".relation", "relation is empty"});
        }
    }
    std::stable_sort(report.findings.begin(), report.findings.end(), [](const Finding& a, const Finding& b) {
        return std::tie(a.kind, a.location) < std::tie(b.kind, b.location);
    });
    return report;
}

SceneGraph canonical_order(SceneGraph sg) {
    std::stable_sort(sg.objects.begin(), sg.objects.end(),
                     [](const SgObject& a, const SgObject& b) { return a.id < b.id; });
    std::stable_sort(sg.relations.begin(), sg.relations.end(), [](const SgRelation& a, const SgRelation& b) {
        return std::tie(a.source, a.target, a.relation) < std::tie(b.source, b.target, b.relation);
    });
    return sg;
}

std::string canonicalize(const SceneGraph& sg) {
    const auto report = validate_scene_graph(sg);
    if (!report.ok()) throw InvalidGraph("cannot canonicalize an invalid scene graph:\n" + report.summary());

    const SceneGraph ordered = canonical_order(sg);
    nlohmann::ordered_json objects = nlohmann::ordered_json::array();
    for (const auto& o : ordered.objects) {
        nlohmann::ordered_json attrs = nlohmann::ordered_json::object();
        for (const auto& [k, v] : o.attributes) attrs[k] = v;
        nlohmann::ordered_json obj;
        obj["id"] = o.id;
        obj["type"] = o.type_name;
        obj["attributes"] = std::move(attrs);
        objects.push_back(std::move(obj));
    }
    nlohmann::ordered_json relations = nlohmann::ordered_json::array();
    for (const auto& r : ordered.relations) {
        nlohmann::ordered_json rel;
        rel["source"] = r.source;
        rel["target"] = r.target;
        rel["relation"] = r.relation;
        relations.push_back(std::move(rel));
    }
    nlohmann::ordered_json inner;
    inner["objects"] = std::move(objects);
    inner["relationships"] = std::move(relations);
    nlohmann::ordered_json doc;
    doc["Scene Graphs"] = std::move(inner);
    return doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string relation_phrase(const SceneGraph& sg, const SgRelation& rel, PhraseOptions options) {
    const SgObject* subject = sg.find(rel.source);
    const SgObject* object = sg.find(rel.target);
    if (subject == nullptr || object == nullptr) {
        throw DanglingEndpoint("relation " + std::to_string(rel.source) + " -> " + std::to_string(rel.target) +
                               " references a missing object");
    }
    auto noun = [&](const SgObject& o) {
        std::vector<std::string> parts;
        if (options.include_attributes) {
            for (const auto& [name, value] : o.attributes) {
                if (!text::is_blank(value)) parts.push_back(text::collapse_whitespace(value));
            }
        }
        parts.push_back(text::collapse_whitespace(o.type_name));
        return text::join(parts, " ");
    };
    return text::to_lower(noun(*subject) + " " + text::collapse_whitespace(rel.relation) + " " + noun(*object));
}

}  // namespace bottomup
