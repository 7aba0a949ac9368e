// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bottomup {

using ObjectId = std::int64_t;

struct SgObject {
    ObjectId id = 0;
    std::string type_name;
    std::map<std::string, std::string> attributes;

    bool operator==(const SgObject&) const = default;
};

struct SgRelation {
    ObjectId source = 0;
    ObjectId target = 0;
    std::string relation;

    bool operator==(const SgRelation&) const = default;
};

/// Partial scene graph: question-relevant objects with attributes plus the
/// relations between them.
struct SceneGraph {
    std::vector<SgObject> objects;
    std::vector<SgRelation> relations;

    bool operator==(const SceneGraph&) const = default;

    bool empty() const { return objects.empty() && relations.empty(); }
    /// First object carrying `id`, or nullptr.
    const SgObject* find(ObjectId id) const;
    std::size_t attribute_count() const;
};

enum class FindingKind { DuplicateId, DanglingEndpoint, EmptyTypeName, EmptyPredicate };

std::string_view to_string(FindingKind kind);

struct Finding {
    FindingKind kind;
    std::string location;
    std::string message;

    bool operator==(const Finding&) const = default;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const { return findings.empty(); }
    std::size_t count(FindingKind kind) const;
    /// One finding per line, "<kind> at <location>: <message>".
    std::string summary() const;
};

/// Returns the first balanced top-level `{...}` block of `text`. Braces inside
/// double-quoted strings do not count. Throws NoJsonFound.
std::string_view extract_brace_block(std::string_view text);

/// Parses a chat reply into a SceneGraph. Accepts the "Scene Graphs" schema
/// with the relaxations real model output needs: bare-word values, elided
/// "..." entries, missing or trailing commas, and a "Scene Graphs" key whose
/// object braces were dropped. Unknown keys are ignored.
/// Throws NoJsonFound or SchemaMismatch.
SceneGraph parse_scene_graph(std::string_view text);

/// Findings sorted by (kind, location). Never throws.
ValidationReport validate_scene_graph(const SceneGraph& sg);

/// Objects by id, relations by (source, target, relation). Attribute maps are
/// already key-sorted.
SceneGraph canonical_order(SceneGraph sg);

/// Deterministic "Scene Graphs" JSON text. Throws InvalidGraph when
/// validation reports findings.
std::string canonicalize(const SceneGraph& sg);

struct PhraseOptions {
    bool include_attributes = false;
};

/// Lowercase "<subject type> <relation> <object type>" text. With
/// include_attributes, attribute values precede each type name.
/// Throws DanglingEndpoint.
std::string relation_phrase(const SceneGraph& sg, const SgRelation& rel, PhraseOptions options = {});

}  // namespace bottomup
