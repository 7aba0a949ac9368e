// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bottomup/backends.hpp"
#include "bottomup/geometry.hpp"
#include "bottomup/scene_graph.hpp"

namespace bottomup {

struct VerifyConfig {
    double object_threshold = 0.35;
    double attribute_threshold = 0.30;
    double relation_threshold = 0.30;
    /// Minimum IoU between an attribute phrase's detection and its object's box.
    double iou_floor = 0.5;
    /// Run element checks on several threads. Output order does not change.
    bool concurrent = false;
    std::size_t max_concurrency = 4;
};

enum class ElementKind { Object, Attribute, Relation };
enum class RemovalReason { NotDetected, NotGrounded, LowSimilarity, CascadeFromObject };

std::string_view to_string(ElementKind kind);
std::string_view to_string(RemovalReason reason);

/// Provenance of one scene-graph element.
struct ElementCheck {
    ElementKind kind = ElementKind::Object;
    /// Owning object for objects and attributes.
    ObjectId object = 0;
    /// Attribute key, for attributes.
    std::string attribute;
    /// The relation, for relations.
    SgRelation relation;
    /// Phrase sent to the detector or scorer; empty for cascaded removals.
    std::string phrase;
    bool kept = false;
    std::optional<RemovalReason> reason;
    /// Detection confidence (objects), best IoU (attributes) or similarity (relations).
    std::optional<double> score;
    std::optional<Box> box;

    bool operator==(const ElementCheck&) const = default;
};

struct ObjectPass {
    SceneGraph graph;
    std::vector<ElementCheck> checks;
    std::map<ObjectId, Box> boxes;
};

struct ElementPass {
    SceneGraph graph;
    std::vector<ElementCheck> checks;
};

struct VerifiedSceneGraph {
    SceneGraph graph;
    /// Objects, then attributes, then relations, each in input order.
    std::vector<ElementCheck> provenance;
    std::map<ObjectId, Box> object_boxes;
};

struct HallucinationStats {
    std::size_t objects_total = 0;
    std::size_t objects_removed = 0;
    std::size_t attributes_total = 0;
    std::size_t attributes_removed = 0;
    std::size_t relations_total = 0;
    std::size_t relations_removed = 0;

    HallucinationStats& operator+=(const HallucinationStats& o);
    bool operator==(const HallucinationStats&) const = default;
};

/// Keeps objects whose type name is detected; each kept object is bound to
/// its best detection. Relations touching a removed object are removed
/// (CascadeFromObject), as are its attributes. Throws InvalidGraph for
/// graphs with validation findings.
ObjectPass verify_objects(PhraseDetector& detector, const SceneGraph& sg, const ImageRef& image,
                          const VerifyConfig& cfg = {});

/// Grounds "<value> <type>" for every attribute; an attribute survives when
/// some detection overlaps its object's box with IoU >= cfg.iou_floor.
/// Objects are never removed here. Throws InvalidRequest when an object has
/// no box.
ElementPass verify_attributes(PhraseDetector& detector, const SceneGraph& sg, const ImageRef& image,
                              const std::map<ObjectId, Box>& boxes, const VerifyConfig& cfg = {});

/// Scores each relation phrase on the union of its endpoint boxes.
/// Throws InvalidRequest when an endpoint has no box.
ElementPass verify_relations(SimilarityScorer& scorer, const SceneGraph& sg, const ImageRef& image,
                             const std::map<ObjectId, Box>& boxes, const VerifyConfig& cfg = {});

struct VerificationOutcome {
    VerifiedSceneGraph verified;
    HallucinationStats stats;
};

/// Objects, then attributes, then relations.
VerificationOutcome verify_scene_graph(PhraseDetector& detector, SimilarityScorer& scorer, const SceneGraph& sg,
                                       const ImageRef& image, const VerifyConfig& cfg = {});

/// Counts per category from a provenance list.
HallucinationStats tally(const std::vector<ElementCheck>& provenance);

}  // namespace bottomup
