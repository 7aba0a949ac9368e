// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#include "bottomup/verification.hpp"

#include <set>

#include "bottomup/errors.hpp"
#include "bottomup/parallel.hpp"

namespace bottomup {

std::string_view to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::Object: return "object";
        case ElementKind::Attribute: return "attribute";
        case ElementKind::Relation: return "relation";
    }
    return "?";
}

std::string_view to_string(RemovalReason reason) {
    switch (reason) {
        case RemovalReason::NotDetected: return "NotDetected";
        case RemovalReason::NotGrounded: return "NotGrounded";
        case RemovalReason::LowSimilarity: return "LowSimilarity";
        case RemovalReason::CascadeFromObject: return "CascadeFromObject";
    }
    return "?";
}

HallucinationStats& HallucinationStats::operator+=(const HallucinationStats& o) {
    objects_total += o.objects_total;
    objects_removed += o.objects_removed;
    attributes_total += o.attributes_total;
    attributes_removed += o.attributes_removed;
    relations_total += o.relations_total;
    relations_removed += o.relations_removed;
    return *this;
}

namespace {

std::size_t workers(const VerifyConfig& cfg) { return cfg.concurrent ? cfg.max_concurrency : 1; }

const Box& box_of(const std::map<ObjectId, Box>& boxes, ObjectId id) {
    const auto it = boxes.find(id);
    if (it == boxes.end()) throw InvalidRequest("object " + std::to_string(id) + " has no verified box");
    return it->second;
}

}  // namespace

ObjectPass verify_objects(PhraseDetector& detector, const SceneGraph& sg, const ImageRef& image,
                          const VerifyConfig& cfg) {
    if (const auto report = validate_scene_graph(sg); !report.ok()) throw InvalidGraph(report.summary());

    const auto found = parallel_map(sg.objects.size(), workers(cfg), [&](std::size_t i) {
        return detect_phrase(detector, image, sg.objects[i].type_name, cfg.object_threshold);
    });

    ObjectPass pass;
    std::set<ObjectId> removed;
    std::vector<ElementCheck> cascaded_attributes;
    for (std::size_t i = 0; i < sg.objects.size(); ++i) {
        const SgObject& obj = sg.objects[i];
        ElementCheck check;
        check.kind = ElementKind::Object;
        check.object = obj.id;
        check.phrase = normalize_phrase(obj.type_name);
        if (found[i].empty()) {
            check.reason = RemovalReason::NotDetected;
            removed.insert(obj.id);
            for (const auto& [key, value] : obj.attributes) {
                ElementCheck a;
                a.kind = ElementKind::Attribute;
                a.object = obj.id;
                a.attribute = key;
                a.reason = RemovalReason::CascadeFromObject;
                cascaded_attributes.push_back(std::move(a));
            }
        } else {
            check.kept = true;
            check.score = found[i].front().confidence;
            check.box = found[i].front().box;
            pass.boxes.emplace(obj.id, found[i].front().box);
            pass.graph.objects.push_back(obj);
        }
        pass.checks.push_back(std::move(check));
    }
    for (auto& a : cascaded_attributes) pass.checks.push_back(std::move(a));
    for (const auto& rel : sg.relations) {
        if (removed.contains(rel.source) || removed.contains(rel.target)) {
            ElementCheck check;
            check.kind = ElementKind::Relation;
            check.relation = rel;
            check.reason = RemovalReason::CascadeFromObject;
            pass.checks.push_back(std::move(check));
        } else {
            pass.graph.relations.push_back(rel);
        }
    }
    return pass;
}

ElementPass verify_attributes(PhraseDetector& detector, const SceneGraph& sg, const ImageRef& image,
                              const std::map<ObjectId, Box>& boxes, const VerifyConfig& cfg) {
    struct Job {
        std::size_t object_index;
        std::string key;
        std::string phrase;
        Box box;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < sg.objects.size(); ++i) {
        const SgObject& obj = sg.objects[i];
        if (obj.attributes.empty()) continue;
        const Box& box = box_of(boxes, obj.id);
        for (const auto& [key, value] : obj.attributes) {
            jobs.push_back({i, key, normalize_phrase(value + " " + obj.type_name), box});
        }
    }

    const auto best_iou = parallel_map(jobs.size(), workers(cfg), [&](std::size_t j) {
        double best = 0;
        for (const auto& d : detect_phrase(detector, image, jobs[j].phrase, cfg.attribute_threshold)) {
            best = std::max(best, iou(d.box, jobs[j].box));
        }
        return best;
    });

    ElementPass pass;
    pass.graph = sg;
    for (auto& obj : pass.graph.objects) obj.attributes.clear();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const SgObject& src = sg.objects[jobs[j].object_index];
        ElementCheck check;
        check.kind = ElementKind::Attribute;
        check.object = src.id;
        check.attribute = jobs[j].key;
        check.phrase = jobs[j].phrase;
        check.score = best_iou[j];
        check.kept = best_iou[j] >= cfg.iou_floor && best_iou[j] > 0;
        if (check.kept) {
            pass.graph.objects[jobs[j].object_index].attributes.emplace(jobs[j].key, src.attributes.at(jobs[j].key));
        } else {
            check.reason = RemovalReason::NotGrounded;
        }
        pass.checks.push_back(std::move(check));
    }
    return pass;
}

ElementPass verify_relations(SimilarityScorer& scorer, const SceneGraph& sg, const ImageRef& image,
                             const std::map<ObjectId, Box>& boxes, const VerifyConfig& cfg) {
    std::vector<Box> regions;
    std::vector<std::string> phrases;
    for (const auto& rel : sg.relations) {
        regions.push_back(union_region(box_of(boxes, rel.source), box_of(boxes, rel.target)));
        phrases.push_back(relation_phrase(sg, rel));
    }
    const auto scores = parallel_map(sg.relations.size(), workers(cfg), [&](std::size_t i) {
        return score_similarity(scorer, image, regions[i], phrases[i]);
    });

    ElementPass pass;
    pass.graph.objects = sg.objects;
    for (std::size_t i = 0; i < sg.relations.size(); ++i) {
        ElementCheck check;
        check.kind = ElementKind::Relation;
        check.relation = sg.relations[i];
        check.phrase = phrases[i];
        check.score = scores[i];
        check.box = regions[i];
        check.kept = scores[i] >= cfg.relation_threshold;
        if (check.kept) {
            pass.graph.relations.push_back(sg.relations[i]);
        } else {
            check.reason = RemovalReason::LowSimilarity;
        }
        pass.checks.push_back(std::move(check));
    }
    return pass;
}

HallucinationStats tally(const std::vector<ElementCheck>& provenance) {
    HallucinationStats s;
    for (const auto& c : provenance) {
        switch (c.kind) {
            case ElementKind::Object:
                ++s.objects_total;
                s.objects_removed += c.kept ? 0 : 1;
                break;
            case ElementKind::Attribute:
                ++s.attributes_total;
                s.attributes_removed += c.kept ? 0 : 1;
                break;
            case ElementKind::Relation:
                ++s.relations_total;
                s.relations_removed += c.kept ? 0 : 1;
                break;
        }
    }
    return s;
}

VerificationOutcome verify_scene_graph(PhraseDetector& detector, SimilarityScorer& scorer, const SceneGraph& sg,
                                       const ImageRef& image, const VerifyConfig& cfg) {
    ObjectPass objects = verify_objects(detector, sg, image, cfg);
    ElementPass attributes = verify_attributes(detector, objects.graph, image, objects.boxes, cfg);
    ElementPass relations = verify_relations(scorer, attributes.graph, image, objects.boxes, cfg);

    VerificationOutcome out;
    out.verified.graph = std::move(relations.graph);
    out.verified.object_boxes = std::move(objects.boxes);
    auto& prov = out.verified.provenance;
    for (auto* list : {&objects.checks, &attributes.checks, &relations.checks}) {
        for (auto& c : *list) {
            if (c.kind == ElementKind::Object) prov.push_back(std::move(c));
        }
    }
    for (auto* list : {&objects.checks, &attributes.checks, &relations.checks}) {
        for (auto& c : *list) {
            if (c.kind == ElementKind::Attribute) prov.push_back(std::move(c));
        }
    }
    for (auto* list : {&objects.checks, &attributes.checks, &relations.checks}) {
        for (auto& c : *list) {
            if (c.kind == ElementKind::Relation) prov.push_back(std::move(c));
        }
    }
    out.stats = tally(prov);
    return out;
}

}  // namespace bottomup
