// Copyright (C) 2026 The bottomup Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bottomup/backends.hpp"
#include "bottomup/pipeline.hpp"
#include "bottomup/verification.hpp"

namespace bottomup {

enum class DatasetFormat { BinaryJsonl, FreeformJsonl };

std::string_view to_string(DatasetFormat f);
/// "binary_jsonl" or "freeform_jsonl". Throws ConfigError.
DatasetFormat dataset_format_from_string(std::string_view s);

/// One line of a dataset file:
/// {"id": "q1", "image": "a.jpg", "question": "Is there a dog?", "label": "yes", "category": "adversarial"}
/// `category` is optional. Binary labels are yes or no.
struct EvalCase {
    std::string id;
    std::filesystem::path image;
    std::string question;
    std::string gold;
    std::optional<std::string> category;
    std::size_t line = 0;
};

/// Image paths resolve against base_dir. Blank lines are skipped.
/// Throws DatasetError.
std::vector<EvalCase> parse_dataset(std::string_view text, DatasetFormat format,
                                    const std::filesystem::path& base_dir = {});
/// Throws IoError or DatasetError.
std::vector<EvalCase> load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Rounds a percentage to one decimal, halves away from zero.
double round1(double percent);

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t abstain_on_yes = 0;
    std::size_t abstain_on_no = 0;

    std::size_t abstain() const { return abstain_on_yes + abstain_on_no; }
    std::size_t total() const { return tp + fp + fn + tn + abstain(); }
    Confusion& operator+=(const Confusion& o);
    bool operator==(const Confusion&) const = default;
};

/// Percentages to one decimal. Absent when the denominator is zero.
struct BinaryMetrics {
    double accuracy = 0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    double yes_rate = 0;
    Confusion confusion;
};

/// Harmonic mean of two percentages; 0 when both are 0.
double harmonic_f1(double precision, double recall);

/// Metrics from confusion counts (a non-empty confusion). Abstentions are
/// wrong answers and non-yes predictions.
BinaryMetrics metrics_from_confusion(const Confusion& c);

/// `preds` are normalized answers (yes / no / abstain), `golds` yes / no.
/// Throws LengthMismatch or EmptyInput.
BinaryMetrics score_binary(const std::vector<std::string>& preds, const std::vector<std::string>& golds);

/// Percentage of pairs equal after free-form normalization of both sides.
/// Throws LengthMismatch or EmptyInput.
double score_freeform_accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& golds);

struct EditPair {
    std::string original;
    std::string adjusted;
    /// In-context example count the pair was produced with.
    std::size_t k = 0;
};

/// JSON lines {"original": ..., "adjusted": ..., "k": n}; k defaults to 0.
/// Throws DatasetError.
std::vector<EditPair> parse_edit_pairs(std::string_view text);
/// Throws IoError or DatasetError.
std::vector<EditPair> load_edit_pairs(const std::filesystem::path& path);

struct EditRow {
    std::size_t k = 0;
    std::size_t count = 0;
    double mean_edits = 0;
    std::optional<double> mean_similarity;
};

struct EditStats {
    std::size_t count = 0;
    double mean_edits = 0;
    std::optional<double> mean_similarity;
    /// One row per k, ascending.
    std::vector<EditRow> per_k;
};

/// Similarity of a question pair: the scorer sees the original question as
/// a text payload with the unit region and the adjusted question as text.
double question_similarity(SimilarityScorer& scorer, std::string_view original, std::string_view adjusted);

/// Mean word edits and, given a scorer, mean similarity; grouped by k.
EditStats edit_stats(const std::vector<EditPair>& pairs, SimilarityScorer* scorer = nullptr);

struct HallucinationRates {
    std::optional<double> objects;
    std::optional<double> attributes;
    std::optional<double> relations;
};

/// Pooled 100 * removed / total per category, one decimal.
HallucinationRates aggregate_hallucination_rates(const std::vector<HallucinationStats>& stats);

struct EvalReport {
    std::string dataset;
    DatasetFormat format = DatasetFormat::BinaryJsonl;
    std::string ablation;
    std::size_t cases = 0;
    std::size_t failed = 0;
    std::optional<BinaryMetrics> binary;
    std::optional<double> freeform_accuracy;
    HallucinationRates rates;
    EditStats edits;
    std::map<std::string, std::size_t> routes;
};

struct Evaluation {
    EvalReport report;
    std::vector<CaseOutcome> outcomes;
};

/// Runs the batch and scores it against the gold labels of the original
/// questions. Failed cases count as abstentions.
Evaluation evaluate(const Services& services, const std::vector<EvalCase>& cases, DatasetFormat format,
                    const PipelineConfig& config, std::string dataset_name = {});

std::string report_json(const EvalReport& report);
/// Plain-text table with the columns Acc. Prec. Rec. F1 Yes.
std::string report_text(const EvalReport& report);

}  // namespace bottomup
