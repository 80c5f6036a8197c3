#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xmeval/annotation.hpp"
#include "xmeval/ranking.hpp"

namespace xmeval {

// Binary: a positive contributes 1 wherever it appears. Graded: it
// contributes its judgment credit (yes 1.0, weak_yes 0.5). Graded credit is
// only meaningful for recall@1 and R-Precision; the other metrics reject it.
enum class CreditMode { Binary, Graded };

// Per-rank relevance of one ranked gallery against one query's positives.
// values[i] is the credit of the candidate at rank i+1; positive_count is R,
// the total number of annotated positives for the query (present in the
// gallery or not — absent ones simply never contribute).
struct MatchVector {
  std::vector<double> values;
  std::size_t positive_count = 0;
  CreditMode mode = CreditMode::Binary;
};

// positives must be non-empty (callers are expected to skip degenerate
// queries and count them).
MatchVector match_vector(const RankedList& ranked,
                         const std::vector<PositiveAnnotation>& positives,
                         CreditMode mode);

// Binary: 1 if any of the top k is a positive. Graded (k == 1 only): the
// credit of the top-ranked candidate.
double recall_at_k(const MatchVector& m, std::size_t k);

// Mean credit over the top R ranks, R = positive_count. Ranks beyond the
// gallery count as zero.
double r_precision(const MatchVector& m);

// Mean of precision-at-i over the positive hits within the top R ranks,
// divided by R (misses inside the cutoff count as zero). Binary mode only.
double map_at_r(const MatchVector& m);

// Multi-hot class vector over a fixed attribute vocabulary.
struct ClassVector {
  std::vector<std::uint8_t> bits;
};

std::size_t hamming_distance(const ClassVector& a, const ClassVector& b);

// True when the two items' class vectors differ in at most zeta bits.
bool plausible_match(const ClassVector& a, const ClassVector& b, std::size_t zeta);

// R-Precision against class-derived pseudo-positives: gallery items whose
// class vector is within zeta of the query's. R is capped (default 50).
// nullopt when the query has no pseudo-positive in the gallery.
std::optional<double> pmrp(const RankedList& ranked,
                           const std::map<ItemId, ClassVector>& classes,
                           const ClassVector& query_class, std::size_t zeta = 0,
                           std::size_t cap = 50);

// CSV "item_id,bit_0,...,bit_{d-1}": header row then one 0/1 row per item.
std::map<ItemId, ClassVector> load_class_vectors(const std::string& path);

// ---- metric specs & the evaluation driver ----

struct MetricSpec {
  enum class Kind { RecallAtK, RPrecision, MapAtR, Pmrp };
  Kind kind = Kind::RecallAtK;
  std::size_t k = 1;     // RecallAtK only
  bool graded = false;   // valid on recall@1 and r_precision only

  std::string name() const;
};

// Accepts "recall@K", "r_precision", "map_at_r", "pmrp", with an optional
// ":graded" suffix where defined. Anything else throws std::invalid_argument.
MetricSpec parse_metric_spec(const std::string& text);

struct EvaluateOptions {
  std::vector<MetricSpec> metrics;
  const std::map<ItemId, ClassVector>* classes = nullptr;  // required for pmrp
  std::size_t pmrp_zeta = 0;
  std::size_t pmrp_cap = 50;
};

struct DirectionReport {
  Modality direction = Modality::Image;
  std::vector<std::string> metric_names;
  // query -> metric -> value; only queries/metrics that were defined.
  std::map<ItemId, std::map<std::string, double>> per_query;
  std::map<std::string, double> averaged;
  std::map<std::string, std::size_t> n_used;       // per metric
  std::map<std::string, std::size_t> n_degenerate; // per metric
  std::size_t n_queries = 0;
};

struct EvaluationReport {
  DirectionReport image_to_text;
  DirectionReport text_to_image;
  std::map<std::string, double> bidirectional;  // mean of the two directions
};

// Runs every metric over one direction. Queries without positives (or, for
// pmrp, without pseudo-positives) are excluded from that metric's average and
// counted. A direction where no query is usable for some metric is an error.
DirectionReport evaluate_direction(const SimilarityMatrix& sims,
                                   const GroundTruth& gt,
                                   const EvaluateOptions& options);

EvaluationReport evaluate(const SimilarityMatrix& sims_i2t,
                          const SimilarityMatrix& sims_t2i,
                          const GroundTruth& gt_i2t, const GroundTruth& gt_t2i,
                          const EvaluateOptions& options);

}  // namespace xmeval
