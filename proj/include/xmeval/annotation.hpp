#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace xmeval {

// Item ids are opaque strings, unique within their modality (COCO image file
// names, caption ids, ...). The tool never interprets them.
using ItemId = std::string;

enum class Modality { Image, Text };

Modality opposite(Modality m);
std::string to_string(Modality m);
Modality parse_modality(const std::string& s);

// Four-level relevance judgment. Positivity and partial credit:
//   yes -> positive, credit 1.0
//   weak_yes -> positive, credit 0.5
//   weak_no / no -> negative, credit 0
enum class Judgment { Yes, WeakYes, WeakNo, No };

bool is_positive(Judgment j);
double credit(Judgment j);
// Strongest-wins order for merge conflicts: yes > weak_yes > weak_no > no.
Judgment stronger(Judgment a, Judgment b);
std::string to_string(Judgment j);
Judgment parse_judgment(const std::string& s);

// Source tags are free-form strings. Two have fixed meaning; anything else is
// an auxiliary machine-derived source named by its tag.
inline constexpr const char* kSourceOriginal = "original";
inline constexpr const char* kSourceHumanVerified = "human_verified";

enum class SourceKind { Original, HumanVerified, Auxiliary };
SourceKind classify_source(const std::string& tag);

struct AnnotationRecord {
  ItemId query;
  Modality query_modality = Modality::Image;  // candidate has the opposite one
  ItemId candidate;
  Judgment judgment = Judgment::No;
  std::string source;
};

// One dataset's annotations plus its bookkeeping lists, as loaded from a
// bundle JSON file.
struct DatasetBundle {
  int schema_version = 1;
  std::vector<AnnotationRecord> records;
  std::set<ItemId> invalid_captions;
  std::set<ItemId> invalid_images;
  std::set<ItemId> image_queries;  // query universe, image side
  std::set<ItemId> text_queries;   // query universe, text side

  const std::set<ItemId>& universe(Modality m) const {
    return m == Modality::Image ? image_queries : text_queries;
  }
  std::set<ItemId>& universe(Modality m) {
    return m == Modality::Image ? image_queries : text_queries;
  }

  // Observed source tags and their record counts.
  std::map<std::string, std::size_t> source_counts() const;
};

// A positive candidate for some query, with the judgment that survived merge
// conflict resolution and every source that contributed it.
struct PositiveAnnotation {
  ItemId candidate;
  Judgment judgment = Judgment::Yes;
  std::vector<std::string> sources;
};

// Per-direction positive ground truth. `positives` values are sorted by
// candidate id and candidate ids are unique per query; every judgment held is
// positive.
struct GroundTruth {
  Modality direction = Modality::Image;
  std::map<ItemId, std::vector<PositiveAnnotation>> positives;
};

// Parses and validates a bundle JSON file. Schema errors name the offending
// record index. Enforces: known enums, non-empty ids, (query, candidate,
// source) uniqueness, query universe covering all record queries, and a
// single modality per id across records and universes.
DatasetBundle load_bundle(const std::string& path);

struct FilterResult {
  DatasetBundle bundle;
  std::size_t removed_records = 0;
  std::size_t removed_ids = 0;  // invalid ids actually present in the bundle
  std::size_t unknown_ids = 0;  // listed ids the bundle never mentions
};

// Drops every record that touches an invalid caption/image (the bundle's own
// lists plus the extra ones), and prunes the query universes. The applied
// lists are recorded in the returned bundle.
FilterResult filter_invalid(const DatasetBundle& bundle,
                            const std::set<ItemId>& extra_captions = {},
                            const std::set<ItemId>& extra_images = {});

// Unions the positive records of the selected sources for one query
// direction. A candidate reported by several sources keeps the strongest
// judgment and all contributing source tags. Unknown source tags are errors.
GroundTruth merge_positive_sources(const DatasetBundle& bundle,
                                   const std::vector<std::string>& sources,
                                   Modality direction);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;  // queries with empty t_i or empty verified r'_i
};

// Annotation-level precision/recall of a candidate dataset's positives
// against human-verified reference positives, restricted to the verified
// universe h_i (the pairs humans actually saw). Queries where the
// restriction leaves nothing (or the reference is empty) are excluded and
// counted, never silently dropped into the average.
PrecisionRecall dataset_precision_recall(
    const GroundTruth& candidate, const GroundTruth& reference,
    const std::map<ItemId, std::set<ItemId>>& verified_universe);

}  // namespace xmeval
