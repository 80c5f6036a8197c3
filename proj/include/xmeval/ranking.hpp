#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "xmeval/annotation.hpp"

namespace xmeval {

// Dense query x gallery score matrix. Higher score = more similar. Gallery
// items live in the modality opposite the queries.
struct SimilarityMatrix {
  Modality query_modality = Modality::Image;
  std::vector<ItemId> queries;
  std::vector<ItemId> gallery;
  std::vector<double> scores;  // row-major, queries.size() x gallery.size()

  double at(std::size_t q, std::size_t g) const {
    return scores[q * gallery.size() + g];
  }
  // Row index for a query id; throws std::invalid_argument if unknown.
  std::size_t query_row(const ItemId& q) const;

  // Rejects NaN scores, duplicate ids, and shape mismatches.
  void validate() const;

 private:
  mutable std::map<ItemId, std::size_t> row_index_;  // built lazily
};

// Gallery ids ordered best-first for one query.
struct RankedList {
  ItemId query;
  std::vector<ItemId> candidates;
};

// Dense CSV: header row = gallery ids (first cell is a corner label and is
// ignored), then one row per query: query id followed by one score per
// gallery item.
SimilarityMatrix load_similarity_csv(const std::string& path, Modality query_modality);

// Sparse triplet form, one "query<TAB>candidate<TAB>score" per line, no
// header. The (query, candidate) pairs must cover the full cross product of
// the ids observed; any absent cell is an error, as is a duplicate.
SimilarityMatrix load_similarity_tsv(const std::string& path, Modality query_modality);

// Orders the gallery by descending score; equal scores break by ascending
// candidate id, so the result is a deterministic function of the matrix.
RankedList rank_gallery(const SimilarityMatrix& sims, const ItemId& query);

// First k candidates (all of them if k exceeds the gallery).
std::vector<ItemId> topk(const RankedList& ranked, std::size_t k);

// Convenience: rank every query of a matrix.
std::map<ItemId, RankedList> rank_all(const SimilarityMatrix& sims);

}  // namespace xmeval
