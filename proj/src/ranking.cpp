#include "xmeval/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "xmeval/csv.hpp"
#include "xmeval/error.hpp"

namespace xmeval {

std::size_t SimilarityMatrix::query_row(const ItemId& q) const {
  if (row_index_.empty()) {
    for (std::size_t i = 0; i < queries.size(); ++i) row_index_[queries[i]] = i;
  }
  auto it = row_index_.find(q);
  if (it == row_index_.end())
    throw std::invalid_argument("unknown query id: '" + q + "'");
  return it->second;
}

void SimilarityMatrix::validate() const {
  if (queries.empty()) throw ParseError("similarity matrix has no queries");
  if (gallery.empty()) throw ParseError("similarity matrix has no gallery items");
  if (scores.size() != queries.size() * gallery.size())
    throw ParseError("similarity matrix shape mismatch");
  std::set<ItemId> seen;
  for (const auto& q : queries)
    if (!seen.insert(q).second)
      throw ParseError("duplicate query id: '" + q + "'");
  seen.clear();
  for (const auto& g : gallery)
    if (!seen.insert(g).second)
      throw ParseError("duplicate gallery id: '" + g + "'");
  for (double s : scores)
    if (std::isnan(s)) throw ParseError("similarity matrix contains NaN");
}

SimilarityMatrix load_similarity_csv(const std::string& path,
                                     Modality query_modality) {
  auto rows = read_delimited_file(path, ',');
  if (rows.size() < 2)
    throw ParseError(path, 0, "need a header row and at least one query row");

  SimilarityMatrix m;
  m.query_modality = query_modality;
  const auto& header = rows[0];
  if (header.size() < 2)
    throw ParseError(path, 1, "header must list at least one gallery id");
  m.gallery.assign(header.begin() + 1, header.end());

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != m.gallery.size() + 1)
      throw ParseError(path, i + 1,
                       "expected " + std::to_string(m.gallery.size() + 1) +
                           " cells, got " + std::to_string(row.size()));
    if (row[0].empty()) throw ParseError(path, i + 1, "empty query id");
    m.queries.push_back(row[0]);
    for (std::size_t j = 1; j < row.size(); ++j) {
      m.scores.push_back(parse_double_strict(
          row[j], path + ":" + std::to_string(i + 1)));
    }
  }
  m.validate();
  return m;
}

SimilarityMatrix load_similarity_tsv(const std::string& path,
                                     Modality query_modality) {
  auto rows = read_delimited_file(path, '\t');
  if (rows.empty()) throw ParseError(path, 0, "empty file");

  std::map<ItemId, std::map<ItemId, double>> cells;
  std::set<ItemId> gallery_ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3)
      throw ParseError(path, i + 1, "expected query<TAB>candidate<TAB>score");
    if (row[0].empty() || row[1].empty())
      throw ParseError(path, i + 1, "empty id");
    double v = parse_double_strict(row[2], path + ":" + std::to_string(i + 1));
    if (!cells[row[0]].emplace(row[1], v).second)
      throw ParseError(path, i + 1,
                       "duplicate cell (" + row[0] + ", " + row[1] + ")");
    gallery_ids.insert(row[1]);
  }

  SimilarityMatrix m;
  m.query_modality = query_modality;
  m.gallery.assign(gallery_ids.begin(), gallery_ids.end());
  for (const auto& [q, row] : cells) {
    m.queries.push_back(q);
    for (const ItemId& g : m.gallery) {
      auto it = row.find(g);
      if (it == row.end())
        throw ParseError(path, 0,
                         "missing cell (" + q + ", " + g +
                             "): triplet files must cover the full grid");
      m.scores.push_back(it->second);
    }
  }
  m.validate();
  return m;
}

RankedList rank_gallery(const SimilarityMatrix& sims, const ItemId& query) {
  std::size_t row = sims.query_row(query);
  std::vector<std::size_t> order(sims.gallery.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double sa = sims.at(row, a), sb = sims.at(row, b);
    if (sa != sb) return sa > sb;
    return sims.gallery[a] < sims.gallery[b];
  });

  RankedList out;
  out.query = query;
  out.candidates.reserve(order.size());
  for (std::size_t i : order) out.candidates.push_back(sims.gallery[i]);
  return out;
}

std::vector<ItemId> topk(const RankedList& ranked, std::size_t k) {
  std::size_t n = std::min(k, ranked.candidates.size());
  return {ranked.candidates.begin(), ranked.candidates.begin() + n};
}

std::map<ItemId, RankedList> rank_all(const SimilarityMatrix& sims) {
  std::map<ItemId, RankedList> out;
  for (const ItemId& q : sims.queries) out.emplace(q, rank_gallery(sims, q));
  return out;
}

}  // namespace xmeval
