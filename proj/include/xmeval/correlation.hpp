#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "xmeval/ranking.hpp"
#include "xmeval/score_table.hpp"

namespace xmeval {

// Kendall's tau-b: (P - Q) / sqrt((P + Q + Tx)(P + Q + Ty)) where P/Q are
// concordant/discordant pair counts and Tx/Ty count pairs tied only in x /
// only in y. Runs in O(n log n) (merge-sort inversion counting). Returns
// nullopt when either list is constant: the coefficient is undefined there
// and must not silently read as zero correlation.
std::optional<double> kendall_tau_b(std::span<const double> x,
                                    std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::optional<double>> values;  // row-major, symmetric

  std::optional<double> at(std::size_t i, std::size_t j) const {
    return values[i * labels.size() + j];
  }
};

// Pairwise tau-b between every pair of metric columns. Diagonal is 1 for
// non-constant columns and undefined for constant ones.
CorrelationMatrix correlation_matrix(const ScoreTable& table);

// Undefined cells are written as "NA".
void write_correlation_csv(const CorrelationMatrix& m, std::ostream& out,
                           int precision);

// Mean (1-based) rank that ranking b assigns to a's top-1 candidate, over the
// shared query set. Both maps must rank the same queries, and a's top choice
// must appear somewhere in b's list.
double cross_model_rank(const std::map<ItemId, RankedList>& a,
                        const std::map<ItemId, RankedList>& b);

}  // namespace xmeval
