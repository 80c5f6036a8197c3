#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xmeval/ranking.hpp"

namespace xmeval {

using QueryCandidatePair = std::pair<ItemId, ItemId>;

struct CandidatePool {
  std::set<QueryCandidatePair> pairs;          // deduplicated union
  std::map<std::string, std::size_t> per_annotator;  // pairs contributed (pre-dedup)
  std::size_t raw_count = 0;                   // sum over annotators and queries
  std::size_t saturated_queries = 0;           // galleries shorter than k
};

// Union of every annotator's top-k retrievals per query. All annotators must
// rank the same query set. Galleries shorter than k contribute what they
// have, counted as saturated.
CandidatePool pool_candidates(
    const std::map<std::string, std::map<ItemId, RankedList>>& rankings,
    std::size_t k = 5);

enum class HitRole { Candidate, GoldenPositive, GoldenNegative };

std::string to_string(HitRole role);

struct HitEntry {
  ItemId query;
  ItemId candidate;
  HitRole role = HitRole::Candidate;
};

// One annotation work unit: always exactly 20 entries. Full HITs carry 18
// pool candidates, 1 golden positive, 1 golden negative; a final partial HIT
// replaces missing candidates with extra golden positives (padding).
struct Hit {
  std::vector<HitEntry> entries;
};

struct HitPackage {
  std::vector<Hit> hits;
  std::size_t padding_count = 0;
};

// Where golden negatives may be drawn from: random (query, candidate) pairs
// over the given universes that are neither known positives nor excluded
// (e.g. any annotator's top-25, which might be plausibly relevant).
struct GoldenNegativeSource {
  std::vector<ItemId> queries;
  std::vector<ItemId> gallery;
  const std::set<QueryCandidatePair>* known_positives = nullptr;
  const std::set<QueryCandidatePair>* excluded = nullptr;
};

// Deterministically partitions the pool (sorted order) into HITs of 18
// candidates and seasons each with one golden positive and one sampled golden
// negative. The same (pool, goldens, source, seed) always yields the same
// package. Errors: fewer golden positives than HITs, or an empty negative
// pool.
HitPackage package_hits(const CandidatePool& pool,
                        const std::vector<QueryCandidatePair>& golden_positives,
                        const GoldenNegativeSource& negatives,
                        std::uint64_t seed);

struct BiasReport {
  std::vector<std::string> theta;
  double b_theta = 0.0;        // mean |s_theta - s_all| over all models
  double self_bias = 0.0;      // restricted to models inside theta
  double non_self_bias = 0.0;  // restricted to models outside theta (0 if none)
};

// How far scores computed against subset-theta annotations drift from scores
// against the full annotation set, and how that drift splits between theta's
// own models and the rest.
BiasReport bias_quantity(const std::map<std::string, double>& scores_theta,
                         const std::map<std::string, double>& scores_all,
                         const std::vector<std::string>& theta);

// Canonical key for an annotator subset: sorted names joined by '+'.
std::string subset_key(std::vector<std::string> names);

struct BiasCurvePoint {
  std::size_t subset_size = 0;
  std::size_t n_subsets = 0;
  double avg_b = 0.0;
  double avg_self = 0.0;
  double avg_non_self = 0.0;
};

// Averages bias_quantity over every subset of the full annotator set with the
// given size. scores_by_subset is keyed by subset_key(); a missing subset is
// an error naming the key.
BiasCurvePoint bias_curve(
    const std::map<std::string, std::map<std::string, double>>& scores_by_subset,
    const std::map<std::string, double>& scores_all, std::size_t subset_size);

}  // namespace xmeval
