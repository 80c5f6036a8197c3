#include "xmeval/mitl.hpp"

#include <algorithm>
#include <random>

#include "xmeval/error.hpp"
#include "xmeval/numeric.hpp"

namespace xmeval {

CandidatePool pool_candidates(
    const std::map<std::string, std::map<ItemId, RankedList>>& rankings,
    std::size_t k) {
  if (rankings.empty())
    throw std::invalid_argument("pool_candidates: no annotators");
  if (k == 0) throw std::invalid_argument("pool_candidates: k must be >= 1");

  const auto& reference = rankings.begin()->second;
  for (const auto& [name, per_query] : rankings) {
    if (per_query.size() != reference.size() ||
        !std::equal(per_query.begin(), per_query.end(), reference.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; }))
      throw std::invalid_argument("pool_candidates: annotator '" + name +
                                  "' ranks a different query set");
  }

  CandidatePool pool;
  for (const auto& [name, per_query] : rankings) {
    std::size_t contributed = 0;
    for (const auto& [query, ranked] : per_query) {
      if (ranked.candidates.size() < k) ++pool.saturated_queries;
      auto top = topk(ranked, k);
      contributed += top.size();
      for (const ItemId& c : top) pool.pairs.emplace(query, c);
    }
    pool.per_annotator[name] = contributed;
    pool.raw_count += contributed;
  }
  return pool;
}

std::string to_string(HitRole role) {
  switch (role) {
    case HitRole::Candidate: return "candidate";
    case HitRole::GoldenPositive: return "golden_positive";
    case HitRole::GoldenNegative: return "golden_negative";
  }
  return "candidate";
}

namespace {

constexpr std::size_t kHitSize = 20;
constexpr std::size_t kCandidatesPerHit = 18;

// Explicit Fisher-Yates so packaging does not depend on library internals.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

bool hit_contains(const Hit& hit, const QueryCandidatePair& pair) {
  return std::any_of(hit.entries.begin(), hit.entries.end(),
                     [&](const HitEntry& e) {
                       return e.query == pair.first && e.candidate == pair.second;
                     });
}

class GoldenNegativeSampler {
 public:
  GoldenNegativeSampler(const GoldenNegativeSource& source, std::mt19937_64& rng)
      : source_(source), rng_(rng) {
    if (source.queries.empty() || source.gallery.empty())
      throw std::invalid_argument(
          "package_hits: golden negative universe is empty");
  }

  QueryCandidatePair draw(const Hit& hit) {
    // Rejection sampling first; almost always succeeds because exclusions are
    // sparse relative to the full query x gallery grid.
    for (int attempt = 0; attempt < 4096; ++attempt) {
      QueryCandidatePair pair = random_pair();
      if (admissible(pair, hit)) return pair;
    }
    // Dense exclusions: enumerate the complement once and draw from it.
    std::vector<QueryCandidatePair> remaining;
    for (const ItemId& q : source_.queries) {
      for (const ItemId& g : source_.gallery) {
        QueryCandidatePair pair{q, g};
        if (admissible(pair, hit)) remaining.push_back(std::move(pair));
      }
    }
    if (remaining.empty())
      throw std::invalid_argument(
          "package_hits: golden negative pool is empty (every pair is a known "
          "positive or excluded)");
    std::sort(remaining.begin(), remaining.end());
    return remaining[static_cast<std::size_t>(rng_() % remaining.size())];
  }

 private:
  QueryCandidatePair random_pair() {
    std::size_t qi = static_cast<std::size_t>(rng_() % source_.queries.size());
    std::size_t gi = static_cast<std::size_t>(rng_() % source_.gallery.size());
    return {source_.queries[qi], source_.gallery[gi]};
  }

  bool admissible(const QueryCandidatePair& pair, const Hit& hit) const {
    if (source_.known_positives && source_.known_positives->count(pair)) return false;
    if (source_.excluded && source_.excluded->count(pair)) return false;
    return !hit_contains(hit, pair);
  }

  const GoldenNegativeSource& source_;
  std::mt19937_64& rng_;
};

}  // namespace

HitPackage package_hits(const CandidatePool& pool,
                        const std::vector<QueryCandidatePair>& golden_positives,
                        const GoldenNegativeSource& negatives,
                        std::uint64_t seed) {
  HitPackage package;
  if (pool.pairs.empty()) return package;

  const std::size_t n_hits = (pool.pairs.size() + kCandidatesPerHit - 1) / kCandidatesPerHit;

  std::vector<QueryCandidatePair> goldens(golden_positives);
  std::sort(goldens.begin(), goldens.end());
  goldens.erase(std::unique(goldens.begin(), goldens.end()), goldens.end());
  if (goldens.size() < n_hits)
    throw std::invalid_argument(
        "package_hits: need at least " + std::to_string(n_hits) +
        " distinct golden positives, got " + std::to_string(goldens.size()));

  std::mt19937_64 rng(seed);
  deterministic_shuffle(goldens, rng);
  GoldenNegativeSampler sampler(negatives, rng);

  std::vector<QueryCandidatePair> ordered(pool.pairs.begin(), pool.pairs.end());
  std::size_t next_golden = 0;

  // Hands out the first golden positive (from `from`) not already in the hit.
  auto take_golden = [&](const Hit& hit, std::size_t& from) {
    for (std::size_t i = from; i < goldens.size(); ++i) {
      if (!hit_contains(hit, goldens[i])) {
        std::swap(goldens[from], goldens[i]);
        return goldens[from++];
      }
    }
    throw std::invalid_argument(
        "package_hits: ran out of golden positives that are not already in "
        "the current HIT");
  };

  for (std::size_t h = 0; h < n_hits; ++h) {
    Hit hit;
    std::size_t begin = h * kCandidatesPerHit;
    std::size_t end = std::min(begin + kCandidatesPerHit, ordered.size());
    for (std::size_t i = begin; i < end; ++i)
      hit.entries.push_back({ordered[i].first, ordered[i].second, HitRole::Candidate});

    auto gp = take_golden(hit, next_golden);
    hit.entries.push_back({gp.first, gp.second, HitRole::GoldenPositive});

    auto gn = sampler.draw(hit);
    hit.entries.push_back({gn.first, gn.second, HitRole::GoldenNegative});

    // Final partial HIT: keep the unit size fixed by padding with further
    // golden positives (reusing earlier ones once fresh ones run out).
    std::size_t reuse_from = next_golden;
    while (hit.entries.size() < kHitSize) {
      if (reuse_from >= goldens.size()) reuse_from = 0;
      std::size_t scan = reuse_from;
      bool placed = false;
      while (scan < goldens.size()) {
        if (!hit_contains(hit, goldens[scan])) {
          hit.entries.push_back(
              {goldens[scan].first, goldens[scan].second, HitRole::GoldenPositive});
          ++package.padding_count;
          reuse_from = scan + 1;
          placed = true;
          break;
        }
        ++scan;
      }
      if (!placed) {
        if (reuse_from == 0)
          throw std::invalid_argument(
              "package_hits: not enough distinct golden positives to pad the "
              "final HIT");
        reuse_from = 0;
      }
    }
    package.hits.push_back(std::move(hit));
  }
  return package;
}

BiasReport bias_quantity(const std::map<std::string, double>& scores_theta,
                         const std::map<std::string, double>& scores_all,
                         const std::vector<std::string>& theta) {
  if (scores_all.empty())
    throw std::invalid_argument("bias_quantity: no models in the full table");
  if (theta.empty()) throw std::invalid_argument("bias_quantity: empty subset");

  std::set<std::string> theta_set(theta.begin(), theta.end());
  for (const auto& name : theta_set)
    if (!scores_all.count(name))
      throw std::invalid_argument("bias_quantity: subset member '" + name +
                                  "' is not a model in the full table");

  CompensatedSum all_sum, self_sum, other_sum;
  std::size_t n_self = 0, n_other = 0;
  for (const auto& [model, s_all] : scores_all) {
    auto it = scores_theta.find(model);
    if (it == scores_theta.end())
      throw std::invalid_argument("bias_quantity: model '" + model +
                                  "' missing from the subset score table");
    double dev = std::abs(it->second - s_all);
    all_sum.add(dev);
    if (theta_set.count(model)) {
      self_sum.add(dev);
      ++n_self;
    } else {
      other_sum.add(dev);
      ++n_other;
    }
  }

  BiasReport report;
  report.theta.assign(theta_set.begin(), theta_set.end());
  report.b_theta = compensated_mean(all_sum, scores_all.size());
  report.self_bias = n_self ? compensated_mean(self_sum, n_self) : 0.0;
  report.non_self_bias = n_other ? compensated_mean(other_sum, n_other) : 0.0;
  return report;
}

std::string subset_key(std::vector<std::string> names) {
  if (names.empty()) throw std::invalid_argument("subset_key: empty subset");
  for (const auto& n : names)
    if (n.find('+') != std::string::npos)
      throw std::invalid_argument("subset_key: annotator name '" + n +
                                  "' may not contain '+'");
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw std::invalid_argument("subset_key: duplicate annotator name");
  std::string key = names[0];
  for (std::size_t i = 1; i < names.size(); ++i) key += "+" + names[i];
  return key;
}

BiasCurvePoint bias_curve(
    const std::map<std::string, std::map<std::string, double>>& scores_by_subset,
    const std::map<std::string, double>& scores_all, std::size_t subset_size) {
  std::vector<std::string> models;
  for (const auto& [name, _] : scores_all) models.push_back(name);
  const std::size_t n = models.size();
  if (subset_size == 0 || subset_size > n)
    throw std::invalid_argument("bias_curve: subset size must be in [1, " +
                                std::to_string(n) + "]");

  BiasCurvePoint point;
  point.subset_size = subset_size;
  CompensatedSum b_sum, self_sum, other_sum;

  // Lexicographic combinations over the sorted model list.
  std::vector<std::size_t> pick(subset_size);
  for (std::size_t i = 0; i < subset_size; ++i) pick[i] = i;
  while (true) {
    std::vector<std::string> subset;
    for (std::size_t i : pick) subset.push_back(models[i]);
    const std::string key = subset_key(subset);
    auto it = scores_by_subset.find(key);
    if (it == scores_by_subset.end())
      throw std::invalid_argument("bias_curve: no score table for subset '" +
                                  key + "'");
    BiasReport r = bias_quantity(it->second, scores_all, subset);
    b_sum.add(r.b_theta);
    self_sum.add(r.self_bias);
    other_sum.add(r.non_self_bias);
    ++point.n_subsets;

    // advance combination
    std::size_t i = subset_size;
    while (i > 0 && pick[i - 1] == n - subset_size + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < subset_size; ++j) pick[j] = pick[j - 1] + 1;
  }

  point.avg_b = compensated_mean(b_sum, point.n_subsets);
  point.avg_self = compensated_mean(self_sum, point.n_subsets);
  point.avg_non_self = compensated_mean(other_sum, point.n_subsets);
  return point;
}

}  // namespace xmeval
