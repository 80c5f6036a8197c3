#include "xmeval/metrics.hpp"

#include <algorithm>
#include <set>

#include "xmeval/csv.hpp"
#include "xmeval/error.hpp"
#include "xmeval/numeric.hpp"

namespace xmeval {

MatchVector match_vector(const RankedList& ranked,
                         const std::vector<PositiveAnnotation>& positives,
                         CreditMode mode) {
  if (positives.empty())
    throw std::invalid_argument("match_vector: empty positive set for query '" +
                                ranked.query + "'");

  std::map<ItemId, double> credit_of;
  for (const auto& p : positives) {
    if (!is_positive(p.judgment))
      throw std::invalid_argument(
          "match_vector: non-positive judgment in ground truth for '" +
          p.candidate + "'");
    if (!credit_of.emplace(p.candidate,
                           mode == CreditMode::Binary ? 1.0 : credit(p.judgment))
             .second)
      throw std::invalid_argument("match_vector: duplicate positive candidate '" +
                                  p.candidate + "'");
  }

  MatchVector m;
  m.mode = mode;
  m.positive_count = positives.size();
  m.values.reserve(ranked.candidates.size());
  for (const ItemId& c : ranked.candidates) {
    auto it = credit_of.find(c);
    m.values.push_back(it == credit_of.end() ? 0.0 : it->second);
  }
  return m;
}

double recall_at_k(const MatchVector& m, std::size_t k) {
  if (k == 0) throw std::invalid_argument("recall_at_k: k must be >= 1");
  if (m.mode == CreditMode::Graded) {
    if (k != 1)
      throw std::invalid_argument(
          "recall_at_k: graded credit is only defined for k = 1");
    return m.values.empty() ? 0.0 : m.values.front();
  }
  std::size_t n = std::min(k, m.values.size());
  for (std::size_t i = 0; i < n; ++i)
    if (m.values[i] == 1.0) return 1.0;
  return 0.0;
}

double r_precision(const MatchVector& m) {
  std::size_t r = m.positive_count;
  std::size_t n = std::min(r, m.values.size());
  CompensatedSum sum;
  for (std::size_t i = 0; i < n; ++i) sum.add(m.values[i]);
  return sum.value() / static_cast<double>(r);
}

double map_at_r(const MatchVector& m) {
  if (m.mode != CreditMode::Binary)
    throw std::invalid_argument("map_at_r: binary credit only");
  std::size_t r = m.positive_count;
  std::size_t n = std::min(r, m.values.size());
  CompensatedSum sum;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.values[i] == 1.0) {
      ++hits;
      sum.add(static_cast<double>(hits) / static_cast<double>(i + 1));
    }
  }
  return sum.value() / static_cast<double>(r);
}

std::size_t hamming_distance(const ClassVector& a, const ClassVector& b) {
  if (a.bits.size() != b.bits.size())
    throw std::invalid_argument("hamming_distance: dimension mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i)
    if ((a.bits[i] != 0) != (b.bits[i] != 0)) ++d;
  return d;
}

bool plausible_match(const ClassVector& a, const ClassVector& b, std::size_t zeta) {
  return hamming_distance(a, b) <= zeta;
}

std::optional<double> pmrp(const RankedList& ranked,
                           const std::map<ItemId, ClassVector>& classes,
                           const ClassVector& query_class, std::size_t zeta,
                           std::size_t cap) {
  if (cap == 0) throw std::invalid_argument("pmrp: cap must be >= 1");

  std::size_t n_plausible = 0;
  std::vector<bool> match(ranked.candidates.size());
  for (std::size_t i = 0; i < ranked.candidates.size(); ++i) {
    auto it = classes.find(ranked.candidates[i]);
    if (it == classes.end())
      throw std::invalid_argument("pmrp: no class vector for gallery item '" +
                                  ranked.candidates[i] + "'");
    match[i] = plausible_match(query_class, it->second, zeta);
    if (match[i]) ++n_plausible;
  }
  if (n_plausible == 0) return std::nullopt;

  std::size_t r = std::min(n_plausible, cap);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < r; ++i)
    if (match[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(r);
}

std::map<ItemId, ClassVector> load_class_vectors(const std::string& path) {
  auto rows = read_delimited_file(path, ',');
  if (rows.size() < 2)
    throw ParseError(path, 0, "need a header row and at least one item row");
  if (rows[0].empty() || rows[0][0] != "item_id")
    throw ParseError(path, 1, "header must start with 'item_id'");
  std::size_t dim = rows[0].size() - 1;
  if (dim == 0) throw ParseError(path, 1, "no class columns");

  std::map<ItemId, ClassVector> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != dim + 1)
      throw ParseError(path, i + 1, "row width does not match header");
    if (row[0].empty()) throw ParseError(path, i + 1, "empty item id");
    ClassVector v;
    v.bits.reserve(dim);
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j] == "0") v.bits.push_back(0);
      else if (row[j] == "1") v.bits.push_back(1);
      else throw ParseError(path, i + 1, "class bits must be 0 or 1");
    }
    if (!out.emplace(row[0], std::move(v)).second)
      throw ParseError(path, i + 1, "duplicate item id '" + row[0] + "'");
  }
  return out;
}

std::string MetricSpec::name() const {
  std::string base;
  switch (kind) {
    case Kind::RecallAtK: base = "recall@" + std::to_string(k); break;
    case Kind::RPrecision: base = "r_precision"; break;
    case Kind::MapAtR: base = "map_at_r"; break;
    case Kind::Pmrp: base = "pmrp"; break;
  }
  if (graded) base += ":graded";
  return base;
}

MetricSpec parse_metric_spec(const std::string& text) {
  std::string base = text;
  bool graded = false;
  if (auto pos = base.rfind(":graded"); pos != std::string::npos &&
                                        pos + 7 == base.size()) {
    graded = true;
    base.resize(pos);
  }

  MetricSpec spec;
  spec.graded = graded;
  if (base.rfind("recall@", 0) == 0) {
    spec.kind = MetricSpec::Kind::RecallAtK;
    std::string num = base.substr(7);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad metric spec '" + text + "': recall@K needs an integer K");
    spec.k = std::stoul(num);
    if (spec.k == 0)
      throw std::invalid_argument("bad metric spec '" + text + "': K must be >= 1");
    if (graded && spec.k != 1)
      throw std::invalid_argument("bad metric spec '" + text +
                                  "': graded credit is only defined for recall@1");
  } else if (base == "r_precision") {
    spec.kind = MetricSpec::Kind::RPrecision;
  } else if (base == "map_at_r") {
    spec.kind = MetricSpec::Kind::MapAtR;
    if (graded)
      throw std::invalid_argument("bad metric spec '" + text +
                                  "': map_at_r has no graded form");
  } else if (base == "pmrp") {
    spec.kind = MetricSpec::Kind::Pmrp;
    if (graded)
      throw std::invalid_argument("bad metric spec '" + text +
                                  "': pmrp has no graded form");
  } else {
    throw std::invalid_argument("unknown metric spec '" + text + "'");
  }
  return spec;
}

DirectionReport evaluate_direction(const SimilarityMatrix& sims,
                                   const GroundTruth& gt,
                                   const EvaluateOptions& options) {
  if (sims.query_modality != gt.direction)
    throw std::invalid_argument(
        "evaluate: similarity matrix and ground truth disagree on query "
        "modality");
  if (options.metrics.empty())
    throw std::invalid_argument("evaluate: no metrics requested");

  bool needs_binary = false, needs_graded = false, needs_pmrp = false;
  std::set<std::string> names;
  for (const auto& spec : options.metrics) {
    if (!names.insert(spec.name()).second)
      throw std::invalid_argument("evaluate: metric '" + spec.name() +
                                  "' requested twice");
    if (spec.kind == MetricSpec::Kind::Pmrp) needs_pmrp = true;
    else if (spec.graded) needs_graded = true;
    else needs_binary = true;
  }
  if (needs_pmrp && options.classes == nullptr)
    throw std::invalid_argument("evaluate: pmrp requested without class vectors");

  DirectionReport report;
  report.direction = gt.direction;
  for (const auto& spec : options.metrics)
    report.metric_names.push_back(spec.name());
  report.n_queries = sims.queries.size();

  std::map<std::string, CompensatedSum> sums;

  std::vector<ItemId> query_order(sims.queries);
  std::sort(query_order.begin(), query_order.end());

  for (const ItemId& query : query_order) {
    RankedList ranked = rank_gallery(sims, query);

    auto git = gt.positives.find(query);
    bool has_positives = git != gt.positives.end() && !git->second.empty();

    std::optional<MatchVector> mv_bin, mv_graded;
    if (has_positives) {
      if (needs_binary)
        mv_bin = match_vector(ranked, git->second, CreditMode::Binary);
      if (needs_graded)
        mv_graded = match_vector(ranked, git->second, CreditMode::Graded);
    }

    for (const auto& spec : options.metrics) {
      const std::string name = spec.name();
      std::optional<double> value;
      if (spec.kind == MetricSpec::Kind::Pmrp) {
        auto qit = options.classes->find(query);
        if (qit == options.classes->end())
          throw std::invalid_argument("evaluate: no class vector for query '" +
                                      query + "'");
        value = pmrp(ranked, *options.classes, qit->second, options.pmrp_zeta,
                     options.pmrp_cap);
      } else if (has_positives) {
        const MatchVector& m = spec.graded ? *mv_graded : *mv_bin;
        switch (spec.kind) {
          case MetricSpec::Kind::RecallAtK: value = recall_at_k(m, spec.k); break;
          case MetricSpec::Kind::RPrecision: value = r_precision(m); break;
          case MetricSpec::Kind::MapAtR: value = map_at_r(m); break;
          case MetricSpec::Kind::Pmrp: break;  // handled above
        }
      }

      if (value) {
        report.per_query[query][name] = *value;
        sums[name].add(*value);
        ++report.n_used[name];
      } else {
        ++report.n_degenerate[name];
      }
    }
  }

  for (const auto& spec : options.metrics) {
    const std::string name = spec.name();
    std::size_t used = report.n_used[name];
    report.n_degenerate.try_emplace(name, 0);
    if (used == 0)
      throw NumericError("evaluate: no usable " + to_string(gt.direction) +
                         " query for metric '" + name + "'");
    report.averaged[name] = compensated_mean(sums[name], used);
  }
  return report;
}

EvaluationReport evaluate(const SimilarityMatrix& sims_i2t,
                          const SimilarityMatrix& sims_t2i,
                          const GroundTruth& gt_i2t, const GroundTruth& gt_t2i,
                          const EvaluateOptions& options) {
  if (sims_i2t.query_modality != Modality::Image ||
      sims_t2i.query_modality != Modality::Text)
    throw std::invalid_argument(
        "evaluate: matrices passed in the wrong direction order");

  EvaluationReport report;
  report.image_to_text = evaluate_direction(sims_i2t, gt_i2t, options);
  report.text_to_image = evaluate_direction(sims_t2i, gt_t2i, options);
  for (const auto& [name, a] : report.image_to_text.averaged) {
    double b = report.text_to_image.averaged.at(name);
    report.bidirectional[name] = (a + b) / 2.0;
  }
  return report;
}

}  // namespace xmeval
