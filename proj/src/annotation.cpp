#include "xmeval/annotation.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "xmeval/error.hpp"
#include "xmeval/numeric.hpp"

namespace xmeval {

using nlohmann::json;

Modality opposite(Modality m) {
  return m == Modality::Image ? Modality::Text : Modality::Image;
}

std::string to_string(Modality m) {
  return m == Modality::Image ? "image" : "text";
}

Modality parse_modality(const std::string& s) {
  if (s == "image") return Modality::Image;
  if (s == "text") return Modality::Text;
  throw std::invalid_argument("unknown modality: '" + s + "'");
}

bool is_positive(Judgment j) {
  return j == Judgment::Yes || j == Judgment::WeakYes;
}

double credit(Judgment j) {
  switch (j) {
    case Judgment::Yes: return 1.0;
    case Judgment::WeakYes: return 0.5;
    case Judgment::WeakNo:
    case Judgment::No: return 0.0;
  }
  return 0.0;
}

Judgment stronger(Judgment a, Judgment b) {
  // enum order is already strongest-first
  return static_cast<int>(a) <= static_cast<int>(b) ? a : b;
}

std::string to_string(Judgment j) {
  switch (j) {
    case Judgment::Yes: return "yes";
    case Judgment::WeakYes: return "weak_yes";
    case Judgment::WeakNo: return "weak_no";
    case Judgment::No: return "no";
  }
  return "no";
}

Judgment parse_judgment(const std::string& s) {
  if (s == "yes") return Judgment::Yes;
  if (s == "weak_yes") return Judgment::WeakYes;
  if (s == "weak_no") return Judgment::WeakNo;
  if (s == "no") return Judgment::No;
  throw std::invalid_argument("unknown judgment: '" + s + "'");
}

SourceKind classify_source(const std::string& tag) {
  if (tag == kSourceOriginal) return SourceKind::Original;
  if (tag == kSourceHumanVerified) return SourceKind::HumanVerified;
  return SourceKind::Auxiliary;
}

std::map<std::string, std::size_t> DatasetBundle::source_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.source];
  return counts;
}

namespace {

// Tracks which modality each id has been seen with; a second, different
// assignment is a schema violation.
class ModalityMap {
 public:
  void assign(const ItemId& id, Modality m, const std::string& where) {
    auto [it, inserted] = seen_.emplace(id, m);
    if (!inserted && it->second != m) {
      throw ParseError(where + ": id '" + id + "' used as both " +
                       to_string(it->second) + " and " + to_string(m));
    }
  }

 private:
  std::map<ItemId, Modality> seen_;
};

const json& require_field(const json& obj, const char* key,
                          const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& where) {
  const json& v = require_field(obj, key, where);
  if (!v.is_string() || v.get<std::string>().empty()) {
    throw ParseError(where + ": field '" + key + "' must be a non-empty string");
  }
  return v.get<std::string>();
}

}  // namespace

DatasetBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(path, 0, "top level must be an object");

  DatasetBundle bundle;
  const json& ver = require_field(doc, "schema_version", path);
  if (!ver.is_number_integer() || ver.get<int>() != 1) {
    throw ParseError(path, 0, "unsupported schema_version (expected 1)");
  }
  bundle.schema_version = 1;

  ModalityMap modalities;

  const json& universe = require_field(doc, "query_universe", path);
  for (Modality m : {Modality::Image, Modality::Text}) {
    const json& ids = require_field(universe, to_string(m).c_str(),
                                    path + ": query_universe");
    if (!ids.is_array())
      throw ParseError(path, 0, "query_universe." + to_string(m) + " must be an array");
    for (const json& id : ids) {
      if (!id.is_string() || id.get<std::string>().empty())
        throw ParseError(path, 0, "query_universe ids must be non-empty strings");
      ItemId item = id.get<std::string>();
      modalities.assign(item, m, path + ": query_universe");
      if (!bundle.universe(m).insert(item).second)
        throw ParseError(path, 0, "duplicate id in query_universe: '" + item + "'");
    }
  }

  for (const char* key : {"invalid_captions", "invalid_images"}) {
    auto it = doc.find(key);
    if (it == doc.end()) continue;
    if (!it->is_array())
      throw ParseError(path, 0, std::string(key) + " must be an array");
    auto& target = std::string(key) == "invalid_captions" ? bundle.invalid_captions
                                                          : bundle.invalid_images;
    for (const json& id : *it) {
      if (!id.is_string())
        throw ParseError(path, 0, std::string(key) + " ids must be strings");
      target.insert(id.get<std::string>());
    }
  }

  const json& records = require_field(doc, "records", path);
  if (!records.is_array()) throw ParseError(path, 0, "records must be an array");

  std::set<std::tuple<ItemId, ItemId, std::string>> keys;
  bundle.records.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string where = path + ": records[" + std::to_string(i) + "]";
    const json& rec = records[i];
    if (!rec.is_object()) throw ParseError(where + ": must be an object");

    AnnotationRecord r;
    r.query = require_string(rec, "query", where);
    r.candidate = require_string(rec, "candidate", where);
    r.source = require_string(rec, "source", where);
    try {
      r.query_modality = parse_modality(require_string(rec, "query_modality", where));
      r.judgment = parse_judgment(require_string(rec, "judgment", where));
    } catch (const std::invalid_argument& e) {
      throw ParseError(where + ": " + e.what());
    }

    modalities.assign(r.query, r.query_modality, where);
    modalities.assign(r.candidate, opposite(r.query_modality), where);

    if (!bundle.universe(r.query_modality).count(r.query)) {
      throw ParseError(where + ": query '" + r.query +
                       "' not listed in the " + to_string(r.query_modality) +
                       " query universe");
    }
    if (!keys.emplace(r.query, r.candidate, r.source).second) {
      throw ParseError(where + ": duplicate (query, candidate, source) triple");
    }
    bundle.records.push_back(std::move(r));
  }
  return bundle;
}

FilterResult filter_invalid(const DatasetBundle& bundle,
                            const std::set<ItemId>& extra_captions,
                            const std::set<ItemId>& extra_images) {
  std::set<ItemId> captions = bundle.invalid_captions;
  captions.insert(extra_captions.begin(), extra_captions.end());
  std::set<ItemId> images = bundle.invalid_images;
  images.insert(extra_images.begin(), extra_images.end());

  // Which ids does the bundle actually mention, per modality?
  std::set<ItemId> present_text, present_image;
  for (const auto& r : bundle.records) {
    auto& qside = r.query_modality == Modality::Text ? present_text : present_image;
    auto& cside = r.query_modality == Modality::Text ? present_image : present_text;
    qside.insert(r.query);
    cside.insert(r.candidate);
  }
  present_image.insert(bundle.image_queries.begin(), bundle.image_queries.end());
  present_text.insert(bundle.text_queries.begin(), bundle.text_queries.end());

  FilterResult out;
  for (const ItemId& id : captions) {
    if (present_text.count(id)) ++out.removed_ids;
    else ++out.unknown_ids;
  }
  for (const ItemId& id : images) {
    if (present_image.count(id)) ++out.removed_ids;
    else ++out.unknown_ids;
  }

  auto is_invalid = [&](const ItemId& id, Modality m) {
    return m == Modality::Text ? captions.count(id) > 0 : images.count(id) > 0;
  };

  out.bundle.schema_version = bundle.schema_version;
  out.bundle.invalid_captions = captions;
  out.bundle.invalid_images = images;
  for (const auto& r : bundle.records) {
    if (is_invalid(r.query, r.query_modality) ||
        is_invalid(r.candidate, opposite(r.query_modality))) {
      ++out.removed_records;
    } else {
      out.bundle.records.push_back(r);
    }
  }
  for (Modality m : {Modality::Image, Modality::Text}) {
    for (const ItemId& q : bundle.universe(m)) {
      if (!is_invalid(q, m)) out.bundle.universe(m).insert(q);
    }
  }
  return out;
}

GroundTruth merge_positive_sources(const DatasetBundle& bundle,
                                   const std::vector<std::string>& sources,
                                   Modality direction) {
  if (sources.empty())
    throw std::invalid_argument("merge_positive_sources: no sources selected");

  std::set<std::string> known;
  for (const auto& r : bundle.records) known.insert(r.source);
  std::set<std::string> selected;
  for (const auto& s : sources) {
    if (!known.count(s))
      throw std::invalid_argument("merge_positive_sources: unknown source tag '" +
                                  s + "'");
    selected.insert(s);
  }

  // candidate -> (strongest judgment, contributing source set)
  std::map<ItemId, std::map<ItemId, std::pair<Judgment, std::set<std::string>>>> acc;
  for (const auto& r : bundle.records) {
    if (r.query_modality != direction) continue;
    if (!selected.count(r.source)) continue;
    if (!is_positive(r.judgment)) continue;
    auto [it, inserted] =
        acc[r.query].emplace(r.candidate, std::make_pair(r.judgment,
                                                         std::set<std::string>{}));
    if (!inserted) it->second.first = stronger(it->second.first, r.judgment);
    it->second.second.insert(r.source);
  }

  GroundTruth gt;
  gt.direction = direction;
  for (auto& [query, cands] : acc) {
    std::vector<PositiveAnnotation> list;
    list.reserve(cands.size());
    for (auto& [cand, info] : cands) {
      list.push_back({cand, info.first,
                      std::vector<std::string>(info.second.begin(),
                                               info.second.end())});
    }
    gt.positives.emplace(query, std::move(list));
  }
  return gt;
}

PrecisionRecall dataset_precision_recall(
    const GroundTruth& candidate, const GroundTruth& reference,
    const std::map<ItemId, std::set<ItemId>>& verified_universe) {
  if (candidate.direction != reference.direction)
    throw std::invalid_argument(
        "dataset_precision_recall: direction mismatch between candidate and "
        "reference ground truth");

  CompensatedSum prec_sum, rec_sum;
  PrecisionRecall out;
  for (const auto& [query, ref_list] : reference.positives) {
    std::set<ItemId> t;
    for (const auto& p : ref_list) t.insert(p.candidate);
    if (t.empty()) {
      ++out.n_excluded;
      continue;
    }

    std::set<ItemId> r_restricted;
    auto uit = verified_universe.find(query);
    auto cit = candidate.positives.find(query);
    if (uit != verified_universe.end() && cit != candidate.positives.end()) {
      for (const auto& p : cit->second) {
        if (uit->second.count(p.candidate)) r_restricted.insert(p.candidate);
      }
    }
    if (r_restricted.empty()) {
      ++out.n_excluded;
      continue;
    }

    std::size_t hit = 0;
    for (const ItemId& c : r_restricted)
      if (t.count(c)) ++hit;
    std::size_t missed = 0;  // |t \ r'|
    for (const ItemId& c : t)
      if (!r_restricted.count(c)) ++missed;

    prec_sum.add(static_cast<double>(hit) / static_cast<double>(r_restricted.size()));
    rec_sum.add(1.0 - static_cast<double>(missed) / static_cast<double>(t.size()));
    ++out.n_used;
  }

  if (out.n_used > 0) {
    out.precision = compensated_mean(prec_sum, out.n_used);
    out.recall = compensated_mean(rec_sum, out.n_used);
  }
  return out;
}

}  // namespace xmeval
