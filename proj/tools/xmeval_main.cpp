// xmeval: evaluation toolkit for cross-modal retrieval benchmarks with
// multiple annotation sources. See README.md for file formats.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xmeval/annotation.hpp"
#include "xmeval/correlation.hpp"
#include "xmeval/csv.hpp"
#include "xmeval/error.hpp"
#include "xmeval/metrics.hpp"
#include "xmeval/mitl.hpp"
#include "xmeval/preference.hpp"
#include "xmeval/ranking.hpp"
#include "xmeval/score_table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xmeval;

namespace {

std::vector<std::string> split_list(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string item;
  for (char c : s) {
    if (c == delim) {
      out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  out.push_back(item);
  for (const auto& part : out)
    if (part.empty())
      throw std::invalid_argument("empty element in list '" + s + "'");
  return out;
}

std::set<ItemId> read_id_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::set<ItemId> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.insert(line);
  }
  return ids;
}

SimilarityMatrix load_similarity_auto(const std::string& path,
                                      Modality query_modality) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".tsv")
    return load_similarity_tsv(path, query_modality);
  return load_similarity_csv(path, query_modality);
}

// Writes to the named file, or stdout when the path is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ParseError(path, 0, "cannot open file for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

DatasetBundle load_filtered_bundle(const std::string& path,
                                   const std::vector<std::string>& caption_files,
                                   const std::vector<std::string>& image_files,
                                   FilterResult* stats = nullptr) {
  DatasetBundle bundle = load_bundle(path);
  std::set<ItemId> captions, images;
  for (const auto& f : caption_files) {
    auto ids = read_id_file(f);
    captions.insert(ids.begin(), ids.end());
  }
  for (const auto& f : image_files) {
    auto ids = read_id_file(f);
    images.insert(ids.begin(), ids.end());
  }
  FilterResult filtered = filter_invalid(bundle, captions, images);
  if (filtered.unknown_ids > 0)
    std::cerr << "warning: " << filtered.unknown_ids
              << " invalid-list id(s) never appear in the bundle\n";
  if (stats) *stats = filtered;
  return std::move(filtered.bundle);
}

std::vector<std::string> sources_or_all(const DatasetBundle& bundle,
                                        const std::string& sources_arg) {
  if (!sources_arg.empty()) return split_list(sources_arg, ',');
  std::vector<std::string> all;
  for (const auto& [tag, _] : bundle.source_counts()) all.push_back(tag);
  if (all.empty())
    throw std::invalid_argument("bundle has no records, so no sources to merge");
  return all;
}

// Per-annotator rankings from a directory of <annotator>.csv/.tsv matrices.
std::map<std::string, std::map<ItemId, RankedList>> load_annotator_rankings(
    const std::vector<std::string>& dirs) {
  std::map<std::string, std::map<ItemId, RankedList>> rankings;
  std::map<std::string, std::vector<ItemId>> galleries;
  for (const auto& dir : dirs) {
    if (!fs::is_directory(dir))
      throw std::invalid_argument("not a directory: '" + dir + "'");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      if (ext == ".csv" || ext == ".tsv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::string name = file.stem().string();
      SimilarityMatrix m = load_similarity_auto(file.string(), Modality::Image);
      auto ranked = rank_all(m);
      auto& slot = rankings[name];
      for (auto& [q, r] : ranked) {
        if (!slot.emplace(q, std::move(r)).second)
          throw std::invalid_argument("annotator '" + name +
                                      "' ranks query '" + q + "' twice");
      }
      auto& gal = galleries[name];
      gal.insert(gal.end(), m.gallery.begin(), m.gallery.end());
    }
  }
  if (rankings.empty())
    throw std::invalid_argument("no similarity files found");
  return rankings;
}

std::map<std::string, double> load_subset_column(const std::string& dir,
                                                 const std::string& key,
                                                 const std::string& metric) {
  const std::string path = dir + "/" + key + ".csv";
  if (!fs::exists(path))
    throw std::invalid_argument("no score table for subset '" + key +
                                "' (expected " + path + ")");
  ScoreTable t = load_score_table(path);
  std::string column = metric;
  if (column.empty()) {
    if (t.metrics.size() != 1)
      throw std::invalid_argument(path + " has " +
                                  std::to_string(t.metrics.size()) +
                                  " metric columns; pass --metric");
    column = t.metrics[0];
  }
  return t.column(column);
}

std::vector<QueryCandidatePair> read_pairs_csv(const std::string& path) {
  auto rows = read_delimited_file(path, ',');
  if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "query" ||
      rows[0][1] != "candidate")
    throw ParseError(path, 1, "header must be 'query,candidate'");
  std::vector<QueryCandidatePair> pairs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2)
      throw ParseError(path, i + 1, "expected two cells");
    if (rows[i][0].empty() || rows[i][1].empty())
      throw ParseError(path, i + 1, "empty id");
    pairs.emplace_back(rows[i][0], rows[i][1]);
  }
  return pairs;
}

// ---- subcommand bodies ----

struct EvaluateArgs {
  std::string sims_i2t, sims_t2i, bundle, sources, metrics = "recall@1,r_precision,map_at_r";
  std::string classes, out_dir;
  std::vector<std::string> invalid_captions, invalid_images;
  std::size_t zeta = 0, cap = 50;
  int precision = 4;
};

void write_direction_csv(const DirectionReport& report,
                         const std::vector<ItemId>& queries,
                         const std::string& path, int precision) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << "query";
  for (const auto& name : report.metric_names) out << ',' << csv_escape(name);
  out << '\n';
  std::vector<ItemId> sorted(queries);
  std::sort(sorted.begin(), sorted.end());
  for (const ItemId& q : sorted) {
    out << csv_escape(q);
    auto qit = report.per_query.find(q);
    for (const auto& name : report.metric_names) {
      out << ',';
      if (qit != report.per_query.end()) {
        auto mit = qit->second.find(name);
        if (mit != qit->second.end()) {
          out << format_fixed(mit->second, precision);
          continue;
        }
      }
      out << "NA";
    }
    out << '\n';
  }
}

int cmd_evaluate(const EvaluateArgs& args) {
  DatasetBundle bundle =
      load_filtered_bundle(args.bundle, args.invalid_captions, args.invalid_images);
  auto sources = sources_or_all(bundle, args.sources);

  EvaluateOptions options;
  for (const auto& spec : split_list(args.metrics, ','))
    options.metrics.push_back(parse_metric_spec(spec));
  options.pmrp_zeta = args.zeta;
  options.pmrp_cap = args.cap;
  std::map<ItemId, ClassVector> classes;
  bool needs_classes = false;
  for (const auto& spec : options.metrics)
    if (spec.kind == MetricSpec::Kind::Pmrp) needs_classes = true;
  if (needs_classes) {
    if (args.classes.empty())
      throw std::invalid_argument("pmrp requested but no --classes file given");
    classes = load_class_vectors(args.classes);
    options.classes = &classes;
  }

  SimilarityMatrix sims_i2t = load_similarity_auto(args.sims_i2t, Modality::Image);
  SimilarityMatrix sims_t2i = load_similarity_auto(args.sims_t2i, Modality::Text);
  GroundTruth gt_i2t = merge_positive_sources(bundle, sources, Modality::Image);
  GroundTruth gt_t2i = merge_positive_sources(bundle, sources, Modality::Text);

  EvaluationReport report = evaluate(sims_i2t, sims_t2i, gt_i2t, gt_t2i, options);

  fs::create_directories(args.out_dir);
  write_direction_csv(report.image_to_text, sims_i2t.queries,
                      args.out_dir + "/i2t.csv", args.precision);
  write_direction_csv(report.text_to_image, sims_t2i.queries,
                      args.out_dir + "/t2i.csv", args.precision);

  std::ofstream summary(args.out_dir + "/summary.csv");
  if (!summary)
    throw ParseError(args.out_dir + "/summary.csv", 0, "cannot open for writing");
  summary << "direction,metric,mean,n_used,n_degenerate,n_queries\n";
  for (const DirectionReport* dir : {&report.image_to_text, &report.text_to_image}) {
    std::string label = dir->direction == Modality::Image ? "i2t" : "t2i";
    for (const auto& name : dir->metric_names) {
      summary << label << ',' << csv_escape(name) << ','
              << format_fixed(dir->averaged.at(name), args.precision) << ','
              << dir->n_used.at(name) << ',' << dir->n_degenerate.at(name) << ','
              << dir->n_queries << '\n';
    }
  }
  for (const auto& name : report.image_to_text.metric_names) {
    summary << "bidirectional," << csv_escape(name) << ','
            << format_fixed(report.bidirectional.at(name), args.precision) << ','
            << report.image_to_text.n_used.at(name) +
                   report.text_to_image.n_used.at(name)
            << ','
            << report.image_to_text.n_degenerate.at(name) +
                   report.text_to_image.n_degenerate.at(name)
            << ','
            << report.image_to_text.n_queries + report.text_to_image.n_queries
            << '\n';
  }
  return 0;
}

int cmd_correlate(const std::string& table_path, const std::string& out_path,
                  int precision) {
  ScoreTable table = load_score_table(table_path);
  CorrelationMatrix m = correlation_matrix(table);
  Output out(out_path);
  write_correlation_csv(m, out.stream(), precision);
  return 0;
}

int cmd_bt_fit(const std::string& prefs_path, const std::string& out_path,
               double tol, std::size_t max_iter, int precision) {
  PreferenceMatrix prefs = load_preference_csv(prefs_path);
  BradleyTerryResult fit = fit_bradley_terry(prefs, tol, max_iter);
  if (fit.diagonal_ignored > 0)
    std::cerr << "warning: ignored " << fit.diagonal_ignored
              << " nonzero diagonal count(s); an option cannot beat itself\n";
  std::cerr << "converged after " << fit.iterations << " sweep(s)\n";
  Output out(out_path);
  out.stream() << "option,score,raw_mle\n";
  for (std::size_t i = 0; i < fit.labels.size(); ++i) {
    out.stream() << csv_escape(fit.labels[i]) << ','
                 << format_fixed(fit.scores[i], precision) << ','
                 << format_fixed(fit.raw_mle[i], precision + 2) << '\n';
  }
  return 0;
}

int cmd_bias(const std::string& dir, const std::string& theta_arg,
             const std::string& metric, const std::string& out_path,
             int precision) {
  auto theta = split_list(theta_arg, '+');
  auto scores_all = load_subset_column(dir, "ALL", metric);
  auto scores_theta = load_subset_column(dir, subset_key(theta), metric);
  BiasReport report = bias_quantity(scores_theta, scores_all, theta);
  Output out(out_path);
  out.stream() << "quantity,value\n"
               << "b_theta," << format_fixed(report.b_theta, precision) << '\n'
               << "self_bias," << format_fixed(report.self_bias, precision) << '\n'
               << "non_self_bias," << format_fixed(report.non_self_bias, precision)
               << '\n';
  return 0;
}

int cmd_bias_curve(const std::string& dir, std::size_t size,
                   const std::string& metric, const std::string& out_path,
                   int precision) {
  auto scores_all = load_subset_column(dir, "ALL", metric);
  std::vector<std::string> models;
  for (const auto& [name, _] : scores_all) models.push_back(name);
  if (size == 0 || size > models.size())
    throw std::invalid_argument("--size must be in [1, " +
                                std::to_string(models.size()) + "]");

  // Load every size-k subset table up front; bias_curve checks coverage.
  std::map<std::string, std::map<std::string, double>> by_subset;
  std::vector<std::size_t> pick(size);
  for (std::size_t i = 0; i < size; ++i) pick[i] = i;
  while (true) {
    std::vector<std::string> subset;
    for (std::size_t i : pick) subset.push_back(models[i]);
    std::string key = subset_key(subset);
    by_subset[key] = load_subset_column(dir, key, metric);
    std::size_t i = size;
    while (i > 0 && pick[i - 1] == models.size() - size + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
  }

  BiasCurvePoint point = bias_curve(by_subset, scores_all, size);
  Output out(out_path);
  out.stream() << "subset_size,n_subsets,avg_b,avg_self,avg_non_self\n"
               << point.subset_size << ',' << point.n_subsets << ','
               << format_fixed(point.avg_b, precision) << ','
               << format_fixed(point.avg_self, precision) << ','
               << format_fixed(point.avg_non_self, precision) << '\n';
  return 0;
}

int cmd_pool(const std::vector<std::string>& sims_dirs, std::size_t k,
             const std::string& out_path) {
  auto rankings = load_annotator_rankings(sims_dirs);
  CandidatePool pool = pool_candidates(rankings, k);

  Output out(out_path);
  out.stream() << "query,candidate\n";
  for (const auto& [q, c] : pool.pairs)
    out.stream() << csv_escape(q) << ',' << csv_escape(c) << '\n';

  std::cerr << "raw_count," << pool.raw_count << '\n'
            << "unique_pairs," << pool.pairs.size() << '\n'
            << "saturated_queries," << pool.saturated_queries << '\n';
  for (const auto& [name, count] : pool.per_annotator)
    std::cerr << "annotator." << name << ',' << count << '\n';
  return 0;
}

struct PackageArgs {
  std::string pool, golden_positives, bundle, sources, out;
  std::vector<std::string> sims_dirs;
  std::size_t exclude_top = 25;
  std::uint64_t seed = 0;
};

int cmd_package_hits(const PackageArgs& args) {
  CandidatePool pool;
  for (auto& pair : read_pairs_csv(args.pool)) pool.pairs.insert(std::move(pair));
  pool.raw_count = pool.pairs.size();

  auto goldens = read_pairs_csv(args.golden_positives);

  DatasetBundle bundle = load_filtered_bundle(args.bundle, {}, {});
  auto sources = sources_or_all(bundle, args.sources);
  std::set<QueryCandidatePair> known_positives;
  for (Modality m : {Modality::Image, Modality::Text}) {
    GroundTruth gt = merge_positive_sources(bundle, sources, m);
    for (const auto& [q, list] : gt.positives)
      for (const auto& p : list) known_positives.emplace(q, p.candidate);
  }

  auto rankings = load_annotator_rankings(args.sims_dirs);
  std::set<QueryCandidatePair> excluded;
  std::set<ItemId> queries, gallery;
  for (const auto& [name, per_query] : rankings) {
    for (const auto& [q, ranked] : per_query) {
      queries.insert(q);
      gallery.insert(ranked.candidates.begin(), ranked.candidates.end());
      for (const ItemId& c : topk(ranked, args.exclude_top))
        excluded.emplace(q, c);
    }
  }

  GoldenNegativeSource source;
  source.queries.assign(queries.begin(), queries.end());
  source.gallery.assign(gallery.begin(), gallery.end());
  source.known_positives = &known_positives;
  source.excluded = &excluded;

  HitPackage package = package_hits(pool, goldens, source, args.seed);

  json doc;
  doc["padding_count"] = package.padding_count;
  doc["hits"] = json::array();
  for (const Hit& hit : package.hits) {
    json entries = json::array();
    for (const HitEntry& e : hit.entries) {
      entries.push_back({{"query", e.query},
                         {"candidate", e.candidate},
                         {"role", to_string(e.role)}});
    }
    doc["hits"].push_back({{"entries", std::move(entries)}});
  }
  Output out(args.out);
  out.stream() << doc.dump(2) << '\n';
  std::cerr << "hits," << package.hits.size() << '\n'
            << "padding_count," << package.padding_count << '\n';
  return 0;
}

struct StatsArgs {
  std::string bundle, reference, direction, sources, out;
  std::vector<std::string> invalid_captions, invalid_images;
  int precision = 4;
};

int cmd_dataset_stats(const StatsArgs& args) {
  FilterResult filtered;
  load_filtered_bundle(args.bundle, args.invalid_captions, args.invalid_images,
                       &filtered);
  const DatasetBundle& bundle = filtered.bundle;

  Output out(args.out);
  std::ostream& os = out.stream();
  os << "key,value\n";
  os << "schema_version," << bundle.schema_version << '\n';
  os << "records," << bundle.records.size() << '\n';
  os << "records_removed," << filtered.removed_records << '\n';
  os << "invalid_ids_removed," << filtered.removed_ids << '\n';
  os << "invalid_ids_unknown," << filtered.unknown_ids << '\n';
  os << "image_queries," << bundle.image_queries.size() << '\n';
  os << "text_queries," << bundle.text_queries.size() << '\n';
  os << "invalid_captions," << bundle.invalid_captions.size() << '\n';
  os << "invalid_images," << bundle.invalid_images.size() << '\n';
  for (const auto& [tag, count] : bundle.source_counts())
    os << "source." << csv_escape(tag) << ',' << count << '\n';

  if (!args.reference.empty()) {
    if (args.direction.empty())
      throw std::invalid_argument("--reference needs --direction image|text");
    Modality direction = parse_modality(args.direction);
    DatasetBundle ref = load_filtered_bundle(args.reference, {}, {});

    auto cand_sources = sources_or_all(bundle, args.sources);
    GroundTruth candidate = merge_positive_sources(bundle, cand_sources, direction);
    auto ref_sources = sources_or_all(ref, "");
    GroundTruth reference = merge_positive_sources(ref, ref_sources, direction);

    // The verified universe is every pair the reference actually judged,
    // positively or not.
    std::map<ItemId, std::set<ItemId>> verified;
    for (const auto& r : ref.records)
      if (r.query_modality == direction) verified[r.query].insert(r.candidate);

    PrecisionRecall pr = dataset_precision_recall(candidate, reference, verified);
    os << "precision," << format_fixed(pr.precision, args.precision) << '\n';
    os << "recall," << format_fixed(pr.recall, args.precision) << '\n';
    os << "pr_queries_used," << pr.n_used << '\n';
    os << "pr_queries_excluded," << pr.n_excluded << '\n';
  }
  return 0;
}

int cmd_merge(const std::string& bundle_path, const std::string& sources_arg,
              const std::string& direction_arg,
              const std::vector<std::string>& invalid_captions,
              const std::vector<std::string>& invalid_images,
              const std::string& out_path) {
  DatasetBundle bundle =
      load_filtered_bundle(bundle_path, invalid_captions, invalid_images);
  Modality direction = parse_modality(direction_arg);
  auto sources = sources_or_all(bundle, sources_arg);
  GroundTruth gt = merge_positive_sources(bundle, sources, direction);

  json doc;
  doc["direction"] = to_string(direction);
  doc["n_queries"] = gt.positives.size();
  json positives = json::object();
  for (const auto& [query, list] : gt.positives) {
    json arr = json::array();
    for (const auto& p : list) {
      arr.push_back({{"candidate", p.candidate},
                     {"judgment", to_string(p.judgment)},
                     {"sources", p.sources}});
    }
    positives[query] = std::move(arr);
  }
  doc["positives"] = std::move(positives);
  Output out(out_path);
  out.stream() << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-modal retrieval benchmark evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "xmeval 1.0.0");

  // evaluate
  EvaluateArgs ev;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "rank galleries and score retrieval metrics");
  evaluate_cmd->add_option("--sims-i2t", ev.sims_i2t, "image-to-text similarity matrix")
      ->required();
  evaluate_cmd->add_option("--sims-t2i", ev.sims_t2i, "text-to-image similarity matrix")
      ->required();
  evaluate_cmd->add_option("--bundle", ev.bundle, "annotation bundle JSON")->required();
  evaluate_cmd->add_option("--sources", ev.sources,
                           "comma-separated source tags to merge (default: all)");
  evaluate_cmd->add_option("--metrics", ev.metrics,
                           "comma-separated metric specs (default: "
                           "recall@1,r_precision,map_at_r)");
  evaluate_cmd->add_option("--classes", ev.classes, "class vector CSV (for pmrp)");
  evaluate_cmd->add_option("--zeta", ev.zeta, "pmrp Hamming threshold (default 0)");
  evaluate_cmd->add_option("--cap", ev.cap, "pmrp R cap (default 50)");
  evaluate_cmd->add_option("--invalid-captions", ev.invalid_captions,
                           "file of caption ids to drop (repeatable)");
  evaluate_cmd->add_option("--invalid-images", ev.invalid_images,
                           "file of image ids to drop (repeatable)");
  evaluate_cmd->add_option("--out", ev.out_dir, "output directory")->required();
  evaluate_cmd->add_option("--precision", ev.precision, "decimal places (default 4)")
      ->check(CLI::Range(0, 17));

  // correlate
  std::string corr_table, corr_out;
  int corr_precision = 4;
  auto* correlate_cmd =
      app.add_subcommand("correlate", "Kendall tau-b matrix between metric columns");
  correlate_cmd->add_option("--table", corr_table, "score table CSV")->required();
  correlate_cmd->add_option("--out", corr_out, "output CSV (default stdout)");
  correlate_cmd->add_option("--precision", corr_precision, "decimal places")
      ->check(CLI::Range(0, 17));

  // bt-fit
  std::string bt_prefs, bt_out;
  double bt_tol = 1e-10;
  std::size_t bt_max_iter = 10000;
  int bt_precision = 4;
  auto* bt_cmd =
      app.add_subcommand("bt-fit", "fit Bradley-Terry strengths to preference counts");
  bt_cmd->add_option("--prefs", bt_prefs, "preference count CSV")->required();
  bt_cmd->add_option("--out", bt_out, "output CSV (default stdout)");
  bt_cmd->add_option("--tol", bt_tol, "relative convergence tolerance");
  bt_cmd->add_option("--max-iter", bt_max_iter, "sweep limit");
  bt_cmd->add_option("--precision", bt_precision, "decimal places")
      ->check(CLI::Range(0, 17));

  // bias
  std::string bias_dir, bias_theta, bias_metric, bias_out;
  int bias_precision = 4;
  auto* bias_cmd = app.add_subcommand(
      "bias", "score drift between one annotator subset and the full set");
  bias_cmd->add_option("--scores-dir", bias_dir,
                       "directory of per-subset score tables (plus ALL.csv)")
      ->required();
  bias_cmd->add_option("--theta", bias_theta, "subset, e.g. PVSE or PCME+PVSE")
      ->required();
  bias_cmd->add_option("--metric", bias_metric, "metric column (default: the only one)");
  bias_cmd->add_option("--out", bias_out, "output CSV (default stdout)");
  bias_cmd->add_option("--precision", bias_precision, "decimal places")
      ->check(CLI::Range(0, 17));

  // bias-curve
  std::string curve_dir, curve_metric, curve_out;
  std::size_t curve_size = 1;
  int curve_precision = 4;
  auto* curve_cmd = app.add_subcommand(
      "bias-curve", "average bias over every annotator subset of a given size");
  curve_cmd->add_option("--scores-dir", curve_dir, "directory of score tables")
      ->required();
  curve_cmd->add_option("--size", curve_size, "subset size")->required();
  curve_cmd->add_option("--metric", curve_metric, "metric column");
  curve_cmd->add_option("--out", curve_out, "output CSV (default stdout)");
  curve_cmd->add_option("--precision", curve_precision, "decimal places")
      ->check(CLI::Range(0, 17));

  // pool
  std::vector<std::string> pool_dirs;
  std::size_t pool_k = 5;
  std::string pool_out;
  auto* pool_cmd = app.add_subcommand(
      "pool", "union of per-annotator top-k retrievals (machine half of MITL)");
  pool_cmd->add_option("--sims-dir", pool_dirs,
                       "directory of <annotator>.csv matrices (repeatable)")
      ->required();
  pool_cmd->add_option("-k,--top-k", pool_k, "retrievals per query (default 5)");
  pool_cmd->add_option("--out", pool_out, "pairs CSV (default stdout)");

  // package-hits
  PackageArgs pk;
  auto* package_cmd = app.add_subcommand(
      "package-hits", "partition a candidate pool into 20-pair annotation HITs");
  package_cmd->add_option("--pool", pk.pool, "candidate pairs CSV")->required();
  package_cmd->add_option("--golden-positives", pk.golden_positives,
                          "known-positive pairs CSV")
      ->required();
  package_cmd->add_option("--bundle", pk.bundle, "annotation bundle JSON")->required();
  package_cmd->add_option("--sources", pk.sources, "sources for known positives");
  package_cmd->add_option("--sims-dir", pk.sims_dirs,
                          "similarity directories for the exclusion list")
      ->required();
  package_cmd->add_option("--exclude-top", pk.exclude_top,
                          "per-annotator ranks barred from negatives (default 25)");
  package_cmd->add_option("--seed", pk.seed, "RNG seed for golden sampling")
      ->required();
  package_cmd->add_option("--out", pk.out, "HITs JSON (default stdout)");

  // dataset-stats
  StatsArgs st;
  auto* stats_cmd =
      app.add_subcommand("dataset-stats", "bundle statistics and, with a "
                                          "reference, annotation precision/recall");
  stats_cmd->add_option("--bundle", st.bundle, "annotation bundle JSON")->required();
  stats_cmd->add_option("--invalid-captions", st.invalid_captions,
                        "file of caption ids to drop (repeatable)");
  stats_cmd->add_option("--invalid-images", st.invalid_images,
                        "file of image ids to drop (repeatable)");
  stats_cmd->add_option("--reference", st.reference, "human-verified reference bundle");
  stats_cmd->add_option("--direction", st.direction, "query modality: image|text");
  stats_cmd->add_option("--sources", st.sources, "sources for the candidate bundle");
  stats_cmd->add_option("--out", st.out, "output CSV (default stdout)");
  stats_cmd->add_option("--precision", st.precision, "decimal places")
      ->check(CLI::Range(0, 17));

  // merge
  std::string merge_bundle, merge_sources, merge_direction, merge_out;
  std::vector<std::string> merge_invalid_captions, merge_invalid_images;
  auto* merge_cmd = app.add_subcommand(
      "merge", "merge positive annotations across sources into ground truth");
  merge_cmd->add_option("--bundle", merge_bundle, "annotation bundle JSON")->required();
  merge_cmd->add_option("--sources", merge_sources,
                        "comma-separated source tags (default: all)");
  merge_cmd->add_option("--direction", merge_direction, "query modality: image|text")
      ->required();
  merge_cmd->add_option("--invalid-captions", merge_invalid_captions,
                        "file of caption ids to drop (repeatable)");
  merge_cmd->add_option("--invalid-images", merge_invalid_images,
                        "file of image ids to drop (repeatable)");
  merge_cmd->add_option("--out", merge_out, "ground truth JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*evaluate_cmd) return cmd_evaluate(ev);
    if (*correlate_cmd) return cmd_correlate(corr_table, corr_out, corr_precision);
    if (*bt_cmd) return cmd_bt_fit(bt_prefs, bt_out, bt_tol, bt_max_iter, bt_precision);
    if (*bias_cmd)
      return cmd_bias(bias_dir, bias_theta, bias_metric, bias_out, bias_precision);
    if (*curve_cmd)
      return cmd_bias_curve(curve_dir, curve_size, curve_metric, curve_out,
                            curve_precision);
    if (*pool_cmd) return cmd_pool(pool_dirs, pool_k, pool_out);
    if (*package_cmd) return cmd_package_hits(pk);
    if (*stats_cmd) return cmd_dataset_stats(st);
    if (*merge_cmd)
      return cmd_merge(merge_bundle, merge_sources, merge_direction,
                       merge_invalid_captions, merge_invalid_images, merge_out);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
