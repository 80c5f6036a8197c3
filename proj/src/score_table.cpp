#include "xmeval/score_table.hpp"

#include <fstream>
#include <set>

#include "xmeval/csv.hpp"
#include "xmeval/error.hpp"

namespace xmeval {

std::size_t ScoreTable::metric_index(const std::string& name) const {
  for (std::size_t j = 0; j < metrics.size(); ++j)
    if (metrics[j] == name) return j;
  throw std::invalid_argument("score table has no metric column '" + name + "'");
}

std::size_t ScoreTable::model_index(const std::string& name) const {
  for (std::size_t i = 0; i < models.size(); ++i)
    if (models[i] == name) return i;
  throw std::invalid_argument("score table has no model row '" + name + "'");
}

std::map<std::string, double> ScoreTable::column(const std::string& metric) const {
  std::size_t j = metric_index(metric);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < models.size(); ++i) out[models[i]] = at(i, j);
  return out;
}

std::vector<double> ScoreTable::column_values(std::size_t j) const {
  std::vector<double> out;
  out.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) out.push_back(at(i, j));
  return out;
}

ScoreTable load_score_table(const std::string& path) {
  auto rows = read_delimited_file(path, ',');
  if (rows.size() < 2)
    throw ParseError(path, 0, "need a header row and at least one model row");
  const auto& header = rows[0];
  if (header.size() < 2 || header[0] != "model")
    throw ParseError(path, 1, "header must be 'model,<metric>,...'");

  ScoreTable t;
  t.metrics.assign(header.begin() + 1, header.end());
  std::set<std::string> seen_metrics(t.metrics.begin(), t.metrics.end());
  if (seen_metrics.size() != t.metrics.size())
    throw ParseError(path, 1, "duplicate metric column");

  std::set<std::string> seen_models;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != t.metrics.size() + 1)
      throw ParseError(path, i + 1, "row width does not match header");
    if (row[0].empty()) throw ParseError(path, i + 1, "empty model name");
    if (!seen_models.insert(row[0]).second)
      throw ParseError(path, i + 1, "duplicate model row '" + row[0] + "'");
    t.models.push_back(row[0]);
    for (std::size_t j = 1; j < row.size(); ++j)
      t.values.push_back(
          parse_double_strict(row[j], path + ":" + std::to_string(i + 1)));
  }
  return t;
}

void write_score_table(const ScoreTable& table, const std::string& path,
                       int precision) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << "model";
  for (const auto& m : table.metrics) out << ',' << csv_escape(m);
  out << '\n';
  for (std::size_t i = 0; i < table.models.size(); ++i) {
    out << csv_escape(table.models[i]);
    for (std::size_t j = 0; j < table.metrics.size(); ++j)
      out << ',' << format_fixed(table.at(i, j), precision);
    out << '\n';
  }
}

}  // namespace xmeval
