#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace xmeval {

// Models x metrics score table, the exchange format between the evaluation
// side and the correlation/bias side. CSV: header "model,<metric>,...", one
// row per model.
struct ScoreTable {
  std::vector<std::string> models;
  std::vector<std::string> metrics;
  std::vector<double> values;  // row-major, models.size() x metrics.size()

  double at(std::size_t model, std::size_t metric) const {
    return values[model * metrics.size() + metric];
  }
  std::size_t metric_index(const std::string& name) const;
  std::size_t model_index(const std::string& name) const;

  // One metric's values keyed by model name.
  std::map<std::string, double> column(const std::string& metric) const;
  // The column of metric index j in model-row order.
  std::vector<double> column_values(std::size_t j) const;
};

ScoreTable load_score_table(const std::string& path);
void write_score_table(const ScoreTable& table, const std::string& path,
                       int precision);

}  // namespace xmeval
