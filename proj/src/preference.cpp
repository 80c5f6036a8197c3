#include "xmeval/preference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xmeval/csv.hpp"
#include "xmeval/error.hpp"
#include "xmeval/numeric.hpp"

namespace xmeval {

PreferenceMatrix load_preference_csv(const std::string& path) {
  auto rows = read_delimited_file(path, ',');
  if (rows.size() < 3)
    throw ParseError(path, 0, "need a header and at least two option rows");
  const auto& header = rows[0];
  if (header.size() < 3 || header[0] != "option")
    throw ParseError(path, 1, "header must be 'option,<label>,...'");

  PreferenceMatrix m;
  m.labels.assign(header.begin() + 1, header.end());
  const std::size_t n = m.labels.size();
  if (std::set<std::string>(m.labels.begin(), m.labels.end()).size() != n)
    throw ParseError(path, 1, "duplicate option label");
  if (rows.size() != n + 1)
    throw ParseError(path, 0, "expected one row per header label");

  m.wins.reserve(n * n);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != n + 1)
      throw ParseError(path, i + 1, "row width does not match header");
    if (row[0] != m.labels[i - 1])
      throw ParseError(path, i + 1, "row label '" + row[0] +
                                        "' does not follow header order");
    for (std::size_t j = 1; j < row.size(); ++j) {
      const std::string& cell = row[j];
      if (cell.empty() || cell.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(path, i + 1,
                         "counts must be nonnegative integers, got '" + cell + "'");
      m.wins.push_back(static_cast<double>(std::stoull(cell)));
    }
  }
  return m;
}

double bradley_terry_log_likelihood(const PreferenceMatrix& prefs,
                                    const std::vector<double>& p) {
  const std::size_t n = prefs.labels.size();
  CompensatedSum ll;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double w = prefs.at(i, j);
      if (w > 0.0) ll.add(w * (std::log(p[i]) - std::log(p[i] + p[j])));
    }
  }
  return ll.value();
}

namespace {

// Requires every option to be reachable from every other through strictly
// positive win counts; otherwise some strength has no finite maximizer.
void check_strong_connectivity(const PreferenceMatrix& prefs) {
  const std::size_t n = prefs.labels.size();
  auto reach = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (seen[v] || v == u) continue;
        double w = forward ? prefs.at(u, v) : prefs.at(v, u);
        if (w > 0.0) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    return seen;
  };

  for (bool forward : {true, false}) {
    auto seen = reach(forward);
    std::string missing;
    for (std::size_t v = 0; v < n; ++v) {
      if (!seen[v]) missing += (missing.empty() ? "" : ", ") + prefs.labels[v];
    }
    if (!missing.empty()) {
      throw NumericError(
          "fit_bradley_terry: win graph is not strongly connected; no "
          "comparison path " +
          std::string(forward ? "to" : "from") + " {" + missing +
          "} -- strengths there are not identifiable");
    }
  }
}

}  // namespace

BradleyTerryResult fit_bradley_terry(const PreferenceMatrix& prefs, double tol,
                                     std::size_t max_iter) {
  const std::size_t n = prefs.labels.size();
  if (n < 2)
    throw std::invalid_argument("fit_bradley_terry: need at least two options");
  if (prefs.wins.size() != n * n)
    throw std::invalid_argument("fit_bradley_terry: malformed count matrix");
  for (double w : prefs.wins)
    if (w < 0.0 || std::isnan(w))
      throw std::invalid_argument("fit_bradley_terry: counts must be >= 0");
  if (!(tol > 0.0))
    throw std::invalid_argument("fit_bradley_terry: tol must be positive");

  BradleyTerryResult result;
  result.labels = prefs.labels;
  for (std::size_t i = 0; i < n; ++i)
    if (prefs.at(i, i) > 0.0) ++result.diagonal_ignored;

  check_strong_connectivity(prefs);

  std::vector<double> wins_total(n, 0.0);  // W_i, diagonal excluded
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) wins_total[i] += prefs.at(i, j);

  std::vector<double> p(n, 1.0 / static_cast<double>(n)), next(n);
  bool converged = false;
  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double pairs = prefs.at(i, j) + prefs.at(j, i);
        if (pairs > 0.0) denom += pairs / (p[i] + p[j]);
      }
      next[i] = wins_total[i] / denom;
    }
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;

    double max_rel = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      max_rel = std::max(max_rel, std::abs(next[i] - p[i]) / p[i]);
    p = next;

    result.iterations = iter;
    result.sweep_log_likelihood.push_back(bradley_terry_log_likelihood(prefs, p));
    if (max_rel < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericError("fit_bradley_terry: no convergence after " +
                       std::to_string(max_iter) + " sweeps");

  result.raw_mle = p;
  result.scores.reserve(n);
  for (double v : p) result.scores.push_back(100.0 * v);
  return result;
}

}  // namespace xmeval
