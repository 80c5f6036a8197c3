#include "xmeval/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xmeval/csv.hpp"
#include "xmeval/error.hpp"
#include "xmeval/numeric.hpp"

namespace xmeval {

namespace {

using ull = unsigned long long;

ull choose2(ull t) { return t * (t - 1) / 2; }

// Strict inversions (a[i] > a[j], i < j) via bottom-up merge sort.
ull count_inversions(std::vector<double>& a) {
  std::vector<double> buf(a.size());
  ull inv = 0;
  for (std::size_t width = 1; width < a.size(); width *= 2) {
    for (std::size_t lo = 0; lo + width < a.size(); lo += 2 * width) {
      std::size_t mid = lo + width;
      std::size_t hi = std::min(lo + 2 * width, a.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[j] < a[i]) {
          inv += mid - i;
          buf[k++] = a[j++];
        } else {
          buf[k++] = a[i++];
        }
      }
      while (i < mid) buf[k++] = a[i++];
      while (j < hi) buf[k++] = a[j++];
      std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
    }
  }
  return inv;
}

}  // namespace

std::optional<double> kendall_tau_b(std::span<const double> x,
                                    std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  if (n < 2)
    throw std::invalid_argument("kendall_tau_b: need at least two observations");
  for (std::size_t i = 0; i < n; ++i)
    if (std::isnan(x[i]) || std::isnan(y[i]))
      throw std::invalid_argument("kendall_tau_b: NaN input");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  // Tie masses. n1: pairs tied in x, n2: in y, n3: in both.
  ull n0 = choose2(n), n1 = 0, n2 = 0, n3 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    n1 += choose2(j - i);
    for (std::size_t a = i; a < j;) {
      std::size_t b = a;
      while (b < j && y[idx[b]] == y[idx[a]]) ++b;
      n3 += choose2(b - a);
      a = b;
    }
    i = j;
  }
  {
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && ys[j] == ys[i]) ++j;
      n2 += choose2(j - i);
      i = j;
    }
  }

  ull den_x = n0 - n1;  // pairs not tied in x == P + Q + Ty
  ull den_y = n0 - n2;  // pairs not tied in y == P + Q + Tx
  if (den_x == 0 || den_y == 0) return std::nullopt;

  // With rows sorted by (x asc, y asc), strict y-inversions are exactly the
  // discordant pairs: x-tied runs are y-sorted and contribute none.
  std::vector<double> seq(n);
  for (std::size_t i = 0; i < n; ++i) seq[i] = y[idx[i]];
  ull q = count_inversions(seq);

  long long numer = static_cast<long long>(n0) - static_cast<long long>(n1) -
                    static_cast<long long>(n2) + static_cast<long long>(n3) -
                    2 * static_cast<long long>(q);
  return static_cast<double>(numer) /
         std::sqrt(static_cast<double>(den_x) * static_cast<double>(den_y));
}

CorrelationMatrix correlation_matrix(const ScoreTable& table) {
  if (table.models.size() < 2)
    throw std::invalid_argument(
        "correlation_matrix: need at least two model rows");
  const std::size_t k = table.metrics.size();
  if (k == 0)
    throw std::invalid_argument("correlation_matrix: table has no metrics");

  std::vector<std::vector<double>> cols(k);
  for (std::size_t j = 0; j < k; ++j) cols[j] = table.column_values(j);

  CorrelationMatrix m;
  m.labels = table.metrics;
  m.values.assign(k * k, std::nullopt);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      auto tau = kendall_tau_b(cols[i], cols[j]);
      m.values[i * k + j] = tau;
      m.values[j * k + i] = tau;
    }
  }
  return m;
}

void write_correlation_csv(const CorrelationMatrix& m, std::ostream& out,
                           int precision) {
  out << "metric";
  for (const auto& l : m.labels) out << ',' << csv_escape(l);
  out << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << csv_escape(m.labels[i]);
    for (std::size_t j = 0; j < m.labels.size(); ++j) {
      auto v = m.at(i, j);
      out << ',' << (v ? format_fixed(*v, precision) : std::string("NA"));
    }
    out << '\n';
  }
}

double cross_model_rank(const std::map<ItemId, RankedList>& a,
                        const std::map<ItemId, RankedList>& b) {
  if (a.empty())
    throw std::invalid_argument("cross_model_rank: no queries");
  if (a.size() != b.size())
    throw std::invalid_argument("cross_model_rank: query sets differ in size");

  CompensatedSum sum;
  auto bit = b.begin();
  for (auto ait = a.begin(); ait != a.end(); ++ait, ++bit) {
    if (ait->first != bit->first)
      throw std::invalid_argument("cross_model_rank: query sets differ at '" +
                                  ait->first + "'");
    const RankedList& ra = ait->second;
    const RankedList& rb = bit->second;
    if (ra.candidates.empty())
      throw std::invalid_argument("cross_model_rank: empty ranking for query '" +
                                  ait->first + "'");
    const ItemId& top = ra.candidates.front();
    auto pos = std::find(rb.candidates.begin(), rb.candidates.end(), top);
    if (pos == rb.candidates.end())
      throw std::invalid_argument("cross_model_rank: '" + top +
                                  "' missing from the other ranking of query '" +
                                  ait->first + "'");
    sum.add(static_cast<double>(pos - rb.candidates.begin()) + 1.0);
  }
  return compensated_mean(sum, a.size());
}

}  // namespace xmeval
