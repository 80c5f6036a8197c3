#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace xmeval {

// Pairwise preference counts: wins[i][j] = times option i was chosen over
// option j. The diagonal carries no information (an option cannot beat
// itself); nonzero diagonal cells are ignored, with the count reported.
struct PreferenceMatrix {
  std::vector<std::string> labels;
  std::vector<double> wins;  // row-major, labels.size() squared

  double at(std::size_t i, std::size_t j) const {
    return wins[i * labels.size() + j];
  }
};

// CSV: header "option,<label>,...", then one row per option with nonnegative
// integer counts. Row order must repeat the header's label order.
PreferenceMatrix load_preference_csv(const std::string& path);

struct BradleyTerryResult {
  std::vector<std::string> labels;
  std::vector<double> scores;    // normalized to sum to 100
  std::vector<double> raw_mle;   // the strengths themselves, summing to 1
  std::size_t iterations = 0;
  std::vector<double> sweep_log_likelihood;  // one entry per completed sweep
  std::size_t diagonal_ignored = 0;          // nonzero diagonal cells dropped
};

// Maximum-likelihood Bradley-Terry strengths via minorization-maximization:
//   p_i <- W_i / sum_{j != i} (n_ij + n_ji) / (p_i + p_j)
// renormalized each sweep, stopping when the largest relative change drops
// below tol. The win digraph (edge i -> j when n_ij > 0) must be strongly
// connected or the MLE runs to the boundary; violations are reported as an
// error naming an unreachable group. Non-convergence within max_iter is an
// error, not a silent result.
BradleyTerryResult fit_bradley_terry(const PreferenceMatrix& prefs,
                                     double tol = 1e-10,
                                     std::size_t max_iter = 10000);

// Log-likelihood of strengths p under the counts (diagonal excluded).
double bradley_terry_log_likelihood(const PreferenceMatrix& prefs,
                                    const std::vector<double>& p);

}  // namespace xmeval
