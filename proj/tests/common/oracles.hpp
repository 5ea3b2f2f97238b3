#pragma once

// Independent reference implementations shared by the unit and acceptance
// tests. None of them call into the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Full-table optimal string alignment distance over bytes (ASCII inputs).
inline std::size_t osa_distance(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
      }
    }
  }
  return d[n][m];
}

// Linear scan: smallest distance within max_edit, then highest frequency,
// then alphabetical. An exact match wins outright.
inline std::optional<std::string> naive_top1(
    const std::string& query, const std::vector<std::pair<std::string, std::uint64_t>>& words,
    std::size_t max_edit) {
  std::optional<std::string> best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  std::uint64_t best_f = 0;
  for (const auto& [word, freq] : words) {
    const std::size_t d = osa_distance(query, word);
    if (d > max_edit) continue;
    const bool better = !best || d < best_d || (d == best_d && freq > best_f) ||
                        (d == best_d && freq == best_f && word < *best);
    if (better) {
      best = word;
      best_d = d;
      best_f = freq;
    }
  }
  return best;
}

// Largest relative error between an analytic gradient and central
// differences of f. Relative to max(|a|, |n|, 1e-8) per coordinate.
template <typename Loss>
double max_gradient_error(Loss f, std::vector<double> x, std::span<const double> analytic,
                          double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

// P(strict majority of n independent voters is right), n odd.
inline double majority_correct(std::size_t n, double p) {
  double total = 0.0;
  for (std::size_t k = n / 2 + 1; k <= n; ++k) {
    double choose = 1.0;
    for (std::size_t i = 0; i < k; ++i) choose = choose * double(n - i) / double(i + 1);
    total += choose * std::pow(p, double(k)) * std::pow(1 - p, double(n - k));
  }
  return total;
}

}  // namespace oracle
