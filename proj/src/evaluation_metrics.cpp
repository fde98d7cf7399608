#include "credence/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "credence/errors.hpp"

namespace credence {

using nlohmann::json;

namespace {

void check_paired(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw Error("metrics: scores/labels size mismatch");
  for (int l : labels)
    if (l != 0 && l != 1) throw Error("metrics: labels must be binary");
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_paired(scores, labels);
  long n_pos = std::count(labels.begin(), labels.end(), 1);
  long n_neg = static_cast<long>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  auto ranks = average_ranks(scores);
  double rank_sum_pos = 0.0;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) rank_sum_pos += ranks[i];
  double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::optional<double> auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_paired(scores, labels);
  long n_pos = std::count(labels.begin(), labels.end(), 1);
  if (n_pos == 0) return std::nullopt;

  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  double prev_recall = 0.0;
  long tp = 0, fp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    for (size_t k = i; k <= j; ++k) {
      if (labels[idx[k]] == 1)
        ++tp;
      else
        ++fp;
    }
    double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j + 1;
  }
  return ap;
}

json EceBin::to_json() const {
  return json{{"lo", lo},
              {"hi", hi},
              {"count", count},
              {"mean_confidence", mean_confidence},
              {"mean_accuracy", mean_accuracy}};
}

EceResult expected_calibration_error(const std::vector<double>& scores,
                                     const std::vector<int>& labels, int n_bins) {
  check_paired(scores, labels);
  if (n_bins < 1) throw Error("ece: n_bins must be >= 1");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0)) throw Error("ece: scores must lie in [0,1]");

  EceResult result;
  result.bins.resize(static_cast<size_t>(n_bins));
  std::vector<double> conf_sum(static_cast<size_t>(n_bins), 0.0);
  std::vector<double> acc_sum(static_cast<size_t>(n_bins), 0.0);
  for (int b = 0; b < n_bins; ++b) {
    result.bins[static_cast<size_t>(b)].lo = static_cast<double>(b) / n_bins;
    result.bins[static_cast<size_t>(b)].hi = static_cast<double>(b + 1) / n_bins;
  }

  for (size_t i = 0; i < scores.size(); ++i) {
    // Right-inclusive bins: (lo, hi], with 0.0 falling into the first bin.
    int b = static_cast<int>(std::ceil(scores[i] * n_bins - 1e-9)) - 1;
    b = std::clamp(b, 0, n_bins - 1);
    auto& bin = result.bins[static_cast<size_t>(b)];
    ++bin.count;
    conf_sum[static_cast<size_t>(b)] += scores[i];
    acc_sum[static_cast<size_t>(b)] += labels[i];
  }

  const double n = static_cast<double>(scores.size());
  for (int b = 0; b < n_bins; ++b) {
    auto& bin = result.bins[static_cast<size_t>(b)];
    if (bin.count == 0) continue;
    bin.mean_confidence = conf_sum[static_cast<size_t>(b)] / bin.count;
    bin.mean_accuracy = acc_sum[static_cast<size_t>(b)] / bin.count;
    result.ece += bin.count / n * std::fabs(bin.mean_accuracy - bin.mean_confidence);
  }
  return result;
}

double brier_score(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_paired(scores, labels);
  if (scores.empty()) throw Error("brier: empty input");
  double sum = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    double d = scores[i] - labels[i];
    sum += d * d;
  }
  return sum / static_cast<double>(scores.size());
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("pearson: size mismatch");
  const size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("spearman: size mismatch");
  return pearson(average_ranks(x), average_ranks(y));
}

}  // namespace credence
