#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace credence {

// Classification and calibration metrics. Degenerate inputs (single class,
// zero variance) come back as absent values rather than zeros so downstream
// tables cannot silently average them.

// Mann-Whitney pair statistic; ties count one half. Needs both classes.
std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Area under precision-recall via step interpolation descending by score.
// Needs at least one positive.
std::optional<double> auprc(const std::vector<double>& scores, const std::vector<int>& labels);

struct EceBin {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  double mean_confidence = 0.0;
  double mean_accuracy = 0.0;
  nlohmann::json to_json() const;
};

struct EceResult {
  double ece = 0.0;
  std::vector<EceBin> bins;
};

// Equal-width bins on [0,1], right-inclusive; scores must lie in [0,1].
EceResult expected_calibration_error(const std::vector<double>& scores,
                                     const std::vector<int>& labels, int n_bins = 10);

double brier_score(const std::vector<double>& scores, const std::vector<int>& labels);

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

// Pearson on average ranks (ties averaged).
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> average_ranks(const std::vector<double>& x);

}  // namespace credence
