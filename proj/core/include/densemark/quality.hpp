#pragma once

#include <densemark/patch.hpp>

#include <vector>

namespace densemark {

/// Directional-variance ratio of a normal-aligned patch.
///
/// Reduces each pixel column to its sum and each row to its sum, then takes
/// the ratio of the two standard deviations (column-sum spread over row-sum
/// spread). A clean vertical boundary makes the column sums bimodal while
/// the row sums stay flat, so V >> 1; a horizontal boundary gives V << 1;
/// featureless or corner patches sit near 1.
///
/// Both deviations are stabilized with +eps, so a constant patch scores
/// exactly 1. Pass eps = 0 for the pure ratio (undefined on constant rows).
double variance_ratio(const Patch& patch, double eps = 1e-6);

/// Signed raw score: V - 1 for V >= 1, 1 - 1/V otherwise. Antisymmetric
/// under V <-> 1/V, i.e. under patch transposition when eps = 0.
double raw_score(double variance_ratio_value);

/// Convenience: raw score straight from a patch.
double patch_raw_score(const Patch& patch, double eps = 1e-6);

/// Empirical-CDF normalizer over the training corpus raw scores.
/// Immutable after fitting; scoring is thread-safe.
class QualityModel {
public:
    /// Sorts and stores the corpus scores. Throws Error{Config} when empty.
    static QualityModel fit(std::vector<double> raw_scores);

    /// Fraction of corpus scores strictly below `raw`; in [0,1], monotone,
    /// O(log N).
    double normalize(double raw) const;

    const std::vector<double>& scores() const { return scores_; }
    size_t size() const { return scores_.size(); }

private:
    std::vector<double> scores_;  // ascending
};

} // namespace densemark
