#include <densemark/quality.hpp>

#include <densemark/error.hpp>

#include <algorithm>
#include <cmath>

namespace densemark {

namespace {

double population_std(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / values.size());
}

} // namespace

double variance_ratio(const Patch& patch, double eps) {
    int s = patch.size;
    if (s <= 0 || patch.pixels.empty()) throw contract_error("variance_ratio: empty patch");

    std::vector<double> col_sums(s, 0.0), row_sums(s, 0.0);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            double v = patch.at(x, y);
            col_sums[x] += v;
            row_sums[y] += v;
        }
    return (population_std(col_sums) + eps) / (population_std(row_sums) + eps);
}

double raw_score(double v) {
    return v >= 1.0 ? v - 1.0 : 1.0 - 1.0 / v;
}

double patch_raw_score(const Patch& patch, double eps) {
    return raw_score(variance_ratio(patch, eps));
}

QualityModel QualityModel::fit(std::vector<double> raw_scores) {
    if (raw_scores.empty()) throw config_error("quality model needs at least one corpus score");
    std::sort(raw_scores.begin(), raw_scores.end());
    QualityModel m;
    m.scores_ = std::move(raw_scores);
    return m;
}

double QualityModel::normalize(double raw) const {
    auto it = std::lower_bound(scores_.begin(), scores_.end(), raw);
    return static_cast<double>(it - scores_.begin()) / static_cast<double>(scores_.size());
}

} // namespace densemark
