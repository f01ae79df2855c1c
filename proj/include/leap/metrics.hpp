#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

namespace leap {

/// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked correctly,
/// ties counted one half. Computed by rank sums with tie-averaged ranks,
/// which is exactly the pairwise count.
inline double auc(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty()) throw std::invalid_argument("auc: empty score list");
    std::vector<std::pair<double, int>> items;
    items.reserve(pos.size() + neg.size());
    for (double s : pos) items.emplace_back(s, 1);
    for (double s : neg) items.emplace_back(s, 0);
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        while (j < items.size() && items[j].first == items[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (items[t].second) rank_sum_pos += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Average precision over the score-descending ranking: sum of precision at
/// each positive hit times the recall step. Ties are broken pessimistically,
/// negatives placed first, so the value is reproducible everywhere.
inline double average_precision(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("average_precision: empty score list");
    std::vector<std::pair<double, int>> items;
    items.reserve(pos.size() + neg.size());
    for (double s : pos) items.emplace_back(s, 1);
    for (double s : neg) items.emplace_back(s, 0);
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    double tp = 0.0, ap = 0.0;
    const double np = static_cast<double>(pos.size());
    for (std::size_t rank = 0; rank < items.size(); ++rank) {
        if (!items[rank].second) continue;
        tp += 1.0;
        ap += (tp / static_cast<double>(rank + 1)) / np;
    }
    return ap;
}

} // namespace leap
