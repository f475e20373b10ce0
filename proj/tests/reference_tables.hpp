#pragma once

#include "refgraph/eval.hpp"

#include <array>

namespace refgraph::testing {

// Published per-hop counts (hop, tp, fp, fn, tn).
inline const std::array<ConfusionMatrix, 5> kPublishedCounts = {{
    {4, 276, 2406, 159, 6257},
    {3, 271, 1884, 159, 6257},
    {2, 241, 901, 159, 6257},
    {1, 298, 0, 159, 6257},
    {0, 225, 474, 159, 6257},
}};

// Published per-hop metrics, same row order:
// FP rate, TP rate, precision, sensitivity, accuracy, F-measure.
inline const std::array<std::array<double, 6>, 5> kPublishedMetrics = {{
    {0.375, 0.635, 0.103, 0.635, 0.719, 0.177},
    {0.294, 0.630, 0.126, 0.630, 0.762, 0.210},
    {0.140, 0.603, 0.211, 0.603, 0.860, 0.313},
    {0.000, 0.652, 1.000, 0.652, 0.976, 0.789},
    {0.074, 0.586, 0.321, 0.586, 0.911, 0.415},
}};

inline constexpr double kPublishedNpv = 0.9752;

// fp / (fp + tn) for the same rows, worked out by hand.
inline const std::array<double, 5> kStandardFpr = {2406.0 / 8663.0, 1884.0 / 8141.0, 901.0 / 7158.0, 0.0,
                                                   474.0 / 6731.0};

} // namespace refgraph::testing
