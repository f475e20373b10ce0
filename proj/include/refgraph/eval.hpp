#pragma once

#include "refgraph/graph.hpp"
#include "refgraph/paths.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace refgraph {

struct ConfusionMatrix {
    int hop = 0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    bool operator==(const ConfusionMatrix&) const = default;
};

/// nullopt marks a ratio whose denominator was zero.
using Ratio = std::optional<double>;

enum class FprMode {
    paper,    // fp / (tn + fn), the denominator behind the published FP Rate column
    standard, // fp / (fp + tn)
};

struct RocMetrics {
    int hop = 0;
    Ratio fpr_paper;
    Ratio fpr_standard;
    Ratio tpr;
    Ratio precision;
    Ratio accuracy;
    Ratio f_measure;
    Ratio npv;

    Ratio sensitivity() const { return tpr; }
    Ratio fpr(FprMode mode) const { return mode == FprMode::paper ? fpr_paper : fpr_standard; }
};

struct ClassifyOptions {
    /// Count referred arrivals at a threat as hop-0 true positives. When off,
    /// hop-0 TP stays zero and only the direct-visit FP rule applies.
    bool hop0_referred_arrivals = true;
};

/// Builds one matrix per hop 0..max_hops from reconstructed paths.
///
/// For hop h >= 1 every real visit to a distance-h site is a TP when the
/// same path later reaches a threat and an FP otherwise. FN counts direct
/// (unreferred) visits to threats and TN counts visits to sites with no
/// threat within max_hops; both are shared by all hops. Hop 0 takes
/// referred arrivals at threats as TP and direct visits to related sites
/// as FP. Synthetic events are never counted.
std::vector<ConfusionMatrix> classify(std::span<const NavigationPath> paths, const HopMap& hops,
                                      const DomainSet& threats, int max_hops,
                                      ClassifyOptions options = {});

RocMetrics metrics(const ConfusionMatrix& m);

/// tn / (tn + fn), which must be the same for every matrix of a run.
double npv_run(std::span<const ConfusionMatrix> matrices);

struct RocPlot {
    std::string csv;
    std::string svg;
    std::size_t omitted = 0; // hops dropped for an undefined fpr or tpr
};

RocPlot emit_roc(std::span<const RocMetrics> metrics, FprMode mode);

/// "hop,fp,fn,tp,tn", highest hop first.
std::string confusion_csv(std::span<const ConfusionMatrix> matrices);
std::vector<ConfusionMatrix> parse_confusion_csv(std::string_view csv);

/// "hop,fp_rate,tp_rate,precision,sensitivity,accuracy,f_measure", highest
/// hop first, 3 decimals, "NA" for undefined cells.
std::string metrics_csv(std::span<const RocMetrics> metrics, FprMode mode);

} // namespace refgraph
