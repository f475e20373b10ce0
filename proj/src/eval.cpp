#include "refgraph/eval.hpp"

#include "refgraph/errors.hpp"
#include "refgraph/text.hpp"

#include <algorithm>

namespace refgraph {

namespace {

Ratio ratio(double num, double den)
{
    if (den == 0.0) {
        return std::nullopt;
    }
    return num / den;
}

template <typename T>
std::vector<const T*> by_hop_descending(std::span<const T> items)
{
    std::vector<const T*> out;
    for (const auto& i : items) {
        out.push_back(&i);
    }
    std::stable_sort(out.begin(), out.end(), [](const T* a, const T* b) { return a->hop > b->hop; });
    return out;
}

// Plot area inside the 800x800 canvas.
constexpr double kPlotLeft = 80.0;
constexpr double kPlotBottom = 720.0;
constexpr double kPlotSize = 640.0;

std::string px(double v) { return text::fixed(v, 2); }

double plot_x(double fpr) { return kPlotLeft + kPlotSize * fpr; }
double plot_y(double tpr) { return kPlotBottom - kPlotSize * tpr; }

} // namespace

std::vector<ConfusionMatrix> classify(std::span<const NavigationPath> paths, const HopMap& hops,
                                      const DomainSet& threats, int max_hops, ClassifyOptions options)
{
    if (max_hops < 1) {
        throw UsageError("max hops must be at least 1");
    }
    if (hops.max_hops != max_hops) {
        throw UsageError("hop map was built for " + std::to_string(hops.max_hops) + " hops, not "
                         + std::to_string(max_hops));
    }
    std::vector<ConfusionMatrix> m(static_cast<std::size_t>(max_hops) + 1);
    for (int h = 0; h <= max_hops; ++h) {
        m[h].hop = h;
    }
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::vector<char> threat_later;
    for (const auto& path : paths) {
        const auto& events = path.events;
        threat_later.assign(events.size(), 0);
        bool seen = false;
        for (std::size_t i = events.size(); i-- > 0;) {
            threat_later[i] = seen;
            seen = seen || threats.contains(events[i].domain);
        }

        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& e = events[i];
            if (e.synthetic) {
                continue;
            }
            if (threats.contains(e.domain)) {
                if (!e.referred) {
                    ++fn;
                } else if (options.hop0_referred_arrivals) {
                    ++m[0].tp;
                }
                continue;
            }
            const auto h = hops.distance(e.domain);
            if (!h) {
                ++tn;
                continue;
            }
            if (*h < 1 || *h > max_hops) {
                throw UsageError("hop map and threat set disagree on " + e.domain);
            }
            auto& cell = m[static_cast<std::size_t>(*h)];
            if (threat_later[i]) {
                ++cell.tp;
            } else {
                ++cell.fp;
            }
            if (!e.referred) {
                ++m[0].fp;
            }
        }
    }
    for (auto& c : m) {
        c.fn = fn;
        c.tn = tn;
    }
    return m;
}

RocMetrics metrics(const ConfusionMatrix& m)
{
    const auto tp = static_cast<double>(m.tp);
    const auto fp = static_cast<double>(m.fp);
    const auto fn = static_cast<double>(m.fn);
    const auto tn = static_cast<double>(m.tn);

    RocMetrics r;
    r.hop = m.hop;
    r.tpr = ratio(tp, tp + fn);
    r.fpr_standard = ratio(fp, fp + tn);
    r.fpr_paper = ratio(fp, tn + fn);
    r.precision = ratio(tp, tp + fp);
    r.accuracy = ratio(tp + tn, tp + fp + fn + tn);
    if (r.precision && r.tpr) {
        r.f_measure = ratio(2.0 * *r.precision * *r.tpr, *r.precision + *r.tpr);
    }
    r.npv = ratio(tn, tn + fn);
    return r;
}

double npv_run(std::span<const ConfusionMatrix> matrices)
{
    if (matrices.empty()) {
        throw UsageError("npv_run needs at least one matrix");
    }
    const auto& first = matrices.front();
    for (const auto& m : matrices) {
        if (m.fn != first.fn || m.tn != first.tn) {
            throw UsageError("fn/tn differ between hop " + std::to_string(first.hop) + " and hop "
                             + std::to_string(m.hop));
        }
    }
    const auto npv = metrics(first).npv;
    if (!npv) {
        throw UsageError("npv undefined: tn + fn is zero");
    }
    return *npv;
}

RocPlot emit_roc(std::span<const RocMetrics> metrics, FprMode mode)
{
    RocPlot plot;
    plot.csv = "hop,fpr,tpr\n";

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
    svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg += "<line x1=\"80.00\" y1=\"720.00\" x2=\"720.00\" y2=\"720.00\"/>\n";
    svg += "<line x1=\"80.00\" y1=\"720.00\" x2=\"80.00\" y2=\"80.00\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0;
        svg += "<line x1=\"" + px(plot_x(v)) + "\" y1=\"720.00\" x2=\"" + px(plot_x(v)) + "\" y2=\"726.00\"/>\n";
        svg += "<line x1=\"74.00\" y1=\"" + px(plot_y(v)) + "\" x2=\"80.00\" y2=\"" + px(plot_y(v)) + "\"/>\n";
    }
    svg += "</g>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"14\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0;
        svg += "<text x=\"" + px(plot_x(v)) + "\" y=\"744.00\" text-anchor=\"middle\">" + text::fixed(v, 1) + "</text>\n";
        svg += "<text x=\"68.00\" y=\"" + px(plot_y(v) + 5.0) + "\" text-anchor=\"end\">" + text::fixed(v, 1) + "</text>\n";
    }
    svg += "<text x=\"400.00\" y=\"776.00\" text-anchor=\"middle\">False positive rate</text>\n";
    svg += "<text x=\"24.00\" y=\"400.00\" text-anchor=\"middle\" transform=\"rotate(-90 24 400)\">True positive rate</text>\n";
    svg += "</g>\n";
    svg += "<line class=\"diagonal\" x1=\"80.00\" y1=\"720.00\" x2=\"720.00\" y2=\"80.00\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"6,6\"/>\n";

    for (const auto* m : by_hop_descending(metrics)) {
        const auto fpr = m->fpr(mode);
        if (!fpr || !m->tpr) {
            ++plot.omitted;
            continue;
        }
        const std::string hop = std::to_string(m->hop);
        plot.csv += hop + ',' + text::fixed(*fpr, 3) + ',' + text::fixed(*m->tpr, 3) + '\n';
        // fp/(tn+fn) can pass 1; keep such points on the canvas, the CSV has the real value
        const double x = plot_x(std::min(*fpr, 1.1));
        const double y = plot_y(*m->tpr);
        svg += "<circle class=\"point\" cx=\"" + px(x) + "\" cy=\"" + px(y) + "\" r=\"5\" fill=\"#c0392b\"/>\n";
        svg += "<text x=\"" + px(x + 8.0) + "\" y=\"" + px(y - 8.0)
            + "\" font-family=\"sans-serif\" font-size=\"14\">hop " + hop + "</text>\n";
    }
    svg += "</svg>\n";
    plot.svg = std::move(svg);
    return plot;
}

std::string confusion_csv(std::span<const ConfusionMatrix> matrices)
{
    std::string out = "hop,fp,fn,tp,tn\n";
    for (const auto* m : by_hop_descending(matrices)) {
        out += std::to_string(m->hop) + ',' + std::to_string(m->fp) + ',' + std::to_string(m->fn) + ','
            + std::to_string(m->tp) + ',' + std::to_string(m->tn) + '\n';
    }
    return out;
}

std::vector<ConfusionMatrix> parse_confusion_csv(std::string_view csv)
{
    const auto rows = text::lines(csv);
    if (rows.empty() || rows.front() != "hop,fp,fn,tp,tn") {
        throw DataError("confusion CSV: expected header hop,fp,fn,tp,tn");
    }
    std::vector<ConfusionMatrix> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) {
            continue;
        }
        const auto f = text::split(rows[i], ',');
        std::vector<long long> v;
        for (auto field : f) {
            const auto n = text::parse_int(field);
            if (!n || *n < 0) {
                throw DataError("confusion CSV: bad value on row " + std::to_string(i + 1));
            }
            v.push_back(*n);
        }
        if (v.size() != 5) {
            throw DataError("confusion CSV: expected 5 columns on row " + std::to_string(i + 1));
        }
        out.push_back({static_cast<int>(v[0]), static_cast<std::uint64_t>(v[3]), static_cast<std::uint64_t>(v[1]),
                       static_cast<std::uint64_t>(v[2]), static_cast<std::uint64_t>(v[4])});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.hop < b.hop; });
    return out;
}

std::string metrics_csv(std::span<const RocMetrics> metrics, FprMode mode)
{
    std::string out = "hop,fp_rate,tp_rate,precision,sensitivity,accuracy,f_measure\n";
    for (const auto* m : by_hop_descending(metrics)) {
        out += std::to_string(m->hop) + ',' + text::fixed_or_na(m->fpr(mode), 3) + ','
            + text::fixed_or_na(m->tpr, 3) + ',' + text::fixed_or_na(m->precision, 3) + ','
            + text::fixed_or_na(m->sensitivity(), 3) + ',' + text::fixed_or_na(m->accuracy, 3) + ','
            + text::fixed_or_na(m->f_measure, 3) + '\n';
    }
    return out;
}

} // namespace refgraph
