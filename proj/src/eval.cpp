#include "aggnet/eval.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "aggnet/numerics.hpp"

namespace aggnet {

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts) {
        for (std::size_t v : row) n += v;
    }
    return n;
}

std::size_t ConfusionMatrix::row_sum(int gold) const {
    std::size_t n = 0;
    for (std::size_t v : counts[gold]) n += v;
    return n;
}

std::size_t ConfusionMatrix::col_sum(int pred) const {
    std::size_t n = 0;
    for (const auto& row : counts) n += row[pred];
    return n;
}

ConfusionMatrix confusion(const std::vector<ClassLabel>& gold, const std::vector<ClassLabel>& pred) {
    if (gold.size() != pred.size()) {
        throw std::invalid_argument("confusion: length mismatch " + std::to_string(gold.size()) +
                                    " vs " + std::to_string(pred.size()));
    }
    if (gold.empty()) throw std::invalid_argument("confusion: empty label vectors");
    ConfusionMatrix m;
    for (std::size_t k = 0; k < gold.size(); ++k) {
        ++m.counts[static_cast<int>(gold[k])][static_cast<int>(pred[k])];
    }
    return m;
}

MetricsReport weighted_f1(const ConfusionMatrix& m) {
    const std::size_t total = m.total();
    if (total == 0) throw std::invalid_argument("weighted_f1: empty confusion matrix");
    MetricsReport r;
    std::size_t correct = 0;
    double weighted = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        const auto tp = static_cast<double>(m.counts[c][c]);
        const auto col = static_cast<double>(m.col_sum(c));
        const auto row = static_cast<double>(m.row_sum(c));
        r.support[c] = m.row_sum(c);
        r.precision[c] = col > 0.0 ? tp / col : 0.0;
        r.recall[c] = row > 0.0 ? tp / row : 0.0;
        const double pr = r.precision[c] + r.recall[c];
        r.f1[c] = pr > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / pr : 0.0;
        weighted += static_cast<double>(r.support[c]) * r.f1[c];
        correct += m.counts[c][c];
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    r.weighted_f1 = weighted / static_cast<double>(total);
    return r;
}

double random_baseline(const std::vector<ClassLabel>& gold, std::uint64_t seed, std::size_t trials) {
    if (trials == 0) throw std::invalid_argument("random_baseline: trials must be >= 1");
    if (gold.empty()) throw std::invalid_argument("random_baseline: empty gold labels");
    double sum = 0.0;
    std::vector<ClassLabel> pred(gold.size());
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(mix_seed(seed, t));
        for (auto& p : pred) p = static_cast<ClassLabel>(rng.uniform_index(kNumClasses));
        sum += weighted_f1(confusion(gold, pred)).weighted_f1;
    }
    return sum / static_cast<double>(trials);
}

namespace {

void write_or_throw(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void emit_report(const MetricsReport& report, const ConfusionMatrix& matrix,
                 const std::string& out_dir, bool with_svg) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                                     ec.message());

    std::string metrics;
    metrics += "weighted_f1=" + format_double(report.weighted_f1) + "\n";
    metrics += "accuracy=" + format_double(report.accuracy) + "\n";
    for (int c = 0; c < kNumClasses; ++c) {
        const std::string name = label_name(static_cast<ClassLabel>(c));
        metrics += "precision_" + name + "=" + format_double(report.precision[c]) + "\n";
        metrics += "recall_" + name + "=" + format_double(report.recall[c]) + "\n";
        metrics += "f1_" + name + "=" + format_double(report.f1[c]) + "\n";
        metrics += "support_" + name + "=" + std::to_string(report.support[c]) + "\n";
    }
    write_or_throw(dir / "metrics.txt", metrics);

    std::string csv = ",NAG,CAG,OAG\n";
    for (int g = 0; g < kNumClasses; ++g) {
        csv += label_name(static_cast<ClassLabel>(g));
        for (int p = 0; p < kNumClasses; ++p) {
            csv += "," + std::to_string(matrix.counts[g][p]);
        }
        csv += "\n";
    }
    write_or_throw(dir / "confusion.csv", csv);

    if (with_svg) {
        std::size_t max_count = 1;
        for (int g = 0; g < kNumClasses; ++g) {
            for (int p = 0; p < kNumClasses; ++p) max_count = std::max(max_count, matrix.counts[g][p]);
        }
        const int cell = 60;
        const int margin = 50;
        const int size = margin + kNumClasses * cell + 10;
        std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                          std::to_string(size) + "\" height=\"" + std::to_string(size) + "\">\n";
        for (int c = 0; c < kNumClasses; ++c) {
            const std::string name = label_name(static_cast<ClassLabel>(c));
            svg += "<text x=\"" + std::to_string(margin + c * cell + cell / 2) + "\" y=\"" +
                   std::to_string(margin - 8) + "\" text-anchor=\"middle\" font-size=\"12\">" + name +
                   "</text>\n";
            svg += "<text x=\"" + std::to_string(margin - 8) + "\" y=\"" +
                   std::to_string(margin + c * cell + cell / 2 + 4) +
                   "\" text-anchor=\"end\" font-size=\"12\">" + name + "</text>\n";
        }
        for (int g = 0; g < kNumClasses; ++g) {
            for (int p = 0; p < kNumClasses; ++p) {
                const double shade =
                    static_cast<double>(matrix.counts[g][p]) / static_cast<double>(max_count);
                const int x = margin + p * cell;
                const int y = margin + g * cell;
                svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
                       "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
                       "\" fill=\"rgb(30,80,160)\" fill-opacity=\"" + format_double(shade) +
                       "\" stroke=\"black\"/>\n";
                svg += "<text x=\"" + std::to_string(x + cell / 2) + "\" y=\"" +
                       std::to_string(y + cell / 2 + 4) +
                       "\" text-anchor=\"middle\" font-size=\"12\">" +
                       std::to_string(matrix.counts[g][p]) + "</text>\n";
            }
        }
        svg += "</svg>\n";
        write_or_throw(dir / "confusion.svg", svg);
    }
}

}  // namespace aggnet
