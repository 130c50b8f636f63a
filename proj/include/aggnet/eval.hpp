#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aggnet/corpus.hpp"

namespace aggnet {

/// 3x3 gold-vs-predicted counts; rows are gold, columns predicted.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

    std::size_t total() const;
    std::size_t row_sum(int gold) const;
    std::size_t col_sum(int pred) const;
};

struct MetricsReport {
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> f1{};
    std::array<std::size_t, kNumClasses> support{};
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
};

ConfusionMatrix confusion(const std::vector<ClassLabel>& gold, const std::vector<ClassLabel>& pred);

/// Per-class precision/recall/F1 with the 0/0 -> 0 convention, plus
/// support-weighted F1 and accuracy.
MetricsReport weighted_f1(const ConfusionMatrix& m);

/// Mean weighted F1 of uniformly random predictions over `trials` seeded
/// trials. Trial t uses the substream mix_seed(seed, t), so results do not
/// depend on evaluation order.
double random_baseline(const std::vector<ClassLabel>& gold, std::uint64_t seed,
                       std::size_t trials = 1000);

/// Writes metrics.txt (key=value lines) and confusion.csv under out_dir,
/// creating the directory if needed; with_svg adds a confusion.svg heatmap.
void emit_report(const MetricsReport& report, const ConfusionMatrix& matrix,
                 const std::string& out_dir, bool with_svg = false);

}  // namespace aggnet
