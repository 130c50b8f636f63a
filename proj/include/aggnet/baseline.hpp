#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "aggnet/corpus.hpp"
#include "aggnet/numerics.hpp"

namespace aggnet {

/// Positive/negative opinion word lists. Words appearing in both files are
/// dropped from both; the overlap count is surfaced for diagnostics.
struct SentimentLexicon {
    std::set<std::string> positive;
    std::set<std::string> negative;
    std::size_t overlap_dropped = 0;
};

/// One word per line, ";" comment lines skipped, Latin-1 bytes tolerated.
SentimentLexicon load_lexicon(const std::string& positive_path, const std::string& negative_path);

constexpr std::size_t kNumFeatures = 6;

/// The six hand-crafted features:
///   [0] positive-word count        [1] negative-word count
///   [2] punctuation-token count    [3] word (non-punctuation) count
///   [4] 1 / (negative count + 1)   [5] ln(negative count + 1)
using FeatureVector = std::array<double, kNumFeatures>;

/// Computed over the token stream before punctuation stripping, so the
/// punctuation count is still observable.
FeatureVector extract_features(const TokenList& tokens, const SentimentLexicon& lexicon);

/// Tokens a baseline feature extraction expects: normalization plus social
/// tokenization only (no punctuation stripping, no lemmatization).
TokenList baseline_tokens(const std::string& text);

/// Binary decision tree over FeatureVector inputs. Nodes are stored in an
/// array; leaves carry per-class counts of the training sample they hold.
struct DecisionTree {
    struct Node {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t left = 0;   // child index; values < threshold go left
        std::size_t right = 0;  // values >= threshold go right
        std::array<std::size_t, kNumClasses> class_counts{};
    };
    std::vector<Node> nodes;  // node 0 is the root

    /// Majority class of the reached leaf; ties break toward the lower code.
    ClassLabel classify(const FeatureVector& fv) const;
};

struct ForestConfig {
    std::size_t num_trees = 100;
    std::size_t max_depth = 8;
    std::size_t min_leaf = 2;
    std::size_t features_per_split = 3;  // ceil(sqrt(6))
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    ForestConfig config;
    std::uint64_t seed = 0;
};

/// Gini impurity 1 - sum p_c^2 of a class-count histogram.
double gini_impurity(const std::array<std::size_t, kNumClasses>& counts);

/// Grows one tree on the given sample indices (duplicates allowed, as in a
/// bootstrap sample). Splits greedily by Gini reduction over
/// features_per_split randomly drawn features, thresholds at midpoints
/// between sorted distinct values.
DecisionTree grow_tree(const std::vector<FeatureVector>& features,
                       const std::vector<ClassLabel>& labels, std::vector<std::size_t> sample,
                       const ForestConfig& cfg, Rng& rng);

/// Bootstrap indices for one tree: n draws with replacement using the
/// substream Rng(mix_seed(seed, tree_index)).
std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed,
                                          std::size_t tree_index);

/// Trains num_trees trees, each on its own bootstrap sample. Requires at
/// least two distinct labels.
RandomForest train_forest(const std::vector<FeatureVector>& features,
                          const std::vector<ClassLabel>& labels, const ForestConfig& cfg,
                          std::uint64_t seed);

struct ForestPrediction {
    ClassLabel label = ClassLabel::NAG;
    std::array<double, kNumClasses> probs{};  // vote shares
};

/// Majority vote across trees; ties break toward the lower class code.
ForestPrediction forest_predict(const RandomForest& forest, const FeatureVector& fv);

}  // namespace aggnet
