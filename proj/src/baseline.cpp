#include "aggnet/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace aggnet {

namespace {

// Lexicon files in the wild are often Latin-1; re-encode stray high bytes
// so the words stay valid UTF-8.
std::string latin1_to_utf8(const std::string& line) {
    bool ascii = true;
    for (char c : line) {
        if (static_cast<unsigned char>(c) >= 0x80) {
            ascii = false;
            break;
        }
    }
    if (ascii) return line;
    // Already valid UTF-8? Keep it.
    bool valid_utf8 = true;
    for (std::size_t i = 0; i < line.size();) {
        const unsigned char b = static_cast<unsigned char>(line[i]);
        std::size_t len = 1;
        if (b >= 0xF0) len = 4;
        else if (b >= 0xE0) len = 3;
        else if (b >= 0xC0) len = 2;
        else if (b >= 0x80) { valid_utf8 = false; break; }
        if (i + len > line.size()) { valid_utf8 = false; break; }
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(line[i + k]) & 0xC0) != 0x80) { valid_utf8 = false; break; }
        }
        if (!valid_utf8) break;
        i += len;
    }
    if (valid_utf8) return line;
    std::string out;
    out.reserve(line.size() * 2);
    for (char c : line) {
        const unsigned char b = static_cast<unsigned char>(c);
        if (b < 0x80) {
            out.push_back(c);
        } else {
            out.push_back(static_cast<char>(0xC0 | (b >> 6)));
            out.push_back(static_cast<char>(0x80 | (b & 0x3F)));
        }
    }
    return out;
}

std::set<std::string> load_word_list(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        if (line.empty() || line[0] == ';') continue;
        line = latin1_to_utf8(line);
        for (char& c : line) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
        words.insert(line);
    }
    return words;
}

bool token_is_punct(const std::string& t) { return is_all_punct(t); }

}  // namespace

SentimentLexicon load_lexicon(const std::string& positive_path, const std::string& negative_path) {
    SentimentLexicon lex;
    lex.positive = load_word_list(positive_path);
    lex.negative = load_word_list(negative_path);
    std::vector<std::string> overlap;
    for (const auto& w : lex.positive) {
        if (lex.negative.count(w)) overlap.push_back(w);
    }
    for (const auto& w : overlap) {
        lex.positive.erase(w);
        lex.negative.erase(w);
    }
    lex.overlap_dropped = overlap.size();
    return lex;
}

FeatureVector extract_features(const TokenList& tokens, const SentimentLexicon& lexicon) {
    double pos = 0.0;
    double neg = 0.0;
    double punct = 0.0;
    double words = 0.0;
    for (const auto& t : tokens) {
        if (token_is_punct(t)) {
            punct += 1.0;
            continue;
        }
        words += 1.0;
        if (lexicon.positive.count(t)) pos += 1.0;
        if (lexicon.negative.count(t)) neg += 1.0;
    }
    return {pos, neg, punct, words, 1.0 / (neg + 1.0), std::log(neg + 1.0)};
}

TokenList baseline_tokens(const std::string& text) {
    return tokenize_social(normalize_entities(text));
}

double gini_impurity(const std::array<std::size_t, kNumClasses>& counts) {
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

ClassLabel DecisionTree::classify(const FeatureVector& fv) const {
    std::size_t node = 0;
    while (!nodes[node].leaf) {
        node = fv[nodes[node].feature] < nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    }
    const auto& counts = nodes[node].class_counts;
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
        if (counts[c] > counts[best]) best = c;
    }
    return static_cast<ClassLabel>(best);
}

namespace {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child impurity
};

std::array<std::size_t, kNumClasses> count_classes(const std::vector<ClassLabel>& labels,
                                                   const std::vector<std::size_t>& sample) {
    std::array<std::size_t, kNumClasses> counts{};
    for (std::size_t i : sample) ++counts[static_cast<int>(labels[i])];
    return counts;
}

// Best Gini split over the candidate features; thresholds sit halfway
// between consecutive distinct values.
SplitChoice choose_split(const std::vector<FeatureVector>& features,
                         const std::vector<ClassLabel>& labels,
                         const std::vector<std::size_t>& sample,
                         const std::vector<std::size_t>& candidate_features, std::size_t min_leaf) {
    SplitChoice best;
    const double n = static_cast<double>(sample.size());
    for (std::size_t f : candidate_features) {
        std::vector<std::pair<double, ClassLabel>> vals;
        vals.reserve(sample.size());
        for (std::size_t i : sample) vals.emplace_back(features[i][f], labels[i]);
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::array<std::size_t, kNumClasses> left{};
        std::array<std::size_t, kNumClasses> right{};
        for (const auto& [v, lab] : vals) ++right[static_cast<int>(lab)];

        for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
            const int lab = static_cast<int>(vals[k].second);
            ++left[lab];
            --right[lab];
            if (vals[k].first == vals[k + 1].first) continue;
            const std::size_t n_left = k + 1;
            const std::size_t n_right = vals.size() - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double impurity =
                (static_cast<double>(n_left) * gini_impurity(left) +
                 static_cast<double>(n_right) * gini_impurity(right)) /
                n;
            if (!best.found || impurity < best.impurity) {
                best.found = true;
                best.feature = f;
                best.threshold = vals[k].first + (vals[k + 1].first - vals[k].first) / 2.0;
                best.impurity = impurity;
            }
        }
    }
    return best;
}

std::size_t grow_node(const std::vector<FeatureVector>& features,
                      const std::vector<ClassLabel>& labels, DecisionTree& tree,
                      std::vector<std::size_t> sample, std::size_t depth, const ForestConfig& cfg,
                      Rng& rng) {
    const std::size_t node_index = tree.nodes.size();
    tree.nodes.emplace_back();
    const auto counts = count_classes(labels, sample);
    tree.nodes[node_index].class_counts = counts;

    const double impurity = gini_impurity(counts);
    if (depth >= cfg.max_depth || impurity == 0.0 || sample.size() < 2 * cfg.min_leaf) {
        return node_index;
    }

    // Draw the feature subset for this split (without replacement).
    std::vector<std::size_t> pool(kNumFeatures);
    for (std::size_t f = 0; f < kNumFeatures; ++f) pool[f] = f;
    const std::size_t take = std::min<std::size_t>(cfg.features_per_split, kNumFeatures);
    std::vector<std::size_t> candidates;
    candidates.reserve(take);
    for (std::size_t k = 0; k < take; ++k) {
        const std::size_t j = k + rng.uniform_index(pool.size() - k);
        std::swap(pool[k], pool[j]);
        candidates.push_back(pool[k]);
    }

    const SplitChoice split = choose_split(features, labels, sample, candidates, cfg.min_leaf);
    if (!split.found || split.impurity >= impurity) {
        return node_index;
    }

    std::vector<std::size_t> left_sample;
    std::vector<std::size_t> right_sample;
    for (std::size_t i : sample) {
        (features[i][split.feature] < split.threshold ? left_sample : right_sample).push_back(i);
    }
    sample.clear();
    sample.shrink_to_fit();

    const std::size_t left = grow_node(features, labels, tree, std::move(left_sample), depth + 1,
                                       cfg, rng);
    const std::size_t right = grow_node(features, labels, tree, std::move(right_sample), depth + 1,
                                        cfg, rng);
    DecisionTree::Node& node = tree.nodes[node_index];
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_index;
}

}  // namespace

DecisionTree grow_tree(const std::vector<FeatureVector>& features,
                       const std::vector<ClassLabel>& labels, std::vector<std::size_t> sample,
                       const ForestConfig& cfg, Rng& rng) {
    if (sample.empty()) throw std::invalid_argument("grow_tree: empty sample");
    DecisionTree tree;
    grow_node(features, labels, tree, std::move(sample), 0, cfg, rng);
    return tree;
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed,
                                          std::size_t tree_index) {
    Rng rng(mix_seed(seed, tree_index));
    std::vector<std::size_t> sample(n);
    for (std::size_t k = 0; k < n; ++k) sample[k] = rng.uniform_index(n);
    return sample;
}

RandomForest train_forest(const std::vector<FeatureVector>& features,
                          const std::vector<ClassLabel>& labels, const ForestConfig& cfg,
                          std::uint64_t seed) {
    if (features.size() != labels.size()) {
        throw std::invalid_argument("train_forest: feature/label count mismatch");
    }
    if (features.empty()) throw std::invalid_argument("train_forest: empty training data");
    if (cfg.num_trees < 1) throw std::invalid_argument("train_forest: num_trees must be >= 1");
    bool multi_class = false;
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] != labels[0]) {
            multi_class = true;
            break;
        }
    }
    if (!multi_class) {
        throw std::invalid_argument("train_forest: training data contains a single class");
    }

    RandomForest forest;
    forest.config = cfg;
    forest.seed = seed;
    forest.trees.reserve(cfg.num_trees);
    for (std::size_t tree_index = 0; tree_index < cfg.num_trees; ++tree_index) {
        Rng rng(mix_seed(seed, tree_index));
        std::vector<std::size_t> sample = bootstrap_sample(features.size(), seed, tree_index);
        forest.trees.push_back(grow_tree(features, labels, std::move(sample), cfg, rng));
    }
    return forest;
}

ForestPrediction forest_predict(const RandomForest& forest, const FeatureVector& fv) {
    if (forest.trees.empty()) throw std::invalid_argument("forest_predict: empty forest");
    std::array<std::size_t, kNumClasses> votes{};
    for (const auto& tree : forest.trees) {
        ++votes[static_cast<int>(tree.classify(fv))];
    }
    ForestPrediction pred;
    int best = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        pred.probs[c] = static_cast<double>(votes[c]) / static_cast<double>(forest.trees.size());
        if (votes[c] > votes[best]) best = c;
    }
    pred.label = static_cast<ClassLabel>(best);
    return pred;
}

}  // namespace aggnet
