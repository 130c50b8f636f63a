#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aggnet/preprocess.hpp"

namespace aggnet {

enum class ClassLabel : int { NAG = 0, CAG = 1, OAG = 2 };

constexpr int kNumClasses = 3;

/// "NAG" / "CAG" / "OAG".
std::string label_name(ClassLabel label);
/// Case-insensitive parse; empty optional on unknown strings.
std::optional<ClassLabel> parse_label(const std::string& text);

struct LabeledExample {
    std::string id;
    TokenList tokens;  // preprocess_pipeline output of raw_text
    ClassLabel label = ClassLabel::NAG;
    std::string raw_text;
};

/// Token <-> index map with PAD at 0 and UNK at 1.
class Vocabulary {
public:
    static constexpr std::uint32_t kPad = 0;
    static constexpr std::uint32_t kUnk = 1;

    Vocabulary();

    /// Index of an existing token, or kUnk.
    std::uint32_t index_of(const std::string& token) const;
    const std::string& token_at(std::uint32_t index) const;
    std::size_t size() const { return index_to_token_.size(); }
    bool contains(const std::string& token) const;

    /// Appends a token with the next free index; rejects duplicates.
    void add(const std::string& token);

    const std::vector<std::string>& tokens() const { return index_to_token_; }

private:
    std::unordered_map<std::string, std::uint32_t> token_to_index_;
    std::vector<std::string> index_to_token_;
};

struct EncodedExample {
    std::vector<std::uint32_t> indices;  // length >= 1
    ClassLabel label = ClassLabel::NAG;
};

struct LoadResult {
    std::vector<LabeledExample> examples;
    std::size_t skipped_empty = 0;  // rows dropped for having no text
};

/// Reads a 3-column id,text,label CSV (RFC-4180 quoting, optional header,
/// UTF-8). Rows are preprocessed in order; rows with empty text are
/// counted and skipped. Malformed rows and unknown labels raise errors
/// carrying the 1-based line number where the record starts.
LoadResult load_dataset(const std::string& path, const PreprocessOptions& options = {});

/// Tokens seen at least min_freq times get indices after PAD/UNK, in
/// descending-frequency order with lexicographic tie-break.
Vocabulary build_vocab(const std::vector<LabeledExample>& examples, std::size_t min_freq = 2);

/// Maps tokens to indices (UNK for out-of-vocabulary), truncating to
/// max_len when set. An empty token list encodes as the single token UNK.
std::vector<std::uint32_t> encode(const TokenList& tokens, const Vocabulary& vocab,
                                  std::optional<std::size_t> max_len = std::nullopt);

/// Inverse of encode for diagnostic use.
TokenList decode(const std::vector<std::uint32_t>& indices, const Vocabulary& vocab);

/// Deterministic per-class split; dev receives floor(count * fraction)
/// examples of each class. Requires 0 < dev_fraction < 0.5 and at least
/// two examples per present class.
std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> stratified_split(
    const std::vector<LabeledExample>& examples, double dev_fraction, std::uint64_t seed);

/// Per-class counts indexed by label code.
std::array<std::size_t, kNumClasses> class_histogram(const std::vector<LabeledExample>& examples);

}  // namespace aggnet
