#include "aggnet/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <stdexcept>

#include "aggnet/numerics.hpp"

namespace aggnet {

namespace {

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line where the record starts
};

// RFC-4180 reader: quoted fields may contain commas, newlines and "" escapes.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    std::optional<CsvRecord> next() {
        int c = in_.get();
        while (c == '\n' || c == '\r') {
            if (c == '\n') ++line_;
            c = in_.get();
        }
        if (c == EOF) return std::nullopt;

        CsvRecord rec;
        rec.line = line_;
        std::string field;
        bool in_quotes = false;
        while (true) {
            if (c == EOF) {
                if (in_quotes) {
                    throw std::runtime_error("unterminated quoted field starting at line " +
                                             std::to_string(rec.line));
                }
                rec.fields.push_back(std::move(field));
                return rec;
            }
            const char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty()) {
                in_quotes = true;
            } else if (ch == ',') {
                rec.fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '\n' || ch == '\r') {
                if (ch == '\r' && in_.peek() == '\n') in_.get();
                ++line_;
                rec.fields.push_back(std::move(field));
                return rec;
            } else {
                field.push_back(ch);
            }
            c = in_.get();
        }
    }

private:
    std::istream& in_;
    std::size_t line_ = 1;
};

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
    return s.substr(a, b - a);
}

}  // namespace

std::string label_name(ClassLabel label) {
    switch (label) {
        case ClassLabel::NAG: return "NAG";
        case ClassLabel::CAG: return "CAG";
        case ClassLabel::OAG: return "OAG";
    }
    return "?";
}

std::optional<ClassLabel> parse_label(const std::string& text) {
    std::string up = trim(text);
    for (char& c : up) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    if (up == "NAG") return ClassLabel::NAG;
    if (up == "CAG") return ClassLabel::CAG;
    if (up == "OAG") return ClassLabel::OAG;
    return std::nullopt;
}

Vocabulary::Vocabulary() {
    add("<pad>");
    add("<unk>");
}

std::uint32_t Vocabulary::index_of(const std::string& token) const {
    const auto it = token_to_index_.find(token);
    return it == token_to_index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_at(std::uint32_t index) const {
    if (index >= index_to_token_.size()) {
        throw std::out_of_range("vocabulary index " + std::to_string(index) + " out of range (size " +
                                std::to_string(index_to_token_.size()) + ")");
    }
    return index_to_token_[index];
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_index_.count(token) > 0;
}

void Vocabulary::add(const std::string& token) {
    if (token_to_index_.count(token)) {
        throw std::invalid_argument("duplicate vocabulary token: " + token);
    }
    token_to_index_.emplace(token, static_cast<std::uint32_t>(index_to_token_.size()));
    index_to_token_.push_back(token);
}

LoadResult load_dataset(const std::string& path, const PreprocessOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    CsvReader reader(in);
    LoadResult result;
    bool first = true;
    while (auto rec = reader.next()) {
        if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;  // stray blank line
        if (rec->fields.size() != 3) {
            throw std::runtime_error("line " + std::to_string(rec->line) + ": expected 3 columns, got " +
                                     std::to_string(rec->fields.size()));
        }
        if (first) {
            first = false;
            // Header detection: a first row whose label column is not a
            // class name is a header.
            if (!parse_label(rec->fields[2]).has_value()) continue;
        }
        const std::string& text = rec->fields[1];
        if (text.empty()) {
            ++result.skipped_empty;
            continue;
        }
        const auto label = parse_label(rec->fields[2]);
        if (!label.has_value()) {
            throw std::runtime_error("line " + std::to_string(rec->line) + ": unknown label \"" +
                                     rec->fields[2] + "\"");
        }
        LabeledExample ex;
        ex.id = rec->fields[0];
        ex.raw_text = text;
        ex.label = *label;
        ex.tokens = preprocess_pipeline(RawPost{ex.id, text}, options);
        result.examples.push_back(std::move(ex));
    }
    return result;
}

Vocabulary build_vocab(const std::vector<LabeledExample>& examples, std::size_t min_freq) {
    if (min_freq < 1) throw std::invalid_argument("build_vocab: min_freq must be >= 1");
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& ex : examples) {
        for (const auto& tok : ex.tokens) ++freq[tok];
    }
    std::vector<std::pair<std::string, std::size_t>> items;
    items.reserve(freq.size());
    for (auto& kv : freq) {
        if (kv.second >= min_freq) items.emplace_back(kv.first, kv.second);
    }
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary vocab;
    for (const auto& [token, count] : items) vocab.add(token);
    return vocab;
}

std::vector<std::uint32_t> encode(const TokenList& tokens, const Vocabulary& vocab,
                                  std::optional<std::size_t> max_len) {
    std::vector<std::uint32_t> indices;
    if (tokens.empty()) {
        indices.push_back(Vocabulary::kUnk);
        return indices;
    }
    std::size_t limit = tokens.size();
    if (max_len.has_value()) {
        if (*max_len == 0) throw std::invalid_argument("encode: max_len must be >= 1");
        limit = std::min(limit, *max_len);
    }
    indices.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) indices.push_back(vocab.index_of(tokens[i]));
    return indices;
}

TokenList decode(const std::vector<std::uint32_t>& indices, const Vocabulary& vocab) {
    TokenList tokens;
    tokens.reserve(indices.size());
    for (std::uint32_t idx : indices) tokens.push_back(vocab.token_at(idx));
    return tokens;
}

std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> stratified_split(
    const std::vector<LabeledExample>& examples, double dev_fraction, std::uint64_t seed) {
    if (!(dev_fraction > 0.0 && dev_fraction < 0.5)) {
        throw std::invalid_argument("stratified_split: dev_fraction must be in (0, 0.5), got " +
                                    std::to_string(dev_fraction));
    }
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        by_class[static_cast<int>(examples[i].label)].push_back(i);
    }
    std::vector<bool> in_dev(examples.size(), false);
    for (int c = 0; c < kNumClasses; ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;
        if (idx.size() < 2) {
            throw std::invalid_argument("stratified_split: class " +
                                        label_name(static_cast<ClassLabel>(c)) +
                                        " has fewer than 2 examples");
        }
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c) + 1));
        for (std::size_t i = idx.size(); i > 1; --i) {  // Fisher-Yates
            std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
        }
        const auto dev_count = static_cast<std::size_t>(static_cast<double>(idx.size()) * dev_fraction);
        for (std::size_t i = 0; i < dev_count; ++i) in_dev[idx[i]] = true;
    }
    std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        (in_dev[i] ? out.second : out.first).push_back(examples[i]);
    }
    return out;
}

std::array<std::size_t, kNumClasses> class_histogram(const std::vector<LabeledExample>& examples) {
    std::array<std::size_t, kNumClasses> counts{};
    for (const auto& ex : examples) ++counts[static_cast<int>(ex.label)];
    return counts;
}

}  // namespace aggnet
