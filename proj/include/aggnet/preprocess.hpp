#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace aggnet {

/// One post or comment, text preserved byte-exact from the input.
struct RawPost {
    std::string id;
    std::string text;
};

using TokenList = std::vector<std::string>;

/// Entity kinds recognized by normalize_entities, in priority order.
/// Each maximal span matching a rule is replaced by "<kind>".
enum class EntityKind { Url, Email, User, Money, Percent, Phone, Time, Date, Number };

struct NormalizationRule {
    EntityKind kind;
    std::string pattern;      // human-readable description of the matcher
    std::string placeholder;  // "<url>", "<email>", ...
};

/// The fixed rule table, in application priority order.
const std::vector<NormalizationRule>& normalization_rules();

/// Replaces URLs, e-mails, @-mentions, money, percentages, phone numbers,
/// times, dates and numbers with their placeholders. Rules are tried in
/// priority order at each position; the longest match for a rule wins.
std::string normalize_entities(const std::string& text);

/// Whitespace split followed by separation of leading/trailing punctuation
/// runs. Placeholders, emoticons from a built-in list and emoji codepoints
/// stay atomic; ASCII letters are lowercased; letter runs longer than two
/// collapse to two.
TokenList tokenize_social(const std::string& text);

/// Drops tokens made entirely of ASCII punctuation. With spell correction
/// enabled, an out-of-vocabulary alphabetic token that has exactly one
/// in-vocabulary neighbor at edit distance 1 is replaced by that neighbor.
TokenList strip_punct_and_correct(const TokenList& tokens,
                                  const std::set<std::string>* vocab = nullptr,
                                  bool enable_spell = false);

/// Suffix-stripping lemmatizer with an exception table. Tokens containing
/// non-ASCII bytes pass through unchanged.
std::string lemmatize(const std::string& token);
std::string lemmatize(const std::string& token,
                      const std::unordered_map<std::string, std::string>& extra_exceptions);

/// Parses an exception-table file: one "surface<TAB>lemma" pair per line,
/// "#" starts a comment line.
std::unordered_map<std::string, std::string> load_lemma_exceptions(const std::string& path);

struct PreprocessOptions {
    bool enable_spell = false;
    std::set<std::string> spell_vocab;
    std::unordered_map<std::string, std::string> lemma_exceptions;
};

/// normalize -> tokenize -> strip/correct -> lemmatize, in that order.
TokenList preprocess_pipeline(const RawPost& post, const PreprocessOptions& options = {});

/// True if every character of the token is ASCII punctuation.
bool is_all_punct(const std::string& token);

}  // namespace aggnet
