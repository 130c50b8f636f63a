#include "aggnet/preprocess.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace aggnet {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

bool is_punct_char(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
           (u >= 123 && u <= 126);
}

char lower_char(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Decodes one UTF-8 codepoint at byte i; invalid bytes decode as themselves.
struct Codepoint {
    std::uint32_t value;
    std::size_t length;
};

Codepoint decode_utf8(const std::string& s, std::size_t i) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        return {static_cast<std::uint32_t>((b0 & 0x1F) << 6 |
                                           (static_cast<unsigned char>(s[i + 1]) & 0x3F)),
                2};
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        return {static_cast<std::uint32_t>((b0 & 0x0F) << 12 |
                                           (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6 |
                                           (static_cast<unsigned char>(s[i + 2]) & 0x3F)),
                3};
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        return {static_cast<std::uint32_t>((b0 & 0x07) << 18 |
                                           (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12 |
                                           (static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6 |
                                           (static_cast<unsigned char>(s[i + 3]) & 0x3F)),
                4};
    }
    return {b0, 1};
}

bool is_emoji_cp(std::uint32_t cp) {
    return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
           (cp >= 0x2B00 && cp <= 0x2BFF) || cp == 0x203C || cp == 0x2049;
}

// Variation selectors and the zero-width joiner carry no token content.
bool is_invisible_cp(std::uint32_t cp) {
    return cp == 0xFE0E || cp == 0xFE0F || cp == 0x200D;
}

bool is_space_cp(std::uint32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
           cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000;
}

// ---------------------------------------------------------------------------
// Entity matchers. Each returns the matched length at position i, or 0.
// `boundary` is true when i sits at a word boundary in the original text.
// ---------------------------------------------------------------------------

std::size_t match_number_core(const std::string& s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j == i) return 0;
    // Thousands groups: ",ddd" repeated.
    while (j + 3 < s.size() && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) &&
           is_digit(s[j + 3]) && (j + 4 >= s.size() || !is_digit(s[j + 4]))) {
        j += 4;
    }
    if (j < s.size() && s[j] == '.' && j + 1 < s.size() && is_digit(s[j + 1])) {
        j += 1;
        while (j < s.size() && is_digit(s[j])) ++j;
    }
    return j - i;
}

bool next_is_alnum(const std::string& s, std::size_t j) { return j < s.size() && is_alnum(s[j]); }

std::size_t match_url(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary) return 0;
    auto starts = [&](const char* p) {
        std::size_t n = 0;
        while (p[n]) {
            if (i + n >= s.size() || lower_char(s[i + n]) != p[n]) return std::size_t{0};
            ++n;
        }
        return n;
    };
    std::size_t prefix = starts("http://");
    if (!prefix) prefix = starts("https://");
    if (!prefix) prefix = starts("ftp://");
    if (!prefix) prefix = starts("www.");
    if (!prefix) return 0;
    std::size_t j = i + prefix;
    while (j < s.size() && !is_space_cp(static_cast<unsigned char>(s[j])) &&
           static_cast<unsigned char>(s[j]) < 0x80) {
        ++j;
    }
    // Sentence punctuation glued to the end is not part of the address.
    while (j > i + prefix) {
        const char c = s[j - 1];
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' ||
            c == ']' || c == '}' || c == '>' || c == '\'' || c == '"') {
            --j;
        } else {
            break;
        }
    }
    if (j == i + prefix) return 0;
    return j - i;
}

bool is_local_char(char c) {
    return is_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}

std::size_t match_email(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary || !is_alnum(s[i])) return 0;
    std::size_t j = i;
    while (j < s.size() && is_local_char(s[j])) ++j;
    if (j == i || j >= s.size() || s[j] != '@') return 0;
    std::size_t k = j + 1;
    while (k < s.size() && (is_alnum(s[k]) || s[k] == '.' || s[k] == '-')) ++k;
    while (k > j + 1 && (s[k - 1] == '.' || s[k - 1] == '-')) --k;
    if (k == j + 1) return 0;
    // Domain must end in an alphabetic TLD of length >= 2.
    std::size_t dot = std::string::npos;
    for (std::size_t p = j + 1; p < k; ++p) {
        if (s[p] == '.') dot = p;
    }
    if (dot == std::string::npos || k - dot - 1 < 2) return 0;
    for (std::size_t p = dot + 1; p < k; ++p) {
        if (!is_alpha(s[p])) return 0;
    }
    return k - i;
}

std::size_t match_user(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary || s[i] != '@') return 0;
    std::size_t j = i + 1;
    while (j < s.size() && (is_alnum(s[j]) || s[j] == '_')) ++j;
    if (j == i + 1) return 0;
    return j - i;
}

// Currency symbols: $ plus the common multi-byte ones.
std::size_t match_currency_symbol(const std::string& s, std::size_t i) {
    if (s[i] == '$') return 1;
    static const std::array<std::string, 4> symbols = {"€", "£", "₹", "¥"};
    for (const auto& sym : symbols) {
        if (s.compare(i, sym.size(), sym) == 0) return sym.size();
    }
    return 0;
}

std::size_t match_money(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary) return 0;
    if (const std::size_t sym = match_currency_symbol(s, i)) {
        const std::size_t num = match_number_core(s, i + sym);
        if (num == 0 || next_is_alnum(s, i + sym + num)) return 0;
        return sym + num;
    }
    if (const std::size_t num = match_number_core(s, i)) {
        const std::size_t sym = match_currency_symbol(s, i + num);
        if (sym == 0) return 0;
        return num + sym;
    }
    return 0;
}

std::size_t match_percent(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary) return 0;
    const std::size_t num = match_number_core(s, i);
    if (num == 0 || i + num >= s.size() || s[i + num] != '%') return 0;
    return num + 1;
}

bool is_phone_sep(char c) { return c == ' ' || c == '-' || c == '.' || c == '(' || c == ')'; }

// Conservative: requires a leading '+', a parenthesized group, or a
// contiguous run of at least 7 digits, so numeric dates fall through to
// the date rule.
std::size_t match_phone(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary) return 0;
    const bool plus = s[i] == '+';
    const bool paren = s[i] == '(';
    if (!plus && !paren && !is_digit(s[i])) return 0;

    std::size_t j = i + (plus ? 1 : 0);
    std::size_t digits = 0;
    std::size_t longest_run = 0;
    std::size_t run = 0;
    std::size_t last_digit_end = 0;
    while (j < s.size() && (is_digit(s[j]) || is_phone_sep(s[j]))) {
        if (is_digit(s[j])) {
            ++digits;
            ++run;
            longest_run = std::max(longest_run, run);
            last_digit_end = j + 1;
        } else {
            run = 0;
        }
        ++j;
    }
    if (digits < 7 || digits > 15) return 0;
    if (!plus && !paren && longest_run < 7) return 0;
    if (last_digit_end == 0) return 0;
    std::size_t end = last_digit_end;
    if (end < s.size() && s[end] == ')' && paren) ++end;  // keep a closing paren paired
    if (next_is_alnum(s, end)) return 0;
    return end - i;
}

std::size_t match_time(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary || !is_digit(s[i])) return 0;
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j]) && j - i < 2) ++j;
    if (j >= s.size() || s[j] != ':') return 0;
    ++j;
    if (j + 1 >= s.size() || !is_digit(s[j]) || !is_digit(s[j + 1])) return 0;
    j += 2;
    if (j + 2 < s.size() && s[j] == ':' && is_digit(s[j + 1]) && is_digit(s[j + 2])) j += 3;
    // Optional am/pm marker, glued or after one space.
    std::size_t k = j;
    if (k < s.size() && s[k] == ' ') ++k;
    if (k + 1 < s.size()) {
        const char a = lower_char(s[k]);
        const char b = lower_char(s[k + 1]);
        if ((a == 'a' || a == 'p') && b == 'm' && !next_is_alnum(s, k + 2)) {
            return k + 2 - i;
        }
    }
    if (next_is_alnum(s, j)) return 0;
    return j - i;
}

std::size_t match_date(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary || !is_digit(s[i])) return 0;
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j]) && j - i < 4) ++j;
    const std::size_t len1 = j - i;
    if (j >= s.size() || (s[j] != '/' && s[j] != '-' && s[j] != '.')) return 0;
    const char sep = s[j];
    ++j;
    std::size_t g2 = j;
    while (j < s.size() && is_digit(s[j]) && j - g2 < 2) ++j;
    const std::size_t len2 = j - g2;
    if (len2 == 0 || j >= s.size() || s[j] != sep) return 0;
    ++j;
    std::size_t g3 = j;
    while (j < s.size() && is_digit(s[j]) && j - g3 < 4) ++j;
    const std::size_t len3 = j - g3;
    if (len3 == 0 || next_is_alnum(s, j)) return 0;

    const bool dmy = len1 <= 2 && len2 <= 2 && (len3 == 2 || len3 == 4);
    const bool ymd = len1 == 4 && len2 <= 2 && len3 <= 2;
    if (!dmy && !ymd) return 0;
    if (sep == '.' && len1 != 4 && len3 != 4) return 0;  // x.y.z version strings
    return j - i;
}

std::size_t match_number(const std::string& s, std::size_t i, bool boundary) {
    if (!boundary) return 0;
    const std::size_t len = match_number_core(s, i);
    if (len == 0 || next_is_alnum(s, i + len)) return 0;
    return len;
}

const std::set<std::string>& emoticon_set() {
    static const std::set<std::string> set = {
        ":)",  ":-)", ":(",  ":-(", ":D",  ":-D", ":P",  ":-P", ":p",  ":-p", ";)",
        ";-)", ":/",  ":-/", ":\\", ":|",  ":o",  ":O",  ":'(", ":'-(", "=)",  "=(",
        "=D",  "<3",  "</3", "xD",  "XD",  "^^",  "^_^", "-_-", "o_O", "O_o", "T_T",
        ":*",  ";(",  "D:",  ":s",  ":S",  "=/",  "=\\", "=P",  "=p"};
    return set;
}

// Matches "<kind>" at position i; returns length or 0.
std::size_t match_placeholder(const std::string& s, std::size_t i) {
    if (i >= s.size() || s[i] != '<') return 0;
    std::size_t j = i + 1;
    while (j < s.size() && s[j] >= 'a' && s[j] <= 'z') ++j;
    if (j == i + 1 || j >= s.size() || s[j] != '>') return 0;
    return j + 1 - i;
}

std::string collapse_elongation(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        const std::size_t n = out.size();
        if (is_alpha(c) && n >= 2 && out[n - 1] == c && out[n - 2] == c) continue;
        out.push_back(c);
    }
    return out;
}

std::string lower_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = lower_char(c);
    return out;
}

void emit_chunk(const std::string& s, TokenList& out) {
    if (s.empty()) return;
    if (emoticon_set().count(s)) {
        out.push_back(s);
        return;
    }
    if (const std::size_t p = match_placeholder(s, 0)) {
        out.push_back(s.substr(0, p));
        emit_chunk(s.substr(p), out);
        return;
    }
    // Emoji codepoints become their own tokens.
    for (std::size_t i = 0; i < s.size();) {
        const Codepoint cp = decode_utf8(s, i);
        if (is_emoji_cp(cp.value)) {
            emit_chunk(s.substr(0, i), out);
            out.push_back(s.substr(i, cp.length));
            emit_chunk(s.substr(i + cp.length), out);
            return;
        }
        i += cp.length;
    }
    std::size_t lead = 0;
    while (lead < s.size() && is_punct_char(s[lead])) ++lead;
    if (lead == s.size()) {
        out.push_back(s);  // pure punctuation run stays one token
        return;
    }
    if (lead > 0) {
        out.push_back(s.substr(0, lead));
        emit_chunk(s.substr(lead), out);
        return;
    }
    std::size_t tail = 0;
    while (tail < s.size() && is_punct_char(s[s.size() - 1 - tail])) ++tail;
    if (tail > 0) {
        const std::string run = s.substr(s.size() - tail);
        emit_chunk(s.substr(0, s.size() - tail), out);
        out.push_back(run);
        return;
    }
    out.push_back(collapse_elongation(lower_ascii(s)));
}

bool is_all_ascii_alpha(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!is_alpha(c)) return false;
    }
    return true;
}

std::set<std::string> edit1_in_vocab(const std::string& token, const std::set<std::string>& vocab) {
    std::set<std::string> hits;
    auto consider = [&](const std::string& cand) {
        if (cand != token && vocab.count(cand)) hits.insert(cand);
    };
    for (std::size_t i = 0; i < token.size(); ++i) {
        consider(token.substr(0, i) + token.substr(i + 1));  // deletion
        for (char c = 'a'; c <= 'z'; ++c) {
            if (c != token[i]) {
                std::string sub = token;
                sub[i] = c;
                consider(sub);
            }
        }
    }
    for (std::size_t i = 0; i <= token.size(); ++i) {
        for (char c = 'a'; c <= 'z'; ++c) {
            consider(token.substr(0, i) + c + token.substr(i));  // insertion
        }
    }
    return hits;
}

const std::unordered_map<std::string, std::string>& builtin_lemma_exceptions() {
    static const std::unordered_map<std::string, std::string> table = {
        {"men", "man"},       {"women", "woman"},   {"children", "child"}, {"feet", "foot"},
        {"teeth", "tooth"},   {"mice", "mouse"},    {"geese", "goose"},    {"people", "people"},
        {"these", "these"},   {"those", "those"},   {"news", "news"},      {"always", "always"},
        {"perhaps", "perhaps"}, {"its", "its"},     {"his", "his"},        {"hers", "hers"},
        {"yours", "yours"},   {"ours", "ours"},     {"theirs", "theirs"}};
    return table;
}

bool has_ascii_vowel(const std::string& s) {
    for (char c : s) {
        if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
    }
    return false;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Porter-style undoubling: hopp -> hop, but ll/ss/zz stay.
std::string undouble(std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && is_alpha(stem[n - 1])) {
        const char c = stem[n - 1];
        const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
        if (!vowel && c != 'l' && c != 's' && c != 'z') stem.pop_back();
    }
    return stem;
}

}  // namespace

const std::vector<NormalizationRule>& normalization_rules() {
    static const std::vector<NormalizationRule> rules = {
        {EntityKind::Url, "scheme:// or www. followed by a non-space run", "<url>"},
        {EntityKind::Email, "local-part @ domain with alphabetic TLD", "<email>"},
        {EntityKind::User, "@ followed by letters, digits or underscores", "<user>"},
        {EntityKind::Money, "currency symbol adjacent to a number", "<money>"},
        {EntityKind::Percent, "number followed by %", "<percent>"},
        {EntityKind::Phone, "+/( prefixed digit groups or a 7-15 digit run", "<phone>"},
        {EntityKind::Time, "h:mm or h:mm:ss with optional am/pm", "<time>"},
        {EntityKind::Date, "d/m/y, y-m-d style numeric dates", "<date>"},
        {EntityKind::Number, "digits with optional thousands and decimal part", "<number>"},
    };
    return rules;
}

std::string normalize_entities(const std::string& text) {
    std::string out;
    out.reserve(text.size() + 16);
    std::size_t i = 0;
    bool just_replaced = false;
    while (i < text.size()) {
        const char prev = i > 0 ? text[i - 1] : '\0';
        const bool boundary = i == 0 || just_replaced || !is_alnum(prev);
        const bool numeric_boundary = boundary && (just_replaced || prev != '<');

        std::size_t len = 0;
        const char* placeholder = nullptr;
        if ((len = match_url(text, i, boundary))) {
            placeholder = "<url>";
        } else if ((len = match_email(text, i, boundary))) {
            placeholder = "<email>";
        } else if ((len = match_user(text, i, boundary))) {
            placeholder = "<user>";
        } else if ((len = match_money(text, i, numeric_boundary))) {
            placeholder = "<money>";
        } else if ((len = match_percent(text, i, numeric_boundary))) {
            placeholder = "<percent>";
        } else if ((len = match_phone(text, i, numeric_boundary))) {
            placeholder = "<phone>";
        } else if ((len = match_time(text, i, numeric_boundary))) {
            placeholder = "<time>";
        } else if ((len = match_date(text, i, numeric_boundary))) {
            placeholder = "<date>";
        } else if ((len = match_number(text, i, numeric_boundary))) {
            placeholder = "<number>";
        }

        if (placeholder != nullptr) {
            out += placeholder;
            i += len;
            just_replaced = true;
        } else {
            out.push_back(text[i]);
            ++i;
            just_replaced = false;
        }
    }
    return out;
}

TokenList tokenize_social(const std::string& text) {
    TokenList out;
    std::string chunk;
    std::size_t i = 0;
    while (i <= text.size()) {
        bool flush = false;
        std::size_t advance = 1;
        if (i == text.size()) {
            flush = true;
        } else {
            const Codepoint cp = decode_utf8(text, i);
            advance = cp.length;
            if (is_space_cp(cp.value)) {
                flush = true;
            } else if (!is_invisible_cp(cp.value)) {
                chunk.append(text, i, cp.length);
            }
        }
        if (flush && !chunk.empty()) {
            emit_chunk(chunk, out);
            chunk.clear();
        }
        i += advance;
    }
    return out;
}

bool is_all_punct(const std::string& token) {
    if (token.empty()) return false;
    for (char c : token) {
        if (!is_punct_char(c)) return false;
    }
    return true;
}

TokenList strip_punct_and_correct(const TokenList& tokens, const std::set<std::string>* vocab,
                                  bool enable_spell) {
    TokenList out;
    out.reserve(tokens.size());
    for (const std::string& t : tokens) {
        if (is_all_punct(t)) continue;
        if (enable_spell && vocab != nullptr && is_all_ascii_alpha(t) && !vocab->count(t)) {
            const std::set<std::string> hits = edit1_in_vocab(t, *vocab);
            if (hits.size() == 1) {
                out.push_back(*hits.begin());
                continue;
            }
        }
        out.push_back(t);
    }
    return out;
}

std::string lemmatize(const std::string& token) {
    static const std::unordered_map<std::string, std::string> empty;
    return lemmatize(token, empty);
}

std::string lemmatize(const std::string& token,
                      const std::unordered_map<std::string, std::string>& extra_exceptions) {
    for (char c : token) {
        if (static_cast<unsigned char>(c) >= 0x80) return token;
    }
    if (auto it = extra_exceptions.find(token); it != extra_exceptions.end()) return it->second;
    const auto& builtin = builtin_lemma_exceptions();
    if (auto it = builtin.find(token); it != builtin.end()) return it->second;
    if (token.size() < 3) return token;

    if (ends_with(token, "ies") && token.size() >= 5) {
        return token.substr(0, token.size() - 3) + "y";
    }
    if (ends_with(token, "sses")) {
        return token.substr(0, token.size() - 2);
    }
    if (ends_with(token, "es") && token.size() >= 4) {
        const std::string stem = token.substr(0, token.size() - 2);
        if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
            ends_with(stem, "sh") || ends_with(stem, "ch")) {
            return stem;
        }
    }
    if (ends_with(token, "s") && !ends_with(token, "ss") && !ends_with(token, "us") &&
        !ends_with(token, "is") && token.size() - 1 >= 3) {
        return token.substr(0, token.size() - 1);
    }
    if (ends_with(token, "ing") && token.size() >= 6) {
        const std::string stem = token.substr(0, token.size() - 3);
        if (has_ascii_vowel(stem)) return undouble(stem);
    }
    if (ends_with(token, "ed") && token.size() >= 5) {
        const std::string stem = token.substr(0, token.size() - 2);
        if (has_ascii_vowel(stem)) return undouble(stem);
    }
    return token;
}

std::unordered_map<std::string, std::string> load_lemma_exceptions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open lemma exception file: " + path);
    std::unordered_map<std::string, std::string> table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error("malformed lemma exception line (expected surface<TAB>lemma): " +
                                     line);
        }
        table[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return table;
}

TokenList preprocess_pipeline(const RawPost& post, const PreprocessOptions& options) {
    const std::string normalized = normalize_entities(post.text);
    TokenList tokens = tokenize_social(normalized);
    tokens = strip_punct_and_correct(tokens, options.enable_spell ? &options.spell_vocab : nullptr,
                                     options.enable_spell);
    for (std::string& t : tokens) t = lemmatize(t, options.lemma_exceptions);
    return tokens;
}

}  // namespace aggnet
