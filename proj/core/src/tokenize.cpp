#include "parsrec/tokenize.hpp"

#include <array>

#include "parsrec/unicode.hpp"

namespace parsrec {

namespace {

constexpr std::array<const char*, kTokenClassCount> kClassNames = {
    "NUMBER",          "CAPITALIZED_WORD", "LOWERCASE_WORD", "UPPERCASE_WORD",
    "UPPERCASE_LETTER", "COMMA",           "DOT",            "SEMICOLON",
    "COLON",           "HYPHEN",           "LPAREN",         "RPAREN",
    "LBRACKET",        "RBRACKET",         "QUOTE",          "OTHER",
};

// Punctuation that forms its own token, mapped to its class.
// U+2010..U+2015 are the typographic hyphens/dashes, U+2018/19 and
// U+201C/1D the curly quotes.
bool punct_class(char32_t cp, TokenClass& out) {
    switch (cp) {
        case U',': out = TokenClass::Comma; return true;
        case U'.': out = TokenClass::Dot; return true;
        case U';': out = TokenClass::Semicolon; return true;
        case U':': out = TokenClass::Colon; return true;
        case U'-': out = TokenClass::Hyphen; return true;
        case U'(': out = TokenClass::LParen; return true;
        case U')': out = TokenClass::RParen; return true;
        case U'[': out = TokenClass::LBracket; return true;
        case U']': out = TokenClass::RBracket; return true;
        case U'"':
        case U'\'':
        case 0x2018:
        case 0x2019:
        case 0x201C:
        case 0x201D:
        case 0x00AB:
        case 0x00BB: out = TokenClass::Quote; return true;
        case 0x2010:
        case 0x2011:
        case 0x2012:
        case 0x2013:
        case 0x2014:
        case 0x2015: out = TokenClass::Hyphen; return true;
        default: return false;
    }
}

}  // namespace

const char* token_class_name(TokenClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

int token_class_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kClassNames.size(); ++i)
        if (name == kClassNames[i]) return static_cast<int>(i);
    return -1;
}

TokenClass classify_token(std::string_view text) {
    const auto cps = uni::decode_utf8(text);
    if (cps.empty()) return TokenClass::Other;

    if (cps.size() == 1) {
        TokenClass pc;
        if (punct_class(cps[0], pc)) return pc;
    }

    bool all_digits = true, all_upper = true, all_lower = true, rest_lower = true;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t cp = cps[i];
        if (!uni::is_digit(cp)) all_digits = false;
        if (!uni::is_upper(cp)) all_upper = false;
        if (!uni::is_lower(cp)) {
            all_lower = false;
            if (i > 0) rest_lower = false;
        }
    }
    if (all_digits) return TokenClass::Number;
    if (all_upper) return cps.size() == 1 ? TokenClass::UppercaseLetter : TokenClass::UppercaseWord;
    if (uni::is_upper(cps[0]) && cps.size() >= 2 && rest_lower) return TokenClass::CapitalizedWord;
    if (all_lower) return TokenClass::LowercaseWord;
    return TokenClass::Other;
}

std::vector<Token> tokenize(std::string_view raw) {
    std::vector<Token> out;
    const auto cps = uni::decode_utf8(raw);
    std::string word;
    const auto flush_word = [&]() {
        if (word.empty()) return;
        out.push_back({word, classify_token(word), out.size()});
        word.clear();
    };
    for (char32_t cp : cps) {
        if (uni::is_space(cp)) {
            flush_word();
            continue;
        }
        if (uni::is_letter(cp) || uni::is_digit(cp) || uni::is_combining_mark(cp)) {
            uni::append_utf8(word, cp);
            continue;
        }
        // Everything else is a single-character token.
        flush_word();
        std::string text;
        uni::append_utf8(text, cp);
        const TokenClass cls = classify_token(text);
        out.push_back({std::move(text), cls, out.size()});
    }
    flush_word();
    return out;
}

}  // namespace parsrec
