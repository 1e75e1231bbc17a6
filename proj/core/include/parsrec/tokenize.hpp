#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace parsrec {

// Word classes used as the alphabet of style n-grams. Classification is
// total: every token maps to exactly one class.
enum class TokenClass : std::uint8_t {
    Number = 0,
    CapitalizedWord,
    LowercaseWord,
    UppercaseWord,
    UppercaseLetter,
    Comma,
    Dot,
    Semicolon,
    Colon,
    Hyphen,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Quote,
    Other,
};

inline constexpr std::size_t kTokenClassCount = 16;

const char* token_class_name(TokenClass c);
// -1 when the name is unknown.
int token_class_from_name(std::string_view name);

struct Token {
    std::string text;
    TokenClass cls;
    std::size_t position;  // index in the token sequence
};

TokenClass classify_token(std::string_view text);

// Splits on whitespace; every punctuation character (ASCII , . ; : - ( ) [ ]
// quotes, plus typographic dashes and quotes) becomes its own token; runs of
// letters/digits form single tokens. Together the tokens cover every
// non-whitespace character of the input in order.
std::vector<Token> tokenize(std::string_view raw);

}  // namespace parsrec
