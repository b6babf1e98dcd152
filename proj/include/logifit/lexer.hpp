#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace logifit {

enum class Tok {
    Ident, Number,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Semi, Comma, Colon, Assign, At, Arrow,
    Plus, Minus, Star, Slash, Caret,
    Lt, Le, Gt, Ge,
    Bang, Amp, Pipe,
    End
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    int line = 1;
    int column = 1;
};

inline const char* token_name(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Colon: return "':'";
        case Tok::Assign: return "'='";
        case Tok::At: return "'@'";
        case Tok::Arrow: return "'->'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Caret: return "'^'";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
        case Tok::Bang: return "'!'";
        case Tok::Amp: return "'&'";
        case Tok::Pipe: return "'|'";
        case Tok::End: return "end of input";
    }
    return "?";
}

/// Splits source text into tokens. '#' starts a comment running to end of line.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto push = [&](Tok k, std::string text, int l, int c) {
        out.push_back(Token{k, std::move(text), 0.0, l, c});
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') { ++line; col = 1; ++i; continue; }
        if (c == ' ' || c == '\t' || c == '\r') { ++col; ++i; continue; }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        int tl = line, tc = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            push(Tok::Ident, std::string(src.substr(i, j - i)), tl, tc);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            std::string text(src.substr(i, j - i));
            Token t{Tok::Number, text, std::strtod(text.c_str(), nullptr), tl, tc};
            out.push_back(std::move(t));
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        auto two = [&](char a, char b) {
            return c == a && i + 1 < src.size() && src[i + 1] == b;
        };
        if (two('-', '>')) { push(Tok::Arrow, "->", tl, tc); i += 2; col += 2; continue; }
        if (two('<', '=')) { push(Tok::Le, "<=", tl, tc); i += 2; col += 2; continue; }
        if (two('>', '=')) { push(Tok::Ge, ">=", tl, tc); i += 2; col += 2; continue; }
        Tok k;
        switch (c) {
            case '{': k = Tok::LBrace; break;
            case '}': k = Tok::RBrace; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case '[': k = Tok::LBracket; break;
            case ']': k = Tok::RBracket; break;
            case ';': k = Tok::Semi; break;
            case ',': k = Tok::Comma; break;
            case ':': k = Tok::Colon; break;
            case '=': k = Tok::Assign; break;
            case '@': k = Tok::At; break;
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '^': k = Tok::Caret; break;
            case '<': k = Tok::Lt; break;
            case '>': k = Tok::Gt; break;
            case '!': k = Tok::Bang; break;
            case '&': k = Tok::Amp; break;
            case '|': k = Tok::Pipe; break;
            default:
                throw ParseError(tl, tc, std::string("unexpected character '") + c + "'");
        }
        push(k, std::string(1, c), tl, tc);
        ++i; ++col;
    }
    out.push_back(Token{Tok::End, "", 0.0, line, col});
    return out;
}

} // namespace logifit
