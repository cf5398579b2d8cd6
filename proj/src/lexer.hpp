#pragma once

// Internal tokenizer shared by the network, config and report parsers.

#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "tid/common.hpp"

namespace tid::detail {

enum class Tok {
    word, str, lbrace, rbrace, lparen, rparen, lbracket, rbracket,
    comma, colon, pipe, equals, arrow, end
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
    int line = 0;
};

inline bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '.' || c == '@' || c == '+' || c == '-' || c == '/';
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError("line " + std::to_string(current_.line) + ": " + msg);
    }

    Token expect(Tok kind, const char* what) {
        if (current_.kind != kind)
            fail(std::string("expected ") + what + ", got '" + current_.text +
                 "'");
        return take();
    }

private:
    void advance() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
        current_.line = line_;
        if (pos_ >= text_.size()) {
            current_ = {Tok::end, "", line_};
            return;
        }
        char c = text_[pos_];
        switch (c) {
            case '{': current_ = {Tok::lbrace, "{", line_}; ++pos_; return;
            case '}': current_ = {Tok::rbrace, "}", line_}; ++pos_; return;
            case '(': current_ = {Tok::lparen, "(", line_}; ++pos_; return;
            case ')': current_ = {Tok::rparen, ")", line_}; ++pos_; return;
            case '[': current_ = {Tok::lbracket, "[", line_}; ++pos_; return;
            case ']': current_ = {Tok::rbracket, "]", line_}; ++pos_; return;
            case ',': current_ = {Tok::comma, ",", line_}; ++pos_; return;
            case ':': current_ = {Tok::colon, ":", line_}; ++pos_; return;
            case '|': current_ = {Tok::pipe, "|", line_}; ++pos_; return;
            case '=': current_ = {Tok::equals, "=", line_}; ++pos_; return;
            default: break;
        }
        if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            current_ = {Tok::arrow, "->", line_};
            pos_ += 2;
            return;
        }
        if (c == '"') {
            std::string s;
            ++pos_;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\n') ++line_;
                s += text_[pos_++];
            }
            if (pos_ >= text_.size())
                throw FormatError("line " + std::to_string(line_) +
                                  ": unterminated string");
            ++pos_;
            current_ = {Tok::str, s, line_};
            return;
        }
        if (word_char(c)) {
            std::string w;
            while (pos_ < text_.size() && word_char(text_[pos_])) {
                // split "A->B" into word, arrow, word
                if (text_[pos_] == '-' && pos_ + 1 < text_.size() &&
                    text_[pos_ + 1] == '>' && !w.empty())
                    break;
                w += text_[pos_++];
            }
            current_ = {Tok::word, w, line_};
            return;
        }
        throw FormatError("line " + std::to_string(line_) +
                          ": unexpected character '" + std::string(1, c) + "'");
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
    Token current_;
};

inline double parse_number(Lexer& lex) {
    Token t = lex.expect(Tok::word, "number");
    char* end = nullptr;
    double v = std::strtod(t.text.c_str(), &end);
    if (end == t.text.c_str() || *end != '\0')
        lex.fail("'" + t.text + "' is not a number");
    return v;
}

inline std::vector<double> parse_number_list(Lexer& lex) {
    lex.expect(Tok::lparen, "'('");
    std::vector<double> out;
    while (lex.peek().kind != Tok::rparen) {
        out.push_back(parse_number(lex));
        if (lex.peek().kind == Tok::comma) lex.take();
    }
    lex.take();
    return out;
}

inline std::vector<std::string> parse_id_list(Lexer& lex) {
    lex.expect(Tok::lbrace, "'{'");
    std::vector<std::string> out;
    while (lex.peek().kind != Tok::rbrace) {
        out.push_back(lex.expect(Tok::word, "identifier").text);
        if (lex.peek().kind == Tok::comma) lex.take();
    }
    lex.take();
    return out;
}

}  // namespace tid::detail
