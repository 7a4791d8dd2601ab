// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/token.hpp"

#include <cctype>
#include <unordered_map>

namespace rtlleak {

namespace {

const std::unordered_map<std::string, TokKind>& keyword_table() {
    static const std::unordered_map<std::string, TokKind> table = {
        {"module", TokKind::KwModule},   {"endmodule", TokKind::KwEndmodule},
        {"input", TokKind::KwInput},     {"output", TokKind::KwOutput},
        {"wire", TokKind::KwWire},       {"reg", TokKind::KwReg},
        {"assign", TokKind::KwAssign},   {"always", TokKind::KwAlways},
        {"begin", TokKind::KwBegin},     {"end", TokKind::KwEnd},
        {"if", TokKind::KwIf},           {"else", TokKind::KwElse},
        {"case", TokKind::KwCase},       {"endcase", TokKind::KwEndcase},
        {"default", TokKind::KwDefault}, {"posedge", TokKind::KwPosedge},
        {"negedge", TokKind::KwNegedge}, {"or", TokKind::KwOr},
        {"parameter", TokKind::KwParameter},
        {"localparam", TokKind::KwLocalparam},
    };
    return table;
}

// Verilog keywords we recognize but reject as subset violations. Keeping them
// as a distinct token kind lets the parser name the offending construct.
const std::unordered_map<std::string, int>& unsupported_keywords() {
    static const std::unordered_map<std::string, int> table = {
        {"generate", 0}, {"endgenerate", 0}, {"genvar", 0},
        {"function", 0}, {"endfunction", 0}, {"task", 0}, {"endtask", 0},
        {"initial", 0},  {"forever", 0},     {"repeat", 0}, {"while", 0},
        {"for", 0},      {"fork", 0},        {"join", 0},
        {"casez", 0},    {"casex", 0},       {"integer", 0}, {"real", 0},
        {"time", 0},     {"signed", 0},      {"inout", 0},
        {"wand", 0},     {"wor", 0},         {"tri", 0},
        {"supply0", 0},  {"supply1", 0},     {"defparam", 0},
        {"specify", 0},  {"endspecify", 0},  {"deassign", 0},
        {"force", 0},    {"release", 0},     {"wait", 0}, {"event", 0},
        {"disable", 0},  {"primitive", 0},   {"endprimitive", 0},
        {"table", 0},    {"endtable", 0},
    };
    return table;
}

struct Cursor {
    const std::string& text;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    bool eof() const { return pos >= text.size(); }
    char peek(size_t ahead = 0) const {
        return pos + ahead < text.size() ? text[pos + ahead] : '\0';
    }
    char advance() {
        char c = text[pos++];
        if (c == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
        return c;
    }
    SourceLoc loc() const { return {line, col}; }
};

int digit_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// Parses the part after the optional size: 'b101, 'hA_F, 'd42, 'o17.
Token based_literal(Cursor& cur, SourceLoc start, int width, bool sized) {
    cur.advance(); // '
    char basech = cur.peek();
    int base;
    switch (std::tolower(basech)) {
        case 'b': base = 2; break;
        case 'o': base = 8; break;
        case 'd': base = 10; break;
        case 'h': base = 16; break;
        default:
            throw DiagError("invalid base specifier in numeric literal", cur.loc());
    }
    cur.advance();
    uint64_t value = 0;
    bool any = false;
    while (!cur.eof()) {
        char c = cur.peek();
        if (c == '_') {
            cur.advance();
            continue;
        }
        if (std::tolower(c) == 'x' || std::tolower(c) == 'z') {
            throw DiagError("x/z digits are outside the two-valued subset", cur.loc());
        }
        int d = digit_value(c);
        if (d < 0 || d >= base) break;
        value = value * base + static_cast<uint64_t>(d);
        cur.advance();
        any = true;
    }
    if (!any) throw DiagError("numeric literal has no digits", cur.loc());
    if (width < 1 || width > 64)
        throw DiagError("literal width must be between 1 and 64", start);
    if (width < 64) value &= (uint64_t(1) << width) - 1;
    Token t;
    t.kind = TokKind::Number;
    t.value = value;
    t.width = width;
    t.sized = sized;
    t.loc = start;
    return t;
}

} // namespace

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    Cursor cur{text};

    auto push = [&](TokKind k, SourceLoc loc, std::string spelled = {}) {
        Token t;
        t.kind = k;
        t.text = std::move(spelled);
        t.loc = loc;
        out.push_back(std::move(t));
    };

    while (!cur.eof()) {
        char c = cur.peek();
        SourceLoc loc = cur.loc();

        if (std::isspace(static_cast<unsigned char>(c))) {
            cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '/') {
            while (!cur.eof() && cur.peek() != '\n') cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '*') {
            cur.advance();
            cur.advance();
            bool closed = false;
            while (!cur.eof()) {
                if (cur.peek() == '*' && cur.peek(1) == '/') {
                    cur.advance();
                    cur.advance();
                    closed = true;
                    break;
                }
                cur.advance();
            }
            if (!closed) throw DiagError("unterminated block comment", loc);
            continue;
        }
        if (c == '`') {
            throw DiagError("compiler directives are outside the supported subset", loc);
        }
        if (c == '"') {
            throw DiagError("string literals are outside the supported subset", loc);
        }

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (!cur.eof()) {
                char w = cur.peek();
                if (std::isalnum(static_cast<unsigned char>(w)) || w == '_' || w == '$') {
                    word.push_back(cur.advance());
                } else {
                    break;
                }
            }
            auto it = keyword_table().find(word);
            if (it != keyword_table().end()) {
                push(it->second, loc, word);
            } else if (unsupported_keywords().count(word)) {
                push(TokKind::KwUnsupported, loc, word);
            } else {
                push(TokKind::Ident, loc, word);
            }
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            // Either a plain decimal or the size prefix of a based literal.
            uint64_t dec = 0;
            while (!cur.eof() &&
                   (std::isdigit(static_cast<unsigned char>(cur.peek())) || cur.peek() == '_')) {
                char d = cur.advance();
                if (d != '_') dec = dec * 10 + static_cast<uint64_t>(d - '0');
            }
            if (cur.peek() == '\'') {
                out.push_back(based_literal(cur, loc, static_cast<int>(dec), true));
            } else {
                Token t;
                t.kind = TokKind::Number;
                t.value = dec;
                t.width = 32;
                t.sized = false;
                t.loc = loc;
                out.push_back(std::move(t));
            }
            continue;
        }
        if (c == '\'') {
            // Unsized based literal 'b1: defaults to 32 bits.
            out.push_back(based_literal(cur, loc, 32, false));
            continue;
        }

        cur.advance();
        switch (c) {
            case '(': push(TokKind::LParen, loc); break;
            case ')': push(TokKind::RParen, loc); break;
            case '[': push(TokKind::LBracket, loc); break;
            case ']': push(TokKind::RBracket, loc); break;
            case '{': push(TokKind::LBrace, loc); break;
            case '}': push(TokKind::RBrace, loc); break;
            case ';': push(TokKind::Semi, loc); break;
            case ',': push(TokKind::Comma, loc); break;
            case ':': push(TokKind::Colon, loc); break;
            case '@': push(TokKind::At, loc); break;
            case '#': push(TokKind::Hash, loc); break;
            case '.': push(TokKind::Dot, loc); break;
            case '?': push(TokKind::Question, loc); break;
            case '+': push(TokKind::Plus, loc); break;
            case '-': push(TokKind::Minus, loc); break;
            case '*': push(TokKind::Star, loc); break;
            case '^': push(TokKind::Caret, loc); break;
            case '=':
                if (cur.peek() == '=') {
                    cur.advance();
                    push(TokKind::EqEq, loc);
                } else {
                    push(TokKind::Assign, loc);
                }
                break;
            case '!':
                if (cur.peek() == '=') {
                    cur.advance();
                    push(TokKind::NotEq, loc);
                } else {
                    push(TokKind::Bang, loc);
                }
                break;
            case '<':
                if (cur.peek() == '=') {
                    cur.advance();
                    push(TokKind::NbAssign, loc);
                } else if (cur.peek() == '<') {
                    cur.advance();
                    push(TokKind::Shl, loc);
                } else {
                    push(TokKind::Lt, loc);
                }
                break;
            case '>':
                if (cur.peek() == '>') {
                    cur.advance();
                    push(TokKind::Shr, loc);
                } else if (cur.peek() == '=') {
                    cur.advance();
                    push(TokKind::Ge, loc);
                } else {
                    push(TokKind::Gt, loc);
                }
                break;
            case '&':
                if (cur.peek() == '&') {
                    cur.advance();
                    push(TokKind::AmpAmp, loc);
                } else {
                    push(TokKind::Amp, loc);
                }
                break;
            case '|':
                if (cur.peek() == '|') {
                    cur.advance();
                    push(TokKind::PipePipe, loc);
                } else {
                    push(TokKind::Pipe, loc);
                }
                break;
            case '~':
                if (cur.peek() == '&') {
                    cur.advance();
                    push(TokKind::Nand, loc);
                } else if (cur.peek() == '|') {
                    cur.advance();
                    push(TokKind::Nor, loc);
                } else if (cur.peek() == '^') {
                    cur.advance();
                    push(TokKind::TildeCaret, loc);
                } else {
                    push(TokKind::Tilde, loc);
                }
                break;
            default:
                throw DiagError(std::string("unexpected character '") + c + "'", loc);
        }
    }

    Token eof;
    eof.kind = TokKind::Eof;
    eof.loc = cur.loc();
    out.push_back(eof);
    return out;
}

const char* tok_kind_name(TokKind k) {
    switch (k) {
        case TokKind::Ident: return "identifier";
        case TokKind::Number: return "number";
        case TokKind::KwModule: return "'module'";
        case TokKind::KwEndmodule: return "'endmodule'";
        case TokKind::KwInput: return "'input'";
        case TokKind::KwOutput: return "'output'";
        case TokKind::KwWire: return "'wire'";
        case TokKind::KwReg: return "'reg'";
        case TokKind::KwAssign: return "'assign'";
        case TokKind::KwAlways: return "'always'";
        case TokKind::KwBegin: return "'begin'";
        case TokKind::KwEnd: return "'end'";
        case TokKind::KwIf: return "'if'";
        case TokKind::KwElse: return "'else'";
        case TokKind::KwCase: return "'case'";
        case TokKind::KwEndcase: return "'endcase'";
        case TokKind::KwDefault: return "'default'";
        case TokKind::KwPosedge: return "'posedge'";
        case TokKind::KwNegedge: return "'negedge'";
        case TokKind::KwOr: return "'or'";
        case TokKind::KwParameter: return "'parameter'";
        case TokKind::KwLocalparam: return "'localparam'";
        case TokKind::KwUnsupported: return "unsupported keyword";
        case TokKind::LParen: return "'('";
        case TokKind::RParen: return "')'";
        case TokKind::LBracket: return "'['";
        case TokKind::RBracket: return "']'";
        case TokKind::LBrace: return "'{'";
        case TokKind::RBrace: return "'}'";
        case TokKind::Semi: return "';'";
        case TokKind::Comma: return "','";
        case TokKind::Colon: return "':'";
        case TokKind::At: return "'@'";
        case TokKind::Hash: return "'#'";
        case TokKind::Dot: return "'.'";
        case TokKind::Question: return "'?'";
        case TokKind::Assign: return "'='";
        case TokKind::NbAssign: return "'<='";
        case TokKind::Lt: return "'<'";
        case TokKind::Gt: return "'>'";
        case TokKind::Ge: return "'>='";
        case TokKind::EqEq: return "'=='";
        case TokKind::NotEq: return "'!='";
        case TokKind::Plus: return "'+'";
        case TokKind::Minus: return "'-'";
        case TokKind::Star: return "'*'";
        case TokKind::Amp: return "'&'";
        case TokKind::Pipe: return "'|'";
        case TokKind::Caret: return "'^'";
        case TokKind::TildeCaret: return "'~^'";
        case TokKind::AmpAmp: return "'&&'";
        case TokKind::PipePipe: return "'||'";
        case TokKind::Tilde: return "'~'";
        case TokKind::Bang: return "'!'";
        case TokKind::Nand: return "'~&'";
        case TokKind::Nor: return "'~|'";
        case TokKind::Shl: return "'<<'";
        case TokKind::Shr: return "'>>'";
        case TokKind::Eof: return "end of input";
    }
    return "?";
}

} // namespace rtlleak
