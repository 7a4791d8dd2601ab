// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtlleak/diag.hpp"

namespace rtlleak {

enum class TokKind {
    Ident,
    Number,      // sized or unsized constant, value/width resolved by the lexer
    KwModule, KwEndmodule, KwInput, KwOutput, KwWire, KwReg,
    KwAssign, KwAlways, KwBegin, KwEnd, KwIf, KwElse,
    KwCase, KwEndcase, KwDefault, KwPosedge, KwNegedge, KwOr,
    KwParameter, KwLocalparam,
    KwUnsupported, // recognized Verilog keyword outside the supported subset

    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Semi, Comma, Colon, At, Hash, Dot, Question,
    Assign,     // =
    NbAssign,   // <=  (also less-or-equal in expression context)
    Lt, Gt, Ge,
    EqEq, NotEq,
    Plus, Minus, Star,
    Amp, Pipe, Caret, TildeCaret,
    AmpAmp, PipePipe,
    Tilde, Bang,
    Nand, Nor, // ~& ~|
    Shl, Shr,
    Eof,
};

struct Token {
    TokKind kind = TokKind::Eof;
    std::string text;     // identifier name or keyword spelling
    uint64_t value = 0;   // numeric literals
    int width = 32;       // numeric literals: declared width, 32 if unsized
    bool sized = false;   // true when the literal had an explicit size
    SourceLoc loc;
};

/// Lex one source file. Comments and whitespace are stripped; every token
/// keeps its line/column. Throws DiagError on bad characters, unterminated
/// block comments, malformed literals, and x/z digits (two-valued subset).
std::vector<Token> tokenize(const std::string& text);

const char* tok_kind_name(TokKind k);

} // namespace rtlleak
