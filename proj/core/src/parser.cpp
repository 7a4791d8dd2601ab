// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/parser.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace rtlleak {

namespace {

class Parser {
  public:
    explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

    std::vector<ModuleDecl> run() {
        std::vector<ModuleDecl> mods;
        while (!at(TokKind::Eof)) {
            mods.push_back(parse_module());
        }
        return mods;
    }

  private:
    const std::vector<Token>& toks_;
    size_t pos_ = 0;
    ModuleDecl* mod_ = nullptr;
    int next_stmt_id_ = 0;

    // -- token helpers -----------------------------------------------------

    const Token& peek(size_t ahead = 0) const {
        size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    bool at(TokKind k) const { return peek().kind == k; }
    const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    bool accept(TokKind k) {
        if (at(k)) {
            pos_++;
            return true;
        }
        return false;
    }
    const Token& expect(TokKind k, const char* what) {
        if (!at(k)) {
            throw DiagError(std::string("expected ") + tok_kind_name(k) + " " + what +
                                ", found " + tok_kind_name(peek().kind),
                            peek().loc);
        }
        return toks_[pos_++];
    }
    [[noreturn]] void subset_violation(const std::string& construct, SourceLoc loc) {
        throw DiagError("subset violation: " + construct, loc);
    }
    void reject_unsupported() {
        if (at(TokKind::KwUnsupported)) subset_violation("`" + peek().text + "`", peek().loc);
    }

    // -- declarations ------------------------------------------------------

    // [msb:lsb] with constant bounds; returns width. msb >= lsb >= 0 required.
    int parse_range() {
        SourceLoc loc = peek().loc;
        expect(TokKind::LBracket, "to open range");
        uint64_t msb = parse_const_value();
        expect(TokKind::Colon, "in range");
        uint64_t lsb = parse_const_value();
        expect(TokKind::RBracket, "to close range");
        if (lsb != 0) throw DiagError("ranges must be [msb:0]", loc);
        if (msb > 63) throw DiagError("width exceeds the supported maximum of 64 bits", loc);
        return static_cast<int>(msb) + 1;
    }

    uint64_t parse_const_value() {
        ExprPtr e = parse_expr();
        auto folded = const_fold(resolve_expr_for_const(e));
        if (folded->kind != ExprKind::Const)
            throw DiagError("expected a constant expression", e->loc);
        return folded->value;
    }

    // Substitute params so range/parameter expressions can fold before the
    // module-wide width resolution runs.
    ExprPtr resolve_expr_for_const(const ExprPtr& e) {
        if (!e) return e;
        if (e->kind == ExprKind::Ident) {
            auto it = mod_->params.find(e->name);
            if (it == mod_->params.end())
                throw DiagError("'" + e->name + "' is not a constant", e->loc);
            int w = mod_->param_widths.count(e->name) ? mod_->param_widths[e->name] : 32;
            return Expr::constant(it->second, w, e->loc);
        }
        auto copy = std::make_shared<Expr>(*e);
        for (auto& a : copy->args) a = resolve_expr_for_const(a);
        return copy;
    }

    ModuleDecl parse_module() {
        reject_unsupported();
        ModuleDecl m;
        mod_ = &m;
        next_stmt_id_ = 0;
        m.loc = peek().loc;
        expect(TokKind::KwModule, "to start a module");
        m.name = expect(TokKind::Ident, "as module name").text;

        std::vector<std::string> unresolved_port_names;
        if (accept(TokKind::LParen)) {
            if (!at(TokKind::RParen)) {
                do {
                    reject_unsupported();
                    if (at(TokKind::KwInput) || at(TokKind::KwOutput)) {
                        parse_ansi_port(m);
                    } else {
                        // Non-ANSI: bare name, direction declared in the body.
                        const Token& t = expect(TokKind::Ident, "as port name");
                        unresolved_port_names.push_back(t.text);
                    }
                } while (accept(TokKind::Comma));
            }
            expect(TokKind::RParen, "to close the port list");
        }
        expect(TokKind::Semi, "after the module header");

        while (!at(TokKind::KwEndmodule)) {
            if (at(TokKind::Eof)) throw DiagError("unexpected end of input in module body", peek().loc);
            parse_item(m, unresolved_port_names);
        }
        expect(TokKind::KwEndmodule, "");

        for (const auto& n : unresolved_port_names) {
            if (!m.find_port(n))
                throw DiagError("port '" + n + "' has no direction declaration", m.loc);
        }
        check_duplicate_names(m);
        resolve_module_widths(m);
        check_block_assignment_styles(m);
        mod_ = nullptr;
        return m;
    }

    void parse_ansi_port(ModuleDecl& m) {
        PortDecl p;
        p.loc = peek().loc;
        p.dir = accept(TokKind::KwInput) ? PortDir::Input
                                         : (expect(TokKind::KwOutput, "port direction"),
                                            PortDir::Output);
        if (accept(TokKind::KwReg)) {
            if (p.dir == PortDir::Input)
                throw DiagError("input ports cannot be declared reg", p.loc);
            p.is_reg = true;
        }
        accept(TokKind::KwWire);
        if (at(TokKind::LBracket)) p.width = parse_range();
        p.name = expect(TokKind::Ident, "as port name").text;
        m.ports.push_back(std::move(p));
    }

    void parse_item(ModuleDecl& m, std::vector<std::string>& unresolved_ports) {
        reject_unsupported();
        SourceLoc loc = peek().loc;
        switch (peek().kind) {
            case TokKind::KwInput:
            case TokKind::KwOutput: {
                // Non-ANSI port direction declaration.
                PortDir dir = advance().kind == TokKind::KwInput ? PortDir::Input : PortDir::Output;
                bool is_reg = accept(TokKind::KwReg);
                if (is_reg && dir == PortDir::Input)
                    throw DiagError("input ports cannot be declared reg", loc);
                accept(TokKind::KwWire);
                int width = at(TokKind::LBracket) ? parse_range() : 1;
                do {
                    const Token& t = expect(TokKind::Ident, "as port name");
                    auto it = std::find(unresolved_ports.begin(), unresolved_ports.end(), t.text);
                    if (it == unresolved_ports.end())
                        throw DiagError("'" + t.text + "' is not in the module port list", t.loc);
                    unresolved_ports.erase(it);
                    PortDecl p;
                    p.name = t.text;
                    p.dir = dir;
                    p.width = width;
                    p.is_reg = is_reg;
                    p.loc = t.loc;
                    m.ports.push_back(std::move(p));
                } while (accept(TokKind::Comma));
                expect(TokKind::Semi, "after port declaration");
                break;
            }
            case TokKind::KwWire:
            case TokKind::KwReg: {
                NetKind kind = advance().kind == TokKind::KwWire ? NetKind::Wire : NetKind::Reg;
                int width = at(TokKind::LBracket) ? parse_range() : 1;
                do {
                    NetDecl d;
                    d.loc = peek().loc;
                    d.name = expect(TokKind::Ident, "as net name").text;
                    d.kind = kind;
                    d.width = width;
                    if (at(TokKind::LBracket))
                        subset_violation("memories/arrays", peek().loc);
                    if (at(TokKind::Assign)) {
                        // `wire x = expr;` sugar for a continuous assignment.
                        if (kind == NetKind::Reg)
                            throw DiagError("reg declarations cannot carry initializers", d.loc);
                        advance();
                        ContAssign ca;
                        ca.target.name = d.name;
                        ca.target.loc = d.loc;
                        ca.rhs = parse_expr();
                        ca.stmt_id = next_stmt_id_++;
                        ca.loc = d.loc;
                        m.nets.push_back(d);
                        DesignItem item;
                        item.kind = ItemKind::ContAssign;
                        item.cont = std::move(ca);
                        m.items.push_back(std::move(item));
                    } else {
                        m.nets.push_back(d);
                    }
                } while (accept(TokKind::Comma));
                expect(TokKind::Semi, "after net declaration");
                break;
            }
            case TokKind::KwParameter:
            case TokKind::KwLocalparam: {
                advance();
                do {
                    const Token& name = expect(TokKind::Ident, "as parameter name");
                    expect(TokKind::Assign, "in parameter declaration");
                    ExprPtr value = parse_expr();
                    auto folded = const_fold(resolve_expr_for_const(value));
                    if (folded->kind != ExprKind::Const)
                        throw DiagError("parameter value must be constant", name.loc);
                    if (m.params.count(name.text))
                        throw DiagError("duplicate parameter '" + name.text + "'", name.loc);
                    m.params[name.text] = folded->value;
                    m.param_widths[name.text] = folded->width;
                } while (accept(TokKind::Comma));
                expect(TokKind::Semi, "after parameter declaration");
                break;
            }
            case TokKind::KwAssign: {
                advance();
                DesignItem item;
                item.kind = ItemKind::ContAssign;
                item.cont.loc = loc;
                item.cont.target = parse_lvalue();
                expect(TokKind::Assign, "in continuous assignment");
                item.cont.rhs = parse_expr();
                item.cont.stmt_id = next_stmt_id_++;
                expect(TokKind::Semi, "after continuous assignment");
                m.items.push_back(std::move(item));
                break;
            }
            case TokKind::KwAlways: {
                m.items.push_back(parse_always());
                break;
            }
            case TokKind::Ident: {
                // Module instance: <module> <name> ( connections );
                m.items.push_back(parse_instance());
                break;
            }
            default:
                throw DiagError(std::string("unexpected ") + tok_kind_name(peek().kind) +
                                    " in module body",
                                loc);
        }
    }

    DesignItem parse_always() {
        DesignItem item;
        item.kind = ItemKind::Always;
        AlwaysBlock& blk = item.always;
        blk.loc = peek().loc;
        expect(TokKind::KwAlways, "");
        expect(TokKind::At, "after 'always'");

        if (accept(TokKind::Star)) {
            blk.clocked = false;
        } else {
            expect(TokKind::LParen, "to open the sensitivity list");
            if (accept(TokKind::Star)) {
                blk.clocked = false;
            } else if (at(TokKind::KwPosedge) || at(TokKind::KwNegedge)) {
                blk.clocked = true;
                blk.posedge = advance().kind == TokKind::KwPosedge;
                blk.clock = expect(TokKind::Ident, "as clock signal").text;
                if (accept(TokKind::KwOr)) {
                    AsyncReset rst;
                    if (at(TokKind::KwPosedge) || at(TokKind::KwNegedge)) {
                        rst.negedge = advance().kind == TokKind::KwNegedge;
                    } else {
                        throw DiagError("expected posedge/negedge reset in sensitivity list",
                                        peek().loc);
                    }
                    rst.signal = expect(TokKind::Ident, "as reset signal").text;
                    blk.async_reset = rst;
                    if (at(TokKind::KwOr))
                        subset_violation("more than two edge events in one sensitivity list",
                                         peek().loc);
                }
            } else {
                // Explicit combinational list `@(a or b)`: recomputed-every-
                // cycle semantics, same as @*.
                blk.clocked = false;
                do {
                    expect(TokKind::Ident, "in sensitivity list");
                } while (accept(TokKind::KwOr) || accept(TokKind::Comma));
            }
            expect(TokKind::RParen, "to close the sensitivity list");
        }
        blk.body = parse_stmt();
        return item;
    }

    DesignItem parse_instance() {
        DesignItem item;
        item.kind = ItemKind::Instance;
        Instance& inst = item.instance;
        inst.loc = peek().loc;
        inst.module_name = expect(TokKind::Ident, "as module type").text;
        if (at(TokKind::Hash)) subset_violation("parameter override on instance", peek().loc);
        inst.instance_name = expect(TokKind::Ident, "as instance name").text;
        expect(TokKind::LParen, "to open port connections");
        if (!at(TokKind::RParen)) {
            bool named = at(TokKind::Dot);
            do {
                if (named) {
                    expect(TokKind::Dot, "in named connection");
                    std::string port = expect(TokKind::Ident, "as port name").text;
                    expect(TokKind::LParen, "after port name");
                    ExprPtr e = at(TokKind::RParen) ? nullptr : parse_expr();
                    expect(TokKind::RParen, "to close connection");
                    inst.connections.emplace_back(port, e);
                } else {
                    // Positional; resolved against the instantiated module's
                    // port order during elaboration.
                    inst.connections.emplace_back("", parse_expr());
                }
            } while (accept(TokKind::Comma));
        }
        expect(TokKind::RParen, "to close port connections");
        expect(TokKind::Semi, "after instance");
        return item;
    }

    // -- statements ----------------------------------------------------------

    StmtPtr parse_stmt() {
        reject_unsupported();
        SourceLoc loc = peek().loc;
        if (accept(TokKind::KwBegin)) {
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Block;
            s->id = next_stmt_id_++;
            s->loc = loc;
            while (!accept(TokKind::KwEnd)) {
                if (at(TokKind::Eof)) throw DiagError("unterminated begin/end block", loc);
                s->stmts.push_back(parse_stmt());
            }
            return s;
        }
        if (accept(TokKind::KwIf)) {
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::If;
            s->id = next_stmt_id_++;
            s->loc = loc;
            expect(TokKind::LParen, "after 'if'");
            s->cond = parse_expr();
            expect(TokKind::RParen, "after if condition");
            s->then_branch = parse_stmt();
            if (accept(TokKind::KwElse)) s->else_branch = parse_stmt();
            return s;
        }
        if (accept(TokKind::KwCase)) {
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Case;
            s->id = next_stmt_id_++;
            s->loc = loc;
            expect(TokKind::LParen, "after 'case'");
            s->case_expr = parse_expr();
            expect(TokKind::RParen, "after case expression");
            bool saw_default = false;
            while (!accept(TokKind::KwEndcase)) {
                if (at(TokKind::Eof)) throw DiagError("unterminated case statement", loc);
                CaseArm arm;
                if (accept(TokKind::KwDefault)) {
                    if (saw_default) throw DiagError("multiple default arms", peek().loc);
                    saw_default = true;
                    accept(TokKind::Colon);
                } else {
                    do {
                        arm.labels.push_back(parse_expr());
                    } while (accept(TokKind::Comma));
                    expect(TokKind::Colon, "after case labels");
                }
                arm.body = parse_stmt();
                s->arms.push_back(std::move(arm));
            }
            return s;
        }
        if (at(TokKind::Ident)) {
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Assign;
            s->id = next_stmt_id_++;
            s->loc = loc;
            s->target = parse_lvalue();
            if (accept(TokKind::NbAssign)) {
                s->nonblocking = true;
            } else {
                expect(TokKind::Assign, "in assignment");
            }
            s->rhs = parse_expr();
            expect(TokKind::Semi, "after assignment");
            return s;
        }
        if (accept(TokKind::Semi)) { // null statement
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::Block;
            s->id = next_stmt_id_++;
            s->loc = loc;
            return s;
        }
        throw DiagError(std::string("unexpected ") + tok_kind_name(peek().kind) +
                            " at start of statement",
                        loc);
    }

    LValue parse_lvalue() {
        LValue lv;
        lv.loc = peek().loc;
        if (at(TokKind::LBrace)) subset_violation("concatenation on the left-hand side", lv.loc);
        lv.name = expect(TokKind::Ident, "as assignment target").text;
        if (accept(TokKind::LBracket)) {
            uint64_t first = parse_const_value();
            if (accept(TokKind::Colon)) {
                uint64_t second = parse_const_value();
                lv.hi = static_cast<int>(first);
                lv.lo = static_cast<int>(second);
            } else {
                lv.hi = lv.lo = static_cast<int>(first);
            }
            expect(TokKind::RBracket, "to close target select");
            if (lv.hi < lv.lo) throw DiagError("descending part-select bounds", lv.loc);
        }
        return lv;
    }

    // -- expressions ---------------------------------------------------------
    //
    // Precedence, low to high: ?: | || | && | '|' | ^ ~^ | & | == != |
    // < <= > >= | << >> | + - | * | unary | primary.

    ExprPtr parse_expr() { return parse_ternary(); }

    ExprPtr parse_ternary() {
        ExprPtr cond = parse_logic_or();
        if (accept(TokKind::Question)) {
            SourceLoc loc = cond->loc;
            ExprPtr t = parse_expr();
            expect(TokKind::Colon, "in conditional expression");
            ExprPtr f = parse_expr();
            return Expr::ternary(cond, t, f, loc);
        }
        return cond;
    }

    // Logical truthiness of a possibly multi-bit operand: reduction-or.
    ExprPtr truthy(ExprPtr e) {
        if (e->width == 1) return e;
        return Expr::unary(UnOp::RedOr, e, e->loc);
    }

    ExprPtr parse_logic_or() {
        ExprPtr lhs = parse_logic_and();
        while (at(TokKind::PipePipe)) {
            SourceLoc loc = advance().loc;
            ExprPtr rhs = parse_logic_and();
            lhs = Expr::binary(BinOp::Or, truthy(lhs), truthy(rhs), loc);
        }
        return lhs;
    }

    ExprPtr parse_logic_and() {
        ExprPtr lhs = parse_bit_or();
        while (at(TokKind::AmpAmp)) {
            SourceLoc loc = advance().loc;
            ExprPtr rhs = parse_bit_or();
            lhs = Expr::binary(BinOp::And, truthy(lhs), truthy(rhs), loc);
        }
        return lhs;
    }

    ExprPtr parse_bit_or() {
        ExprPtr lhs = parse_bit_xor();
        while (at(TokKind::Pipe)) {
            SourceLoc loc = advance().loc;
            lhs = Expr::binary(BinOp::Or, lhs, parse_bit_xor(), loc);
        }
        return lhs;
    }

    ExprPtr parse_bit_xor() {
        ExprPtr lhs = parse_bit_and();
        while (at(TokKind::Caret) || at(TokKind::TildeCaret)) {
            bool xnor = at(TokKind::TildeCaret);
            SourceLoc loc = advance().loc;
            ExprPtr rhs = parse_bit_and();
            lhs = Expr::binary(BinOp::Xor, lhs, rhs, loc);
            if (xnor) lhs = Expr::unary(UnOp::BitNot, lhs, loc);
        }
        return lhs;
    }

    ExprPtr parse_bit_and() {
        ExprPtr lhs = parse_equality();
        while (at(TokKind::Amp)) {
            SourceLoc loc = advance().loc;
            lhs = Expr::binary(BinOp::And, lhs, parse_equality(), loc);
        }
        return lhs;
    }

    ExprPtr parse_equality() {
        ExprPtr lhs = parse_relational();
        while (at(TokKind::EqEq) || at(TokKind::NotEq)) {
            BinOp op = at(TokKind::EqEq) ? BinOp::Eq : BinOp::Ne;
            SourceLoc loc = advance().loc;
            lhs = Expr::binary(op, lhs, parse_relational(), loc);
        }
        return lhs;
    }

    ExprPtr parse_relational() {
        ExprPtr lhs = parse_shift();
        while (at(TokKind::Lt) || at(TokKind::Gt) || at(TokKind::Ge) || at(TokKind::NbAssign)) {
            TokKind k = peek().kind;
            SourceLoc loc = advance().loc;
            ExprPtr rhs = parse_shift();
            switch (k) {
                case TokKind::Lt: lhs = Expr::binary(BinOp::Lt, lhs, rhs, loc); break;
                case TokKind::Gt: lhs = Expr::binary(BinOp::Gt, lhs, rhs, loc); break;
                // a >= b  ==>  !(a < b);  a <= b  ==>  !(a > b)
                case TokKind::Ge:
                    lhs = Expr::unary(UnOp::LogNot, Expr::binary(BinOp::Lt, lhs, rhs, loc), loc);
                    break;
                default:
                    lhs = Expr::unary(UnOp::LogNot, Expr::binary(BinOp::Gt, lhs, rhs, loc), loc);
                    break;
            }
        }
        return lhs;
    }

    ExprPtr parse_shift() {
        ExprPtr lhs = parse_additive();
        while (at(TokKind::Shl) || at(TokKind::Shr)) {
            BinOp op = at(TokKind::Shl) ? BinOp::Shl : BinOp::Shr;
            SourceLoc loc = advance().loc;
            lhs = Expr::binary(op, lhs, parse_additive(), loc);
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        while (at(TokKind::Plus) || at(TokKind::Minus)) {
            BinOp op = at(TokKind::Plus) ? BinOp::Add : BinOp::Sub;
            SourceLoc loc = advance().loc;
            lhs = Expr::binary(op, lhs, parse_multiplicative(), loc);
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_unary();
        while (at(TokKind::Star)) {
            SourceLoc loc = advance().loc;
            lhs = Expr::binary(BinOp::Mul, lhs, parse_unary(), loc);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        SourceLoc loc = peek().loc;
        switch (peek().kind) {
            case TokKind::Tilde: advance(); return Expr::unary(UnOp::BitNot, parse_unary(), loc);
            case TokKind::Bang: advance(); return Expr::unary(UnOp::LogNot, parse_unary(), loc);
            case TokKind::Amp: advance(); return Expr::unary(UnOp::RedAnd, parse_unary(), loc);
            case TokKind::Pipe: advance(); return Expr::unary(UnOp::RedOr, parse_unary(), loc);
            case TokKind::Caret: advance(); return Expr::unary(UnOp::RedXor, parse_unary(), loc);
            case TokKind::Nand: advance(); return Expr::unary(UnOp::RedNand, parse_unary(), loc);
            case TokKind::Nor: advance(); return Expr::unary(UnOp::RedNor, parse_unary(), loc);
            case TokKind::TildeCaret:
                advance();
                return Expr::unary(UnOp::RedXnor, parse_unary(), loc);
            default: return parse_primary();
        }
    }

    ExprPtr parse_primary() {
        reject_unsupported();
        SourceLoc loc = peek().loc;
        if (at(TokKind::Number)) {
            const Token& t = advance();
            return Expr::constant(t.value, t.width, t.loc);
        }
        if (accept(TokKind::LParen)) {
            ExprPtr e = parse_expr();
            expect(TokKind::RParen, "to close parenthesized expression");
            return e;
        }
        if (accept(TokKind::LBrace)) {
            // {n{x}} replication or {a, b, ...} concatenation.
            ExprPtr first = parse_expr();
            if (at(TokKind::LBrace)) {
                auto count = const_fold(resolve_expr_for_const(first));
                if (count->kind != ExprKind::Const)
                    throw DiagError("replication count must be constant", loc);
                advance();
                ExprPtr inner = parse_expr();
                expect(TokKind::RBrace, "to close replication operand");
                expect(TokKind::RBrace, "to close replication");
                if (count->value == 0 || count->value > 64)
                    throw DiagError("replication count out of range", loc);
                std::vector<ExprPtr> parts(count->value, inner);
                return Expr::concat(std::move(parts), loc);
            }
            std::vector<ExprPtr> parts{first};
            while (accept(TokKind::Comma)) parts.push_back(parse_expr());
            expect(TokKind::RBrace, "to close concatenation");
            return Expr::concat(std::move(parts), loc);
        }
        if (at(TokKind::Ident)) {
            const Token& t = advance();
            // Parameters fold to constants immediately.
            auto pit = mod_->params.find(t.text);
            if (pit != mod_->params.end()) {
                int w = mod_->param_widths.count(t.text) ? mod_->param_widths[t.text] : 32;
                return Expr::constant(pit->second, w, t.loc);
            }
            ExprPtr base = Expr::ident(t.text, 0, t.loc);
            if (accept(TokKind::LBracket)) {
                ExprPtr first = parse_expr();
                if (accept(TokKind::Colon)) {
                    auto hi = const_fold(resolve_expr_for_const(first));
                    auto lo = const_fold(resolve_expr_for_const(parse_expr()));
                    expect(TokKind::RBracket, "to close part-select");
                    if (hi->kind != ExprKind::Const || lo->kind != ExprKind::Const)
                        throw DiagError("part-select bounds must be constant", loc);
                    if (static_cast<int>(hi->value) < static_cast<int>(lo->value))
                        throw DiagError("descending part-select bounds", loc);
                    return Expr::part_select(base, static_cast<int>(hi->value),
                                             static_cast<int>(lo->value), t.loc);
                }
                expect(TokKind::RBracket, "to close bit-select");
                auto cidx = const_fold(resolve_expr_for_const_noerror(first));
                return Expr::bit_select(base, cidx ? cidx : first, t.loc);
            }
            return base;
        }
        throw DiagError(std::string("unexpected ") + tok_kind_name(peek().kind) +
                            " in expression",
                        loc);
    }

    // Like resolve_expr_for_const but returns null when the expression is not
    // constant (dynamic bit-select indices are allowed).
    ExprPtr resolve_expr_for_const_noerror(const ExprPtr& e) {
        try {
            auto folded = const_fold(resolve_expr_for_const(e));
            if (folded->kind == ExprKind::Const) return folded;
        } catch (const DiagError&) {
        }
        return nullptr;
    }

    // -- post-parse checks ---------------------------------------------------

    void check_duplicate_names(const ModuleDecl& m) {
        std::set<std::string> seen;
        auto check = [&](const std::string& n, SourceLoc loc) {
            if (!seen.insert(n).second)
                throw DiagError("duplicate declaration of '" + n + "'", loc);
        };
        for (const auto& p : m.ports) check(p.name, p.loc);
        for (const auto& d : m.nets) check(d.name, d.loc);
        for (const auto& [name, _] : m.params)
            if (seen.count(name))
                throw DiagError("parameter '" + name + "' collides with a net", m.loc);
    }

    void check_block_styles(const StmtPtr& s, bool clocked, SourceLoc blk_loc);

    void check_block_assignment_styles(const ModuleDecl& m) {
        for (const auto& item : m.items) {
            if (item.kind != ItemKind::Always) continue;
            check_block_styles(item.always.body, item.always.clocked, item.always.loc);
        }
    }

    void resolve_module_widths(ModuleDecl& m);
    ExprPtr resolve_widths(const ExprPtr& e, const ModuleDecl& m);
    void resolve_stmt_widths(StmtPtr& s, const ModuleDecl& m);
};

void Parser::check_block_styles(const StmtPtr& s, bool clocked, SourceLoc blk_loc) {
    if (!s) return;
    switch (s->kind) {
        case StmtKind::Assign:
            if (clocked && !s->nonblocking)
                throw DiagError("blocking assignment in a clocked block", s->loc);
            if (!clocked && s->nonblocking)
                throw DiagError("nonblocking assignment in a combinational block", s->loc);
            break;
        case StmtKind::Block:
            for (const auto& c : s->stmts) check_block_styles(c, clocked, blk_loc);
            break;
        case StmtKind::If:
            check_block_styles(s->then_branch, clocked, blk_loc);
            check_block_styles(s->else_branch, clocked, blk_loc);
            break;
        case StmtKind::Case:
            for (const auto& arm : s->arms) check_block_styles(arm.body, clocked, blk_loc);
            break;
    }
}

ExprPtr Parser::resolve_widths(const ExprPtr& e, const ModuleDecl& m) {
    if (!e) return e;
    switch (e->kind) {
        case ExprKind::Const: return e;
        case ExprKind::Ident: {
            int w = m.width_of(e->name);
            if (w < 0) throw DiagError("undeclared identifier '" + e->name + "'", e->loc);
            return Expr::ident(e->name, w, e->loc);
        }
        case ExprKind::BitSel: {
            auto base = resolve_widths(e->args[0], m);
            auto idx = resolve_widths(e->args[1], m);
            if (idx->kind == ExprKind::Const &&
                static_cast<int>(idx->value) >= base->width)
                throw DiagError("bit-select index out of range for '" + e->name + "'", e->loc);
            return Expr::bit_select(base, idx, e->loc);
        }
        case ExprKind::PartSel: {
            auto base = resolve_widths(e->args[0], m);
            if (e->hi >= base->width)
                throw DiagError("part-select out of range for '" + e->name + "'", e->loc);
            return Expr::part_select(base, e->hi, e->lo, e->loc);
        }
        case ExprKind::Concat: {
            std::vector<ExprPtr> parts;
            int total = 0;
            for (const auto& a : e->args) {
                parts.push_back(resolve_widths(a, m));
                total += parts.back()->width;
            }
            if (total > 64)
                throw DiagError("concatenation wider than the supported 64 bits", e->loc);
            return Expr::concat(std::move(parts), e->loc);
        }
        case ExprKind::Unary:
            return Expr::unary(e->un_op, resolve_widths(e->args[0], m), e->loc);
        case ExprKind::Binary:
            return Expr::binary(e->bin_op, resolve_widths(e->args[0], m),
                                resolve_widths(e->args[1], m), e->loc);
        case ExprKind::Ternary:
            return Expr::ternary(resolve_widths(e->args[0], m), resolve_widths(e->args[1], m),
                                 resolve_widths(e->args[2], m), e->loc);
    }
    return e;
}

void Parser::resolve_stmt_widths(StmtPtr& s, const ModuleDecl& m) {
    if (!s) return;
    switch (s->kind) {
        case StmtKind::Block:
            for (auto& c : s->stmts) resolve_stmt_widths(c, m);
            break;
        case StmtKind::If:
            s->cond = resolve_widths(s->cond, m);
            resolve_stmt_widths(s->then_branch, m);
            resolve_stmt_widths(s->else_branch, m);
            break;
        case StmtKind::Case:
            s->case_expr = resolve_widths(s->case_expr, m);
            for (auto& arm : s->arms) {
                for (auto& l : arm.labels) {
                    l = const_fold(resolve_widths(l, m));
                    if (l->kind != ExprKind::Const)
                        throw DiagError("case labels must be constant", s->loc);
                }
                resolve_stmt_widths(arm.body, m);
            }
            break;
        case StmtKind::Assign: {
            int w = m.width_of(s->target.name);
            if (w < 0)
                throw DiagError("undeclared assignment target '" + s->target.name + "'",
                                s->target.loc);
            if (s->target.hi >= 0 && s->target.hi >= w)
                throw DiagError("target select out of range for '" + s->target.name + "'",
                                s->target.loc);
            s->rhs = resolve_widths(s->rhs, m);
            break;
        }
    }
}

void Parser::resolve_module_widths(ModuleDecl& m) {
    for (auto& item : m.items) {
        switch (item.kind) {
            case ItemKind::ContAssign: {
                int w = m.width_of(item.cont.target.name);
                if (w < 0)
                    throw DiagError("undeclared assignment target '" + item.cont.target.name + "'",
                                    item.cont.loc);
                if (item.cont.target.hi >= 0 && item.cont.target.hi >= w)
                    throw DiagError("target select out of range for '" +
                                        item.cont.target.name + "'",
                                    item.cont.loc);
                item.cont.rhs = resolve_widths(item.cont.rhs, m);
                break;
            }
            case ItemKind::Always: {
                if (item.always.clocked && !m.is_declared(item.always.clock))
                    throw DiagError("undeclared clock '" + item.always.clock + "'",
                                    item.always.loc);
                if (item.always.async_reset && !m.is_declared(item.always.async_reset->signal))
                    throw DiagError("undeclared reset '" + item.always.async_reset->signal + "'",
                                    item.always.loc);
                resolve_stmt_widths(item.always.body, m);
                break;
            }
            case ItemKind::Instance:
                for (auto& [port, expr] : item.instance.connections)
                    if (expr) expr = resolve_widths(expr, m);
                break;
        }
    }
}

} // namespace

std::vector<ModuleDecl> parse_modules(const std::vector<Token>& tokens) {
    Parser p(tokens);
    return p.run();
}

SourceUnit parse_unit(const std::vector<std::pair<std::string, std::string>>& files,
                      const std::string& top) {
    SourceUnit unit;
    unit.top_module = top;
    for (const auto& [path, text] : files) {
        std::vector<ModuleDecl> mods;
        try {
            mods = parse_modules(tokenize(text));
        } catch (DiagError& e) {
            if (e.file.empty()) e.file = path;
            throw;
        }
        for (auto& m : mods) {
            if (unit.find_module(m.name))
                throw DiagError("duplicate module '" + m.name + "'", m.loc, path);
            unit.modules.push_back(std::move(m));
        }
    }
    if (unit.modules.empty()) throw DiagError("no modules parsed");
    if (unit.top_module.empty()) unit.top_module = unit.modules.front().name;
    if (!unit.find_module(unit.top_module))
        throw DiagError("top module '" + unit.top_module + "' not found");
    return unit;
}

SourceUnit parse_source(const std::string& text, const std::string& top) {
    return parse_unit({{"<memory>", text}}, top);
}

} // namespace rtlleak
