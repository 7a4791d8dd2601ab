// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtlleak/diag.hpp"

namespace rtlleak {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind {
    Const,    // value, width
    Ident,    // name
    BitSel,   // args[0] = base ident, args[1] = index expr
    PartSel,  // args[0] = base ident, [hi:lo] constant bounds
    Concat,   // args...
    Unary,    // op, args[0]
    Binary,   // op, args[0], args[1]
    Ternary,  // args[0] ? args[1] : args[2]
};

enum class UnOp { BitNot, LogNot, RedAnd, RedOr, RedXor, RedNand, RedNor, RedXnor };
enum class BinOp { And, Or, Xor, Add, Sub, Mul, Eq, Ne, Lt, Gt, Shl, Shr };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Widths are filled in by width resolution during
/// parsing/elaboration (bottom-up, deterministic).
struct Expr {
    ExprKind kind;
    int width = 0;          // resolved width in bits
    uint64_t value = 0;     // Const
    std::string name;       // Ident / base of selects
    int hi = -1, lo = -1;   // PartSel bounds
    UnOp un_op = UnOp::BitNot;
    BinOp bin_op = BinOp::And;
    std::vector<ExprPtr> args;
    SourceLoc loc;

    static ExprPtr constant(uint64_t value, int width, SourceLoc loc = {});
    static ExprPtr ident(std::string name, int width, SourceLoc loc = {});
    static ExprPtr bit_select(ExprPtr base, ExprPtr index, SourceLoc loc = {});
    static ExprPtr part_select(ExprPtr base, int hi, int lo, SourceLoc loc = {});
    static ExprPtr concat(std::vector<ExprPtr> parts, SourceLoc loc = {});
    static ExprPtr unary(UnOp op, ExprPtr arg, SourceLoc loc = {});
    static ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc = {});
    static ExprPtr ternary(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SourceLoc loc = {});
};

/// Canonical single-line rendering with minimal parentheses. Constants print
/// as `<width>'d<value>`. Reparsing the output yields a structurally equal
/// expression.
std::string to_string(const ExprPtr& e);

/// Structural equality: same node kinds, operators, names, widths, values.
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

/// Signals read by the expression (selects count their index expressions).
void collect_support(const ExprPtr& e, std::set<std::string>& out);
std::set<std::string> support(const ExprPtr& e);

/// Folds constant subexpressions. Identifier-free expressions collapse to a
/// single Const. `x * 1`, `x + 0`, `x ^ 0` etc. are left alone except for
/// whole-constant collapse; normalization for exemption checks uses this.
ExprPtr const_fold(const ExprPtr& e);

/// Evaluate with an environment giving each identifier's value (already
/// masked to its width). Throws if an identifier is missing.
uint64_t eval_expr(const ExprPtr& e,
                   const std::function<uint64_t(const std::string&)>& env);

/// Replace every identifier occurrence per `map` (name -> replacement expr).
/// Select bases must map to plain identifiers.
ExprPtr substitute(const ExprPtr& e,
                   const std::map<std::string, ExprPtr>& map);

uint64_t mask_width(uint64_t v, int width);

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

enum class StmtKind { Block, If, Case, Assign };

/// Assignment target: whole signal or a constant bit/part select.
struct LValue {
    std::string name;
    int hi = -1; // -1,-1 = whole signal
    int lo = -1;
    SourceLoc loc;
};

struct CaseArm {
    std::vector<ExprPtr> labels; // empty = default arm
    StmtPtr body;
};

struct Stmt {
    StmtKind kind;
    int id = 0; // unique per module, assigned by the parser
    SourceLoc loc;

    // Block
    std::vector<StmtPtr> stmts;
    // If
    ExprPtr cond;
    StmtPtr then_branch;
    StmtPtr else_branch; // may be null
    // Case
    ExprPtr case_expr;
    std::vector<CaseArm> arms;
    // Assign
    LValue target;
    ExprPtr rhs;
    bool nonblocking = false;
};

// ---------------------------------------------------------------------------
// Module structure
// ---------------------------------------------------------------------------

enum class PortDir { Input, Output };
enum class NetKind { Wire, Reg };

struct PortDecl {
    std::string name;
    PortDir dir = PortDir::Input;
    int width = 1;
    bool is_reg = false; // `output reg`
    SourceLoc loc;
};

struct NetDecl {
    std::string name;
    NetKind kind = NetKind::Wire;
    int width = 1;
    SourceLoc loc;
};

struct ContAssign {
    LValue target;
    ExprPtr rhs;
    int stmt_id = 0;
    SourceLoc loc;
};

struct AsyncReset {
    bool negedge = false; // negedge = active-low
    std::string signal;
};

struct AlwaysBlock {
    bool clocked = false;
    bool posedge = true;
    std::string clock; // clocked blocks only
    std::optional<AsyncReset> async_reset;
    StmtPtr body;
    SourceLoc loc;
};

struct Instance {
    std::string module_name;
    std::string instance_name;
    // Named connections only after parsing normalizes positional ones.
    std::vector<std::pair<std::string, ExprPtr>> connections;
    SourceLoc loc;
};

enum class ItemKind { ContAssign, Always, Instance };

struct DesignItem {
    ItemKind kind;
    ContAssign cont;
    AlwaysBlock always;
    Instance instance;
};

struct ModuleDecl {
    std::string name;
    std::vector<PortDecl> ports;
    std::vector<NetDecl> nets; // non-port nets
    std::vector<DesignItem> items;
    std::map<std::string, uint64_t> params; // localparam/parameter values
    std::map<std::string, int> param_widths;
    SourceLoc loc;

    /// Width of a declared name (port or net); -1 if undeclared.
    int width_of(const std::string& name) const;
    bool is_declared(const std::string& name) const;
    const PortDecl* find_port(const std::string& name) const;
};

struct SourceUnit {
    // (path, module list) per file, flattened into one table.
    std::vector<ModuleDecl> modules;
    std::string top_module;

    const ModuleDecl* find_module(const std::string& name) const;
};

/// Canonical pretty-print of a full module (used by the round-trip property
/// and golden tests).
std::string to_string(const ModuleDecl& m);
std::string to_string(const StmtPtr& s, int indent);

/// Structural equality over whole modules (ignores source locations).
bool module_equal(const ModuleDecl& a, const ModuleDecl& b);
bool stmt_equal(const StmtPtr& a, const StmtPtr& b);

} // namespace rtlleak
