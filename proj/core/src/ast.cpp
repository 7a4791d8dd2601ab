// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/ast.hpp"

#include <algorithm>
#include <sstream>

namespace rtlleak {

uint64_t mask_width(uint64_t v, int width) {
    if (width >= 64) return v;
    if (width <= 0) return 0;
    return v & ((uint64_t(1) << width) - 1);
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

ExprPtr Expr::constant(uint64_t value, int width, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Const;
    e->width = width;
    e->value = mask_width(value, width);
    e->loc = loc;
    return e;
}

ExprPtr Expr::ident(std::string name, int width, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ident;
    e->name = std::move(name);
    e->width = width;
    e->loc = loc;
    return e;
}

ExprPtr Expr::bit_select(ExprPtr base, ExprPtr index, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BitSel;
    e->name = base->name;
    e->width = 1;
    e->args = {std::move(base), std::move(index)};
    e->loc = loc;
    return e;
}

ExprPtr Expr::part_select(ExprPtr base, int hi, int lo, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::PartSel;
    e->name = base->name;
    e->hi = hi;
    e->lo = lo;
    e->width = hi - lo + 1;
    e->args = {std::move(base)};
    e->loc = loc;
    return e;
}

ExprPtr Expr::concat(std::vector<ExprPtr> parts, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Concat;
    int w = 0;
    for (const auto& p : parts) w += p->width;
    e->width = w;
    e->args = std::move(parts);
    e->loc = loc;
    return e;
}

ExprPtr Expr::unary(UnOp op, ExprPtr arg, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->un_op = op;
    e->width = (op == UnOp::BitNot) ? arg->width : 1;
    e->args = {std::move(arg)};
    e->loc = loc;
    return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr lhs, ExprPtr rhs, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->bin_op = op;
    switch (op) {
        case BinOp::Eq:
        case BinOp::Ne:
        case BinOp::Lt:
        case BinOp::Gt:
            e->width = 1;
            break;
        case BinOp::Shl:
        case BinOp::Shr:
            e->width = lhs->width;
            break;
        default:
            e->width = std::max(lhs->width, rhs->width);
            break;
    }
    e->args = {std::move(lhs), std::move(rhs)};
    e->loc = loc;
    return e;
}

ExprPtr Expr::ternary(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ternary;
    e->width = std::max(then_e->width, else_e->width);
    e->args = {std::move(cond), std::move(then_e), std::move(else_e)};
    e->loc = loc;
    return e;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

const char* un_op_str(UnOp op) {
    switch (op) {
        case UnOp::BitNot: return "~";
        case UnOp::LogNot: return "!";
        case UnOp::RedAnd: return "&";
        case UnOp::RedOr: return "|";
        case UnOp::RedXor: return "^";
        case UnOp::RedNand: return "~&";
        case UnOp::RedNor: return "~|";
        case UnOp::RedXnor: return "~^";
    }
    return "?";
}

const char* bin_op_str(BinOp op) {
    switch (op) {
        case BinOp::And: return "&";
        case BinOp::Or: return "|";
        case BinOp::Xor: return "^";
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Gt: return ">";
        case BinOp::Shl: return "<<";
        case BinOp::Shr: return ">>";
    }
    return "?";
}

// Matches the parser's precedence ladder; higher binds tighter.
int bin_prec(BinOp op) {
    switch (op) {
        case BinOp::Mul: return 7;
        case BinOp::Add:
        case BinOp::Sub: return 6;
        case BinOp::Shl:
        case BinOp::Shr: return 5;
        case BinOp::Lt:
        case BinOp::Gt: return 4;
        case BinOp::Eq:
        case BinOp::Ne: return 3;
        case BinOp::And: return 2;
        case BinOp::Xor: return 1;
        case BinOp::Or: return 0;
    }
    return 0;
}

void print_expr(std::ostringstream& os, const ExprPtr& e, int parent_prec) {
    switch (e->kind) {
        case ExprKind::Const:
            os << e->width << "'d" << e->value;
            break;
        case ExprKind::Ident:
            os << e->name;
            break;
        case ExprKind::BitSel:
            os << e->name << "[";
            print_expr(os, e->args[1], -1);
            os << "]";
            break;
        case ExprKind::PartSel:
            os << e->name << "[" << e->hi << ":" << e->lo << "]";
            break;
        case ExprKind::Concat: {
            os << "{";
            for (size_t i = 0; i < e->args.size(); ++i) {
                if (i) os << ", ";
                print_expr(os, e->args[i], -1);
            }
            os << "}";
            break;
        }
        case ExprKind::Unary: {
            os << un_op_str(e->un_op);
            const auto& a = e->args[0];
            bool paren = a->kind == ExprKind::Binary || a->kind == ExprKind::Ternary ||
                         a->kind == ExprKind::Unary;
            if (paren) os << "(";
            print_expr(os, a, 100);
            if (paren) os << ")";
            break;
        }
        case ExprKind::Binary: {
            int prec = bin_prec(e->bin_op);
            bool paren = prec < parent_prec;
            if (paren) os << "(";
            print_expr(os, e->args[0], prec);
            os << " " << bin_op_str(e->bin_op) << " ";
            print_expr(os, e->args[1], prec + 1);
            if (paren) os << ")";
            break;
        }
        case ExprKind::Ternary: {
            bool paren = parent_prec >= 0;
            if (paren) os << "(";
            print_expr(os, e->args[0], 0);
            os << " ? ";
            print_expr(os, e->args[1], -1);
            os << " : ";
            print_expr(os, e->args[2], -1);
            if (paren) os << ")";
            break;
        }
    }
}

} // namespace

std::string to_string(const ExprPtr& e) {
    std::ostringstream os;
    print_expr(os, e, -1);
    return os.str();
}

// ---------------------------------------------------------------------------
// Equality / support / folding / evaluation
// ---------------------------------------------------------------------------

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->width != b->width) return false;
    switch (a->kind) {
        case ExprKind::Const: return a->value == b->value;
        case ExprKind::Ident: return a->name == b->name;
        case ExprKind::BitSel:
            return a->name == b->name && expr_equal(a->args[1], b->args[1]);
        case ExprKind::PartSel:
            return a->name == b->name && a->hi == b->hi && a->lo == b->lo;
        case ExprKind::Unary:
            if (a->un_op != b->un_op) return false;
            break;
        case ExprKind::Binary:
            if (a->bin_op != b->bin_op) return false;
            break;
        default: break;
    }
    if (a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!expr_equal(a->args[i], b->args[i])) return false;
    return true;
}

void collect_support(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == ExprKind::Ident) {
        out.insert(e->name);
        return;
    }
    if (e->kind == ExprKind::BitSel || e->kind == ExprKind::PartSel) out.insert(e->name);
    for (const auto& a : e->args) {
        // Select bases are Ident children already covered via e->name.
        if ((e->kind == ExprKind::BitSel || e->kind == ExprKind::PartSel) && a == e->args[0])
            continue;
        collect_support(a, out);
    }
}

std::set<std::string> support(const ExprPtr& e) {
    std::set<std::string> s;
    collect_support(e, s);
    return s;
}

namespace {

uint64_t apply_unary(UnOp op, uint64_t v, int width) {
    switch (op) {
        case UnOp::BitNot: return mask_width(~v, width);
        case UnOp::LogNot: return v == 0 ? 1 : 0;
        case UnOp::RedAnd: return v == mask_width(~uint64_t(0), width) ? 1 : 0;
        case UnOp::RedOr: return v != 0 ? 1 : 0;
        case UnOp::RedXor: {
            uint64_t x = v;
            x ^= x >> 32; x ^= x >> 16; x ^= x >> 8; x ^= x >> 4; x ^= x >> 2; x ^= x >> 1;
            return x & 1;
        }
        case UnOp::RedNand: return v == mask_width(~uint64_t(0), width) ? 0 : 1;
        case UnOp::RedNor: return v == 0 ? 1 : 0;
        case UnOp::RedXnor: {
            uint64_t x = v;
            x ^= x >> 32; x ^= x >> 16; x ^= x >> 8; x ^= x >> 4; x ^= x >> 2; x ^= x >> 1;
            return (~x) & 1;
        }
    }
    return 0;
}

uint64_t apply_binary(BinOp op, uint64_t a, uint64_t b, int width) {
    switch (op) {
        case BinOp::And: return mask_width(a & b, width);
        case BinOp::Or: return mask_width(a | b, width);
        case BinOp::Xor: return mask_width(a ^ b, width);
        case BinOp::Add: return mask_width(a + b, width);
        case BinOp::Sub: return mask_width(a - b, width);
        case BinOp::Mul: return mask_width(a * b, width);
        case BinOp::Eq: return a == b ? 1 : 0;
        case BinOp::Ne: return a != b ? 1 : 0;
        case BinOp::Lt: return a < b ? 1 : 0;
        case BinOp::Gt: return a > b ? 1 : 0;
        case BinOp::Shl: return b >= 64 ? 0 : mask_width(a << b, width);
        case BinOp::Shr: return b >= 64 ? 0 : mask_width(a >> b, width);
    }
    return 0;
}

} // namespace

uint64_t eval_expr(const ExprPtr& e,
                   const std::function<uint64_t(const std::string&)>& env) {
    switch (e->kind) {
        case ExprKind::Const: return e->value;
        case ExprKind::Ident: return mask_width(env(e->name), e->width);
        case ExprKind::BitSel: {
            uint64_t base = eval_expr(e->args[0], env);
            uint64_t idx = eval_expr(e->args[1], env);
            if (idx >= 64) return 0;
            return (base >> idx) & 1;
        }
        case ExprKind::PartSel: {
            uint64_t base = eval_expr(e->args[0], env);
            return mask_width(base >> e->lo, e->width);
        }
        case ExprKind::Concat: {
            uint64_t v = 0;
            for (const auto& a : e->args) {
                v = (a->width >= 64) ? eval_expr(a, env)
                                     : ((v << a->width) | eval_expr(a, env));
            }
            return mask_width(v, e->width);
        }
        case ExprKind::Unary:
            return apply_unary(e->un_op, eval_expr(e->args[0], env), e->args[0]->width);
        case ExprKind::Binary:
            return apply_binary(e->bin_op, eval_expr(e->args[0], env),
                                eval_expr(e->args[1], env), e->width);
        case ExprKind::Ternary:
            return eval_expr(e->args[0], env) != 0
                       ? mask_width(eval_expr(e->args[1], env), e->width)
                       : mask_width(eval_expr(e->args[2], env), e->width);
    }
    return 0;
}

ExprPtr const_fold(const ExprPtr& e) {
    if (!e) return e;
    if (e->kind == ExprKind::Const || e->kind == ExprKind::Ident) return e;

    std::vector<ExprPtr> folded;
    folded.reserve(e->args.size());
    bool all_const = true;
    for (const auto& a : e->args) {
        auto f = const_fold(a);
        if (f->kind != ExprKind::Const) all_const = false;
        folded.push_back(std::move(f));
    }
    if (all_const) {
        auto copy = std::make_shared<Expr>(*e);
        copy->args = folded;
        uint64_t v = eval_expr(copy, [](const std::string&) -> uint64_t { return 0; });
        return Expr::constant(v, e->width, e->loc);
    }
    auto copy = std::make_shared<Expr>(*e);
    copy->args = std::move(folded);
    return copy;
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& map) {
    if (!e) return e;
    if (e->kind == ExprKind::Ident) {
        auto it = map.find(e->name);
        return it != map.end() ? it->second : e;
    }
    if (e->kind == ExprKind::BitSel || e->kind == ExprKind::PartSel) {
        auto it = map.find(e->name);
        if (it != map.end() && it->second->kind != ExprKind::Ident)
            throw DiagError("cannot substitute a compound expression under a select of '" +
                            e->name + "'");
        auto copy = std::make_shared<Expr>(*e);
        if (it != map.end()) {
            copy->name = it->second->name;
            copy->args[0] = it->second;
        }
        if (e->kind == ExprKind::BitSel) copy->args[1] = substitute(e->args[1], map);
        return copy;
    }
    auto copy = std::make_shared<Expr>(*e);
    for (auto& a : copy->args) a = substitute(a, map);
    return copy;
}

// ---------------------------------------------------------------------------
// Statements & module printing
// ---------------------------------------------------------------------------

namespace {

std::string lvalue_str(const LValue& lv) {
    if (lv.hi < 0) return lv.name;
    if (lv.hi == lv.lo) return lv.name + "[" + std::to_string(lv.hi) + "]";
    return lv.name + "[" + std::to_string(lv.hi) + ":" + std::to_string(lv.lo) + "]";
}

std::string ind(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

} // namespace

std::string to_string(const StmtPtr& s, int indent) {
    if (!s) return "";
    std::ostringstream os;
    switch (s->kind) {
        case StmtKind::Block: {
            os << ind(indent) << "begin\n";
            for (const auto& c : s->stmts) os << to_string(c, indent + 1);
            os << ind(indent) << "end\n";
            break;
        }
        case StmtKind::If: {
            os << ind(indent) << "if (" << to_string(s->cond) << ")\n";
            os << to_string(s->then_branch, indent + 1);
            if (s->else_branch) {
                os << ind(indent) << "else\n";
                os << to_string(s->else_branch, indent + 1);
            }
            break;
        }
        case StmtKind::Case: {
            os << ind(indent) << "case (" << to_string(s->case_expr) << ")\n";
            for (const auto& arm : s->arms) {
                os << ind(indent + 1);
                if (arm.labels.empty()) {
                    os << "default";
                } else {
                    for (size_t i = 0; i < arm.labels.size(); ++i) {
                        if (i) os << ", ";
                        os << to_string(arm.labels[i]);
                    }
                }
                os << ":\n" << to_string(arm.body, indent + 2);
            }
            os << ind(indent) << "endcase\n";
            break;
        }
        case StmtKind::Assign: {
            os << ind(indent) << lvalue_str(s->target) << (s->nonblocking ? " <= " : " = ")
               << to_string(s->rhs) << ";\n";
            break;
        }
    }
    return os.str();
}

int ModuleDecl::width_of(const std::string& n) const {
    for (const auto& p : ports)
        if (p.name == n) return p.width;
    for (const auto& d : nets)
        if (d.name == n) return d.width;
    return -1;
}

bool ModuleDecl::is_declared(const std::string& n) const { return width_of(n) >= 0; }

const PortDecl* ModuleDecl::find_port(const std::string& n) const {
    for (const auto& p : ports)
        if (p.name == n) return &p;
    return nullptr;
}

const ModuleDecl* SourceUnit::find_module(const std::string& name) const {
    for (const auto& m : modules)
        if (m.name == name) return &m;
    return nullptr;
}

std::string to_string(const ModuleDecl& m) {
    std::ostringstream os;
    os << "module " << m.name << "(";
    for (size_t i = 0; i < m.ports.size(); ++i) {
        const auto& p = m.ports[i];
        if (i) os << ", ";
        os << (p.dir == PortDir::Input ? "input " : "output ");
        if (p.is_reg) os << "reg ";
        if (p.width > 1) os << "[" << p.width - 1 << ":0] ";
        os << p.name;
    }
    os << ");\n";
    for (const auto& [name, value] : m.params) {
        int w = 32;
        auto it = m.param_widths.find(name);
        if (it != m.param_widths.end()) w = it->second;
        os << "  localparam " << name << " = " << w << "'d" << value << ";\n";
    }
    for (const auto& d : m.nets) {
        os << "  " << (d.kind == NetKind::Wire ? "wire" : "reg") << " ";
        if (d.width > 1) os << "[" << d.width - 1 << ":0] ";
        os << d.name << ";\n";
    }
    for (const auto& item : m.items) {
        switch (item.kind) {
            case ItemKind::ContAssign:
                os << "  assign " << lvalue_str(item.cont.target) << " = "
                   << to_string(item.cont.rhs) << ";\n";
                break;
            case ItemKind::Always: {
                const auto& a = item.always;
                os << "  always @(";
                if (a.clocked) {
                    os << (a.posedge ? "posedge " : "negedge ") << a.clock;
                    if (a.async_reset)
                        os << " or " << (a.async_reset->negedge ? "negedge " : "posedge ")
                           << a.async_reset->signal;
                } else {
                    os << "*";
                }
                os << ")\n";
                os << to_string(a.body, 2);
                break;
            }
            case ItemKind::Instance: {
                const auto& inst = item.instance;
                os << "  " << inst.module_name << " " << inst.instance_name << "(";
                for (size_t i = 0; i < inst.connections.size(); ++i) {
                    if (i) os << ", ";
                    os << "." << inst.connections[i].first << "("
                       << to_string(inst.connections[i].second) << ")";
                }
                os << ");\n";
                break;
            }
        }
    }
    os << "endmodule\n";
    return os.str();
}

bool stmt_equal(const StmtPtr& a, const StmtPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case StmtKind::Block: {
            if (a->stmts.size() != b->stmts.size()) return false;
            for (size_t i = 0; i < a->stmts.size(); ++i)
                if (!stmt_equal(a->stmts[i], b->stmts[i])) return false;
            return true;
        }
        case StmtKind::If:
            return expr_equal(a->cond, b->cond) && stmt_equal(a->then_branch, b->then_branch) &&
                   stmt_equal(a->else_branch, b->else_branch);
        case StmtKind::Case: {
            if (!expr_equal(a->case_expr, b->case_expr)) return false;
            if (a->arms.size() != b->arms.size()) return false;
            for (size_t i = 0; i < a->arms.size(); ++i) {
                if (a->arms[i].labels.size() != b->arms[i].labels.size()) return false;
                for (size_t j = 0; j < a->arms[i].labels.size(); ++j)
                    if (!expr_equal(a->arms[i].labels[j], b->arms[i].labels[j])) return false;
                if (!stmt_equal(a->arms[i].body, b->arms[i].body)) return false;
            }
            return true;
        }
        case StmtKind::Assign:
            return a->target.name == b->target.name && a->target.hi == b->target.hi &&
                   a->target.lo == b->target.lo && a->nonblocking == b->nonblocking &&
                   expr_equal(a->rhs, b->rhs);
    }
    return false;
}

bool module_equal(const ModuleDecl& a, const ModuleDecl& b) {
    if (a.name != b.name || a.ports.size() != b.ports.size() || a.nets.size() != b.nets.size() ||
        a.items.size() != b.items.size() || a.params != b.params)
        return false;
    for (size_t i = 0; i < a.ports.size(); ++i) {
        const auto &p = a.ports[i], &q = b.ports[i];
        if (p.name != q.name || p.dir != q.dir || p.width != q.width || p.is_reg != q.is_reg)
            return false;
    }
    for (size_t i = 0; i < a.nets.size(); ++i) {
        const auto &p = a.nets[i], &q = b.nets[i];
        if (p.name != q.name || p.kind != q.kind || p.width != q.width) return false;
    }
    for (size_t i = 0; i < a.items.size(); ++i) {
        const auto &x = a.items[i], &y = b.items[i];
        if (x.kind != y.kind) return false;
        switch (x.kind) {
            case ItemKind::ContAssign:
                if (x.cont.target.name != y.cont.target.name || x.cont.target.hi != y.cont.target.hi ||
                    x.cont.target.lo != y.cont.target.lo || !expr_equal(x.cont.rhs, y.cont.rhs))
                    return false;
                break;
            case ItemKind::Always: {
                const auto &p = x.always, &q = y.always;
                if (p.clocked != q.clocked || p.posedge != q.posedge || p.clock != q.clock)
                    return false;
                if (p.async_reset.has_value() != q.async_reset.has_value()) return false;
                if (p.async_reset &&
                    (p.async_reset->negedge != q.async_reset->negedge ||
                     p.async_reset->signal != q.async_reset->signal))
                    return false;
                if (!stmt_equal(p.body, q.body)) return false;
                break;
            }
            case ItemKind::Instance: {
                const auto &p = x.instance, &q = y.instance;
                if (p.module_name != q.module_name || p.instance_name != q.instance_name ||
                    p.connections.size() != q.connections.size())
                    return false;
                for (size_t j = 0; j < p.connections.size(); ++j) {
                    if (p.connections[j].first != q.connections[j].first ||
                        !expr_equal(p.connections[j].second, q.connections[j].second))
                        return false;
                }
                break;
            }
        }
    }
    return true;
}

} // namespace rtlleak
