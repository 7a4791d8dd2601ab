// Copyright rtlleak contributors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "rtlleak/elaborate.hpp"

#include <set>
#include <vector>

namespace rtlleak {

namespace {

ExprPtr rename_expr(const ExprPtr& e, const std::string& prefix) {
    if (!e) return e;
    if (e->kind == ExprKind::Ident) return Expr::ident(prefix + e->name, e->width, e->loc);
    if (e->kind == ExprKind::BitSel || e->kind == ExprKind::PartSel) {
        auto copy = std::make_shared<Expr>(*e);
        copy->name = prefix + e->name;
        copy->args[0] = rename_expr(e->args[0], prefix);
        if (e->kind == ExprKind::BitSel) copy->args[1] = rename_expr(e->args[1], prefix);
        return copy;
    }
    auto copy = std::make_shared<Expr>(*e);
    for (auto& a : copy->args) a = rename_expr(a, prefix);
    return copy;
}

StmtPtr rename_stmt(const StmtPtr& s, const std::string& prefix) {
    if (!s) return s;
    auto copy = std::make_shared<Stmt>(*s);
    switch (s->kind) {
        case StmtKind::Block:
            for (auto& c : copy->stmts) c = rename_stmt(c, prefix);
            break;
        case StmtKind::If:
            copy->cond = rename_expr(s->cond, prefix);
            copy->then_branch = rename_stmt(s->then_branch, prefix);
            copy->else_branch = rename_stmt(s->else_branch, prefix);
            break;
        case StmtKind::Case:
            copy->case_expr = rename_expr(s->case_expr, prefix);
            for (auto& arm : copy->arms) arm.body = rename_stmt(arm.body, prefix);
            break;
        case StmtKind::Assign:
            copy->target.name = prefix + s->target.name;
            copy->rhs = rename_expr(s->rhs, prefix);
            break;
    }
    return copy;
}

struct Flattener {
    const SourceUnit& unit;
    ModuleDecl out;
    std::vector<std::string> instantiation_stack;

    void declare(const NetDecl& d) {
        if (out.is_declared(d.name))
            throw DiagError("flattened name '" + d.name + "' collides with an existing signal",
                            d.loc);
        out.nets.push_back(d);
    }

    // Copies `m`'s contents under `prefix` ("" for the top module).
    void inline_module(const ModuleDecl& m, const std::string& prefix,
                       const std::vector<std::pair<std::string, ExprPtr>>* connections,
                       SourceLoc inst_loc) {
        for (const auto& name : instantiation_stack) {
            if (name == m.name)
                throw DiagError("instantiation cycle through module '" + m.name + "'", inst_loc);
        }
        instantiation_stack.push_back(m.name);

        if (prefix.empty()) {
            out.name = m.name;
            out.ports = m.ports;
            out.params = m.params;
            out.param_widths = m.param_widths;
            for (const auto& d : m.nets) declare(d);
        } else {
            // Child ports become internal nets of the flattened module.
            for (const auto& p : m.ports) {
                NetDecl d;
                d.name = prefix + p.name;
                d.kind = p.is_reg ? NetKind::Reg : NetKind::Wire;
                d.width = p.width;
                d.loc = p.loc;
                declare(d);
            }
            for (const auto& d : m.nets) {
                NetDecl copy = d;
                copy.name = prefix + d.name;
                declare(copy);
            }
        }

        // Port connections become continuous assignments.
        if (connections) {
            std::set<std::string> connected;
            for (const auto& [port_name, expr] : *connections) {
                const PortDecl* port = m.find_port(port_name);
                if (!port)
                    throw DiagError("module '" + m.name + "' has no port '" + port_name + "'",
                                    inst_loc);
                if (!connected.insert(port_name).second)
                    throw DiagError("port '" + port_name + "' connected twice", inst_loc);
                if (!expr) {
                    if (port->dir == PortDir::Input)
                        throw DiagError("input port '" + port_name + "' left unconnected",
                                        inst_loc);
                    continue; // dangling output is fine
                }
                if (expr->width != port->width)
                    throw DiagError("port width mismatch on '" + port_name + "': port is " +
                                        std::to_string(port->width) + " bits, connection is " +
                                        std::to_string(expr->width),
                                    inst_loc);
                DesignItem item;
                item.kind = ItemKind::ContAssign;
                item.cont.loc = inst_loc;
                if (port->dir == PortDir::Input) {
                    item.cont.target.name = prefix + port_name;
                    item.cont.rhs = expr;
                } else {
                    if (expr->kind != ExprKind::Ident)
                        throw DiagError("output port '" + port_name +
                                            "' must connect to a plain signal",
                                        inst_loc);
                    item.cont.target.name = expr->name;
                    item.cont.rhs = Expr::ident(prefix + port_name, port->width, inst_loc);
                }
                out.items.push_back(std::move(item));
            }
            for (const auto& p : m.ports) {
                if (p.dir == PortDir::Input && !connected.count(p.name))
                    throw DiagError("input port '" + p.name + "' of '" + m.name +
                                        "' left unconnected",
                                    inst_loc);
            }
        }

        for (const auto& item : m.items) {
            switch (item.kind) {
                case ItemKind::ContAssign: {
                    DesignItem copy;
                    copy.kind = ItemKind::ContAssign;
                    copy.cont = item.cont;
                    copy.cont.target.name = prefix + item.cont.target.name;
                    copy.cont.rhs = rename_expr(item.cont.rhs, prefix);
                    out.items.push_back(std::move(copy));
                    break;
                }
                case ItemKind::Always: {
                    DesignItem copy;
                    copy.kind = ItemKind::Always;
                    copy.always = item.always;
                    copy.always.clock = item.always.clock.empty()
                                            ? item.always.clock
                                            : prefix + item.always.clock;
                    if (item.always.async_reset) {
                        copy.always.async_reset->signal = prefix + item.always.async_reset->signal;
                    }
                    copy.always.body = rename_stmt(item.always.body, prefix);
                    out.items.push_back(std::move(copy));
                    break;
                }
                case ItemKind::Instance: {
                    const Instance& inst = item.instance;
                    const ModuleDecl* child = unit.find_module(inst.module_name);
                    if (!child)
                        throw DiagError("unresolved module '" + inst.module_name + "'", inst.loc);
                    // Normalize positional connections against the child's
                    // port order, then rename connection expressions into the
                    // current scope.
                    std::vector<std::pair<std::string, ExprPtr>> conns;
                    bool positional = !inst.connections.empty() &&
                                      inst.connections.front().first.empty();
                    if (positional) {
                        if (inst.connections.size() > child->ports.size())
                            throw DiagError("too many connections for '" + inst.module_name + "'",
                                            inst.loc);
                        for (size_t i = 0; i < inst.connections.size(); ++i) {
                            if (!inst.connections[i].first.empty())
                                throw DiagError("cannot mix positional and named connections",
                                                inst.loc);
                            conns.emplace_back(child->ports[i].name,
                                               rename_expr(inst.connections[i].second, prefix));
                        }
                    } else {
                        for (const auto& [name, expr] : inst.connections)
                            conns.emplace_back(name, rename_expr(expr, prefix));
                    }
                    inline_module(*child, prefix + inst.instance_name + "__", &conns, inst.loc);
                    break;
                }
            }
        }

        instantiation_stack.pop_back();
    }
};

void renumber_stmts(ModuleDecl& m) {
    int next = 0;
    std::function<void(StmtPtr&)> walk = [&](StmtPtr& s) {
        if (!s) return;
        s->id = next++;
        switch (s->kind) {
            case StmtKind::Block:
                for (auto& c : s->stmts) walk(c);
                break;
            case StmtKind::If:
                walk(s->then_branch);
                walk(s->else_branch);
                break;
            case StmtKind::Case:
                for (auto& arm : s->arms) walk(arm.body);
                break;
            case StmtKind::Assign: break;
        }
    };
    for (auto& item : m.items) {
        if (item.kind == ItemKind::ContAssign) item.cont.stmt_id = next++;
        if (item.kind == ItemKind::Always) walk(item.always.body);
    }
}

void check_single_declarations(const ModuleDecl& m) {
    std::set<std::string> names;
    for (const auto& p : m.ports)
        if (!names.insert(p.name).second)
            throw DiagError("post-elaboration: '" + p.name + "' declared twice");
    for (const auto& d : m.nets)
        if (!names.insert(d.name).second)
            throw DiagError("post-elaboration: '" + d.name + "' declared twice");

    std::function<void(const ExprPtr&)> check_expr = [&](const ExprPtr& e) {
        if (!e) return;
        for (const auto& n : support(e))
            if (!names.count(n))
                throw DiagError("post-elaboration: undeclared identifier '" + n + "'", e->loc);
    };
    std::function<void(const StmtPtr&)> check_stmt = [&](const StmtPtr& s) {
        if (!s) return;
        switch (s->kind) {
            case StmtKind::Block:
                for (const auto& c : s->stmts) check_stmt(c);
                break;
            case StmtKind::If:
                check_expr(s->cond);
                check_stmt(s->then_branch);
                check_stmt(s->else_branch);
                break;
            case StmtKind::Case:
                check_expr(s->case_expr);
                for (const auto& arm : s->arms) check_stmt(arm.body);
                break;
            case StmtKind::Assign:
                if (!names.count(s->target.name))
                    throw DiagError("post-elaboration: undeclared target '" + s->target.name + "'",
                                    s->loc);
                check_expr(s->rhs);
                break;
        }
    };
    for (const auto& item : m.items) {
        if (item.kind == ItemKind::ContAssign) {
            if (!names.count(item.cont.target.name))
                throw DiagError("post-elaboration: undeclared target '" +
                                item.cont.target.name + "'");
            check_expr(item.cont.rhs);
        } else if (item.kind == ItemKind::Always) {
            check_stmt(item.always.body);
        }
    }
}

} // namespace

ModuleDecl elaborate(const SourceUnit& unit) {
    const ModuleDecl* top = unit.find_module(unit.top_module);
    if (!top) throw DiagError("top module '" + unit.top_module + "' not found");

    Flattener f{unit, {}, {}};
    f.inline_module(*top, "", nullptr, top->loc);
    renumber_stmts(f.out);
    check_single_declarations(f.out);
    return f.out;
}

} // namespace rtlleak
