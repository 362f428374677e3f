//! Pretty-printer. Output re-parses to a structurally identical AST.

use super::ast::*;
use crate::expr::format_rational;
use std::fmt::Write;

pub fn pretty_print(ast: &ModelAST) -> String {
    let mut out = String::new();
    for c in &ast.consts {
        let _ = writeln!(out, "const {} = {};", c.name.as_str(), format_rational(&c.value));
    }
    if !ast.consts.is_empty() {
        out.push('\n');
    }
    for sc in &ast.software_classes {
        print_class_header(&mut out, "softwareclass", sc.name.as_str());
        print_class_body(&mut out, &sc.known_rebecs, &sc.state_vars, &sc.msgsrvs, &[]);
        out.push_str("}\n\n");
    }
    for pc in &ast.physical_classes {
        print_class_header(&mut out, "physicalclass", pc.name.as_str());
        print_class_body(&mut out, &pc.known_rebecs, &pc.state_vars, &pc.msgsrvs, &pc.modes);
        out.push_str("}\n\n");
    }
    out.push_str("main {\n");
    for inst in &ast.instances {
        let bindings = inst
            .bindings
            .iter()
            .map(|(conn, name)| format!("{} {}", conn.tag(), name.as_str()))
            .collect::<Vec<_>>()
            .join(", ");
        let args = inst
            .init_args
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(
            out,
            "  {} {} ({}):({});",
            inst.class.as_str(),
            inst.name.as_str(),
            bindings,
            args
        );
    }
    if ast.can_spec.explicit {
        out.push_str("  CAN {\n    priorities {\n");
        for e in &ast.can_spec.priorities {
            let _ = writeln!(
                out,
                "      {} {}.{} {};",
                e.sender.as_str(),
                e.receiver.as_str(),
                e.msgsrv.as_str(),
                format_rational(&e.value)
            );
        }
        out.push_str("    }\n    delays {\n");
        for e in &ast.can_spec.delays {
            let _ = writeln!(
                out,
                "      {} {}.{} {};",
                e.sender.as_str(),
                e.receiver.as_str(),
                e.msgsrv.as_str(),
                format_rational(&e.value)
            );
        }
        out.push_str("    }\n  }\n");
    }
    out.push_str("}\n");
    out
}

fn print_class_header(out: &mut String, kw: &str, name: &str) {
    let _ = writeln!(out, "{} {} {{", kw, name);
}

fn print_class_body(
    out: &mut String,
    known: &[KnownRebec],
    vars: &[VarDecl],
    msgsrvs: &[MsgSrv],
    modes: &[Mode],
) {
    out.push_str("  knownrebecs {\n");
    for k in known {
        let _ = writeln!(out, "    {} {};", k.class.as_str(), k.formal.as_str());
    }
    out.push_str("  }\n  statevars {\n");
    for v in vars {
        let _ = writeln!(out, "    {} {};", v.ty.keyword(), v.name.as_str());
    }
    out.push_str("  }\n");
    for m in msgsrvs {
        let params = m
            .params
            .iter()
            .map(|p| format!("{} {}", p.ty.keyword(), p.name.as_str()))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = write!(out, "  msgsrv {}({}) ", m.name.as_str(), params);
        print_block(out, &m.body, 1);
        out.push('\n');
    }
    for m in modes {
        let _ = writeln!(out, "  mode {} {{", m.name.as_str());
        let _ = writeln!(out, "    inv({})", m.invariant);
        for (var, rhs) in &m.flows {
            let _ = writeln!(out, "    {}' = {};", var.as_str(), rhs);
        }
        let _ = writeln!(out, "    guard({})", m.guard);
        out.push_str("    ");
        print_block(out, &m.actions, 2);
        out.push_str("\n  }\n");
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    if stmts.is_empty() {
        out.push_str("{ }");
        return;
    }
    out.push_str("{\n");
    for s in stmts {
        print_stmt(out, s, depth + 1);
    }
    out.push_str(&"  ".repeat(depth));
    out.push('}');
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    let indent = "  ".repeat(depth);
    match &stmt.kind {
        StmtKind::Assign(name, rhs) => {
            let _ = writeln!(out, "{}{} = {};", indent, name.as_str(), rhs);
        }
        StmtKind::If(cond, then_block, else_block) => {
            let _ = write!(out, "{}if ({}) ", indent, cond);
            print_block(out, then_block, depth);
            if !else_block.is_empty() {
                out.push_str(" else ");
                print_block(out, else_block, depth);
            }
            out.push('\n');
        }
        StmtKind::Delay(amount) => {
            let _ = writeln!(out, "{}delay({});", indent, format_rational(amount));
        }
        StmtKind::SetModeLocal(mode) => {
            let _ = writeln!(out, "{}setmode({});", indent, mode.as_str());
        }
        StmtKind::Send {
            target,
            msgsrv,
            args,
        } => {
            let args = args
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "{}{}.{}({});", indent, target.as_str(), msgsrv.as_str(), args);
        }
        StmtKind::SendSetMode { target, mode } => {
            let _ = writeln!(
                out,
                "{}{}.setMode({});",
                indent,
                target.as_str(),
                mode.as_str()
            );
        }
    }
}
