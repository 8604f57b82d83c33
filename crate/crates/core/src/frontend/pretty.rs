use std::fmt::Write;

use super::program::{Command, ProgramAst, Scope};

/// Render a program in the surface syntax accepted by the parser.
pub fn pretty_program(ast: &ProgramAst) -> String {
    let mut out = String::new();
    for d in &ast.decls {
        let kw = match d.scope {
            Scope::Shared => "shared",
            Scope::Local => "local",
        };
        write!(out, "{kw} {}: {}", d.name, d.sort).unwrap();
        if let Some(v) = &d.init {
            write!(out, " = {v}").unwrap();
        }
        out.push_str(";\n");
    }
    writeln!(out, "locations {};", ast.locations.join(", ")).unwrap();
    for i in &ast.init {
        writeln!(out, "init {i};").unwrap();
    }
    if let Some(m) = &ast.mutex {
        writeln!(out, "mutex {m};").unwrap();
    }
    if !ast.commands.is_empty() {
        out.push('\n');
    }
    for c in &ast.commands {
        out.push_str(&pretty_command(c));
        out.push('\n');
    }
    out
}

pub fn pretty_command(c: &Command) -> String {
    let mut s = format!("{}:", c.from);
    if c.guard != crate::logic::formula::Expr::tt() {
        write!(s, " [{}]", c.guard).unwrap();
    }
    let assigns: Vec<String> = c.assigns.iter().map(|a| format!("{} := {}", a.target, a.value)).collect();
    if !assigns.is_empty() {
        write!(s, " {}", assigns.join(", ")).unwrap();
    }
    write!(s, " -> {};", c.to).unwrap();
    s
}
