mod common;

use drcheck::frontend::{parse_program, pretty_program, tokenize, Tok};

#[test]
fn corpus_programs_round_trip() {
    let mut files: Vec<_> = glob_progs(&common::corpus("programs"));
    files.sort();
    assert!(files.len() >= 8);
    for path in files {
        let src = std::fs::read_to_string(&path).unwrap();
        let p = parse_program(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let printed = pretty_program(&p.ast);
        assert_eq!(toks(&printed), toks(&src), "{}", path.display());
        let q = parse_program(&printed).unwrap();
        assert_eq!(q.ast, p.ast);
        assert_eq!(q.transition, p.transition);
        assert_eq!(pretty_program(&q.ast), printed);
    }
}

fn toks(src: &str) -> Vec<Tok> {
    tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
}

fn glob_progs(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = vec![];
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        if path.is_dir() {
            out.extend(glob_progs(&path));
        } else if path.extension().is_some_and(|x| x == "prog") {
            out.push(path);
        }
    }
    out
}
