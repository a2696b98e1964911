use std::io::BufRead;

use super::MaxflowError;
use crate::flownet::{ArcKind, FlowNetwork, NetworkBuilder};

/// Parses a DIMACS max-flow problem (`p max`, `n <id> s|t`, `a <u> <v> <cap>`,
/// `c` comments). Node ids in the file are 1-based.
pub fn parse_dimacs<R: BufRead>(source: R) -> Result<FlowNetwork, MaxflowError> {
    let err = |line: usize, reason: String| MaxflowError::Dimacs { line, reason };
    let mut nodes: Option<(usize, usize)> = None;
    let (mut s, mut t) = (None, None);
    let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let no = idx + 1;
        let line = line.map_err(|e| err(no, e.to_string()))?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<i64>().map_err(|_| err(no, format!("bad number '{s}'")));
        match tok.first().copied() {
            None | Some("c") => {}
            Some("p") => {
                if tok.len() != 4 || tok[1] != "max" {
                    return Err(err(no, "expected 'p max <nodes> <arcs>'".into()));
                }
                if nodes.is_some() {
                    return Err(err(no, "duplicate problem line".into()));
                }
                let (n, m) = (num(tok[2])?, num(tok[3])?);
                if n < 2 || m < 0 {
                    return Err(err(no, format!("invalid sizes {n} nodes, {m} arcs")));
                }
                nodes = Some((n as usize, m as usize));
            }
            Some("n") => {
                let n = nodes.ok_or_else(|| err(no, "node line before problem line".into()))?.0;
                if tok.len() != 3 {
                    return Err(err(no, "expected 'n <id> s|t'".into()));
                }
                let id = num(tok[1])?;
                if id < 1 || id as usize > n {
                    return Err(err(no, format!("node {id} out of range")));
                }
                match tok[2] {
                    "s" => s = Some(id as usize - 1),
                    "t" => t = Some(id as usize - 1),
                    other => return Err(err(no, format!("unknown terminal '{other}'"))),
                }
            }
            Some("a") => {
                let n = nodes.ok_or_else(|| err(no, "arc line before problem line".into()))?.0;
                if tok.len() != 4 {
                    return Err(err(no, "expected 'a <tail> <head> <cap>'".into()));
                }
                let (u, v, c) = (num(tok[1])?, num(tok[2])?, num(tok[3])?);
                if u < 1 || v < 1 || u as usize > n || v as usize > n {
                    return Err(err(no, format!("arc {u} -> {v} references a missing node")));
                }
                if c < 0 {
                    return Err(err(no, format!("negative capacity {c}")));
                }
                arcs.push((u as usize - 1, v as usize - 1, c));
            }
            Some(other) => return Err(err(no, format!("unknown line type '{other}'"))),
        }
    }
    let (n, m) = nodes.ok_or_else(|| err(0, "missing problem line".into()))?;
    if arcs.len() != m {
        return Err(err(0, format!("problem line declares {m} arcs, found {}", arcs.len())));
    }
    let s = s.ok_or_else(|| err(0, "missing source".into()))?;
    let t = t.ok_or_else(|| err(0, "missing sink".into()))?;
    let mut b = NetworkBuilder::new(n, s, t).with_capacity(m);
    for (u, v, c) in arcs {
        b.add_arc(u, v, c, ArcKind::Plain);
    }
    Ok(b.build()?)
}
