//! Plain-text mesh serialization.
//!
//! ```text
//! $Nodes
//! <count> <n_vertices> <h>
//! <x> <y>                      (one line per node)
//! $EndNodes
//! $Elements
//! <count>
//! <tri3|tri6> <minus|plus> <patch|-> <minus|plus|-> <v0 v1 v2 [m01 m12 m20]>
//! $EndElements
//! $BoundaryVertices
//! <count>
//! <node id>                    (one line per marked node)
//! $EndBoundaryVertices
//! ```

use super::{Element, Mesh, SigmaTag};
use crate::error::{Error, Result};
use crate::geometry::Side;
use crate::la::Vec2;
use std::io::{BufRead, Write};

pub fn write_ascii(mesh: &Mesh, w: &mut impl Write) -> Result<()> {
    writeln!(w, "$Nodes")?;
    writeln!(w, "{} {} {:.17e}", mesh.nodes.len(), mesh.n_vertices, mesh.h)?;
    for p in &mesh.nodes {
        writeln!(w, "{:.17e} {:.17e}", p.x, p.y)?;
    }
    writeln!(w, "$EndNodes")?;
    writeln!(w, "$Elements")?;
    writeln!(w, "{}", mesh.elements.len())?;
    for el in &mesh.elements {
        let kind = if el.mid.is_some() { "tri6" } else { "tri3" };
        let region = side_str(el.region);
        let (patch, side) = match el.sigma {
            Some(tag) => (tag.patch.to_string(), side_str(tag.side).to_string()),
            None => ("-".to_string(), "-".to_string()),
        };
        write!(w, "{kind} {region} {patch} {side} {} {} {}", el.v[0], el.v[1], el.v[2])?;
        if let Some(m) = el.mid {
            write!(w, " {} {} {}", m[0], m[1], m[2])?;
        }
        writeln!(w)?;
    }
    writeln!(w, "$EndElements")?;
    writeln!(w, "$BoundaryVertices")?;
    let marked: Vec<usize> = (0..mesh.nodes.len()).filter(|&i| mesh.boundary[i]).collect();
    writeln!(w, "{}", marked.len())?;
    for id in marked {
        writeln!(w, "{id}")?;
    }
    writeln!(w, "$EndBoundaryVertices")?;
    Ok(())
}

fn side_str(side: Side) -> &'static str {
    match side {
        Side::Minus => "minus",
        Side::Plus => "plus",
    }
}

fn parse_side(s: &str) -> Result<Side> {
    match s {
        "minus" => Ok(Side::Minus),
        "plus" => Ok(Side::Plus),
        _ => Err(Error::ParseError(format!("unknown side `{s}`"))),
    }
}

pub fn read_ascii(r: &mut impl BufRead) -> Result<Mesh> {
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        loop {
            match lines.next() {
                Some(Ok(l)) => {
                    let t = l.trim().to_string();
                    if !t.is_empty() {
                        return Ok(t);
                    }
                }
                Some(Err(e)) => return Err(e.into()),
                None => return Err(Error::ParseError("unexpected end of mesh file".into())),
            }
        }
    };

    expect(&next()?, "$Nodes")?;
    let header = next()?;
    let mut it = header.split_whitespace();
    let count: usize = parse(it.next(), "node count")?;
    let n_vertices: usize = parse(it.next(), "vertex count")?;
    let h: f64 = parse(it.next(), "mesh size")?;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next()?;
        let mut it = line.split_whitespace();
        let x: f64 = parse(it.next(), "node x")?;
        let y: f64 = parse(it.next(), "node y")?;
        nodes.push(Vec2::new(x, y));
    }
    expect(&next()?, "$EndNodes")?;

    expect(&next()?, "$Elements")?;
    let count: usize = parse(Some(&next()?), "element count")?;
    let mut elements = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next()?;
        let mut it = line.split_whitespace();
        let kind = it.next().ok_or_else(|| Error::ParseError("missing element kind".into()))?.to_string();
        let region = parse_side(it.next().ok_or_else(|| Error::ParseError("missing region".into()))?)?;
        let patch_tok = it.next().ok_or_else(|| Error::ParseError("missing patch".into()))?;
        let side_tok = it.next().ok_or_else(|| Error::ParseError("missing side".into()))?;
        let sigma = if patch_tok == "-" {
            None
        } else {
            Some(SigmaTag {
                patch: patch_tok
                    .parse()
                    .map_err(|_| Error::ParseError(format!("bad patch `{patch_tok}`")))?,
                side: parse_side(side_tok)?,
            })
        };
        let v0: usize = parse(it.next(), "v0")?;
        let v1: usize = parse(it.next(), "v1")?;
        let v2: usize = parse(it.next(), "v2")?;
        let mid = match kind.as_str() {
            "tri3" => None,
            "tri6" => {
                let m0: usize = parse(it.next(), "m01")?;
                let m1: usize = parse(it.next(), "m12")?;
                let m2: usize = parse(it.next(), "m20")?;
                Some([m0, m1, m2])
            }
            other => return Err(Error::ParseError(format!("unknown element kind `{other}`"))),
        };
        elements.push(Element { v: [v0, v1, v2], mid, region, sigma });
    }
    expect(&next()?, "$EndElements")?;

    expect(&next()?, "$BoundaryVertices")?;
    let count: usize = parse(Some(&next()?), "boundary count")?;
    let mut boundary = vec![false; nodes.len()];
    for _ in 0..count {
        let id: usize = parse(Some(&next()?), "boundary id")?;
        if id >= boundary.len() {
            return Err(Error::ParseError(format!("boundary vertex {id} out of range")));
        }
        boundary[id] = true;
    }
    expect(&next()?, "$EndBoundaryVertices")?;

    Mesh::finalize(nodes, n_vertices, elements, boundary, h)
}

fn expect(line: &str, tag: &str) -> Result<()> {
    if line == tag {
        Ok(())
    } else {
        Err(Error::ParseError(format!("expected `{tag}`, found `{line}`")))
    }
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::ParseError(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::ParseError(format!("cannot parse {what}")))
}
