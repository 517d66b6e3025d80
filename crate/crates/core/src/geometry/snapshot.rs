//! Plain-text snapshot of a graph field.
//!
//! ```text
//! n N t
//! phi_0 u_0
//! ...
//! phi_{N-1} u_{N-1}
//! ```
//!
//! Reals are written with 17 significant digits so a read after a write
//! reproduces every value bit for bit.

use std::fmt::Write;

use crate::error::{Error, Result};

use super::{AxiMesh, GraphField};

/// Serializes `field` at time `t`.
pub fn write_snapshot(field: &GraphField, t: f64) -> String {
    let mesh = field.mesh();
    let mut out = String::with_capacity(48 * (mesh.nodes() + 1));
    writeln!(out, "{} {} {:.16e}", mesh.dim(), mesh.nodes(), t).unwrap();
    for (phi, u) in mesh.phis().zip(field.values()) {
        writeln!(out, "{phi:.16e} {u:.16e}").unwrap();
    }
    out
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Snapshot { line, msg: msg.into() }
}

fn parse_real(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| bad(line, format!("missing {what}")))?;
    let x: f64 = tok.parse().map_err(|_| bad(line, format!("cannot parse {what} '{tok}'")))?;
    if !x.is_finite() {
        return Err(bad(line, format!("{what} is not finite")));
    }
    Ok(x)
}

/// Parses a snapshot, returning the field and its time.
pub fn read_snapshot(text: &str) -> Result<(GraphField, f64)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty snapshot"))?;
    let mut tok = header.split_whitespace();
    let dim: usize = tok
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(1, "header must start with the dimension n"))?;
    let nodes: usize = tok
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(1, "header must give the node count N"))?;
    let t = parse_real(tok.next(), 1, "time t")?;
    if tok.next().is_some() {
        return Err(bad(1, "trailing tokens in header"));
    }
    let mesh = AxiMesh::new(dim, nodes).map_err(|e| bad(1, e.to_string()))?;

    let mut u = Vec::with_capacity(nodes);
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let j = u.len();
        if j == nodes {
            return Err(bad(lineno, format!("more than {nodes} node lines")));
        }
        let mut tok = line.split_whitespace();
        let phi = parse_real(tok.next(), lineno, "phi")?;
        let val = parse_real(tok.next(), lineno, "u")?;
        if tok.next().is_some() {
            return Err(bad(lineno, "trailing tokens"));
        }
        if (phi - mesh.phi(j)).abs() > 1e-12 {
            return Err(bad(lineno, format!("phi = {phi} does not match mesh node {j}")));
        }
        if !(val > 0.0) {
            return Err(bad(lineno, format!("u = {val} must be positive")));
        }
        u.push(val);
    }
    if u.len() != nodes {
        return Err(bad(nodes + 1, format!("expected {nodes} node lines, found {}", u.len())));
    }
    Ok((GraphField::new(mesh, u)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            vals in proptest::collection::vec(1e-3f64..50.0, 16..64),
            t in 0.0f64..1e3,
        ) {
            let mesh = AxiMesh::new(3, vals.len()).unwrap();
            let field = GraphField::new(mesh, vals.clone()).unwrap();
            let (back, tb) = read_snapshot(&write_snapshot(&field, t)).unwrap();
            prop_assert_eq!(tb.to_bits(), t.to_bits());
            prop_assert_eq!(back.mesh(), &mesh);
            for (a, b) in back.values().iter().zip(&vals) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn header_format() {
        let mesh = AxiMesh::new(2, 16).unwrap();
        let s = write_snapshot(&GraphField::sphere(mesh, 1.0).unwrap(), 2.5);
        let first = s.lines().next().unwrap();
        assert_eq!(first, "2 16 2.5000000000000000e0");
        assert_eq!(s.lines().count(), 17);
    }

    #[test]
    fn corrupted_inputs_report_lines() {
        let mesh = AxiMesh::new(2, 16).unwrap();
        let good = write_snapshot(&GraphField::sphere(mesh, 1.0).unwrap(), 0.0);
        let mut lines: Vec<String> = good.lines().map(String::from).collect();

        let mut bad_u = lines.clone();
        bad_u[5] = format!("{:.16e} NaN", mesh.phi(4));
        assert!(matches!(read_snapshot(&bad_u.join("\n")), Err(Error::Snapshot { line: 6, .. })));

        let mut neg = lines.clone();
        neg[3] = format!("{:.16e} -1.0", mesh.phi(2));
        assert!(matches!(read_snapshot(&neg.join("\n")), Err(Error::Snapshot { line: 4, .. })));

        lines.truncate(10);
        assert!(read_snapshot(&lines.join("\n")).is_err());
        assert!(read_snapshot("").is_err());
        assert!(read_snapshot("2 16").is_err());
    }
}
