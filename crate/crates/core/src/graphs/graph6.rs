//! graph6 encoding of simple undirected graphs.

use crate::error::{Graph6Error, Result};
use crate::model::Graph;

/// Optional header line prefix.
pub const HEADER: &str = ">>graph6<<";

/// Largest order representable with the four-byte size prefix.
pub const MAX_ORDER: usize = 258_047;

fn body_len(n: usize) -> usize {
    (n * n.saturating_sub(1) / 2).div_ceil(6)
}

fn encode_order(n: usize, out: &mut Vec<u8>) -> std::result::Result<(), Graph6Error> {
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= MAX_ORDER {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 0x3f) as u8 + 63);
        }
    } else {
        return Err(Graph6Error::OrderTooLarge(n));
    }
    Ok(())
}

/// Upper-triangle bits in graph6 order: `(0,1), (0,2), (1,2), (0,3), …`.
pub(crate) fn pack_bits(n: usize, mut bit: impl FnMut(usize, usize) -> bool, out: &mut Vec<u8>) {
    let mut acc = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | bit(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(acc + 63);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((acc << (6 - filled)) + 63);
    }
}

/// graph6 line (without newline) for a graph whose edges all have weight 1.
pub fn emit_graph6(g: &Graph) -> Result<String> {
    if !g.is_unit_weight() {
        return Err(crate::error::CimError::InvalidGraph(
            "graph6 cannot encode edge weights".into(),
        ));
    }
    let n = g.order();
    let mut out = Vec::with_capacity(4 + body_len(n));
    encode_order(n, &mut out)?;
    pack_bits(n, |i, j| g.has_edge(i, j), &mut out);
    Ok(String::from_utf8(out).expect("graph6 bytes are ASCII"))
}

/// Parses one graph6 line. A leading `>>graph6<<` header and trailing
/// whitespace are accepted.
pub fn parse_graph6(line: &str) -> Result<Graph> {
    let line = line.trim_end();
    let line = line.strip_prefix(HEADER).unwrap_or(line);
    let bytes = line.as_bytes();
    let Some(&first) = bytes.first() else {
        return Err(Graph6Error::Empty.into());
    };
    if let Some(&b) = bytes.iter().find(|&&b| !(63..=126).contains(&b)) {
        return Err(Graph6Error::InvalidByte(b).into());
    }
    let (n, body) = if first < 126 {
        ((first - 63) as usize, &bytes[1..])
    } else {
        if bytes.len() < 4 {
            return Err(Graph6Error::MalformedHeader.into());
        }
        if bytes[1] == 126 {
            return Err(Graph6Error::OrderTooLarge(MAX_ORDER + 1).into());
        }
        let n = bytes[1..4]
            .iter()
            .fold(0usize, |acc, &b| (acc << 6) | (b - 63) as usize);
        if n <= 62 {
            return Err(Graph6Error::MalformedHeader.into());
        }
        (n, &bytes[4..])
    };
    let expected = body_len(n);
    if body.len() != expected {
        return Err(Graph6Error::BodyLength {
            expected,
            got: body.len(),
        }
        .into());
    }
    let mut g = Graph::new(n)?;
    let mut k = 0usize;
    for j in 1..n {
        for i in 0..j {
            let byte = body[k / 6] - 63;
            if byte >> (5 - k % 6) & 1 == 1 {
                g.add_edge(i, j, 1.0)?;
            }
            k += 1;
        }
    }
    if !k.is_multiple_of(6) {
        let pad_mask = (1u8 << (6 - k % 6)) - 1;
        if (body[expected - 1] - 63) & pad_mask != 0 {
            return Err(Graph6Error::NonzeroPadding.into());
        }
    }
    Ok(g)
}

/// Parses every non-empty line of `text`.
pub fn parse_graph6_lines(text: &str) -> Result<Vec<Graph>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_graph6)
        .collect()
}
