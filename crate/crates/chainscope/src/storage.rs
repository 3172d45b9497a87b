//! Graph persistence: a little-endian binary format with a CRC32 trailer,
//! and a JSON mirror of the same fields.
//!
//! Layout: magic `CSGR`, version u16, dimension u8, resolution u32, T f64,
//! epsilon f64, field fingerprint (32 bytes), edge count u64, then per edge
//! `src u64, dst u64, displacement d x i32`, and finally CRC32 over all
//! preceding bytes.

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::grid::BoxGrid;
use crate::transition::TransitionGraph;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CSGR";
const VERSION: u16 = 1;

pub fn save(graph: &TransitionGraph, path: &Path) -> Result<()> {
    let bytes = to_bytes(graph);
    let mut file = std::fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<TransitionGraph> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

pub fn to_bytes(graph: &TransitionGraph) -> Vec<u8> {
    let d = graph.grid().dimension();
    let edges = graph.digraph().edges();
    let mut out = Vec::with_capacity(64 + edges.len() * (16 + 4 * d));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(d as u8);
    out.extend_from_slice(&graph.grid().resolution().to_le_bytes());
    out.extend_from_slice(&graph.t_flow().to_le_bytes());
    out.extend_from_slice(&graph.epsilon().to_le_bytes());
    out.extend_from_slice(graph.fingerprint());
    out.extend_from_slice(&(edges.len() as u64).to_le_bytes());
    for e in edges {
        out.extend_from_slice(&e.src.to_le_bytes());
        out.extend_from_slice(&e.dst.to_le_bytes());
        for &k in &e.displacement {
            out.extend_from_slice(&k.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<TransitionGraph> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Version(version));
    }
    let d = r.take(1)?[0] as usize;
    let resolution = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    let t_flow = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let epsilon = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let mut fingerprint = [0u8; 32];
    fingerprint.copy_from_slice(r.take(32)?);
    let count = u64::from_le_bytes(r.take(8)?.try_into().unwrap());

    let body_len = (count as usize)
        .checked_mul(16 + 4 * d)
        .ok_or_else(|| Error::Format("edge count overflow".into()))?;
    if r.remaining() != body_len + 4 {
        return Err(Error::Format(format!(
            "payload length mismatch: {} remaining, {} expected",
            r.remaining(),
            body_len + 4
        )));
    }
    let crc_expected = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let crc_actual = crc32fast::hash(&bytes[..bytes.len() - 4]);
    if crc_expected != crc_actual {
        return Err(Error::Format("checksum mismatch".into()));
    }

    let mut edges = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let src = u64::from_le_bytes(r.take(8)?.try_into().unwrap());
        let dst = u64::from_le_bytes(r.take(8)?.try_into().unwrap());
        let mut displacement = Vec::with_capacity(d);
        for _ in 0..d {
            displacement.push(i32::from_le_bytes(r.take(4)?.try_into().unwrap()));
        }
        edges.push(Edge {
            src,
            dst,
            displacement,
        });
    }

    let grid = BoxGrid::new(d, resolution)?;
    TransitionGraph::from_parts(grid, epsilon, t_flow, fingerprint, edges)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("truncated file".into()));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// JSON mirror of the binary fields.
#[derive(Serialize, Deserialize)]
pub struct GraphJson {
    pub dimension: usize,
    pub resolution: u32,
    pub t_flow: f64,
    pub epsilon: f64,
    pub fingerprint: String,
    pub edges: Vec<(u64, u64, Vec<i32>)>,
}

pub fn to_json(graph: &TransitionGraph) -> GraphJson {
    GraphJson {
        dimension: graph.grid().dimension(),
        resolution: graph.grid().resolution(),
        t_flow: graph.t_flow(),
        epsilon: graph.epsilon(),
        fingerprint: hex_string(graph.fingerprint()),
        edges: graph
            .digraph()
            .edges()
            .iter()
            .map(|e| (e.src, e.dst, e.displacement.clone()))
            .collect(),
    }
}

pub fn from_json(doc: &GraphJson) -> Result<TransitionGraph> {
    let grid = BoxGrid::new(doc.dimension, doc.resolution)?;
    let mut fingerprint = [0u8; 32];
    let raw = (0..doc.fingerprint.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&doc.fingerprint[i..i + 2], 16))
        .collect::<std::result::Result<Vec<u8>, _>>()
        .map_err(|_| Error::Format("bad fingerprint hex".into()))?;
    if raw.len() != 32 {
        return Err(Error::Format("fingerprint must be 32 bytes".into()));
    }
    fingerprint.copy_from_slice(&raw);
    let edges = doc
        .edges
        .iter()
        .map(|(s, d, disp)| Edge {
            src: *s,
            dst: *d,
            displacement: disp.clone(),
        })
        .collect();
    TransitionGraph::from_parts(grid, doc.epsilon, doc.t_flow, fingerprint, edges)
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
