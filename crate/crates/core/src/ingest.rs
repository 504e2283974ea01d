//! Reading diagrams and tables: PD codes, graph strings and knot-table CSV.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, WhiteGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("malformed PD code: {0}")]
    MalformedPd(String),
    #[error("diagram is not alternating: region {0} meets crossings in both colours")]
    NotAlternating(usize),
    #[error("nugatory crossing {0}")]
    Nugatory(usize),
    #[error("malformed graph string: {0}")]
    MalformedGraph(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("table row {row}: {msg}")]
    Table { row: usize, msg: String },
}

/// A planar diagram code: crossing `(a, b, c, d)` lists its four arcs
/// counterclockwise starting from the incoming under-strand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[i64; 4]>", into = "Vec<[i64; 4]>")]
pub struct PdCode(Vec<[i64; 4]>);

impl TryFrom<Vec<[i64; 4]>> for PdCode {
    type Error = IngestError;

    fn try_from(v: Vec<[i64; 4]>) -> Result<Self, IngestError> {
        PdCode::new(v)
    }
}

impl From<PdCode> for Vec<[i64; 4]> {
    fn from(pd: PdCode) -> Self {
        pd.0
    }
}

impl PdCode {
    /// Checks that every arc label occurs exactly twice and that the
    /// crossings form one connected 4-valent graph.
    pub fn new(crossings: Vec<[i64; 4]>) -> Result<Self, IngestError> {
        if crossings.is_empty() {
            return Err(IngestError::MalformedPd("no crossings".into()));
        }
        let mut seen: HashMap<i64, Vec<usize>> = HashMap::new();
        for (c, x) in crossings.iter().enumerate() {
            for &a in x {
                seen.entry(a).or_default().push(c);
            }
        }
        let mut parent: Vec<usize> = (0..crossings.len()).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut labels: Vec<_> = seen.iter().collect();
        labels.sort();
        for (label, at) in labels {
            if at.len() != 2 {
                return Err(IngestError::MalformedPd(format!(
                    "arc {label} appears {} times",
                    at.len()
                )));
            }
            let (a, b) = (root(&mut parent, at[0]), root(&mut parent, at[1]));
            parent[a] = b;
        }
        let r0 = root(&mut parent, 0);
        if (1..crossings.len()).any(|c| root(&mut parent, c) != r0) {
            return Err(IngestError::MalformedPd("diagram is disconnected".into()));
        }
        Ok(PdCode(crossings))
    }

    pub fn crossings(&self) -> &[[i64; 4]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Parses `[[1,4,2,5],...]`, `PD[X[1,4,2,5], ...]` or bare integers in
/// groups of four.
pub fn parse_pd(text: &str) -> Result<PdCode, IngestError> {
    let cleaned: String = text
        .trim()
        .trim_start_matches("PD")
        .chars()
        .map(|c| if c == 'X' || c == '[' || c == ']' || c == '(' || c == ')' || c == ',' { ' ' } else { c })
        .collect();
    let nums = cleaned
        .split_whitespace()
        .map(|tok| tok.parse::<i64>().map_err(|_| IngestError::MalformedPd(format!("bad token {tok:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if nums.len() % 4 != 0 {
        return Err(IngestError::MalformedPd(format!(
            "{} arc labels do not form 4-tuples",
            nums.len()
        )));
    }
    PdCode::new(nums.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect())
}

/// The regions of a diagram, traced from the crossing corners.
///
/// Corner `k` of a crossing is the sector between its arcs `k` and `k + 1`
/// counterclockwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Faces {
    /// `corner_face[c][k]` is the region at corner `k` of crossing `c`.
    pub corner_face: Vec<[usize; 4]>,
    pub count: usize,
}

pub fn trace_faces(pd: &PdCode) -> Faces {
    let xs = pd.crossings();
    let mut ends: HashMap<i64, Vec<(usize, usize)>> = HashMap::new();
    for (c, x) in xs.iter().enumerate() {
        for (k, &a) in x.iter().enumerate() {
            ends.entry(a).or_default().push((c, k));
        }
    }
    let other_end = |c: usize, k: usize| -> (usize, usize) {
        let e = &ends[&xs[c][k]];
        if e[0] == (c, k) {
            e[1]
        } else {
            e[0]
        }
    };
    let mut corner_face = vec![[usize::MAX; 4]; xs.len()];
    let mut count = 0;
    for c in 0..xs.len() {
        for k in 0..4 {
            if corner_face[c][k] != usize::MAX {
                continue;
            }
            // Leaving along arc k keeps the region on the left; it is
            // entered again clockwise of the arriving arc.
            let (mut cc, mut kk) = (c, k);
            while corner_face[cc][kk] == usize::MAX {
                corner_face[cc][kk] = count;
                let (nc, nk) = other_end(cc, kk);
                (cc, kk) = (nc, (nk + 3) % 4);
            }
            count += 1;
        }
    }
    Faces { corner_face, count }
}

/// The white graph: one vertex per region at corners 1 and 3, one edge per
/// crossing. With this colouring every crossing of an alternating diagram
/// has the same incidence sign and the Goeritz form is positive definite.
pub fn pd_to_white_graph(pd: &PdCode) -> Result<WhiteGraph, IngestError> {
    let faces = trace_faces(pd);
    // 0 = black corner, 1 = white corner.
    let mut colour = vec![None; faces.count];
    for corners in &faces.corner_face {
        for (k, &f) in corners.iter().enumerate() {
            let c = k % 2;
            match colour[f] {
                None => colour[f] = Some(c),
                Some(prev) if prev != c => return Err(IngestError::NotAlternating(f)),
                _ => {}
            }
        }
    }
    let mut index = vec![usize::MAX; faces.count];
    let mut n = 0;
    let mut edges = Vec::with_capacity(pd.len());
    for (c, corners) in faces.corner_face.iter().enumerate() {
        let (a, b) = (corners[1], corners[3]);
        if a == b {
            return Err(IngestError::Nugatory(c));
        }
        for f in [a, b] {
            if index[f] == usize::MAX {
                index[f] = n;
                n += 1;
            }
        }
        edges.push((index[a], index[b]));
    }
    let g = WhiteGraph::new(n, edges)?;
    if let Some(&(a, b)) = g.cut_edges().first() {
        let c = g.edges().iter().position(|&e| e == (a, b) || e == (b, a)).unwrap_or(0);
        return Err(IngestError::Nugatory(c));
    }
    Ok(g)
}

/// Parses `"0-1;0-1;1-2"`. The vertex count is one more than the largest
/// index unless given as a `"N:"` prefix.
pub fn parse_graph_string(text: &str) -> Result<WhiteGraph, IngestError> {
    let text = text.trim();
    let (declared, body) = match text.split_once(':') {
        Some((n, rest)) => (
            Some(n.trim().parse::<usize>().map_err(|_| IngestError::MalformedGraph(format!("bad vertex count {n:?}")))?),
            rest,
        ),
        None => (None, text),
    };
    let mut edges = Vec::new();
    for part in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = part
            .split_once('-')
            .ok_or_else(|| IngestError::MalformedGraph(format!("edge {part:?} is not A-B")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| IngestError::MalformedGraph(format!("bad vertex {s:?}")))
        };
        edges.push((parse(a)?, parse(b)?));
    }
    let n = declared.unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
    Ok(WhiteGraph::new(n, edges)?)
}

pub fn format_graph_string(g: &WhiteGraph) -> String {
    g.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(";")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagramKind {
    Graph,
    Pd,
}

/// One knot-table row: `name,kind,code,det,signature`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub name: String,
    pub kind: DiagramKind,
    pub code: String,
    #[serde(default)]
    pub det: Option<i64>,
    #[serde(default)]
    pub signature: Option<i64>,
}

impl TableRow {
    pub fn white_graph(&self) -> Result<WhiteGraph, IngestError> {
        match self.kind {
            DiagramKind::Graph => parse_graph_string(&self.code),
            DiagramKind::Pd => pd_to_white_graph(&parse_pd(&self.code)?),
        }
    }
}

/// Reads a CSV table with a `name,kind,code,det,signature` header. Rows
/// that fail to parse are returned as errors in place.
pub fn read_table<R: Read>(reader: R) -> Result<Vec<Result<TableRow, IngestError>>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Table { row: 0, msg: e.to_string() })?
        .clone();
    for want in ["name", "kind", "code"] {
        if !headers.iter().any(|h| h == want) {
            return Err(IngestError::Table { row: 0, msg: format!("missing column {want:?}") });
        }
    }
    Ok(rdr
        .deserialize::<TableRow>()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| IngestError::Table { row: i + 1, msg: e.to_string() }))
        .collect())
}
