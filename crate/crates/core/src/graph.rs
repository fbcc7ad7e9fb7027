//! Max-Cut instances: undirected simple graphs, cut assignments, and the
//! configuration-model generator for random regular graphs.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_restart_seed, SeedPurpose};

/// Default cap on instance size; statevector memory grows as 2^n.
pub const DEFAULT_QUBIT_LIMIT: usize = 26;

/// Bumping this re-keys every generated graph id.
const GENERATOR_VERSION: u32 = 1;

/// An undirected simple graph, the Max-Cut instance.
///
/// Edges are stored as `(i, j)` pairs with `i < j`, sorted lexicographically.
/// The `id` is a stable hex digest of the graph's provenance and edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    degree: u32,
    seed: u64,
    id: String,
}

impl Graph {
    /// Build a graph from an explicit edge list. Pairs may come in any order;
    /// they are normalized to `i < j` and sorted. Self-loops, duplicates, and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        Self::assemble(n, edges, 0, 0)
    }

    fn assemble(n: usize, edges: &[(u32, u32)], degree: u32, seed: u64) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (pos, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::MalformedInput(format!(
                    "edges[{pos}]: self-loop at vertex {a}"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j as usize >= n {
                return Err(Error::MalformedInput(format!(
                    "edges[{pos}]: endpoint {j} out of range for n = {n}"
                )));
            }
            normalized.push((i, j));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).position(|w| w[0] == w[1]) {
            let (i, j) = normalized[w];
            return Err(Error::MalformedInput(format!(
                "duplicate edge ({i}, {j})"
            )));
        }
        let id = graph_id(n, degree, seed, &normalized);
        Ok(Graph {
            n,
            edges: normalized,
            degree,
            seed,
            id,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Stable identifier derived from (n, degree, seed, generator version)
    /// and the edge set.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Degree parameter of the generator that produced this graph; 0 for
    /// hand-built or parsed ad hoc graphs.
    pub fn generator_degree(&self) -> u32 {
        self.degree
    }

    pub fn generator_seed(&self) -> u64 {
        self.seed
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(i, j) in &self.edges {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i as usize].push(j as usize);
            adj[j as usize].push(i as usize);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    /// Serialize to the on-disk JSON format.
    pub fn to_json(&self) -> String {
        let file = GraphFile {
            version: 1,
            n: self.n,
            degree: self.degree,
            seed: self.seed.to_string(),
            edges: self.edges.clone(),
        };
        // Serialization of this schema cannot fail.
        serde_json::to_string_pretty(&file).expect("graph serialization")
    }

    /// Parse the on-disk JSON format. Round-trips `to_json` exactly.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| {
            Error::MalformedInput(format!(
                "graph JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        if file.version != 1 {
            return Err(Error::MalformedInput(format!(
                "unsupported graph file version {}",
                file.version
            )));
        }
        let seed = file.seed.parse::<u64>().map_err(|_| {
            Error::MalformedInput(format!("seed {:?} is not a 64-bit integer", file.seed))
        })?;
        Self::assemble(file.n, &file.edges, file.degree, seed)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    version: u32,
    n: usize,
    degree: u32,
    seed: String,
    edges: Vec<(u32, u32)>,
}

/// FNV-1a over a canonical byte encoding; stable across platforms.
fn graph_id(n: usize, degree: u32, seed: u64, edges: &[(u32, u32)]) -> String {
    const OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01B3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(b"falqon-graph");
    eat(&GENERATOR_VERSION.to_le_bytes());
    eat(&(n as u64).to_le_bytes());
    eat(&degree.to_le_bytes());
    eat(&seed.to_le_bytes());
    for &(i, j) in edges {
        eat(&i.to_le_bytes());
        eat(&j.to_le_bytes());
    }
    format!("{h:016x}")
}

/// Options for [`generate_regular_with`].
#[derive(Debug, Clone)]
pub struct GeneratorOptions {
    /// Regenerate until the sampled graph is connected.
    pub require_connected: bool,
    /// Restart budget before giving up with `GenerationExhausted`.
    pub retry_budget: usize,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions {
            require_connected: true,
            retry_budget: 10_000,
        }
    }
}

/// Sample a random `degree`-regular simple graph on `n` vertices with the
/// pairing (configuration) model: shuffle the stub list, pair consecutive
/// stubs, and restart from a freshly derived seed whenever the pairing
/// produces a self-loop, a duplicate edge, or (by default) a disconnected
/// graph. Identical `(n, degree, seed)` triples yield identical graphs.
pub fn generate_regular(n: usize, degree: usize, seed: u64) -> Result<Graph> {
    generate_regular_with(n, degree, seed, &GeneratorOptions::default())
}

pub fn generate_regular_with(
    n: usize,
    degree: usize,
    seed: u64,
    opts: &GeneratorOptions,
) -> Result<Graph> {
    if degree < 1 {
        return Err(Error::InvalidParameters(format!(
            "degree {degree} must be at least 1"
        )));
    }
    if degree >= n {
        return Err(Error::InvalidParameters(format!(
            "degree {degree} must be smaller than n = {n}"
        )));
    }
    if (n * degree) % 2 != 0 {
        return Err(Error::InvalidParameters(format!(
            "n * degree = {} is odd; no {degree}-regular graph on {n} vertices exists",
            n * degree
        )));
    }

    let mut stubs: Vec<u32> = Vec::with_capacity(n * degree);
    for v in 0..n as u32 {
        stubs.extend(std::iter::repeat(v).take(degree));
    }

    for attempt in 0..opts.retry_budget {
        let attempt_seed =
            derive_restart_seed(seed, attempt as u64, SeedPurpose::GenerationRestart);
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        stubs.shuffle(&mut rng);

        let mut edges = Vec::with_capacity(n * degree / 2);
        let mut seen = HashSet::with_capacity(n * degree / 2);
        let mut simple = true;
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b {
                simple = false;
                break;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                simple = false;
                break;
            }
            edges.push(key);
        }
        if !simple {
            continue;
        }

        let graph = Graph::assemble(n, &edges, degree as u32, seed)?;
        if opts.require_connected && !graph.is_connected() {
            continue;
        }
        return Ok(graph);
    }

    Err(Error::GenerationExhausted {
        attempts: opts.retry_budget,
    })
}

/// A two-coloring of the vertices; bit `i` is the partition label of vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutAssignment {
    bits: Vec<u8>,
}

impl CutAssignment {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::MalformedInput(format!(
                "assignment bit {b} is not 0 or 1"
            )));
        }
        Ok(CutAssignment { bits })
    }

    /// Decode a basis-state index: bit `i` of `index` labels vertex `i`
    /// (least-significant bit = vertex 0).
    pub fn from_index(n: usize, index: u64) -> Self {
        let bits = (0..n).map(|i| ((index >> i) & 1) as u8).collect();
        CutAssignment { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn complement(&self) -> Self {
        CutAssignment {
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }

    /// Parse the "0101..." witness encoding (vertex 0 first).
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .enumerate()
            .map(|(pos, c)| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::MalformedInput(format!(
                    "witness position {pos}: {other:?} is not '0' or '1'"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(CutAssignment { bits })
    }
}

impl fmt::Display for CutAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Number of edges crossing the partition.
pub fn cut_value(g: &Graph, x: &CutAssignment) -> Result<u64> {
    if x.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            expected: g.node_count(),
            got: x.len(),
        });
    }
    let bits = x.bits();
    Ok(g.edges()
        .iter()
        .filter(|&&(i, j)| bits[i as usize] != bits[j as usize])
        .count() as u64)
}
