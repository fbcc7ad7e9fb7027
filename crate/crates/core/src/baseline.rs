//! Classical Max-Cut baselines: exhaustive search (the exact oracle) and
//! simulated annealing (mirrors the reference methodology; validated against
//! exhaustive search).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cut_value, CutAssignment, Graph, DEFAULT_QUBIT_LIMIT};
use crate::seed::{derive_restart_seed, SeedPurpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Exhaustive,
    Annealing,
}

/// Ground-truth record for one graph: the maximum cut, the corresponding
/// ground energy of the cost Hamiltonian, and a witness assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineRecord {
    pub graph_id: String,
    pub max_cut: u64,
    pub ground_energy: i64,
    pub method: BaselineMethod,
    pub witness: CutAssignment,
}

#[derive(Serialize, Deserialize)]
struct BaselineFile {
    graph_id: String,
    max_cut: u64,
    ground_energy: i64,
    method: BaselineMethod,
    witness: String,
}

impl BaselineRecord {
    pub fn to_json(&self) -> String {
        let file = BaselineFile {
            graph_id: self.graph_id.clone(),
            max_cut: self.max_cut,
            ground_energy: self.ground_energy,
            method: self.method,
            witness: self.witness.to_string(),
        };
        serde_json::to_string_pretty(&file).expect("baseline serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BaselineFile = serde_json::from_str(text).map_err(|e| {
            Error::MalformedInput(format!(
                "baseline JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        if file.ground_energy != -(file.max_cut as i64) {
            return Err(Error::MalformedInput(format!(
                "ground energy {} does not equal -max_cut = {}",
                file.ground_energy,
                -(file.max_cut as i64)
            )));
        }
        Ok(BaselineRecord {
            graph_id: file.graph_id,
            max_cut: file.max_cut,
            ground_energy: file.ground_energy,
            method: file.method,
            witness: CutAssignment::parse(&file.witness)?,
        })
    }
}

/// Exact maximum cut by enumeration of all 2^(n-1) distinct assignments
/// (vertex n-1 is pinned by complement symmetry). A reflected Gray code
/// walks the assignments with one bit flip per step, so each step costs
/// O(degree).
pub fn brute_force_max_cut(g: &Graph) -> Result<BaselineRecord> {
    brute_force_max_cut_with_limit(g, DEFAULT_QUBIT_LIMIT)
}

pub fn brute_force_max_cut_with_limit(g: &Graph, limit: usize) -> Result<BaselineRecord> {
    let n = g.node_count();
    if n > limit {
        return Err(Error::SizeLimitExceeded { n, limit });
    }

    let adj = adjacency(g);
    let mut bits = vec![0u8; n];
    let mut cut: i64 = 0;
    let mut best_cut: i64 = 0;
    let mut best_bits = bits.clone();

    let states: u64 = if n == 0 { 1 } else { 1u64 << (n - 1) };
    for step in 1..states {
        let v = step.trailing_zeros() as usize;
        cut += flip_delta(&adj, &bits, v);
        bits[v] ^= 1;
        if cut > best_cut {
            best_cut = cut;
            best_bits.copy_from_slice(&bits);
        }
    }

    let witness = CutAssignment::new(best_bits)?;
    debug_assert_eq!(cut_value(g, &witness)?, best_cut as u64);
    Ok(BaselineRecord {
        graph_id: g.id().to_string(),
        max_cut: best_cut as u64,
        ground_energy: -best_cut,
        method: BaselineMethod::Exhaustive,
        witness,
    })
}

/// Hyperparameters for [`anneal_max_cut`].
#[derive(Debug, Clone, Copy)]
pub struct AnnealParams {
    pub restarts: u32,
    /// Sweeps per restart are `sweeps_per_node * n`; one sweep proposes `n`
    /// single-bit flips.
    pub sweeps_per_node: u32,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            restarts: 32,
            sweeps_per_node: 200,
            t_start: 2.0,
            t_end: 0.01,
        }
    }
}

impl AnnealParams {
    fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidParameters("restarts must be >= 1".into()));
        }
        if !(self.t_start > 0.0 && self.t_end > 0.0) {
            return Err(Error::InvalidParameters(
                "temperatures must be positive".into(),
            ));
        }
        if self.t_start <= self.t_end {
            return Err(Error::InvalidParameters(format!(
                "t_start {} must exceed t_end {}",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }
}

/// Simulated annealing with single-bit-flip proposals, Metropolis acceptance,
/// and geometric cooling. Deterministic for a fixed seed; restarts draw from
/// independently derived seed streams.
pub fn anneal_max_cut(g: &Graph, params: &AnnealParams, seed: u64) -> Result<BaselineRecord> {
    params.validate()?;
    let n = g.node_count();
    let adj = adjacency(g);

    let mut best_cut: i64 = 0;
    let mut best_bits = vec![0u8; n];

    for restart in 0..params.restarts {
        let restart_seed =
            derive_restart_seed(seed, restart as u64, SeedPurpose::AnnealRestart);
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);

        let mut bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
        let mut cut = cut_value(g, &CutAssignment::new(bits.clone())?)? as i64;
        if cut > best_cut {
            best_cut = cut;
            best_bits.copy_from_slice(&bits);
        }

        let sweeps = params.sweeps_per_node as usize * n;
        let cooling = (params.t_end / params.t_start).powf(1.0 / (sweeps.max(2) - 1) as f64);
        let mut temperature = params.t_start;
        for _ in 0..sweeps {
            for _ in 0..n {
                let v = rng.random_range(0..n);
                let delta = flip_delta(&adj, &bits, v);
                let accept = delta >= 0
                    || rng.random::<f64>() < (delta as f64 / temperature).exp();
                if accept {
                    bits[v] ^= 1;
                    cut += delta;
                    if cut > best_cut {
                        best_cut = cut;
                        best_bits.copy_from_slice(&bits);
                    }
                }
            }
            temperature *= cooling;
        }
    }

    Ok(BaselineRecord {
        graph_id: g.id().to_string(),
        max_cut: best_cut as u64,
        ground_energy: -best_cut,
        method: BaselineMethod::Annealing,
        witness: CutAssignment::new(best_bits)?,
    })
}

fn adjacency(g: &Graph) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); g.node_count()];
    for &(i, j) in g.edges() {
        adj[i as usize].push(j);
        adj[j as usize].push(i);
    }
    adj
}

/// Change in cut value if vertex `v` were flipped.
#[inline]
fn flip_delta(adj: &[Vec<u32>], bits: &[u8], v: usize) -> i64 {
    let mut delta = 0i64;
    for &u in &adj[v] {
        if bits[v] == bits[u as usize] {
            delta += 1;
        } else {
            delta -= 1;
        }
    }
    delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_regular;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn k4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn k33() -> Graph {
        Graph::from_edges(
            6,
            &[
                (0, 3),
                (0, 4),
                (0, 5),
                (1, 3),
                (1, 4),
                (1, 5),
                (2, 3),
                (2, 4),
                (2, 5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn brute_force_small_fixtures() {
        let t = brute_force_max_cut(&triangle()).unwrap();
        assert_eq!(t.max_cut, 2);
        assert_eq!(t.ground_energy, -2);
        assert_eq!(cut_value(&triangle(), &t.witness).unwrap(), 2);

        let k = brute_force_max_cut(&k4()).unwrap();
        assert_eq!(k.max_cut, 4);
        assert_eq!(k.ground_energy, -4);

        let b = brute_force_max_cut(&k33()).unwrap();
        assert_eq!(b.max_cut, 9);
        assert_eq!(b.ground_energy, -9);
        assert_eq!(b.method, BaselineMethod::Exhaustive);
    }

    #[test]
    fn annealing_small_fixtures() {
        let params = AnnealParams::default();
        assert_eq!(anneal_max_cut(&triangle(), &params, 1).unwrap().max_cut, 2);
        assert_eq!(anneal_max_cut(&k33(), &params, 1).unwrap().max_cut, 9);
    }

    #[test]
    fn annealing_is_deterministic() {
        let g = generate_regular(10, 3, 11).unwrap();
        let params = AnnealParams::default();
        let a = anneal_max_cut(&g, &params, 5).unwrap();
        let b = anneal_max_cut(&g, &params, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn annealing_matches_exhaustive_at_n16() {
        // Ensemble check against the exact oracle.
        let params = AnnealParams::default();
        for instance in 0..20u64 {
            let g = generate_regular(16, 3, 1000 + instance).unwrap();
            let exact = brute_force_max_cut(&g).unwrap();
            let sa = anneal_max_cut(&g, &params, instance).unwrap();
            assert_eq!(
                sa.max_cut, exact.max_cut,
                "instance {instance}: annealing {} vs exact {}",
                sa.max_cut, exact.max_cut
            );
            assert_eq!(cut_value(&g, &sa.witness).unwrap(), sa.max_cut);
        }
    }

    #[test]
    fn invalid_anneal_params() {
        let g = triangle();
        let mut p = AnnealParams::default();
        p.t_start = 0.005; // below t_end
        assert!(matches!(
            anneal_max_cut(&g, &p, 0),
            Err(Error::InvalidParameters(_))
        ));
        let mut p = AnnealParams::default();
        p.restarts = 0;
        assert!(matches!(
            anneal_max_cut(&g, &p, 0),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn baseline_json_round_trip() {
        let rec = brute_force_max_cut(&k4()).unwrap();
        let parsed = BaselineRecord::from_json(&rec.to_json()).unwrap();
        assert_eq!(parsed, rec);
    }

    #[test]
    fn baseline_json_rejects_inconsistent_energy() {
        let doc = r#"{"graph_id":"x","max_cut":4,"ground_energy":-3,"method":"exhaustive","witness":"0011"}"#;
        assert!(matches!(
            BaselineRecord::from_json(doc),
            Err(Error::MalformedInput(_))
        ));
    }
}
