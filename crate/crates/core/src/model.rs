//! Ising problems, weighted graphs and the MAX-CUT reduction.
//!
//! The Ising energy of a spin configuration `σ ∈ {±1}^N` is
//!
//! ```text
//! H(σ) = − Σ_{j<l} J_jl σ_j σ_l
//! ```
//!
//! and a MAX-CUT instance with weights `w_jl` maps onto it through `J_jl = −w_jl`,
//! so that maximum cuts are exactly the ground states. The cut `S` encoded by a
//! configuration is `{ j : σ_j = +1 }`.
//!
//! Vertex indices are 0-based in the Rust API. The JSON file formats use 1-based
//! indices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CimError, Result};

/// Largest problem accepted by [`brute_force_spectrum`].
pub const MAX_BRUTE_FORCE_SPINS: usize = 26;

/// Absolute tolerance used to group energies into levels.
pub const LEVEL_TOLERANCE: f64 = 1e-9;

/// Undirected graph with real edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    order: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

impl Graph {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(CimError::InvalidGraph("order must be positive".into()));
        }
        Ok(Self {
            order,
            edges: BTreeMap::new(),
        })
    }

    /// Builds a unit-weight graph from 0-based vertex pairs.
    pub fn unweighted(order: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(order)?;
        for &(j, l) in edges {
            g.add_edge(j, l, 1.0)?;
        }
        Ok(g)
    }

    /// Adds an edge between 0-based vertices `j` and `l`.
    pub fn add_edge(&mut self, j: usize, l: usize, weight: f64) -> Result<()> {
        if j == l {
            return Err(CimError::InvalidGraph(format!("self-loop at vertex {}", j + 1)));
        }
        if j >= self.order || l >= self.order {
            return Err(CimError::InvalidGraph(format!(
                "edge ({}, {}) outside vertex range 1..={}",
                j + 1,
                l + 1,
                self.order
            )));
        }
        if !weight.is_finite() {
            return Err(CimError::InvalidGraph("edge weight must be finite".into()));
        }
        let key = (j.min(l), j.max(l));
        if self.edges.insert(key, weight).is_some() {
            return Err(CimError::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                key.0 + 1,
                key.1 + 1
            )));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(j, l, w)` with `j < l`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(j, l), &w)| (j, l, w))
    }

    pub fn has_edge(&self, j: usize, l: usize) -> bool {
        self.edges.contains_key(&(j.min(l), j.max(l)))
    }

    pub fn weight(&self, j: usize, l: usize) -> f64 {
        self.edges.get(&(j.min(l), j.max(l))).copied().unwrap_or(0.0)
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.values().all(|&w| w == 1.0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.order];
        for &(j, l) in self.edges.keys() {
            deg[j] += 1;
            deg[l] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.order];
        for &(j, l) in self.edges.keys() {
            adj[j].push(l);
            adj[l].push(j);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.order];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_regular(&self, degree: usize) -> bool {
        self.degrees().into_iter().all(|d| d == degree)
    }

    /// Relabels vertices so that old vertex `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.order {
            return Err(CimError::SizeMismatch {
                expected: self.order,
                got: perm.len(),
            });
        }
        let mut g = Self::new(self.order)?;
        for (j, l, w) in self.edges() {
            g.add_edge(perm[j], perm[l], w)?;
        }
        Ok(g)
    }

    /// Sum of all edge weights, each edge counted once.
    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson {
            n: self.order,
            edges: self.edges().map(|(j, l, w)| (j + 1, l + 1, w)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        let mut g = Graph::new(raw.n).map_err(serde::de::Error::custom)?;
        for (j, l, w) in raw.edges {
            if j == 0 || l == 0 {
                return Err(serde::de::Error::custom("vertex indices are 1-based"));
            }
            g.add_edge(j - 1, l - 1, w).map_err(serde::de::Error::custom)?;
        }
        Ok(g)
    }
}

/// Symmetric coupling matrix `J` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    size: usize,
    couplings: Vec<f64>,
}

impl IsingProblem {
    /// Builds a problem from a row-major `size × size` matrix.
    pub fn new(size: usize, couplings: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(CimError::InvalidProblem("size must be positive".into()));
        }
        if couplings.len() != size * size {
            return Err(CimError::SizeMismatch {
                expected: size * size,
                got: couplings.len(),
            });
        }
        for j in 0..size {
            if couplings[j * size + j] != 0.0 {
                return Err(CimError::InvalidProblem(format!(
                    "nonzero diagonal entry J_{}{}",
                    j + 1,
                    j + 1
                )));
            }
            for l in 0..j {
                let (a, b) = (couplings[j * size + l], couplings[l * size + j]);
                if !a.is_finite() {
                    return Err(CimError::InvalidProblem("couplings must be finite".into()));
                }
                if a != b {
                    return Err(CimError::NotSymmetric((a - b).abs()));
                }
            }
        }
        Ok(Self { size, couplings })
    }

    /// Builds a problem from 0-based `(j, l, J_jl)` triples.
    pub fn from_pairs(size: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = vec![0.0; size * size];
        for &(j, l, v) in pairs {
            if j == l || j >= size || l >= size {
                return Err(CimError::InvalidProblem(format!(
                    "invalid coupling index ({}, {})",
                    j + 1,
                    l + 1
                )));
            }
            m[j * size + l] = v;
            m[l * size + j] = v;
        }
        Self::new(size, m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coupling(&self, j: usize, l: usize) -> f64 {
        self.couplings[j * self.size + l]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Nonzero couplings `(j, l, J_jl)` with `j < l`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.size;
        (0..n).flat_map(move |j| {
            ((j + 1)..n).filter_map(move |l| {
                let v = self.couplings[j * n + l];
                (v != 0.0).then_some((j, l, v))
            })
        })
    }

    /// `Σ_{j<l} (−J_jl)`: the total edge weight of the equivalent MAX-CUT instance.
    pub fn total_cut_weight(&self) -> f64 {
        -self.pairs().map(|(_, _, v)| v).sum::<f64>()
    }
}

#[derive(Serialize, Deserialize)]
struct IsingJson {
    n: usize,
    couplings: Vec<(usize, usize, f64)>,
}

impl Serialize for IsingProblem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IsingJson {
            n: self.size,
            couplings: self.pairs().map(|(j, l, v)| (j + 1, l + 1, v)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IsingProblem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = IsingJson::deserialize(d)?;
        let mut pairs = Vec::with_capacity(raw.couplings.len());
        for (j, l, v) in raw.couplings {
            if j == 0 || l == 0 {
                return Err(serde::de::Error::custom("spin indices are 1-based"));
            }
            pairs.push((j - 1, l - 1, v));
        }
        IsingProblem::from_pairs(raw.n, &pairs).map_err(serde::de::Error::custom)
    }
}

/// A configuration of `N` Ising spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(CimError::InvalidSpin(bad));
        }
        Ok(Self(spins))
    }

    /// Bit `j` of `mask` set means `σ_j = −1`.
    pub fn from_mask(size: usize, mask: u64) -> Self {
        Self((0..size).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, j: usize) -> f64 {
        f64::from(self.0[j])
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Representative of `{σ, −σ}` whose first spin is `+1`.
    pub fn gauge_fixed(&self) -> Self {
        match self.0.first() {
            Some(-1) => self.flipped(),
            _ => self.clone(),
        }
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = CimError;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Self {
        s.0
    }
}

/// `J_jl = −w_jl` on edges, zero elsewhere.
pub fn maxcut_to_ising(g: &Graph) -> IsingProblem {
    let n = g.order();
    let mut m = vec![0.0; n * n];
    for (j, l, w) in g.edges() {
        m[j * n + l] = -w;
        m[l * n + j] = -w;
    }
    IsingProblem::new(n, m).expect("graph invariants guarantee a valid coupling matrix")
}

fn check_size(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(CimError::SizeMismatch { expected, got });
    }
    Ok(())
}

/// `H = −Σ_{j<l} J_jl σ_j σ_l`.
pub fn ising_energy(problem: &IsingProblem, spins: &SpinConfig) -> Result<f64> {
    check_size(problem.size(), spins.len())?;
    let n = problem.size();
    let mut h = 0.0;
    for j in 0..n {
        let row = &problem.couplings[j * n..(j + 1) * n];
        let acc: f64 = (j + 1..n).map(|l| row[l] * spins.get(l)).sum();
        h -= acc * spins.get(j);
    }
    Ok(h)
}

/// Total weight of the edges crossing `(S, V∖S)` with `S = { j : σ_j = +1 }`.
pub fn cut_weight(g: &Graph, spins: &SpinConfig) -> Result<f64> {
    check_size(g.order(), spins.len())?;
    Ok(g.edges()
        .filter(|&(j, l, _)| spins.spins()[j] != spins.spins()[l])
        .map(|(_, _, w)| w)
        .sum())
}

/// One energy level of the exhaustive spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumLevel {
    pub cut_weight: f64,
    pub ising_energy: f64,
    pub multiplicity: u64,
}

/// Every energy level of an Ising problem, obtained by exhaustive enumeration.
///
/// Levels are sorted by descending cut weight (ascending energy). A cut `S` and its
/// complement count as two configurations, so every multiplicity is even.
#[derive(Debug, Clone, Serialize)]
pub struct CutSpectrum {
    pub levels: Vec<SpectrumLevel>,
    pub ground_energy: f64,
    pub n0: u64,
    pub n1: u64,
    #[serde(skip)]
    problem: IsingProblem,
}

impl CutSpectrum {
    pub fn problem(&self) -> &IsingProblem {
        &self.problem
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    /// Index of the level holding `energy`, if any.
    pub fn level_of_energy(&self, energy: f64) -> Option<usize> {
        self.levels
            .iter()
            .position(|l| (l.ising_energy - energy).abs() <= LEVEL_TOLERANCE)
    }

    /// All configurations in the lowest level, in enumeration order.
    pub fn ground_states(&self) -> Vec<SpinConfig> {
        let mut out = Vec::new();
        let n = self.problem.size();
        for_each_energy(&self.problem, |mask, e| {
            if (e - self.ground_energy).abs() <= LEVEL_TOLERANCE {
                let s = SpinConfig::from_mask(n, mask);
                out.push(s.flipped());
                out.push(s);
            }
        });
        out.sort();
        out
    }
}

/// Calls `f(mask, energy)` for every configuration with `σ_{N−1} = +1`.
///
/// Configurations are visited in Gray-code order; local fields are updated
/// incrementally and the energy is recomputed exactly every 4096 flips.
fn for_each_energy(problem: &IsingProblem, mut f: impl FnMut(u64, f64)) {
    let n = problem.size();
    let free = n - 1;
    let mut spins = vec![1.0f64; n];
    // field[k] = Σ_l J_kl σ_l
    let mut field: Vec<f64> = (0..n)
        .map(|k| problem.couplings[k * n..(k + 1) * n].iter().sum())
        .collect();
    let exact = |spins: &[f64]| {
        let mut h = 0.0;
        for j in 0..n {
            let row = &problem.couplings[j * n + j + 1..(j + 1) * n];
            let acc: f64 = row.iter().zip(&spins[j + 1..]).map(|(c, s)| c * s).sum();
            h -= acc * spins[j];
        }
        h
    };
    let mut energy = exact(&spins);
    let mut mask = 0u64;
    f(mask, energy);
    let total: u64 = 1 << free;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        let old = spins[k];
        energy += 2.0 * old * field[k];
        spins[k] = -old;
        mask ^= 1 << k;
        let row = &problem.couplings[k * n..(k + 1) * n];
        for (fl, &jkl) in field.iter_mut().zip(row) {
            *fl -= 2.0 * old * jkl;
        }
        if step % 4096 == 0 {
            energy = exact(&spins);
        }
        f(mask, energy);
    }
}

/// Exhaustively enumerates all `2^N` configurations.
pub fn brute_force_spectrum(problem: &IsingProblem) -> Result<CutSpectrum> {
    let n = problem.size();
    if n > MAX_BRUTE_FORCE_SPINS {
        return Err(CimError::TooLarge {
            size: n,
            limit: MAX_BRUTE_FORCE_SPINS,
        });
    }
    // bucket index → (first energy seen, count)
    let mut buckets: BTreeMap<i64, (f64, u64)> = BTreeMap::new();
    for_each_energy(problem, |_, e| {
        let key = (e / LEVEL_TOLERANCE).round() as i64;
        buckets.entry(key).or_insert((e, 0)).1 += 2;
    });

    let total = problem.total_cut_weight();
    let mut levels: Vec<SpectrumLevel> = Vec::new();
    for (energy, count) in buckets.into_values() {
        match levels.last_mut() {
            Some(last) if (energy - last.ising_energy).abs() <= LEVEL_TOLERANCE => {
                last.multiplicity += count;
            }
            _ => levels.push(SpectrumLevel {
                cut_weight: (total - energy) / 2.0,
                ising_energy: energy,
                multiplicity: count,
            }),
        }
    }
    Ok(CutSpectrum {
        ground_energy: levels[0].ising_energy,
        n0: levels[0].multiplicity,
        n1: levels.get(1).map_or(0, |l| l.multiplicity),
        levels,
        problem: problem.clone(),
    })
}
