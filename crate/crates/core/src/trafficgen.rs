//! Synthetic demand generators.
//!
//! Single-block demand is a weighted sum of random permutation matrices --
//! a few large flows carrying most of the traffic plus many small ones --
//! with Gaussian perturbation on the nonzero entries. Multi-block demand
//! places independently generated blocks on the diagonal, modelling tenants
//! that only talk among themselves. The window is an integer slot count
//! (1000 slots by default stands in for a normalized window of 1) so all
//! entries are integers.
//!
//! Generators are pure given the RNG state: the same seed always yields the
//! same matrix. After noise, any row or column that overflows the window is
//! scaled back proportionally (with flooring), so generated matrices are
//! always feasible.

use crate::error::{Error, Result};
use crate::model::{Matching, TrafficMatrix};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Default slot count representing a normalized scheduling window of 1.
pub const DEFAULT_WINDOW_SLOTS: u64 = 1000;

/// Parameters of the single-block model: `n_large` flows carrying a
/// `c_large` fraction of the per-port load and `n_small` flows carrying
/// `c_small`, each flow a random permutation, plus Gaussian noise with
/// standard deviation `noise_std * window` on nonzero entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleBlockSpec {
    pub n: usize,
    pub n_large: usize,
    pub n_small: usize,
    pub c_large: f64,
    pub c_small: f64,
    pub noise_std: f64,
    pub window: u64,
}

impl SingleBlockSpec {
    /// The paper-style default: 100 ports, 4 large flows with 70% of the
    /// traffic, 12 small flows with 30%, 0.3% noise.
    pub fn default_desk_scale() -> Self {
        Self {
            n: 100,
            n_large: 4,
            n_small: 12,
            c_large: 0.7,
            c_small: 0.3,
            noise_std: 0.003,
            window: DEFAULT_WINDOW_SLOTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::SpecMismatch("n must be >= 1".into()));
        }
        if self.c_large < 0.0 || self.c_small < 0.0 {
            return Err(Error::SpecMismatch("traffic fractions must be >= 0".into()));
        }
        if self.c_large + self.c_small > 1.0 + 1e-9 {
            return Err(Error::SpecMismatch(format!(
                "c_large + c_small = {} exceeds 1",
                self.c_large + self.c_small
            )));
        }
        if self.c_large > 0.0 && self.n_large == 0 {
            return Err(Error::SpecMismatch(
                "c_large > 0 requires n_large >= 1".into(),
            ));
        }
        if self.c_small > 0.0 && self.n_small == 0 {
            return Err(Error::SpecMismatch(
                "c_small > 0 requires n_small >= 1".into(),
            ));
        }
        if self.noise_std < 0.0 {
            return Err(Error::SpecMismatch("noise_std must be >= 0".into()));
        }
        Ok(())
    }
}

/// One diagonal block of a multi-block demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockSpec {
    /// Sparse-and-skewed block with its own flow structure.
    Skewed {
        size: usize,
        n_large: usize,
        n_small: usize,
        c_large: f64,
        c_small: f64,
        noise_std: f64,
    },
    /// Dense block with uniform entries (up to noise); `load` is the
    /// fraction of the window each port carries.
    Uniform {
        size: usize,
        load: f64,
        noise_std: f64,
    },
    /// Block carrying `base_flows + floor(sigma * (U - 0.5))` equi-valued
    /// flows, `U ~ unif(0,1)`, at least one flow.
    EquiFlows {
        size: usize,
        base_flows: u32,
        sigma: f64,
        noise_std: f64,
        load: f64,
    },
}

impl BlockSpec {
    pub fn size(&self) -> usize {
        match self {
            BlockSpec::Skewed { size, .. }
            | BlockSpec::Uniform { size, .. }
            | BlockSpec::EquiFlows { size, .. } => *size,
        }
    }
}

/// Block-diagonal demand: `blocks` placed on the diagonal of an `n x n`
/// matrix, all off-block entries zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiBlockSpec {
    pub n: usize,
    pub window: u64,
    pub blocks: Vec<BlockSpec>,
}

impl MultiBlockSpec {
    pub fn validate(&self) -> Result<()> {
        let total: usize = self.blocks.iter().map(|b| b.size()).sum();
        if total != self.n {
            return Err(Error::SpecMismatch(format!(
                "block sizes sum to {total} but n = {}",
                self.n
            )));
        }
        if self.blocks.iter().any(|b| b.size() == 0) {
            return Err(Error::SpecMismatch("zero-sized block".into()));
        }
        Ok(())
    }
}

/// Uniformly random full permutation as a matching (Fisher-Yates).
pub fn random_permutation_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matching {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    Matching::from_permutation(&perm).expect("permutation is a valid matching")
}

/// Shared inner generator: sums weighted random permutations, perturbs the
/// nonzero entries, clamps at zero, rounds, and repairs feasibility.
fn gen_block<R: Rng + ?Sized>(
    n: usize,
    window: u64,
    flows: &[(usize, f64)], // (count, per-flow weight fraction of window)
    noise_std: f64,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut accum = vec![vec![0.0f64; n]; n];
    for &(count, weight_fraction) in flows {
        let weight = weight_fraction * window as f64;
        for _ in 0..count {
            let perm = random_permutation_matrix(n, rng);
            for &(i, j) in perm.pairs() {
                accum[i][j] += weight;
            }
        }
    }
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std * window as f64).expect("valid std");
        for row in accum.iter_mut() {
            for v in row.iter_mut() {
                if *v > 0.0 {
                    *v += normal.sample(rng);
                }
            }
        }
    }
    accum
}

/// Repairs post-noise infeasibility: when any row or column sum exceeds the
/// window, every entry is scaled by `window / max_sum` (flooring). A single
/// global factor keeps the relative flow weights intact, which per-row
/// clipping would distort.
fn rescale_to_window(t: &mut TrafficMatrix, window: u64) {
    let n = t.n();
    let max_sum = (0..n)
        .map(|i| t.row_sum(i))
        .chain((0..n).map(|j| t.col_sum(j)))
        .max()
        .unwrap_or(0);
    if max_sum <= window {
        return;
    }
    for i in 0..n {
        for j in 0..n {
            let scaled = (t.get(i, j) as u128 * window as u128 / max_sum as u128) as u64;
            t.set(i, j, scaled);
        }
    }
    // Flooring can leave a sum one slot high in pathological cases; the
    // division above makes sums <= window exactly, so nothing more to do.
    debug_assert!((0..n).all(|i| t.row_sum(i) <= window && t.col_sum(i) <= window));
}

fn quantize(accum: &[Vec<f64>], window: u64) -> TrafficMatrix {
    let n = accum.len();
    let mut t = TrafficMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            let v = accum[i][j].max(0.0).round() as u64;
            t.set(i, j, v);
        }
    }
    rescale_to_window(&mut t, window);
    t
}

/// Generates a single-block demand matrix.
pub fn gen_single_block<R: Rng + ?Sized>(
    spec: &SingleBlockSpec,
    rng: &mut R,
) -> Result<TrafficMatrix> {
    spec.validate()?;
    let mut flows = Vec::new();
    if spec.n_large > 0 && spec.c_large > 0.0 {
        flows.push((spec.n_large, spec.c_large / spec.n_large as f64));
    }
    if spec.n_small > 0 && spec.c_small > 0.0 {
        flows.push((spec.n_small, spec.c_small / spec.n_small as f64));
    }
    let accum = gen_block(spec.n, spec.window, &flows, spec.noise_std, rng);
    Ok(quantize(&accum, spec.window))
}

/// Generates a block-diagonal demand matrix.
pub fn gen_multi_block<R: Rng + ?Sized>(
    spec: &MultiBlockSpec,
    rng: &mut R,
) -> Result<TrafficMatrix> {
    spec.validate()?;
    let mut t = TrafficMatrix::zero(spec.n);
    let mut offset = 0usize;
    for block in &spec.blocks {
        let size = block.size();
        let accum = match block {
            BlockSpec::Skewed {
                n_large,
                n_small,
                c_large,
                c_small,
                noise_std,
                ..
            } => {
                let sub = SingleBlockSpec {
                    n: size,
                    n_large: *n_large,
                    n_small: *n_small,
                    c_large: *c_large,
                    c_small: *c_small,
                    noise_std: *noise_std,
                    window: spec.window,
                };
                sub.validate()?;
                let mut flows = Vec::new();
                if sub.n_large > 0 && sub.c_large > 0.0 {
                    flows.push((sub.n_large, sub.c_large / sub.n_large as f64));
                }
                if sub.n_small > 0 && sub.c_small > 0.0 {
                    flows.push((sub.n_small, sub.c_small / sub.n_small as f64));
                }
                gen_block(size, spec.window, &flows, *noise_std, rng)
            }
            BlockSpec::Uniform {
                load, noise_std, ..
            } => {
                let base = load * spec.window as f64 / size as f64;
                let mut accum = vec![vec![base; size]; size];
                if *noise_std > 0.0 {
                    let normal =
                        Normal::new(0.0, noise_std * spec.window as f64).expect("valid std");
                    for row in accum.iter_mut() {
                        for v in row.iter_mut() {
                            *v += normal.sample(rng);
                        }
                    }
                }
                accum
            }
            BlockSpec::EquiFlows {
                base_flows,
                sigma,
                noise_std,
                load,
                ..
            } => {
                let u: f64 = rng.gen_range(0.0..1.0);
                let delta = (sigma * (u - 0.5)).floor() as i64;
                let flows_count = ((*base_flows as i64 + delta).max(1)) as usize;
                let flows = vec![(flows_count, load / flows_count as f64)];
                gen_block(size, spec.window, &flows, *noise_std, rng)
            }
        };
        let sub = quantize(&accum, spec.window);
        for i in 0..size {
            for j in 0..size {
                t.set(offset + i, offset + j, sub.get(i, j));
            }
        }
        offset += size;
    }
    Ok(t)
}
