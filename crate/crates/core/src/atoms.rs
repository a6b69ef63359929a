//! `inf`-atoms for `f^{0,q}_p` and a stopping-time decomposition of a
//! coefficient sequence into them.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::Serialize;

use crate::cube::DyadicCube;
use crate::error::{Error, Result};
use crate::spaces::{gq_lattice, CubeCoefficients, LatticeFunction};

/// Coefficients supported on the cubes inside `support`, normalized by
/// `|| g^q(r) ||_inf <= |support|^{-1/p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinityAtom {
    pub support: DyadicCube,
    pub coefficients: CubeCoefficients,
    pub p: f64,
    pub q: f64,
}

/// `sup_x g^q(r)(x)`: the largest sum of `(|r_Q| |Q|^{-1/2})^q` along a chain
/// of nested populated cubes (the maximum for `q = inf`), evaluated on the
/// cube tree without quadrature.
pub fn gq_sup(r: &CubeCoefficients, q: f64) -> f64 {
    let terms: HashMap<DyadicCube, f64> = r
        .support()
        .map(|(cube, v)| {
            let w = v.norm() / cube.volume().sqrt();
            (*cube, if q.is_infinite() { w } else { w.powf(q) })
        })
        .collect();
    let Some(coarsest) = terms.keys().map(|c| c.scale()).min() else {
        return 0.0;
    };
    let mut best: f64 = 0.0;
    for (cube, w) in &terms {
        let mut acc = *w;
        for nu in coarsest..cube.scale() {
            if let Some(a) = terms.get(&cube.ancestor(nu).expect("coarser scale")) {
                acc = if q.is_infinite() {
                    acc.max(*a)
                } else {
                    acc + a
                };
            }
        }
        best = best.max(acc);
    }
    if q.is_infinite() {
        best
    } else {
        best.powf(1.0 / q)
    }
}

/// True iff every nonzero `r_Q` has `Q ⊆ Q_0` and `|| g^q(r) ||_inf <= |Q_0|^{-1/p}`.
pub fn verify_atom(atom: &InfinityAtom) -> bool {
    if atom
        .coefficients
        .support()
        .any(|(cube, _)| !cube.is_within(&atom.support))
    {
        return false;
    }
    gq_sup(&atom.coefficients, atom.q) <= atom.support.volume().powf(-1.0 / atom.p)
}

/// One term `lambda a` of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTerm {
    pub lambda: f64,
    pub atom: InfinityAtom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionSummary {
    pub atoms: usize,
    pub lambda_lp: f64,
}

/// `(sum_j |lambda_j|^p)^{1/p}`.
pub fn lambda_lp(terms: &[AtomTerm], p: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.lambda.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Coefficientwise `sum_j lambda_j a_j`.
pub fn reconstruct(
    terms: &[AtomTerm],
    dim: usize,
    log2_half_width: i32,
) -> Result<CubeCoefficients> {
    let mut out = CubeCoefficients::new(dim, log2_half_width);
    for t in terms {
        out = out.add_scaled(Complex64::new(t.lambda, 0.0), &t.atom.coefficients)?;
    }
    Ok(out)
}

/// Counts of cells with `G > 2^j`, aggregated over every dyadic scale from
/// the lattice scale up to the torus.
struct LevelPyramid {
    // counts[s] holds scale (lattice.scale - s)
    counts: Vec<Vec<u64>>,
}

impl LevelPyramid {
    fn new(g: &LatticeFunction, threshold: f64) -> Self {
        let dim = g.dim;
        let mut side = g.side();
        let mut level: Vec<u64> = g.values.iter().map(|v| u64::from(*v > threshold)).collect();
        let mut counts = vec![level.clone()];
        while side > 2 {
            let half = side / 2;
            let next = match dim {
                1 => (0..half).map(|i| level[2 * i] + level[2 * i + 1]).collect(),
                _ => {
                    let mut nxt = vec![0u64; half * half];
                    for r in 0..side {
                        for c in 0..side {
                            nxt[(r / 2) * half + c / 2] += level[r * side + c];
                        }
                    }
                    nxt
                }
            };
            counts.push(next);
            level = counts.last().expect("just pushed").clone();
            side = half;
        }
        Self { counts }
    }

    fn count(&self, g: &LatticeFunction, cube: &DyadicCube) -> u64 {
        let s = (g.scale - cube.scale()) as usize;
        let side = 1i64 << (cube.scale() + g.log2_half_width + 1);
        let offset = side / 2;
        let l = cube.index();
        let idx = match g.dim {
            1 => l[0] + offset,
            _ => (l[0] + offset) * side + l[1] + offset,
        };
        self.counts[s][idx as usize]
    }
}

/// Stopping-time decomposition `b = sum_j lambda_j a_j` into `inf`-atoms.
///
/// With `G = g^q(b)` and `Omega_j = {G > 2^j}`, each populated `Q` gets the
/// largest `j` with `|Q ∩ Omega_j| > |Q|/2` and is filed under the coarsest
/// dyadic `J ⊇ Q` with `|J ∩ Omega_j| > |J|/2`. Each `(j, J)` bucket becomes
/// one atom supported on `J`; `lambda` is the smallest power of two that
/// normalizes it, so `lambda a` reproduces the bucket bit for bit.
pub fn decompose_atoms(b: &CubeCoefficients, p: f64, q: f64) -> Result<Vec<AtomTerm>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidExponents(format!(
            "p = {p} must lie in (0, 1]"
        )));
    }
    if q.is_nan() || q < p {
        return Err(Error::InvalidExponents(format!(
            "q = {q} must satisfy q >= p = {p}"
        )));
    }
    let Some(g) = gq_lattice(b, q) else {
        return Ok(Vec::new());
    };
    let coarsest = -b.log2_half_width();
    let mut pyramids: HashMap<i32, LevelPyramid> = HashMap::new();
    let mut buckets: BTreeMap<(i32, DyadicCube), CubeCoefficients> = BTreeMap::new();

    for (cube, v) in b.support() {
        let cells = g.cells_of(cube);
        let mut vals: Vec<f64> = cells.iter().map(|&i| g.values[i]).collect();
        vals.sort_by(|x, y| y.total_cmp(x));
        let v_star = vals[vals.len() / 2];
        // 2^j < v_star <= 2^{j+1}
        let mut j = v_star.log2().ceil() as i32 - 1;
        while 2f64.powi(j) >= v_star {
            j -= 1;
        }
        while 2f64.powi(j + 1) < v_star {
            j += 1;
        }
        let pyramid = pyramids
            .entry(j)
            .or_insert_with(|| LevelPyramid::new(&g, 2f64.powi(j)));
        let mut owner = *cube;
        for nu in coarsest..=cube.scale() {
            let cand = cube.ancestor(nu).expect("coarser scale");
            let total = 1u64 << ((g.scale - nu) as u32 * g.dim as u32);
            if 2 * pyramid.count(&g, &cand) > total {
                owner = cand;
                break;
            }
        }
        buckets
            .entry((j, owner))
            .or_insert_with(|| CubeCoefficients::new(b.dim(), b.log2_half_width()))
            .insert(*cube, *v)?;
    }

    let mut terms = Vec::with_capacity(buckets.len());
    for ((_, owner), coeffs) in buckets {
        let need = gq_sup(&coeffs, q) * owner.volume().powf(1.0 / p);
        let mut lambda = 2f64.powi(need.log2().ceil() as i32);
        while lambda < need {
            lambda *= 2.0;
        }
        let atom = InfinityAtom {
            support: owner,
            coefficients: coeffs.scaled(Complex64::new(1.0 / lambda, 0.0)),
            p,
            q,
        };
        terms.push(AtomTerm { lambda, atom });
    }
    Ok(terms)
}
