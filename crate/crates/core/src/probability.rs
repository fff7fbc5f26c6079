//! Finite-alphabet probability primitives: simplex types with exact
//! invariants, divergences, mutual information, empirical distributions and
//! type-class combinatorics.
//!
//! Conventions used throughout: 0·ln 0 = 0 and 0·ln(0/0) = 0; ln(x/0) with
//! x > 0 is +∞, carried as an explicit `f64::INFINITY`. All information
//! quantities are in nats.

use serde::{Deserialize, Serialize};

use crate::numerics::ln_multinomial;
use crate::{Error, Result};

/// Construction renormalizes when the mass is off by at most this much.
const RENORM_TOL: f64 = 1e-9;
/// Post-construction simplex invariant.
const SIMPLEX_TOL: f64 = 1e-12;

/// A probability vector on a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and unit mass (renormalizing drift up to 1e-9).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > RENORM_TOL {
            return Err(Error::InvalidDistribution(format!("mass {sum} not within 1e-9 of 1")));
        }
        let mut probs = probs;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            for p in &mut probs {
                *p /= sum;
            }
        }
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.probs.iter()
    }

    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

/// Rows of a conditional distribution: one [`Distribution`] on the output
/// alphabet per input letter.
#[derive(Clone, Debug, PartialEq)]
pub struct Conditional {
    rows: Vec<Distribution>,
}

impl Conditional {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("conditional with no rows"));
        }
        let ny = rows[0].len();
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::ShapeMismatch("conditional rows have differing lengths".into()));
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Distribution::new(r.clone())).collect::<Result<_>>()?)
    }

    pub fn nx(&self) -> usize {
        self.rows.len()
    }

    pub fn ny(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }
}

/// Integer occurrence counts of each letter in a length-`n` sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDescriptor {
    counts: Vec<usize>,
    n: usize,
}

impl TypeDescriptor {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyInput("type descriptor with no letters"));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    /// The type of a sequence over an alphabet of the given size.
    pub fn of_sequence(seq: &[usize], alphabet: usize) -> Result<Self> {
        let mut counts = vec![0usize; alphabet];
        for &s in seq {
            if s >= alphabet {
                return Err(Error::UnknownLetter { letter: s, alphabet });
            }
            counts[s] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_len(&self) -> usize {
        self.counts.len()
    }

    /// The empirical distribution counts/n.
    pub fn distribution(&self) -> Distribution {
        Distribution {
            probs: self.counts.iter().map(|&c| c as f64 / self.n as f64).collect(),
        }
    }
}

/// Exact cell counts of a joint type: entries sum to `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointCounts {
    pub counts: Vec<usize>,
    pub n: usize,
}

/// A joint probability matrix on X × Y, stored row-major.
///
/// Joints that arise from sequences or type enumeration additionally carry
/// their exact integer counts so type-level logic needs no tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    probs: Vec<f64>,
    nx: usize,
    ny: usize,
    counts: Option<JointCounts>,
}

impl JointDistribution {
    pub fn new(probs: Vec<f64>, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || probs.len() != nx * ny {
            return Err(Error::ShapeMismatch(format!(
                "joint matrix of {} cells does not match {nx}x{ny}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > RENORM_TOL {
            return Err(Error::InvalidDistribution(format!("joint mass {sum} not within 1e-9 of 1")));
        }
        let mut probs = probs;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            for p in &mut probs {
                *p /= sum;
            }
        }
        Ok(Self {
            probs,
            nx,
            ny,
            counts: None,
        })
    }

    /// Exact joint type from integer cell counts.
    pub fn from_counts(counts: Vec<usize>, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || counts.len() != nx * ny {
            return Err(Error::ShapeMismatch(format!(
                "count matrix of {} cells does not match {nx}x{ny}",
                counts.len()
            )));
        }
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptyInput("joint type with zero total count"));
        }
        let probs = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Self {
            probs,
            nx,
            ny,
            counts: Some(JointCounts { counts, n }),
        })
    }

    /// The independent coupling p ⊗ q.
    pub fn product(p: &Distribution, q: &Distribution) -> Self {
        let mut probs = Vec::with_capacity(p.len() * q.len());
        for &px in p.iter() {
            for &qy in q.iter() {
                probs.push(px * qy);
            }
        }
        Self {
            probs,
            nx: p.len(),
            ny: q.len(),
            counts: None,
        }
    }

    /// The joint p(x)·w(y|x).
    pub fn from_input_and_kernel(p: &Distribution, w: &Conditional) -> Result<Self> {
        if p.len() != w.nx() {
            return Err(Error::ShapeMismatch(format!(
                "input distribution has {} letters, kernel has {} rows",
                p.len(),
                w.nx()
            )));
        }
        let mut probs = Vec::with_capacity(p.len() * w.ny());
        for (x, &px) in p.iter().enumerate() {
            for &wy in w.row(x).iter() {
                probs.push(px * wy);
            }
        }
        Ok(Self {
            probs,
            nx: p.len(),
            ny: w.ny(),
            counts: None,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny + y]
    }

    pub fn cells(&self) -> &[f64] {
        &self.probs
    }

    pub fn counts(&self) -> Option<&JointCounts> {
        self.counts.as_ref()
    }

    pub fn x_marginal(&self) -> Distribution {
        let mut m = vec![0.0; self.nx];
        for x in 0..self.nx {
            m[x] = self.probs[x * self.ny..(x + 1) * self.ny].iter().sum();
        }
        Distribution { probs: m }
    }

    pub fn y_marginal(&self) -> Distribution {
        let mut m = vec![0.0; self.ny];
        for x in 0..self.nx {
            for y in 0..self.ny {
                m[y] += self.probs[x * self.ny + y];
            }
        }
        Distribution { probs: m }
    }

    /// Conditional rows Q_{Y|X}; rows with zero X-marginal fall back to
    /// uniform so the result is still a kernel.
    pub fn conditional_y_given_x(&self) -> Conditional {
        let xm = self.x_marginal();
        let rows = (0..self.nx)
            .map(|x| {
                let px = xm.get(x);
                let row = if px > 0.0 {
                    self.probs[x * self.ny..(x + 1) * self.ny].iter().map(|&q| q / px).collect()
                } else {
                    vec![1.0 / self.ny as f64; self.ny]
                };
                Distribution { probs: row }
            })
            .collect();
        Conditional { rows }
    }

    /// Conditional columns Q_{X|Y}, with the same zero-marginal fallback.
    pub fn conditional_x_given_y(&self) -> Conditional {
        let ym = self.y_marginal();
        let rows = (0..self.ny)
            .map(|y| {
                let qy = ym.get(y);
                let row = if qy > 0.0 {
                    (0..self.nx).map(|x| self.probs[x * self.ny + y] / qy).collect()
                } else {
                    vec![1.0 / self.nx as f64; self.nx]
                };
                Distribution { probs: row }
            })
            .collect();
        Conditional { rows }
    }
}

/// 𝒟(p‖q) in nats; +∞ when p puts mass where q does not.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(kl_slices(p.as_slice(), q.as_slice()))
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            acc += pi * (pi / qi).ln();
        }
    }
    acc
}

/// Σ_x p(x) 𝒟(q(·|x)‖w(·|x)).
pub fn conditional_kl(q: &Conditional, w: &Conditional, p: &Distribution) -> Result<f64> {
    if q.nx() != w.nx() || q.ny() != w.ny() {
        return Err(Error::ShapeMismatch(format!(
            "kernels {}x{} vs {}x{}",
            q.nx(),
            q.ny(),
            w.nx(),
            w.ny()
        )));
    }
    if p.len() != q.nx() {
        return Err(Error::ShapeMismatch(format!(
            "input distribution has {} letters, kernels have {} rows",
            p.len(),
            q.nx()
        )));
    }
    let mut acc = 0.0;
    for x in 0..p.len() {
        let px = p.get(x);
        if px > 0.0 {
            let term = kl_slices(q.row(x).as_slice(), w.row(x).as_slice());
            if term == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
            acc += px * term;
        }
    }
    Ok(acc)
}

/// I(Q) = Σ q(x,y) ln[q(x,y) / (q_X(x) q_Y(y))] ≥ 0.
pub fn mutual_information(q: &JointDistribution) -> f64 {
    let xm = q.x_marginal();
    let ym = q.y_marginal();
    mutual_information_slices(q.cells(), xm.as_slice(), ym.as_slice())
}

pub(crate) fn mutual_information_slices(cells: &[f64], xm: &[f64], ym: &[f64]) -> f64 {
    let ny = ym.len();
    let mut acc = 0.0;
    for x in 0..xm.len() {
        for y in 0..ny {
            let q = cells[x * ny + y];
            if q > 0.0 {
                acc += q * (q / (xm[x] * ym[y])).ln();
            }
        }
    }
    // Clamp rounding noise; mutual information is nonnegative.
    acc.max(0.0)
}

/// Empirical joint type of a pair of equal-length sequences; carries exact
/// counts, so marginals equal the per-sequence types with no tolerance.
pub fn empirical_joint(xs: &[usize], ys: &[usize], nx: usize, ny: usize) -> Result<JointDistribution> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::EmptyInput("empirical joint of empty sequences"));
    }
    let mut counts = vec![0usize; nx * ny];
    for (&x, &y) in xs.iter().zip(ys) {
        if x >= nx {
            return Err(Error::UnknownLetter { letter: x, alphabet: nx });
        }
        if y >= ny {
            return Err(Error::UnknownLetter { letter: y, alphabet: ny });
        }
        counts[x * ny + y] += 1;
    }
    JointDistribution::from_counts(counts, nx, ny)
}

/// ln |𝒯_P| = ln(n! / Π_a counts(a)!).
pub fn log_type_class_size(t: &TypeDescriptor) -> f64 {
    ln_multinomial(t.counts())
}

/// All joint types with denominator `n` on an nx × ny alphabet, in
/// lexicographic order of the count matrix. The number of types is the
/// multiset coefficient C(n + nx·ny − 1, nx·ny − 1).
pub fn enumerate_joint_types(nx: usize, ny: usize, n: usize) -> Vec<JointDistribution> {
    let cells = nx * ny;
    let mut out = Vec::new();
    let mut counts = vec![0usize; cells];
    fill_compositions(&mut counts, 0, n, &mut |c| {
        out.push(JointDistribution::from_counts(c.to_vec(), nx, ny).expect("valid joint type"));
    });
    out
}

/// All distributions on `dim` letters with entries multiples of 1/k, in
/// lexicographic order; C(k + dim − 1, dim − 1) points.
pub fn simplex_grid(dim: usize, k: usize) -> Vec<Distribution> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; dim];
    fill_compositions(&mut counts, 0, k, &mut |c| {
        out.push(Distribution {
            probs: c.iter().map(|&v| v as f64 / k as f64).collect(),
        });
    });
    out
}

/// Enumerates every way to write `rest` as an ordered sum over buf[at..].
fn fill_compositions(buf: &mut [usize], at: usize, rest: usize, emit: &mut impl FnMut(&[usize])) {
    if at + 1 == buf.len() {
        buf[at] = rest;
        emit(buf);
        return;
    }
    for v in 0..=rest {
        buf[at] = v;
        fill_compositions(buf, at + 1, rest - v, emit);
    }
}

/// All sequences in the type class of `t`, i.e. distinct permutations of the
/// composition multiset, in lexicographic order.
pub fn enumerate_type_class(t: &TypeDescriptor) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut remaining = t.counts().to_vec();
    let mut seq = Vec::with_capacity(t.n());
    fn rec(remaining: &mut [usize], seq: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if seq.len() == n {
            out.push(seq.clone());
            return;
        }
        for a in 0..remaining.len() {
            if remaining[a] > 0 {
                remaining[a] -= 1;
                seq.push(a);
                rec(remaining, seq, n, out);
                seq.pop();
                remaining[a] += 1;
            }
        }
    }
    rec(&mut remaining, &mut seq, t.n(), &mut out);
    out
}
