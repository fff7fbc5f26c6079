//! The mutual-information / distortion frontier over the transportation
//! polytope U(P, Q_Y).
//!
//! Everything the exponent formulas need from the inner problem reduces to
//! four queries about couplings with both marginals pinned: the minimum of
//! I(Q) under a distortion cap, the minimum of D(Q) under a rate cap, the
//! unconstrained minimizer of I + D, and the exact feasibility boundary
//! min D. With the marginals fixed, I(Q) differs from −H(Q) by a constant,
//! so the scalarized problem min I + λD is an entropic transport problem:
//! its solution is the Sinkhorn scaling of exp(−λ d), and sweeping λ traces
//! the whole frontier. The feasibility boundary itself comes from the exact
//! LP ([`super::transport`]), and the frontier endpoint at min D is the
//! max-entropy coupling on the optimal face (iterative proportional fitting
//! on the face support).
//!
//! Binary-by-binary problems (the common case) bypass the iterative path
//! entirely: with one free cell the polytope is an interval, D is affine and
//! I is strictly convex in the free cell, so every query is a one-dimensional
//! interval computation, exact to rounding.

use crate::numerics::logsumexp2;
use crate::probability::mutual_information_slices;

use super::transport::transport_min;

const SINKHORN_TOL: f64 = 1e-13;
const SINKHORN_MAX_ITERS: usize = 50_000;
/// Feasibility slack when comparing a distortion target against the LP
/// minimum.
const BOUNDARY_TOL: f64 = 1e-10;
/// Scalarization weight beyond which we treat the target as sitting on the
/// LP boundary.
const LAMBDA_MAX: f64 = 1e5;

/// One point of the frontier: mutual information and expected distortion.
#[derive(Clone, Copy, Debug)]
pub struct FrontierPoint {
    pub mi: f64,
    pub dist: f64,
}

enum Kind {
    /// One marginal has a single positive entry: U is a single coupling.
    Degenerate,
    /// 2×2 after support reduction: one free cell.
    OneDim { t_lo: f64, t_hi: f64, t_ind: f64, d_slope: f64 },
    /// Iterative path.
    General,
}

/// Frontier queries for one (P, d, Q_Y) triple. Construct per output
/// distribution; queries cache the LP end lazily.
pub struct FrontierSolver {
    nx: usize,
    ny: usize,
    p: Vec<f64>,
    qy: Vec<f64>,
    d: Vec<f64>,
    ln_p: Vec<f64>,
    ln_q: Vec<f64>,
    kind: Kind,
    ind: FrontierPoint,
    /// (min D, mi of the max-entropy coupling on the optimal face)
    lp_end: Option<(f64, f64)>,
    warm: Option<(Vec<f64>, Vec<f64>)>,
}

impl FrontierSolver {
    /// `p` over the input letters, `d` row-major over the full input × output
    /// alphabet, `q_y` over outputs. Zero-mass rows and columns are dropped.
    pub fn new(p: &[f64], d: &[f64], ny_full: usize, q_y: &[f64]) -> Self {
        let xs: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
        let ys: Vec<usize> = (0..ny_full).filter(|&j| q_y[j] > 0.0).collect();
        let (nx, ny) = (xs.len(), ys.len());
        let pr: Vec<f64> = xs.iter().map(|&i| p[i]).collect();
        let qr: Vec<f64> = ys.iter().map(|&j| q_y[j]).collect();
        let mut dr = Vec::with_capacity(nx * ny);
        for &i in &xs {
            for &j in &ys {
                dr.push(d[i * ny_full + j]);
            }
        }
        let ind_dist: f64 = (0..nx)
            .map(|i| (0..ny).map(|j| pr[i] * qr[j] * dr[i * ny + j]).sum::<f64>())
            .sum();
        let kind = if nx == 1 || ny == 1 {
            Kind::Degenerate
        } else if nx == 2 && ny == 2 {
            let t_lo = (pr[0] + qr[0] - 1.0).max(0.0);
            let t_hi = pr[0].min(qr[0]);
            Kind::OneDim {
                t_lo,
                t_hi,
                t_ind: pr[0] * qr[0],
                d_slope: dr[0] - dr[1] - dr[2] + dr[3],
            }
        } else {
            Kind::General
        };
        Self {
            nx,
            ny,
            ln_p: pr.iter().map(|v| v.ln()).collect(),
            ln_q: qr.iter().map(|v| v.ln()).collect(),
            p: pr,
            qy: qr,
            d: dr,
            kind,
            ind: FrontierPoint { mi: 0.0, dist: ind_dist },
            lp_end: None,
            warm: None,
        }
    }

    /// Testing hook: use the iterative path even on 2×2 problems.
    #[doc(hidden)]
    pub fn forced_general(p: &[f64], d: &[f64], ny_full: usize, q_y: &[f64]) -> Self {
        let mut s = Self::new(p, d, ny_full, q_y);
        if !matches!(s.kind, Kind::Degenerate) {
            s.kind = Kind::General;
        }
        s
    }

    /// The independent coupling P ⊗ Q_Y: I = 0, D = E_{P⊗Q_Y} d.
    pub fn independence(&self) -> FrontierPoint {
        self.ind
    }

    /// The exact minimum of D over U(P, Q_Y).
    pub fn d_min(&mut self) -> f64 {
        self.lp_end().0
    }

    /// min I over the D-minimizing face, i.e. the rate at the distortion
    /// boundary.
    pub fn i_at_d_min(&mut self) -> f64 {
        self.lp_end().1
    }

    fn lp_end(&mut self) -> (f64, f64) {
        if let Some(end) = self.lp_end {
            return end;
        }
        let end = match self.kind {
            Kind::Degenerate => (self.ind.dist, 0.0),
            Kind::OneDim { t_lo, t_hi, d_slope, .. } => {
                if d_slope.abs() < 1e-13 {
                    (self.ind.dist, 0.0)
                } else {
                    let t = if d_slope > 0.0 { t_lo } else { t_hi };
                    let pt = self.point_1d(t);
                    (pt.dist, pt.mi)
                }
            }
            Kind::General => {
                let sol = transport_min(&self.d, self.nx, self.ny, &self.p, &self.qy);
                // Max-entropy coupling on the optimal face: IPF with the face
                // support as the kernel.
                let mut logk = vec![f64::NEG_INFINITY; self.nx * self.ny];
                for i in 0..self.nx {
                    for j in 0..self.ny {
                        if sol.reduced_cost(&self.d, self.ny, i, j).abs() <= 1e-9 {
                            logk[i * self.ny + j] = 0.0;
                        }
                    }
                }
                let (point, converged) = self.sinkhorn_core(&logk, None);
                if converged {
                    (sol.cost, point.mi)
                } else {
                    // Fall back to the LP vertex itself (an upper bound on
                    // the face minimum of I).
                    let xm: Vec<f64> = (0..self.nx)
                        .map(|i| sol.plan[i * self.ny..(i + 1) * self.ny].iter().sum())
                        .collect();
                    let ym: Vec<f64> = (0..self.ny)
                        .map(|j| (0..self.nx).map(|i| sol.plan[i * self.ny + j]).sum())
                        .collect();
                    (sol.cost, mutual_information_slices(&sol.plan, &xm, &ym))
                }
            }
        };
        self.lp_end = Some(end);
        end
    }

    /// 𝘙(Δ) = min I(Q) over U(P, Q_Y) with D(Q) ≤ Δ; +∞ when infeasible.
    pub fn rate_at_distortion(&mut self, delta: f64) -> f64 {
        if delta >= self.ind.dist {
            return 0.0;
        }
        match self.kind {
            Kind::Degenerate => {
                if delta >= self.ind.dist - BOUNDARY_TOL {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Kind::OneDim { t_lo, t_hi, t_ind, d_slope } => {
                if d_slope.abs() < 1e-13 {
                    // D is constant and above delta (the early return above
                    // handles the feasible side).
                    return f64::INFINITY;
                }
                let t_cap = t_ind + (delta - self.ind.dist) / d_slope;
                let (lo, hi) = if d_slope > 0.0 {
                    (t_lo, t_hi.min(t_cap))
                } else {
                    (t_lo.max(t_cap), t_hi)
                };
                if lo > hi {
                    return f64::INFINITY;
                }
                self.point_1d(t_ind.clamp(lo, hi)).mi
            }
            Kind::General => {
                let (dmin, i_face) = self.lp_end();
                if delta < dmin - BOUNDARY_TOL {
                    return f64::INFINITY;
                }
                if delta <= dmin + 1e-8 {
                    return i_face;
                }
                // Bracket on the scalarization weight: D(Q_λ) decreases from
                // the independence distortion towards the LP minimum.
                let mut lam_lo = 0.0f64;
                let mut lam_hi = 1.0f64;
                let mut hit = loop {
                    let pt = self.solve_lambda(lam_hi);
                    if pt.dist <= delta {
                        break Some(pt);
                    }
                    lam_lo = lam_hi;
                    lam_hi *= 4.0;
                    if lam_hi > LAMBDA_MAX {
                        break None;
                    }
                };
                let Some(mut best) = hit.take() else {
                    return i_face;
                };
                for _ in 0..70 {
                    if best.dist >= delta - 1e-12 {
                        break;
                    }
                    let mid = 0.5 * (lam_lo + lam_hi);
                    let pt = self.solve_lambda(mid);
                    if pt.dist <= delta {
                        lam_hi = mid;
                        best = pt;
                    } else {
                        lam_lo = mid;
                    }
                    if lam_hi - lam_lo < 1e-12 * lam_hi.max(1.0) {
                        break;
                    }
                }
                best.mi.max(0.0)
            }
        }
    }

    /// 𝘋(r) = min D(Q) over U(P, Q_Y) with I(Q) ≤ r. Always feasible for
    /// r ≥ 0 (independence has I = 0).
    pub fn distortion_at_rate(&mut self, r: f64) -> f64 {
        let r = r.max(0.0);
        if r == 0.0 {
            return self.ind.dist;
        }
        match self.kind {
            Kind::Degenerate => self.ind.dist,
            Kind::OneDim { t_lo, t_hi, t_ind, d_slope } => {
                if d_slope.abs() < 1e-13 {
                    return self.ind.dist;
                }
                // {I ≤ r} is an interval around the independence point; D is
                // affine, so the minimum sits at the interval end in the
                // direction of decreasing D.
                let t = if d_slope > 0.0 {
                    self.rate_boundary_1d(t_lo, t_ind, r)
                } else {
                    self.rate_boundary_1d(t_hi, t_ind, r)
                };
                self.point_1d(t).dist
            }
            Kind::General => {
                let (dmin, i_face) = self.lp_end();
                if r >= i_face - 1e-12 {
                    return dmin;
                }
                let mut lam_lo = 0.0f64;
                let mut lam_hi = 1.0f64;
                let mut reached = false;
                while lam_hi <= LAMBDA_MAX {
                    let pt = self.solve_lambda(lam_hi);
                    if pt.mi >= r {
                        reached = true;
                        break;
                    }
                    lam_lo = lam_hi;
                    lam_hi *= 4.0;
                }
                if !reached {
                    return dmin;
                }
                let mut best = self.solve_lambda(lam_lo);
                for _ in 0..70 {
                    let mid = 0.5 * (lam_lo + lam_hi);
                    let pt = self.solve_lambda(mid);
                    if pt.mi <= r {
                        lam_lo = mid;
                        best = pt;
                    } else {
                        lam_hi = mid;
                    }
                    if lam_hi - lam_lo < 1e-12 * lam_hi.max(1.0) {
                        break;
                    }
                }
                best.dist
            }
        }
    }

    /// The coordinates (R₁, D₁) = (I, D) of the minimizer of I + D. The
    /// objective is strictly convex on the fixed-marginal slice, so the
    /// minimizer is unique.
    pub fn r1_d1(&mut self) -> (f64, f64) {
        match self.kind {
            Kind::Degenerate => (0.0, self.ind.dist),
            Kind::OneDim { t_lo, t_hi, .. } => {
                let t = golden_min(t_lo, t_hi, |t| {
                    let pt = self.point_1d(t);
                    pt.mi + pt.dist
                });
                let pt = self.point_1d(t);
                (pt.mi, pt.dist)
            }
            Kind::General => {
                let pt = self.solve_lambda(1.0);
                (pt.mi, pt.dist)
            }
        }
    }

    /// μ(R) = min{I + D : I ≤ R}: R + 𝘋(R) while the rate cap binds,
    /// R₁ + D₁ afterwards.
    pub fn mu(&mut self, r: f64) -> f64 {
        let (r1, d1) = self.r1_d1();
        if r >= r1 {
            r1 + d1
        } else {
            r + self.distortion_at_rate(r)
        }
    }

    /// min I + λD over U(P, Q_Y) through the entropic-transport fixed point.
    pub fn solve_lambda(&mut self, lambda: f64) -> FrontierPoint {
        match self.kind {
            Kind::Degenerate => self.ind,
            Kind::OneDim { t_lo, t_hi, .. } => {
                let t = golden_min(t_lo, t_hi, |t| {
                    let pt = self.point_1d(t);
                    pt.mi + lambda * pt.dist
                });
                self.point_1d(t)
            }
            Kind::General => {
                if lambda == 0.0 {
                    return self.ind;
                }
                let logk: Vec<f64> = self.d.iter().map(|&dij| -lambda * dij).collect();
                let warm = self.warm.clone();
                let (point, _) = self.sinkhorn_core(&logk, warm);
                point
            }
        }
    }

    /// Log-domain Sinkhorn/IPF against the kernel `logk`; returns the
    /// frontier point and whether the marginal residual converged.
    fn sinkhorn_core(&mut self, logk: &[f64], warm: Option<(Vec<f64>, Vec<f64>)>) -> (FrontierPoint, bool) {
        let (nx, ny) = (self.nx, self.ny);
        let (mut f, mut g) = warm.unwrap_or_else(|| (vec![0.0; nx], vec![0.0; ny]));
        if f.len() != nx || g.len() != ny {
            f = vec![0.0; nx];
            g = vec![0.0; ny];
        }
        let mut converged = false;
        for _ in 0..SINKHORN_MAX_ITERS {
            for (j, gj) in g.iter_mut().enumerate() {
                let mut acc = f64::NEG_INFINITY;
                for (i, fi) in f.iter().enumerate() {
                    acc = logsumexp2(acc, fi + logk[i * ny + j]);
                }
                *gj = self.ln_q[j] - acc;
            }
            let mut err: f64 = 0.0;
            for (i, fi) in f.iter_mut().enumerate() {
                let mut acc = f64::NEG_INFINITY;
                for (j, gj) in g.iter().enumerate() {
                    acc = logsumexp2(acc, gj + logk[i * ny + j]);
                }
                let row = (acc + *fi).exp();
                err = err.max((row - self.p[i]).abs());
                *fi = self.ln_p[i] - acc;
            }
            if err < SINKHORN_TOL {
                converged = true;
                break;
            }
        }
        let mut cells = vec![0.0f64; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                cells[i * ny + j] = (f[i] + g[j] + logk[i * ny + j]).exp();
            }
        }
        let xm: Vec<f64> = (0..nx).map(|i| cells[i * ny..(i + 1) * ny].iter().sum()).collect();
        let ym: Vec<f64> = (0..ny).map(|j| (0..nx).map(|i| cells[i * ny + j]).sum()).collect();
        let mi = mutual_information_slices(&cells, &xm, &ym);
        let dist: f64 = cells.iter().zip(&self.d).map(|(c, d)| c * d).sum();
        self.warm = Some((f, g));
        (FrontierPoint { mi, dist }, converged)
    }

    /// I and D at free cell value t (2×2 path).
    fn point_1d(&self, t: f64) -> FrontierPoint {
        let cells = [
            t.max(0.0),
            (self.p[0] - t).max(0.0),
            (self.qy[0] - t).max(0.0),
            (1.0 - self.p[0] - self.qy[0] + t).max(0.0),
        ];
        let mi = mutual_information_slices(&cells, &self.p, &self.qy);
        let dist: f64 = cells.iter().zip(&self.d).map(|(c, d)| c * d).sum();
        FrontierPoint { mi, dist }
    }

    /// The boundary of {I ≤ r} between `endpoint` and the independence point
    /// (where I = 0): the endpoint itself when feasible, otherwise the root
    /// of I = r on that side.
    fn rate_boundary_1d(&self, endpoint: f64, t_ind: f64, r: f64) -> f64 {
        if self.point_1d(endpoint).mi <= r {
            return endpoint;
        }
        let (mut far, mut near) = (endpoint, t_ind);
        for _ in 0..100 {
            let mid = 0.5 * (far + near);
            if self.point_1d(mid).mi <= r {
                near = mid;
            } else {
                far = mid;
            }
            if (far - near).abs() < 1e-15 {
                break;
            }
        }
        near
    }
}

/// Golden-section minimum of a unimodal function on [lo, hi].
fn golden_min(lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    if hi - lo < 1e-15 {
        return lo;
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..90 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a < 1e-14 {
            break;
        }
    }
    0.5 * (a + b)
}
