//! Independent double simplex-grid oracle for the exponent formulas on
//! two-message-letter, binary-output problems.
//!
//! Everything here is recomputed from raw transition probabilities with its
//! own arithmetic — no calls into the library's solvers — so agreement with
//! the engine is a genuine cross-check. The inner minimizations run over a
//! grid on the single free cell of the coupling polytope (plus its exact
//! endpoints); the outer minimizations run over simplex grids of the stated
//! base resolution, followed by local grid subdivision around the winning
//! cell so the oracle's own discretization error stays well below the
//! tolerances it certifies.

use rayon::prelude::*;

/// Constraint slack, matching the engine's.
const EPS: f64 = 1e-9;

/// Inner-scan resolution for the base grid pass.
const INNER_BASE: usize = 2_000;
/// Inner-scan resolution during refinement passes.
const INNER_FINE: usize = 20_000;

/// A 2×2 exponent problem in raw numbers.
#[derive(Clone, Debug)]
pub struct Problem2x2 {
    /// Noise output row Q₀.
    pub q0: [f64; 2],
    /// Message rows W(·|x).
    pub w: [[f64; 2]; 2],
    /// Composition over the two message letters.
    pub p: [f64; 2],
    pub rate: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Problem2x2 {
    pub fn new(rows: &[[f64; 2]; 3], p: [f64; 2], rate: f64, alpha: f64, beta: f64) -> Self {
        Self {
            q0: rows[0],
            w: [rows[1], rows[2]],
            p,
            rate,
            alpha,
            beta,
        }
    }

    fn d(&self, x: usize, y: usize) -> f64 {
        (self.q0[y] / self.w[x][y]).ln()
    }

    fn xi(&self) -> f64 {
        self.alpha.max(0.0) - self.beta
    }
}

/// I and D sampled over the free cell t = q(0,0) of couplings with row
/// marginal p and column marginal qy.
pub struct InnerScan {
    points: Vec<(f64, f64)>,
}

pub fn inner_scan(prob: &Problem2x2, qy: [f64; 2], res: usize) -> InnerScan {
    let p = prob.p;
    let t_lo = (p[0] + qy[0] - 1.0).max(0.0);
    let t_hi = p[0].min(qy[0]);
    let mut ts: Vec<f64> = Vec::with_capacity(res + 3);
    ts.push(t_lo);
    let mut k = (t_lo * res as f64).ceil() as i64;
    while (k as f64) / res as f64 <= t_hi {
        ts.push(k as f64 / res as f64);
        k += 1;
    }
    ts.push(t_hi);
    let points = ts
        .into_iter()
        .map(|t| {
            let cells = [
                t.max(0.0),
                (p[0] - t).max(0.0),
                (qy[0] - t).max(0.0),
                (1.0 - p[0] - qy[0] + t).max(0.0),
            ];
            let marg = [p[0], p[1], qy[0], qy[1]];
            let mut mi = 0.0;
            let mut dist = 0.0;
            for x in 0..2 {
                for y in 0..2 {
                    let q = cells[x * 2 + y];
                    if q > 0.0 {
                        mi += q * (q / (marg[x] * marg[2 + y])).ln();
                        dist += q * prob.d(x, y);
                    }
                }
            }
            (mi.max(0.0), dist)
        })
        .collect();
    InnerScan { points }
}

impl InnerScan {
    /// min I over D ≤ delta (+∞ if no grid point qualifies).
    pub fn rate_at(&self, delta: f64) -> f64 {
        self.points
            .iter()
            .filter(|(_, d)| *d <= delta + EPS)
            .map(|(i, _)| *i)
            .fold(f64::INFINITY, f64::min)
    }

    /// min D over I ≤ r.
    pub fn dist_at(&self, r: f64) -> f64 {
        self.points
            .iter()
            .filter(|(i, _)| *i <= r + EPS)
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min)
    }

    /// min I + D, ties to the smaller I.
    pub fn r1_d1(&self) -> (f64, f64) {
        let mut best = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for &(i, d) in &self.points {
            let v = i + d;
            if v < best.0 - 1e-15 || (v < best.0 + 1e-15 && i < best.1) {
                best = (v, i, d);
            }
        }
        (best.1, best.2)
    }

    /// min I + D over I ≤ r (the direct definition of μ).
    pub fn mu(&self, r: f64) -> f64 {
        self.points
            .iter()
            .filter(|(i, _)| *i <= r + EPS)
            .map(|(i, d)| i + d)
            .fold(f64::INFINITY, f64::min)
    }
}

fn kl2(p: &[f64; 2], q: &[f64; 2]) -> f64 {
    let mut acc = 0.0;
    for k in 0..2 {
        if p[k] > 0.0 {
            if q[k] <= 0.0 {
                return f64::INFINITY;
            }
            acc += p[k] * (p[k] / q[k]).ln();
        }
    }
    acc.max(0.0)
}

/// Minimize an objective of the output distribution over the base grid, then
/// subdivide twice around the winner.
fn outer_min_1d(res: usize, objective: impl Fn(f64, usize) -> f64 + Sync) -> f64 {
    let step = 1.0 / res as f64;
    let evals: Vec<(f64, f64)> = (0..=res)
        .into_par_iter()
        .map(|s| {
            let q = s as f64 * step;
            (objective(q, INNER_BASE), q)
        })
        .collect();
    let (mut best, mut at) = evals
        .into_iter()
        .fold((f64::INFINITY, 0.0), |acc, v| if v.0 < acc.0 { v } else { acc });
    let mut width = step;
    for _ in 0..2 {
        let lo = (at - width).max(0.0);
        let hi = (at + width).min(1.0);
        for s in 0..=80 {
            let q = lo + (hi - lo) * s as f64 / 80.0;
            let v = objective(q, INNER_FINE);
            if v < best {
                best = v;
                at = q;
            }
        }
        width = (hi - lo) / 40.0;
    }
    best
}

fn ea_objective(prob: &Problem2x2, q0y: f64, inner_res: usize) -> f64 {
    let qy = [q0y, 1.0 - q0y];
    let scan = inner_scan(prob, qy, inner_res);
    let delta = prob.alpha - prob.beta;
    let penalty = if delta <= scan.mu(prob.rate) - prob.rate {
        let r = scan.rate_at(delta);
        if r.is_finite() {
            (r - prob.rate).max(0.0)
        } else {
            f64::INFINITY
        }
    } else {
        0.0
    };
    kl2(&qy, &prob.q0) + penalty
}

fn eb_objective(prob: &Problem2x2, q0y: f64, inner_res: usize) -> f64 {
    let qy = [q0y, 1.0 - q0y];
    let scan = inner_scan(prob, qy, inner_res);
    let r = scan.rate_at(-prob.beta);
    let penalty = if r.is_finite() {
        (r - prob.rate).max(0.0)
    } else {
        f64::INFINITY
    };
    kl2(&qy, &prob.q0) + penalty
}

/// E_A by double grid search.
pub fn e_a(prob: &Problem2x2, res_outer: usize) -> f64 {
    outer_min_1d(res_outer, |q, inner| ea_objective(prob, q, inner))
}

/// E_B by double grid search.
pub fn e_b(prob: &Problem2x2, res_outer: usize) -> f64 {
    outer_min_1d(res_outer, |q, inner| eb_objective(prob, q, inner))
}

pub struct ConditionalOracle {
    pub e_md: f64,
    pub e_1: f64,
    pub e_2: f64,
}

/// Objective values of the three kernel exponents at rows ((a,1−a),(b,1−b)).
fn cond_objectives(prob: &Problem2x2, a: f64, b: f64, inner_res: usize) -> [f64; 3] {
    let xi = prob.xi();
    let delta = prob.alpha - prob.beta;
    let row0 = [a, 1.0 - a];
    let row1 = [b, 1.0 - b];
    let kl = prob.p[0] * kl2(&row0, &prob.w[0]) + prob.p[1] * kl2(&row1, &prob.w[1]);
    let qy = [
        prob.p[0] * row0[0] + prob.p[1] * row1[0],
        prob.p[0] * row0[1] + prob.p[1] * row1[1],
    ];
    let mut tilt = 0.0;
    for y in 0..2 {
        if row0[y] > 0.0 {
            tilt += prob.p[0] * row0[y] * prob.d(0, y);
        }
        if row1[y] > 0.0 {
            tilt += prob.p[1] * row1[y] * prob.d(1, y);
        }
    }
    let scan = inner_scan(prob, qy, inner_res);

    // E_MD: tilt and threshold-rate constraints (the first in the
    // derivation-consistent direction 𝘋(R;Q_Y) ≥ ξ ≤ tilt).
    let e_md = if tilt >= xi - EPS && scan.dist_at(prob.rate) >= xi - EPS {
        let (r1c, d1c) = scan.r1_d1();
        let ok = if d1c <= xi {
            scan.rate_at(xi) >= prob.rate - (-prob.alpha).max(0.0) - EPS
        } else {
            r1c + d1c >= prob.rate + prob.alpha - prob.beta - EPS
        };
        if ok {
            kl
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };

    // E₁: tilt cap.
    let e_1 = if tilt <= xi + EPS {
        let r = scan.rate_at(tilt);
        if r.is_finite() {
            kl + (r - prob.rate).max(0.0)
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };

    // E₂: unconstrained.
    let r2 = scan.rate_at(delta);
    let e_2 = if r2.is_finite() {
        kl + (r2 - prob.rate).max(0.0)
    } else {
        f64::INFINITY
    };

    [e_md, e_1, e_2]
}

/// E_MD, E₁ and E₂ by a grid over the two kernel rows, with local grid
/// subdivision around each exponent's winning cell.
pub fn conditionals(prob: &Problem2x2, res_outer: usize) -> ConditionalOracle {
    let step = 1.0 / res_outer as f64;
    let evals: Vec<([f64; 3], f64, f64)> = (0..=res_outer)
        .into_par_iter()
        .flat_map_iter(|ia| {
            let a = ia as f64 * step;
            (0..=res_outer).map(move |ib| (a, ib as f64 * step))
        })
        .map(|(a, b)| (cond_objectives(prob, a, b, INNER_BASE), a, b))
        .collect();

    let mut out = [f64::INFINITY; 3];
    for k in 0..3 {
        let (mut best, mut at_a, mut at_b) = (f64::INFINITY, 0.0, 0.0);
        for (vals, a, b) in &evals {
            if vals[k] < best {
                best = vals[k];
                at_a = *a;
                at_b = *b;
            }
        }
        if best.is_infinite() {
            out[k] = best;
            continue;
        }
        let mut width = step;
        for _ in 0..2 {
            let (alo, ahi) = ((at_a - width).max(0.0), (at_a + width).min(1.0));
            let (blo, bhi) = ((at_b - width).max(0.0), (at_b + width).min(1.0));
            let refined: Vec<(f64, f64, f64)> = (0..=40)
                .into_par_iter()
                .flat_map_iter(|ia| (0..=40).map(move |ib| (ia, ib)))
                .map(|(ia, ib)| {
                    let a = alo + (ahi - alo) * ia as f64 / 40.0;
                    let b = blo + (bhi - blo) * ib as f64 / 40.0;
                    (cond_objectives(prob, a, b, INNER_FINE)[k], a, b)
                })
                .collect();
            for (v, a, b) in refined {
                if v < best {
                    best = v;
                    at_a = a;
                    at_b = b;
                }
            }
            width /= 20.0;
        }
        out[k] = best;
    }
    ConditionalOracle {
        e_md: out[0],
        e_1: out[1],
        e_2: out[2],
    }
}
