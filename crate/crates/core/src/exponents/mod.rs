//! Single-letter random-coding exponents for the slotted asynchronous
//! detector/decoder.
//!
//! The per-letter tilt d(x, y) = ln[Q₀(y)/W(y|x)] measures how much an output
//! letter favors noise over a codeword letter; D(Q) is its expectation under
//! a joint input/output distribution Q. The constrained rate function
//! 𝘙(Δ; Q_Y) — the least mutual information among couplings of the code
//! composition P with a given output distribution Q_Y whose expected tilt is
//! at most Δ — drives all five exponents:
//!
//! - false alarm: E_FA = min(E_A, E_B), both outer minimizations over Q_Y of
//!   𝒟(Q_Y‖Q₀) plus a rate-function penalty;
//! - misdetection: E_MD, a constrained minimization of 𝒟(Q_{Y|X}‖W|P) over
//!   output kernels;
//! - decoding error: E_DE = min(E₁, E₂, E_MD).
//!
//! Inner problems (fixed marginals) are solved exactly by
//! [`coupling::FrontierSolver`]; outer problems by grid search plus local
//! refinement ([`search`]), with the channel itself and the noise
//! distribution always included as candidate points so the exact zeros of
//! the exponents are hit exactly.

pub mod coupling;
pub mod search;
pub mod transport;

use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::probability::{mutual_information, Distribution, JointDistribution};
use crate::{Error, Result};
use coupling::FrontierSolver;
pub use search::SearchOptions;

/// Slack used when testing the E_MD feasibility constraints; the brute-force
/// oracles in the test suite use the same value.
pub const CONSTRAINT_SLACK: f64 = 1e-9;

/// Inputs of the exponent computation: a full-support channel, the code
/// composition P (over the message letters), the rate R, and the detector
/// thresholds.
#[derive(Clone, Debug)]
pub struct ExponentProblem {
    dmc: Dmc,
    p: Distribution,
    rate: f64,
    alpha: f64,
    beta: f64,
    opts: SearchOptions,
    /// d(x, y) over message letters × outputs, row-major.
    d: Vec<f64>,
    /// W(y|x) over message letters × outputs, row-major.
    w: Vec<f64>,
    q0: Vec<f64>,
}

impl ExponentProblem {
    pub fn new(dmc: &Dmc, p: Distribution, rate: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::with_options(dmc, p, rate, alpha, beta, SearchOptions::default())
    }

    pub fn with_options(
        dmc: &Dmc,
        p: Distribution,
        rate: f64,
        alpha: f64,
        beta: f64,
        opts: SearchOptions,
    ) -> Result<Self> {
        if let Some((x, y)) = dmc.first_zero_entry() {
            return Err(Error::NotFullSupport { x, y });
        }
        if rate < 0.0 {
            return Err(Error::NegativeRate(rate));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "thresholds must be finite, got alpha = {alpha}, beta = {beta}"
            )));
        }
        let letters = dmc.message_letters();
        if p.len() != letters.len() {
            return Err(Error::ShapeMismatch(format!(
                "composition over {} letters, channel has {} message letters",
                p.len(),
                letters.len()
            )));
        }
        let ny = dmc.output_len();
        let q0: Vec<f64> = dmc.noise_row().as_slice().to_vec();
        let mut d = Vec::with_capacity(letters.len() * ny);
        let mut w = Vec::with_capacity(letters.len() * ny);
        for &x in letters {
            for y in 0..ny {
                let wxy = dmc.row(x).get(y);
                w.push(wxy);
                d.push((q0[y] / wxy).ln());
            }
        }
        Ok(Self {
            dmc: dmc.clone(),
            p,
            rate,
            alpha,
            beta,
            opts,
            d,
            w,
            q0,
        })
    }

    pub fn dmc(&self) -> &Dmc {
        &self.dmc
    }

    pub fn composition(&self) -> &Distribution {
        &self.p
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn options(&self) -> &SearchOptions {
        &self.opts
    }

    fn nx(&self) -> usize {
        self.p.len()
    }

    fn ny(&self) -> usize {
        self.dmc.output_len()
    }

    /// [α]₊ − β, the tilt threshold of the misdetection analysis.
    fn xi(&self) -> f64 {
        self.alpha.max(0.0) - self.beta
    }

    fn solver(&self, q_y: &[f64]) -> FrontierSolver {
        FrontierSolver::new(self.p.as_slice(), &self.d, self.ny(), q_y)
    }

    /// The joint P × W as a flat matrix.
    fn joint_pw(&self) -> Vec<f64> {
        let ny = self.ny();
        let mut cells = vec![0.0; self.nx() * ny];
        for x in 0..self.nx() {
            for y in 0..ny {
                cells[x * ny + y] = self.p.get(x) * self.w[x * ny + y];
            }
        }
        cells
    }

    /// Y-marginal of P × W.
    fn output_of_w(&self) -> Vec<f64> {
        let ny = self.ny();
        let mut qy = vec![0.0; ny];
        for x in 0..self.nx() {
            for y in 0..ny {
                qy[y] += self.p.get(x) * self.w[x * ny + y];
            }
        }
        qy
    }

    /// KL(q_y ‖ Q₀); finite because the channel has full support.
    fn kl_to_noise(&self, q_y: &[f64]) -> f64 {
        crate::probability::kl_slices(q_y, &self.q0)
    }

    /// 𝒟(rows ‖ W | P) for a kernel given as a flat matrix.
    fn kl_kernel_to_w(&self, rows: &[f64]) -> f64 {
        let ny = self.ny();
        let mut acc = 0.0;
        for x in 0..self.nx() {
            let px = self.p.get(x);
            if px == 0.0 {
                continue;
            }
            for y in 0..ny {
                let q = rows[x * ny + y];
                if q > 0.0 {
                    acc += px * q * (q / self.w[x * ny + y]).ln();
                }
            }
        }
        acc
    }

    /// Expected tilt of the joint P × rows.
    fn tilt_of_kernel(&self, rows: &[f64]) -> f64 {
        let ny = self.ny();
        let mut acc = 0.0;
        for x in 0..self.nx() {
            let px = self.p.get(x);
            for y in 0..ny {
                let q = px * rows[x * ny + y];
                if q != 0.0 {
                    acc += q * self.d[x * ny + y];
                }
            }
        }
        acc
    }

    fn induced_output(&self, rows: &[f64]) -> Vec<f64> {
        let ny = self.ny();
        let mut qy = vec![0.0; ny];
        for x in 0..self.nx() {
            let px = self.p.get(x);
            for y in 0..ny {
                qy[y] += px * rows[x * ny + y];
            }
        }
        qy
    }
}

/// Expected per-letter tilt E_Q[ln Q₀(Y)/W(Y|X)] of a joint over the message
/// letters; may be negative. Needs a full-support channel.
pub fn distortion_of(q: &JointDistribution, dmc: &Dmc) -> f64 {
    let letters = dmc.message_letters();
    debug_assert_eq!(q.nx(), letters.len());
    debug_assert_eq!(q.ny(), dmc.output_len());
    let q0 = dmc.noise_row();
    let mut acc = 0.0;
    for (xi, &x) in letters.iter().enumerate() {
        for y in 0..q.ny() {
            let mass = q.cell(xi, y);
            if mass > 0.0 {
                acc += mass * (q0.get(y) / dmc.row(x).get(y)).ln();
            }
        }
    }
    acc
}

/// 𝘙(Δ; Q_Y): least mutual information among couplings of P and `q_y` with
/// expected tilt at most Δ; +∞ when no coupling satisfies the cap.
pub fn rate_vs_distortion(delta: f64, q_y: &Distribution, prob: &ExponentProblem) -> f64 {
    prob.solver(q_y.as_slice()).rate_at_distortion(delta)
}

/// 𝘋(R; Q_Y): least expected tilt among couplings with I(Q) ≤ R. Computed by
/// direct minimization, not by inverting 𝘙.
pub fn distortion_vs_rate(r: f64, q_y: &Distribution, prob: &ExponentProblem) -> f64 {
    prob.solver(q_y.as_slice()).distortion_at_rate(r)
}

/// μ(Q_Y, R) = min{I + D : I ≤ R} over the marginal-matched couplings.
pub fn mu_of(q_y: &Distribution, r: f64, prob: &ExponentProblem) -> f64 {
    prob.solver(q_y.as_slice()).mu(r)
}

/// The (I, D) coordinates of the unconstrained minimizer of I + D.
pub fn r1_d1(q_y: &Distribution, prob: &ExponentProblem) -> (f64, f64) {
    prob.solver(q_y.as_slice()).r1_d1()
}

/// 𝘙̃(Δ, R; Q_Y): the rate-function excess 𝘙(Δ; Q_Y) − R on the constrained
/// branch Δ ≤ μ(Q_Y, R) − R, zero past it.
pub fn r_tilde(delta: f64, r: f64, q_y: &Distribution, prob: &ExponentProblem) -> f64 {
    let mut solver = prob.solver(q_y.as_slice());
    if delta <= solver.mu(r) - r {
        let excess = solver.rate_at_distortion(delta) - r;
        excess.max(0.0)
    } else {
        0.0
    }
}

/// One sample of the constrained rate function.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateCurvePoint {
    pub delta: f64,
    #[serde(with = "ext_real")]
    pub rate: f64,
}

pub fn rate_curve(q_y: &Distribution, deltas: &[f64], prob: &ExponentProblem) -> Vec<RateCurvePoint> {
    let mut solver = prob.solver(q_y.as_slice());
    deltas
        .iter()
        .map(|&delta| RateCurvePoint {
            delta,
            rate: solver.rate_at_distortion(delta),
        })
        .collect()
}

/// An exponent attained by an output distribution.
#[derive(Clone, Debug)]
pub struct OutputOptimum {
    pub value: f64,
    /// The achieving Q_Y; `None` when the value is +∞.
    pub q_y: Option<Vec<f64>>,
}

/// An exponent attained by an output kernel Q_{Y|X}.
#[derive(Clone, Debug)]
pub struct ConditionalOptimum {
    pub value: f64,
    /// The achieving kernel rows (over message letters); `None` at +∞.
    pub rows: Option<Vec<Vec<f64>>>,
}

fn output_optimum(prob: &ExponentProblem, f: impl Fn(&[f64]) -> f64 + Sync) -> OutputOptimum {
    let seeds = vec![
        prob.q0.clone(),
        prob.output_of_w(),
        vec![1.0 / prob.ny() as f64; prob.ny()],
    ];
    // Exponents are nonnegative; the clamp removes rounding dust in the KL sums.
    let (value, point) = search::minimize_product_simplex(1, prob.ny(), &prob.opts, &seeds, |q| f(q).max(0.0));
    OutputOptimum {
        q_y: value.is_finite().then_some(point),
        value,
    }
}

fn conditional_optimum(prob: &ExponentProblem, f: impl Fn(&[f64]) -> f64 + Sync) -> ConditionalOptimum {
    let seeds = vec![prob.w.clone()];
    let (value, point) =
        search::minimize_product_simplex(prob.nx(), prob.ny(), &prob.opts, &seeds, |q| f(q).max(0.0));
    let ny = prob.ny();
    ConditionalOptimum {
        rows: value
            .is_finite()
            .then(|| point.chunks(ny).map(|r| r.to_vec()).collect()),
        value,
    }
}

/// E_A: inf over Q_Y of 𝒟(Q_Y‖Q₀) + 𝘙̃(α−β, R; Q_Y).
pub fn exponent_ea(prob: &ExponentProblem) -> OutputOptimum {
    let delta = prob.alpha - prob.beta;
    output_optimum(prob, |q_y| {
        let mut solver = prob.solver(q_y);
        let penalty = if delta <= solver.mu(prob.rate) - prob.rate {
            (solver.rate_at_distortion(delta) - prob.rate).max(0.0)
        } else {
            0.0
        };
        prob.kl_to_noise(q_y) + penalty
    })
}

/// E_B: inf over Q_Y of 𝒟(Q_Y‖Q₀) + [𝘙(−β; Q_Y) − R]₊.
pub fn exponent_eb(prob: &ExponentProblem) -> OutputOptimum {
    output_optimum(prob, |q_y| {
        let penalty = (prob.solver(q_y).rate_at_distortion(-prob.beta) - prob.rate).max(0.0);
        prob.kl_to_noise(q_y) + penalty
    })
}

/// E_FA = min(E_A, E_B).
pub fn exponent_efa(prob: &ExponentProblem) -> f64 {
    exponent_ea(prob).value.min(exponent_eb(prob).value)
}

/// R₀(Q_Y): the rate threshold below which a misdetection at output type Q_Y
/// survives the codebook average.
pub fn md_threshold_rate(q_y: &Distribution, prob: &ExponentProblem) -> f64 {
    let xi = prob.xi();
    let mut solver = prob.solver(q_y.as_slice());
    let r_xi = solver.rate_at_distortion(xi);
    let (r1, d1) = solver.r1_d1();
    let tilted = if xi < d1 {
        r1 + d1 + prob.beta - prob.alpha
    } else {
        r_xi + (-prob.alpha).max(0.0)
    };
    r_xi.min(tilted)
}

/// Per-kernel feasibility test of the three E_MD constraints.
///
/// A misdetection at output type Q_Y survives the codebook average only when
/// the transmitted codeword itself looks noise-like (tilt D(P×Q_{Y|X}) at
/// least ξ = [α]₊−β) and the rate sits below the threshold R₀(Q_Y), whose
/// first branch reads 𝘙(ξ; Q_Y) ≥ R — equivalently 𝘋(R; Q_Y) ≥ ξ — and
/// whose tilted branch gives the last two conditions.
fn md_feasible(prob: &ExponentProblem, rows: &[f64]) -> bool {
    let xi = prob.xi();
    let tilt = prob.tilt_of_kernel(rows);
    if tilt < xi - CONSTRAINT_SLACK {
        return false;
    }
    let q_y = prob.induced_output(rows);
    let mut solver = prob.solver(&q_y);
    if solver.distortion_at_rate(prob.rate) < xi - CONSTRAINT_SLACK {
        return false;
    }
    let (r1, d1) = solver.r1_d1();
    if d1 <= xi {
        // +∞ rate satisfies the bound.
        solver.rate_at_distortion(xi) >= prob.rate - (-prob.alpha).max(0.0) - CONSTRAINT_SLACK
    } else {
        r1 + d1 >= prob.rate + prob.alpha - prob.beta - CONSTRAINT_SLACK
    }
}

/// E_MD: inf of 𝒟(Q_{Y|X}‖W|P) subject to the three misdetection
/// constraints; +∞ when the constraint set is empty.
pub fn exponent_emd(prob: &ExponentProblem) -> ConditionalOptimum {
    conditional_optimum(prob, |rows| {
        if md_feasible(prob, rows) {
            prob.kl_kernel_to_w(rows)
        } else {
            f64::INFINITY
        }
    })
}

/// E₁: inf over kernels with tilt cap D(P×Q_{Y|X}) ≤ [α]₊−β of
/// 𝒟(Q_{Y|X}‖W|P) + [𝘙(D(P×Q_{Y|X}); Q_Y) − R]₊.
pub fn exponent_e1(prob: &ExponentProblem) -> ConditionalOptimum {
    let xi = prob.xi();
    conditional_optimum(prob, |rows| {
        let tilt = prob.tilt_of_kernel(rows);
        if tilt > xi + CONSTRAINT_SLACK {
            return f64::INFINITY;
        }
        let q_y = prob.induced_output(rows);
        let penalty = (prob.solver(&q_y).rate_at_distortion(tilt) - prob.rate).max(0.0);
        prob.kl_kernel_to_w(rows) + penalty
    })
}

/// E₂: unconstrained inf over kernels of
/// 𝒟(Q_{Y|X}‖W|P) + [𝘙(α−β; Q_Y) − R]₊.
pub fn exponent_e2(prob: &ExponentProblem) -> ConditionalOptimum {
    let delta = prob.alpha - prob.beta;
    conditional_optimum(prob, |rows| {
        let q_y = prob.induced_output(rows);
        let penalty = (prob.solver(&q_y).rate_at_distortion(delta) - prob.rate).max(0.0);
        prob.kl_kernel_to_w(rows) + penalty
    })
}

/// E_DE = min(E₁, E₂, E_MD).
pub fn exponent_ede(prob: &ExponentProblem) -> f64 {
    exponent_e1(prob)
        .value
        .min(exponent_e2(prob).value)
        .min(exponent_emd(prob).value)
}

/// The no-rate-loss condition: decoding keeps the full constant-composition
/// rate I(P×W) as long as α − β ≤ D(P×W).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NoRateLoss {
    pub d_pw: f64,
    pub i_pw: f64,
    pub holds: bool,
}

pub fn no_rate_loss_bound(prob: &ExponentProblem) -> NoRateLoss {
    let cells = prob.joint_pw();
    let joint = JointDistribution::new(cells, prob.nx(), prob.ny()).expect("P×W is a joint distribution");
    let d_pw = distortion_of(&joint, &prob.dmc);
    let i_pw = mutual_information(&joint);
    NoRateLoss {
        d_pw,
        i_pw,
        holds: prob.alpha - prob.beta <= d_pw,
    }
}

/// Exponential rate of Pr{N(Q̂|y) ≥ e^{n·u(Q̂)}} for the type enumerator of a
/// random constant-composition codebook, with u(Q̂) = D(Q̂) + β − α:
/// [I−R]₊ when u ≤ 0, +∞ when u > 0 grows past R − I, and 0 in between
/// (the boundary u = R − I resolves to 0).
pub fn enumerator_exponent(q: &JointDistribution, r: f64, prob: &ExponentProblem) -> f64 {
    let u = distortion_of(q, &prob.dmc) + prob.beta - prob.alpha;
    let i = mutual_information(q);
    if u <= 0.0 {
        (i - r).max(0.0)
    } else if u <= r - i {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Everything the engine computes for one (channel, P, R, α, β) input, with
/// the achieving distributions and feasibility flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentReport {
    pub alpha: f64,
    pub beta: f64,
    pub rate: f64,
    #[serde(with = "ext_real")]
    pub e_a: f64,
    #[serde(with = "ext_real")]
    pub e_b: f64,
    #[serde(with = "ext_real")]
    pub e_fa: f64,
    #[serde(with = "ext_real")]
    pub e_md: f64,
    #[serde(with = "ext_real")]
    pub e_1: f64,
    #[serde(with = "ext_real")]
    pub e_2: f64,
    #[serde(with = "ext_real")]
    pub e_de: f64,
    pub minimizer_a: Option<Vec<f64>>,
    pub minimizer_b: Option<Vec<f64>>,
    pub minimizer_md: Option<Vec<Vec<f64>>>,
    pub minimizer_1: Option<Vec<Vec<f64>>>,
    pub minimizer_2: Option<Vec<Vec<f64>>>,
    pub feasible_a: bool,
    pub feasible_b: bool,
    pub feasible_md: bool,
    pub feasible_1: bool,
    pub feasible_2: bool,
    pub no_rate_loss: NoRateLoss,
}

pub fn compute_report(prob: &ExponentProblem) -> ExponentReport {
    let a = exponent_ea(prob);
    let b = exponent_eb(prob);
    let md = exponent_emd(prob);
    let e1 = exponent_e1(prob);
    let e2 = exponent_e2(prob);
    ExponentReport {
        alpha: prob.alpha,
        beta: prob.beta,
        rate: prob.rate,
        e_fa: a.value.min(b.value),
        e_de: e1.value.min(e2.value).min(md.value),
        feasible_a: a.value.is_finite(),
        feasible_b: b.value.is_finite(),
        feasible_md: md.value.is_finite(),
        feasible_1: e1.value.is_finite(),
        feasible_2: e2.value.is_finite(),
        e_a: a.value,
        e_b: b.value,
        e_md: md.value,
        e_1: e1.value,
        e_2: e2.value,
        minimizer_a: a.q_y,
        minimizer_b: b.q_y,
        minimizer_md: md.rows,
        minimizer_1: e1.rows,
        minimizer_2: e2.rows,
        no_rate_loss: no_rate_loss_bound(prob),
    }
}

/// Serde representation of extended reals: finite values as numbers,
/// infinities as the strings "inf" / "-inf".
pub mod ext_real {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else if *v > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    struct ExtRealVisitor;

    impl Visitor<'_> for ExtRealVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or \"inf\"/\"-inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => other.parse().map_err(|_| E::custom(format!("bad extended real: {other}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        de.deserialize_any(ExtRealVisitor)
    }
}
