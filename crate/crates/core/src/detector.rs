//! The optimal rejection region and ML decoding, its two limiting variants,
//! exact error probabilities by exhaustive output enumeration, and a
//! dominance checker against arbitrary competitor partitions.
//!
//! All likelihood arithmetic is in the log domain: the e^{nα} and e^{nβ}
//! weights enter as additive nα/nβ terms and the M+1 statistic terms combine
//! by log-sum-exp, so block lengths far beyond probability-domain underflow
//! are fine. Ties on the rejection boundary go to Reject (the region is
//! defined with "≤"); ML ties go to the lowest message index.

use crate::channel::{log_likelihood, log_noise_likelihood, Codebook, Dmc};
use crate::exec;
use crate::numerics::{logsumexp2, LogSumAcc};
use crate::{Error, Result};

/// Exponent-scaled detector thresholds, in nats per symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorParams {
    pub alpha: f64,
    pub beta: f64,
}

impl DetectorParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }
}

/// Outcome of detection/decoding: silence, or a message index in 0..M.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Reject,
    Message(usize),
}

/// Which rejection statistic to use.
///
/// `Optimal` combines the summed and maximal codeword likelihoods;
/// `SumThreshold` keeps only the sum (a Neyman–Pearson test between the
/// code-induced output distribution and noise); `MaxThreshold` keeps only the
/// max (silence acts as one more codeword, weighted by e^{nβ}).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorKind {
    Optimal,
    SumThreshold,
    MaxThreshold,
}

/// Log-domain rejection statistic minus threshold for a set of per-codeword
/// log-likelihoods. Positive margin means detect.
fn margin_from_logs(kind: DetectorKind, logliks: &[f64], log_noise: f64, n: usize, p: &DetectorParams) -> f64 {
    let nf = n as f64;
    let max = logliks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stat = match kind {
        DetectorKind::Optimal => {
            let mut sum = LogSumAcc::new();
            for &l in logliks {
                sum.add_log(l);
            }
            logsumexp2(nf * p.alpha + sum.log_total(), max)
        }
        DetectorKind::SumThreshold => {
            let mut sum = LogSumAcc::new();
            for &l in logliks {
                sum.add_log(l);
            }
            nf * p.alpha + sum.log_total()
        }
        DetectorKind::MaxThreshold => max,
    };
    let thresh = nf * p.beta + log_noise;
    if stat == f64::NEG_INFINITY {
        // Output impossible under every codeword: reject, even when it is
        // also impossible under noise (margin would otherwise be NaN).
        return if thresh == f64::NEG_INFINITY { 0.0 } else { f64::NEG_INFINITY };
    }
    if thresh == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    stat - thresh
}

fn decide_from_logs(kind: DetectorKind, logliks: &[f64], log_noise: f64, n: usize, p: &DetectorParams) -> Decision {
    if margin_from_logs(kind, logliks, log_noise, n, p) <= 0.0 {
        return Decision::Reject;
    }
    let mut best = 0usize;
    for (m, &l) in logliks.iter().enumerate().skip(1) {
        if l > logliks[best] {
            best = m;
        }
    }
    Decision::Message(best)
}

fn codeword_logliks(cb: &Codebook, dmc: &Dmc, y: &[usize]) -> Result<Vec<f64>> {
    (0..cb.size()).map(|m| log_likelihood(dmc, cb.codeword(m), y)).collect()
}

/// ln[e^{nα}·Σ_m W(y|x_m) + max_m W(y|x_m)] − ln[e^{nβ}·Q₀(y)].
/// Negative or zero margin puts y in the rejection region.
pub fn rejection_margin(cb: &Codebook, dmc: &Dmc, y: &[usize], p: &DetectorParams) -> Result<f64> {
    let logliks = codeword_logliks(cb, dmc, y)?;
    Ok(margin_from_logs(
        DetectorKind::Optimal,
        &logliks,
        log_noise_likelihood(dmc, y),
        y.len(),
        p,
    ))
}

/// Reject iff `rejection_margin` ≤ 0; otherwise ML decoding with ties to the
/// lowest index.
pub fn detect_and_decode(cb: &Codebook, dmc: &Dmc, y: &[usize], p: &DetectorParams) -> Result<Decision> {
    detect_with(DetectorKind::Optimal, cb, dmc, y, p)
}

/// The sum-only variant: reject iff e^{nα}·Σ_m W(y|x_m) ≤ e^{nβ}·Q₀(y).
pub fn detect_np_variant(cb: &Codebook, dmc: &Dmc, y: &[usize], p: &DetectorParams) -> Result<Decision> {
    detect_with(DetectorKind::SumThreshold, cb, dmc, y, p)
}

/// The max-only variant: reject iff max_m W(y|x_m) ≤ e^{nβ}·Q₀(y).
pub fn detect_max_variant(cb: &Codebook, dmc: &Dmc, y: &[usize], p: &DetectorParams) -> Result<Decision> {
    detect_with(DetectorKind::MaxThreshold, cb, dmc, y, p)
}

pub fn detect_with(kind: DetectorKind, cb: &Codebook, dmc: &Dmc, y: &[usize], p: &DetectorParams) -> Result<Decision> {
    let logliks = codeword_logliks(cb, dmc, y)?;
    Ok(decide_from_logs(kind, &logliks, log_noise_likelihood(dmc, y), y.len(), p))
}

/// Default cap on |𝒴|ⁿ for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 20_000_000;

/// Per-output data handed to enumeration visitors.
pub struct LikelihoodView<'a> {
    pub y: &'a [usize],
    /// ln Q₀(y)
    pub log_noise: f64,
    /// ln W(y|x_m) for each codeword m
    pub logliks: &'a [f64],
}

/// Runs `visit` over every y ∈ 𝒴ⁿ in lexicographic order with incrementally
/// maintained log-likelihoods.
///
/// The output space is split into fixed prefix chunks that are mapped in
/// parallel (when enabled) and folded in index order, so results do not
/// depend on scheduling.
pub fn enumerate_outputs<P, FInit, FVisit, FMerge>(
    dmc: &Dmc,
    cb: &Codebook,
    budget: u64,
    init: FInit,
    visit: FVisit,
    merge: FMerge,
) -> Result<P>
where
    P: Send,
    FInit: Fn() -> P + Sync,
    FVisit: Fn(&mut P, &LikelihoodView) + Sync,
    FMerge: Fn(P, P) -> P,
{
    let n = cb.block_length();
    let ny = dmc.output_len();
    let total = (ny as u128)
        .checked_pow(n as u32)
        .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
    if total > budget as u128 {
        return Err(Error::BudgetExceeded { needed: total, budget });
    }
    let m = cb.size();

    // Per-position per-letter log increments; the inner loop is pure adds.
    let mut lnq0 = vec![f64::NEG_INFINITY; ny];
    for (y, q) in lnq0.iter_mut().enumerate() {
        let p = dmc.noise_row().get(y);
        if p > 0.0 {
            *q = p.ln();
        }
    }
    // step[pos][letter][m]
    let mut step = vec![f64::NEG_INFINITY; n * ny * m];
    for pos in 0..n {
        for letter in 0..ny {
            for (mi, cw) in cb.codewords().iter().enumerate() {
                let p = dmc.row(cw[pos]).get(letter);
                if p > 0.0 {
                    step[(pos * ny + letter) * m + mi] = p.ln();
                }
            }
        }
    }

    // Fixed prefix length: chunk layout is independent of thread count.
    let mut prefix_len = 0usize;
    let mut chunks = 1u64;
    while prefix_len < n && chunks < 256 {
        chunks *= ny as u64;
        prefix_len += 1;
    }

    let run_chunk = |chunk: usize| -> P {
        let mut partial = init();
        let mut y = vec![0usize; n];
        // Decode the prefix from the chunk index, most significant first.
        let mut c = chunk;
        for pos in (0..prefix_len).rev() {
            y[pos] = c % ny;
            c /= ny;
        }
        // cum[(pos+1)*m + mi] = loglik of y[..=pos] under codeword mi.
        let mut cum = vec![0.0f64; (n + 1) * m];
        let mut cumq = vec![0.0f64; n + 1];
        let recompute = |y: &[usize], cum: &mut [f64], cumq: &mut [f64], from: usize| {
            for pos in from..n {
                let letter = y[pos];
                cumq[pos + 1] = cumq[pos] + lnq0[letter];
                let s = &step[(pos * ny + letter) * m..(pos * ny + letter + 1) * m];
                for mi in 0..m {
                    cum[(pos + 1) * m + mi] = cum[pos * m + mi] + s[mi];
                }
            }
        };
        recompute(&y, &mut cum, &mut cumq, 0);
        loop {
            visit(
                &mut partial,
                &LikelihoodView {
                    y: &y,
                    log_noise: cumq[n],
                    logliks: &cum[n * m..(n + 1) * m],
                },
            );
            // Odometer over the suffix positions.
            let mut pos = n;
            loop {
                if pos == prefix_len {
                    return partial;
                }
                pos -= 1;
                if y[pos] + 1 < ny {
                    y[pos] += 1;
                    for reset in pos + 1..n {
                        y[reset] = 0;
                    }
                    recompute(&y, &mut cum, &mut cumq, pos);
                    break;
                }
            }
        }
    };

    let partials = exec::map_chunks(chunks as usize, run_chunk);
    let mut iter = partials.into_iter();
    let first = iter.next().expect("at least one chunk");
    Ok(iter.fold(first, merge))
}

/// Exact FA / MD / DE probabilities for one codebook.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorProbabilities {
    pub fa: f64,
    pub md: f64,
    pub de: f64,
}

struct ExactPartial {
    fa: LogSumAcc,
    md: Vec<LogSumAcc>,
    de: Vec<LogSumAcc>,
}

/// Sums the three error probabilities exactly over all y ∈ 𝒴ⁿ:
/// FA mass under noise on the detect region, per-message MD mass on the
/// rejection region, and per-message DE mass everywhere the decision is not
/// that message (so MD ≤ DE).
pub fn exact_error_probabilities(
    cb: &Codebook,
    dmc: &Dmc,
    p: &DetectorParams,
    kind: DetectorKind,
    budget: u64,
) -> Result<ErrorProbabilities> {
    let m = cb.size();
    let n = cb.block_length();
    let partial = enumerate_outputs(
        dmc,
        cb,
        budget,
        || ExactPartial {
            fa: LogSumAcc::new(),
            md: vec![LogSumAcc::new(); m],
            de: vec![LogSumAcc::new(); m],
        },
        |acc, view| {
            let decision = decide_from_logs(kind, view.logliks, view.log_noise, n, p);
            match decision {
                Decision::Reject => {
                    for mi in 0..m {
                        acc.md[mi].add_log(view.logliks[mi]);
                        acc.de[mi].add_log(view.logliks[mi]);
                    }
                }
                Decision::Message(k) => {
                    acc.fa.add_log(view.log_noise);
                    for mi in 0..m {
                        if mi != k {
                            acc.de[mi].add_log(view.logliks[mi]);
                        }
                    }
                }
            }
        },
        |mut a, b| {
            a.fa.merge(&b.fa);
            for (x, y) in a.md.iter_mut().zip(&b.md) {
                x.merge(y);
            }
            for (x, y) in a.de.iter_mut().zip(&b.de) {
                x.merge(y);
            }
            a
        },
    )?;
    let mean = |accs: &[LogSumAcc]| accs.iter().map(|a| a.total()).sum::<f64>() / m as f64;
    Ok(ErrorProbabilities {
        fa: partial.fa.total(),
        md: mean(&partial.md),
        de: mean(&partial.de),
    })
}

/// Exact error triples of the optimal rule and a competitor partition, plus
/// the dominance verdict: whenever the competitor does at least as well on
/// both FA and MD, the optimal rule must do at least as well on DE.
#[derive(Clone, Copy, Debug)]
pub struct DominanceReport {
    pub fa_star: f64,
    pub md_star: f64,
    pub de_star: f64,
    pub fa: f64,
    pub md: f64,
    pub de: f64,
    pub premise_holds: bool,
    pub lemma_holds: bool,
}

pub fn dominance_check<F>(
    cb: &Codebook,
    dmc: &Dmc,
    p: &DetectorParams,
    competitor: F,
    budget: u64,
) -> Result<DominanceReport>
where
    F: Fn(&[usize]) -> Decision + Sync,
{
    let m = cb.size();
    let n = cb.block_length();
    struct Partial {
        star: ExactPartial,
        other: ExactPartial,
    }
    let tally = |acc: &mut ExactPartial, decision: Decision, view: &LikelihoodView| match decision {
        Decision::Reject => {
            for mi in 0..acc.md.len() {
                acc.md[mi].add_log(view.logliks[mi]);
                acc.de[mi].add_log(view.logliks[mi]);
            }
        }
        Decision::Message(k) => {
            acc.fa.add_log(view.log_noise);
            for mi in 0..acc.de.len() {
                if mi != k {
                    acc.de[mi].add_log(view.logliks[mi]);
                }
            }
        }
    };
    let new_partial = || ExactPartial {
        fa: LogSumAcc::new(),
        md: vec![LogSumAcc::new(); m],
        de: vec![LogSumAcc::new(); m],
    };
    let merge_partial = |a: &mut ExactPartial, b: &ExactPartial| {
        a.fa.merge(&b.fa);
        for (x, y) in a.md.iter_mut().zip(&b.md) {
            x.merge(y);
        }
        for (x, y) in a.de.iter_mut().zip(&b.de) {
            x.merge(y);
        }
    };
    let partial = enumerate_outputs(
        dmc,
        cb,
        budget,
        || Partial {
            star: new_partial(),
            other: new_partial(),
        },
        |acc, view| {
            let star = decide_from_logs(DetectorKind::Optimal, view.logliks, view.log_noise, n, p);
            tally(&mut acc.star, star, view);
            let other = competitor(view.y);
            tally(&mut acc.other, other, view);
        },
        |mut a, b| {
            merge_partial(&mut a.star, &b.star);
            merge_partial(&mut a.other, &b.other);
            a
        },
    )?;
    let mean = |accs: &[LogSumAcc]| accs.iter().map(|a| a.total()).sum::<f64>() / m as f64;
    let (fa_star, md_star, de_star) = (partial.star.fa.total(), mean(&partial.star.md), mean(&partial.star.de));
    let (fa, md, de) = (partial.other.fa.total(), mean(&partial.other.md), mean(&partial.other.de));
    let premise_holds = fa <= fa_star && md <= md_star;
    let lemma_holds = !premise_holds || de_star <= de + 1e-12;
    Ok(DominanceReport {
        fa_star,
        md_star,
        de_star,
        fa,
        md,
        de,
        premise_holds,
        lemma_holds,
    })
}
