//! Monte Carlo estimation of the three error probabilities, exact
//! tiny-ensemble oracles, type-enumeration diagnostics, and
//! empirical-exponent regression.
//!
//! Reproducibility: every stochastic operation takes an explicit u64 seed and
//! derives one ChaCha8 stream per fixed-size work item (trial chunk or
//! codebook index), so results are bit-identical across runs and across the
//! parallel/sequential schedulers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_codebook_with, Codebook, Dmc, EnsembleConfig};
use crate::detector::{
    detect_and_decode, exact_error_probabilities, Decision, DetectorKind, DetectorParams,
};
use crate::exec;
use crate::numerics::CompensatedSum;
use crate::probability::{enumerate_type_class, JointDistribution};
use crate::{Error, Result};

/// The crate-wide seeded generator: ChaCha8 with one stream per work item.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const TRIAL_CHUNK: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
    #[serde(rename = "exact-y")]
    ExactY,
    #[serde(rename = "exact-full")]
    ExactFull,
}

/// Estimates (or exact values) of the three ensemble error probabilities.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ErrorEstimates {
    pub p_fa: f64,
    pub p_md: f64,
    pub p_de: f64,
    pub se_fa: f64,
    pub se_md: f64,
    pub se_de: f64,
    /// Monte Carlo trials, codebook samples, or enumerated codebooks,
    /// depending on the method.
    pub trials: u64,
    pub method: EstimateMethod,
}

/// N(Q̂|y): how many codewords have joint type Q̂ with `y`. Exact integer
/// logic: `q` must be a type with denominator n (carried counts, or entries
/// that are exact multiples of 1/n).
pub fn count_joint_type(dmc: &Dmc, cb: &Codebook, y: &[usize], q: &JointDistribution) -> Result<usize> {
    let n = cb.block_length();
    if y.len() != n {
        return Err(Error::LengthMismatch { left: y.len(), right: n });
    }
    let letters = dmc.message_letters();
    let (nx, ny) = (letters.len(), dmc.output_len());
    if q.nx() != nx || q.ny() != ny {
        return Err(Error::ShapeMismatch(format!(
            "joint type is {}x{}, channel needs {nx}x{ny}",
            q.nx(),
            q.ny()
        )));
    }
    let target: Vec<usize> = match q.counts() {
        Some(jc) => {
            if jc.n != n {
                return Err(Error::DenominatorMismatch { joint: jc.n, sequence: n });
            }
            jc.counts.clone()
        }
        None => {
            let mut counts = Vec::with_capacity(q.cells().len());
            for &p in q.cells() {
                let scaled = p * n as f64;
                let rounded = scaled.round();
                if (scaled - rounded).abs() > 1e-9 {
                    return Err(Error::DenominatorMismatch { joint: 0, sequence: n });
                }
                counts.push(rounded as usize);
            }
            counts
        }
    };
    let slot_of = |letter: usize| -> Result<usize> {
        letters
            .iter()
            .position(|&l| l == letter)
            .ok_or(Error::UnknownLetter { letter, alphabet: dmc.input_len() })
    };
    let mut count = 0usize;
    let mut cells = vec![0usize; nx * ny];
    for m in 0..cb.size() {
        cells.iter_mut().for_each(|c| *c = 0);
        for (&x, &yy) in cb.codeword(m).iter().zip(y) {
            cells[slot_of(x)? * ny + yy] += 1;
        }
        if cells == target {
            count += 1;
        }
    }
    Ok(count)
}

/// Plain Monte Carlo: per trial, a fresh codebook; the FA path sends silence
/// and the MD/DE path sends a uniformly drawn message. The message must be
/// drawn uniformly rather than fixed: ML ties break to the lowest index, and
/// for constant-composition codes ties between codewords carry constant
/// probability, so a fixed message index would bias the DE estimate (the
/// tests check this estimator against the exact ensemble average).
pub fn estimate_probabilities(
    dmc: &Dmc,
    cfg: &EnsembleConfig,
    params: &DetectorParams,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimates> {
    if trials == 0 {
        return Err(Error::EmptyInput("zero Monte Carlo trials"));
    }
    // Surface configuration errors before entering the hot loop.
    sample_codebook_with(dmc, cfg, &mut seeded_rng(seed, 0))?;
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let counts = exec::map_reduce_chunks(
        chunks as usize,
        |c| {
            let mut rng = seeded_rng(seed, c as u64);
            let lo = c as u64 * TRIAL_CHUNK;
            let hi = (lo + TRIAL_CHUNK).min(trials);
            let (mut fa, mut md, mut de) = (0u64, 0u64, 0u64);
            for _ in lo..hi {
                let cb = sample_codebook_with(dmc, cfg, &mut rng).expect("validated config");
                let n = cb.block_length();
                let mut y = vec![0usize; n];
                // FA path: pure noise.
                for slot in y.iter_mut() {
                    *slot = dmc.sample_output(dmc.silent_index(), &mut rng).expect("silent letter");
                }
                if detect_and_decode(&cb, dmc, &y, params).expect("consistent lengths") != Decision::Reject {
                    fa += 1;
                }
                // MD/DE path: uniform message.
                let m = rng.random_range(0..cb.size());
                for (slot, &x) in y.iter_mut().zip(cb.codeword(m)) {
                    *slot = dmc.sample_output(x, &mut rng).expect("codeword letter");
                }
                match detect_and_decode(&cb, dmc, &y, params).expect("consistent lengths") {
                    Decision::Reject => {
                        md += 1;
                        de += 1;
                    }
                    Decision::Message(k) if k == m => {}
                    Decision::Message(_) => de += 1,
                }
            }
            (fa, md, de)
        },
        (0u64, 0u64, 0u64),
        |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
    );
    let t = trials as f64;
    let rate_and_se = |c: u64| {
        let p = c as f64 / t;
        (p, (p * (1.0 - p) / t).sqrt())
    };
    let (p_fa, se_fa) = rate_and_se(counts.0);
    let (p_md, se_md) = rate_and_se(counts.1);
    let (p_de, se_de) = rate_and_se(counts.2);
    Ok(ErrorEstimates {
        p_fa,
        p_md,
        p_de,
        se_fa,
        se_md,
        se_de,
        trials,
        method: EstimateMethod::MonteCarlo,
    })
}

/// Hybrid estimator: exact over the output space (all y ∈ 𝒴ⁿ), Monte Carlo
/// over codebooks only. Removes all y-sampling noise, so probabilities far
/// below Monte Carlo reach are computed rather than sampled. Codebook k uses
/// stream k of the config seed.
pub fn exact_y_average(
    dmc: &Dmc,
    cfg: &EnsembleConfig,
    params: &DetectorParams,
    codebooks: usize,
    budget: u64,
) -> Result<ErrorEstimates> {
    if codebooks == 0 {
        return Err(Error::EmptyInput("zero codebook samples"));
    }
    let n = cfg.block_length() as u32;
    let needed = (dmc.output_len() as u128)
        .checked_pow(n)
        .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    sample_codebook_with(dmc, cfg, &mut seeded_rng(cfg.seed, 0))?;
    let triples = exec::map_chunks(codebooks, |k| {
        let mut rng = seeded_rng(cfg.seed, k as u64);
        let cb = sample_codebook_with(dmc, cfg, &mut rng).expect("validated config");
        let p = exact_error_probabilities(&cb, dmc, params, DetectorKind::Optimal, budget)
            .expect("budget checked");
        (p.fa, p.md, p.de)
    });
    let k = codebooks as f64;
    let mean_se = |pick: &dyn Fn(&(f64, f64, f64)) -> f64| {
        let mut sum = CompensatedSum::default();
        for t in &triples {
            sum.add(pick(t));
        }
        let mean = sum.total() / k;
        let mut var = CompensatedSum::default();
        for t in &triples {
            var.add((pick(t) - mean).powi(2));
        }
        let se = if codebooks > 1 {
            (var.total() / (k * (k - 1.0))).sqrt()
        } else {
            0.0
        };
        (mean, se)
    };
    let (p_fa, se_fa) = mean_se(&|t| t.0);
    let (p_md, se_md) = mean_se(&|t| t.1);
    let (p_de, se_de) = mean_se(&|t| t.2);
    Ok(ErrorEstimates {
        p_fa,
        p_md,
        p_de,
        se_fa,
        se_md,
        se_de,
        trials: codebooks as u64,
        method: EstimateMethod::ExactY,
    })
}

/// Exact ensemble averages: enumerates every codebook (all |𝒯_P|^M ordered
/// tuples, uniform weights) and every output sequence.
pub fn exact_full_oracle(
    dmc: &Dmc,
    cfg: &EnsembleConfig,
    params: &DetectorParams,
    budget: u64,
) -> Result<ErrorEstimates> {
    let descriptor = cfg.composition_descriptor()?;
    let slot_sequences = enumerate_type_class(&descriptor);
    let letters = dmc.message_letters();
    if cfg.composition.len() != letters.len() {
        return Err(Error::ShapeMismatch(format!(
            "composition over {} letters, channel has {} message letters",
            cfg.composition.len(),
            letters.len()
        )));
    }
    let class: Vec<Vec<usize>> = slot_sequences
        .into_iter()
        .map(|seq| seq.into_iter().map(|slot| letters[slot]).collect())
        .collect();
    let m = cfg.codebook_size;
    let n = cfg.block_length() as u32;
    let class_size = class.len() as u128;
    let tuples = class_size
        .checked_pow(m as u32)
        .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
    let outputs = (dmc.output_len() as u128)
        .checked_pow(n)
        .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
    let needed = tuples
        .checked_mul(outputs)
        .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }

    // One chunk per first-codeword choice; odometer over the rest.
    let sums = exec::map_reduce_chunks(
        class.len(),
        |first| {
            let mut acc = (CompensatedSum::default(), CompensatedSum::default(), CompensatedSum::default());
            let mut indices = vec![0usize; m];
            indices[0] = first;
            loop {
                let codewords: Vec<Vec<usize>> = indices.iter().map(|&i| class[i].clone()).collect();
                let cb = Codebook::new(codewords, descriptor.clone()).expect("type class sequences");
                let p = exact_error_probabilities(&cb, dmc, params, DetectorKind::Optimal, budget)
                    .expect("budget checked");
                acc.0.add(p.fa);
                acc.1.add(p.md);
                acc.2.add(p.de);
                // Advance positions 1..m; position 0 is the chunk id.
                let mut pos = m;
                loop {
                    if pos == 1 {
                        return acc;
                    }
                    pos -= 1;
                    indices[pos] += 1;
                    if indices[pos] < class.len() {
                        break;
                    }
                    indices[pos] = 0;
                }
            }
        },
        (CompensatedSum::default(), CompensatedSum::default(), CompensatedSum::default()),
        |mut a, b| {
            a.0.add(b.0.total());
            a.1.add(b.1.total());
            a.2.add(b.2.total());
            a
        },
    );
    let total = tuples as f64;
    Ok(ErrorEstimates {
        p_fa: sums.0.total() / total,
        p_md: sums.1.total() / total,
        p_de: sums.2.total() / total,
        se_fa: 0.0,
        se_md: 0.0,
        se_de: 0.0,
        trials: tuples as u64,
        method: EstimateMethod::ExactFull,
    })
}

/// Least-squares fit of −ln p = slope·n + log_coeff·ln n + intercept.
///
/// The ln-term models the polynomial prefactors that type counting puts in
/// front of e^{−nE}, so the slope converges to the exponent without the drift a
/// plain line fit would leave. Falls back to a straight line when the normal
/// system is near-singular (e.g. fewer than three distinct n).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentFit {
    /// (n, −ln p / n) pairs, the per-symbol empirical exponents.
    pub points: Vec<(f64, f64)>,
    /// Fitted exponent in nats/symbol.
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of the ln n term.
    pub log_coeff: f64,
    /// Root-mean-square residual of −ln p.
    pub residual: f64,
}

pub fn fit_exponent(series: &[(usize, f64)]) -> Result<ExponentFit> {
    if series.len() < 3 {
        return Err(Error::InsufficientFitPoints(series.len()));
    }
    for &(n, p) in series {
        if !(p > 0.0) {
            return Err(Error::NonpositiveProbability { n, value: p });
        }
    }
    let rows: Vec<(f64, f64)> = series.iter().map(|&(n, p)| (n as f64, -p.ln())).collect();

    // Normal equations for the basis [n, ln n, 1].
    let basis = |n: f64| [n, n.ln(), 1.0];
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(n, y) in &rows {
        let b = basis(n);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
            aty[i] += b[i] * y;
        }
    }
    let coeffs = solve3(ata, aty).unwrap_or_else(|| {
        // Straight-line fallback.
        let k = rows.len() as f64;
        let (sn, sy): (f64, f64) = rows.iter().fold((0.0, 0.0), |a, r| (a.0 + r.0, a.1 + r.1));
        let (nbar, ybar) = (sn / k, sy / k);
        let mut num = 0.0;
        let mut den = 0.0;
        for &(n, y) in &rows {
            num += (n - nbar) * (y - ybar);
            den += (n - nbar) * (n - nbar);
        }
        let slope = if den > 0.0 { num / den } else { 0.0 };
        [slope, 0.0, ybar - slope * nbar]
    });
    let mut ss = 0.0;
    for &(n, y) in &rows {
        let b = basis(n);
        let yhat = coeffs[0] * b[0] + coeffs[1] * b[1] + coeffs[2] * b[2];
        ss += (y - yhat) * (y - yhat);
    }
    Ok(ExponentFit {
        points: rows.iter().map(|&(n, y)| (n, y / n)).collect(),
        slope: coeffs[0],
        log_coeff: coeffs[1],
        intercept: coeffs[2],
        residual: (ss / rows.len() as f64).sqrt(),
    })
}

/// Gaussian elimination with partial pivoting; None when near-singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-12 * scale.max(1.0) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::reference_channel;
    use crate::probability::{empirical_joint, enumerate_joint_types, TypeDescriptor};
    use rand::Rng;

    fn reference_cfg(composition: Vec<usize>, m: usize, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            composition,
            codebook_size: m,
            seed,
        }
    }

    #[test]
    fn count_joint_type_repeated_codeword() {
        let ch = reference_channel();
        let t = TypeDescriptor::new(vec![2, 1]).unwrap();
        let cb = Codebook::new(vec![vec![1, 2, 1]; 5], t).unwrap();
        let y = vec![0, 1, 1];
        let q = empirical_joint(&[0, 1, 0], &y, 2, 2).unwrap();
        assert_eq!(count_joint_type(&ch, &cb, &y, &q).unwrap(), 5);
        let other = empirical_joint(&[1, 0, 0], &y, 2, 2).unwrap();
        assert_eq!(count_joint_type(&ch, &cb, &y, &other).unwrap(), 0);
    }

    #[test]
    fn count_joint_type_partitions_codebook() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![2, 2], 7, 33);
        let cb = crate::channel::sample_codebook(&ch, &cfg).unwrap();
        let y = vec![0, 1, 0, 0];
        let y_type = TypeDescriptor::of_sequence(&y, 2).unwrap();
        let mut total = 0;
        for q in enumerate_joint_types(2, 2, 4) {
            // Only types whose marginals match (P over X, type(y) over Y) can
            // occur, but summing over all of them must still give M.
            let jc = q.counts().unwrap();
            let col0: usize = (0..2).map(|x| jc.counts[x * 2]).sum();
            if col0 != y_type.counts()[0] {
                continue;
            }
            total += count_joint_type(&ch, &cb, &y, &q).unwrap();
        }
        assert_eq!(total, 7);
    }

    #[test]
    fn count_joint_type_matches_direct_recount() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![3, 2], 11, 4);
        let cb = crate::channel::sample_codebook(&ch, &cfg).unwrap();
        let mut rng = seeded_rng(9, 0);
        let y: Vec<usize> = (0..5).map(|_| rng.random_range(0..2)).collect();
        for q in enumerate_joint_types(2, 2, 5) {
            let direct = (0..cb.size())
                .filter(|&m| {
                    let xs: Vec<usize> = cb.codeword(m).iter().map(|&l| l - 1).collect();
                    empirical_joint(&xs, &y, 2, 2).unwrap().counts().unwrap().counts
                        == q.counts().unwrap().counts
                })
                .count();
            assert_eq!(count_joint_type(&ch, &cb, &y, &q).unwrap(), direct);
        }
    }

    #[test]
    fn count_joint_type_rejects_wrong_denominator() {
        let ch = reference_channel();
        let t = TypeDescriptor::new(vec![1, 1]).unwrap();
        let cb = Codebook::new(vec![vec![1, 2]], t).unwrap();
        let q = empirical_joint(&[0, 1, 0], &[0, 0, 1], 2, 2).unwrap();
        assert!(matches!(
            count_joint_type(&ch, &cb, &[0, 1], &q),
            Err(Error::DenominatorMismatch { .. })
        ));
    }

    #[test]
    fn monte_carlo_full_rejection_at_huge_beta() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![2, 2], 2, 5);
        let params = DetectorParams::new(0.0, 500.0);
        let est = estimate_probabilities(&ch, &cfg, &params, 4000, 5).unwrap();
        assert_eq!(est.p_fa, 0.0);
        assert_eq!(est.p_md, 1.0);
        assert_eq!(est.p_de, 1.0);
        assert_eq!(est.method, EstimateMethod::MonteCarlo);
    }

    #[test]
    fn monte_carlo_is_bit_reproducible() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![2, 2], 2, 5);
        let params = DetectorParams::new(-0.1, 0.2);
        let a = estimate_probabilities(&ch, &cfg, &params, 5000, 17).unwrap();
        let b = estimate_probabilities(&ch, &cfg, &params, 5000, 17).unwrap();
        assert_eq!(a.p_fa.to_bits(), b.p_fa.to_bits());
        assert_eq!(a.p_md.to_bits(), b.p_md.to_bits());
        assert_eq!(a.p_de.to_bits(), b.p_de.to_bits());
        crate::exec::set_force_sequential(true);
        let c = estimate_probabilities(&ch, &cfg, &params, 5000, 17).unwrap();
        crate::exec::set_force_sequential(false);
        assert_eq!(a.p_fa.to_bits(), c.p_fa.to_bits());
    }

    #[test]
    fn stderr_scales_with_trials() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![2, 2], 2, 5);
        let params = DetectorParams::new(0.0, 0.25);
        let small = estimate_probabilities(&ch, &cfg, &params, 20_000, 3).unwrap();
        let large = estimate_probabilities(&ch, &cfg, &params, 80_000, 3).unwrap();
        // 4x the trials halves the binomial standard error, within 20%.
        let ratio = small.se_md / large.se_md;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn fixed_message_conditioning_would_bias_de() {
        // With ML ties broken to the lowest index, conditioning the MD/DE
        // path on message 1 undercounts decoding errors. The uniform-message
        // estimator must track the exact ensemble average instead.
        let ch = reference_channel();
        let cfg = reference_cfg(vec![3, 3], 2, 21);
        let params = DetectorParams::new(0.0, 0.3);
        let exact = exact_y_average(&ch, &cfg, &params, 2000, 1000).unwrap();
        let uniform = estimate_probabilities(&ch, &cfg, &params, 150_000, 77).unwrap();
        let sigma = (exact.se_de.powi(2) + uniform.se_de.powi(2)).sqrt();
        assert!(
            (exact.p_de - uniform.p_de).abs() < 4.0 * sigma,
            "{} vs {}",
            exact.p_de,
            uniform.p_de
        );

        // The biased variant, for contrast.
        let mut rng = seeded_rng(12, 0);
        let trials = 150_000u64;
        let mut de = 0u64;
        for _ in 0..trials {
            let cb = sample_codebook_with(&ch, &cfg, &mut rng).unwrap();
            let y: Vec<usize> = cb
                .codeword(0)
                .iter()
                .map(|&x| ch.sample_output(x, &mut rng).unwrap())
                .collect();
            match detect_and_decode(&cb, &ch, &y, &params).unwrap() {
                Decision::Reject => de += 1,
                Decision::Message(k) if k != 0 => de += 1,
                _ => {}
            }
        }
        let biased = de as f64 / trials as f64;
        assert!(exact.p_de - biased > 0.05, "tie bias vanished? {biased} vs {}", exact.p_de);
    }

    #[test]
    fn exact_y_zero_variance_for_degenerate_ensemble() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![3, 0], 1, 1);
        let params = DetectorParams::new(0.0, 0.1);
        let est = exact_y_average(&ch, &cfg, &params, 10, 1000).unwrap();
        assert_eq!(est.se_fa, 0.0);
        assert_eq!(est.se_md, 0.0);
        assert_eq!(est.method, EstimateMethod::ExactY);
    }

    #[test]
    fn exact_y_agrees_with_monte_carlo() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![3, 3], 2, 21);
        let params = DetectorParams::new(0.0, 0.3);
        let exact = exact_y_average(&ch, &cfg, &params, 100, 1000).unwrap();
        let mc = estimate_probabilities(&ch, &cfg, &params, 200_000, 77).unwrap();
        for (a, sa, b, sb) in [
            (exact.p_fa, exact.se_fa, mc.p_fa, mc.se_fa),
            (exact.p_md, exact.se_md, mc.p_md, mc.se_md),
            (exact.p_de, exact.se_de, mc.p_de, mc.se_de),
        ] {
            let sigma = (sa * sa + sb * sb).sqrt();
            assert!((a - b).abs() < 4.0 * sigma, "{a} vs {b} (sigma {sigma})");
        }
    }

    #[test]
    fn exact_y_reaches_probabilities_monte_carlo_cannot() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![9, 9], 2, 8);
        let params = DetectorParams::new(0.0, 0.3);
        let est = exact_y_average(&ch, &cfg, &params, 5, 1 << 20).unwrap();
        assert!(est.p_fa > 0.0);
        assert!(est.p_fa < 1e-3);
    }

    #[test]
    fn exact_full_oracle_hand_checkable() {
        // n = 2, P = (1,1), M = 2: 4 codebooks x 4 outputs.
        let ch = reference_channel();
        let cfg = reference_cfg(vec![1, 1], 2, 0);
        let params = DetectorParams::new(0.0, 0.4);
        let est = exact_full_oracle(&ch, &cfg, &params, 1_000_000).unwrap();
        assert_eq!(est.trials, 4);
        assert_eq!(est.method, EstimateMethod::ExactFull);

        // Direct recomputation.
        let class = [vec![1, 2], vec![2, 1]];
        let mut sums = (0.0, 0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                let cb = Codebook::new(
                    vec![class[a].clone(), class[b].clone()],
                    TypeDescriptor::new(vec![1, 1]).unwrap(),
                )
                .unwrap();
                let p = exact_error_probabilities(&cb, &ch, &params, DetectorKind::Optimal, 100).unwrap();
                sums.0 += p.fa;
                sums.1 += p.md;
                sums.2 += p.de;
            }
        }
        assert!((est.p_fa - sums.0 / 4.0).abs() < 1e-15);
        assert!((est.p_md - sums.1 / 4.0).abs() < 1e-15);
        assert!((est.p_de - sums.2 / 4.0).abs() < 1e-15);
        assert!(est.p_md <= est.p_de);
    }

    #[test]
    fn exact_full_budget_guard() {
        let ch = reference_channel();
        let cfg = reference_cfg(vec![4, 4], 3, 0);
        let params = DetectorParams::new(0.0, 0.0);
        assert!(matches!(
            exact_full_oracle(&ch, &cfg, &params, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn fit_recovers_pure_exponential() {
        let series: Vec<(usize, f64)> = (5..=25).map(|n| (n, (-0.5 * n as f64).exp())).collect();
        let fit = fit_exponent(&series).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-8);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_handles_polynomial_prefactor() {
        let series: Vec<(usize, f64)> = (10..=40)
            .map(|n| (n, n as f64 * (-0.5 * n as f64).exp()))
            .collect();
        let fit = fit_exponent(&series).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.03, "slope {}", fit.slope);
        assert!((fit.log_coeff - (-1.0)).abs() < 1e-6);
    }

    #[test]
    fn fit_constant_probability_has_zero_slope() {
        let series: Vec<(usize, f64)> = (4..=20).map(|n| (n, 0.37)).collect();
        let fit = fit_exponent(&series).unwrap();
        assert!(fit.slope.abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(
            fit_exponent(&[(1, 0.5), (2, 0.4)]),
            Err(Error::InsufficientFitPoints(2))
        ));
        assert!(matches!(
            fit_exponent(&[(1, 0.5), (2, 0.0), (3, 0.1)]),
            Err(Error::NonpositiveProbability { n: 2, .. })
        ));
    }
}
