//! The discrete memoryless channel with a silent input symbol, constant
//! composition random codebooks, and forward simulation.
//!
//! RNG contract: all sampling uses `ChaCha8Rng`. Operations that run in
//! fixed-size batches (Monte Carlo trials, codebook ensembles) seed one
//! generator per batch via `seed_from_u64(seed)` + `set_stream(index)`, so
//! runs are reproducible and parallelize without coordination.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::probability::{Distribution, TypeDescriptor};
use crate::{Error, Result};

/// A DMC over input alphabet 𝒳₀ = {silent} ∪ 𝒳 and output alphabet 𝒴.
///
/// Row `x` of `rows` is W(·|x). The silent symbol's row is the pure-noise
/// output distribution Q₀.
#[derive(Clone, Debug)]
pub struct Dmc {
    rows: Vec<Distribution>,
    silent: usize,
    message_letters: Vec<usize>,
    full_support: bool,
}

impl Dmc {
    /// Validates the transition matrix and silent index.
    pub fn new(raw_rows: &[Vec<f64>], silent_index: usize) -> Result<Self> {
        if raw_rows.is_empty() {
            return Err(Error::EmptyInput("channel matrix with no rows"));
        }
        let ny = raw_rows[0].len();
        let mut rows = Vec::with_capacity(raw_rows.len());
        for (i, raw) in raw_rows.iter().enumerate() {
            if raw.len() != ny {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {ny}",
                    raw.len()
                )));
            }
            let sum: f64 = raw.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::RowSum { row: i, sum });
            }
            rows.push(Distribution::new(raw.clone())?);
        }
        if silent_index >= rows.len() {
            return Err(Error::SilentIndexOutOfRange {
                index: silent_index,
                rows: rows.len(),
            });
        }
        let message_letters: Vec<usize> = (0..rows.len()).filter(|&x| x != silent_index).collect();
        if message_letters.is_empty() {
            return Err(Error::EmptyMessageAlphabet);
        }
        let full_support = rows.iter().all(|r| r.iter().all(|&p| p > 0.0));
        Ok(Self {
            rows,
            silent: silent_index,
            message_letters,
            full_support,
        })
    }

    /// Number of input letters including the silent symbol.
    pub fn input_len(&self) -> usize {
        self.rows.len()
    }

    /// Output alphabet size.
    pub fn output_len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn silent_index(&self) -> usize {
        self.silent
    }

    /// Message letters 𝒳 = 𝒳₀ \ {silent}, in increasing index order.
    pub fn message_letters(&self) -> &[usize] {
        &self.message_letters
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    /// The noise output distribution Q₀ = W(·|silent).
    pub fn noise_row(&self) -> &Distribution {
        &self.rows[self.silent]
    }

    /// True when every transition probability is strictly positive; the
    /// exponent engine requires this, the simulator does not.
    pub fn is_full_support(&self) -> bool {
        self.full_support
    }

    /// Index of the first zero entry (x, y), if any.
    pub fn first_zero_entry(&self) -> Option<(usize, usize)> {
        for (x, row) in self.rows.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                if p <= 0.0 {
                    return Some((x, y));
                }
            }
        }
        None
    }

    /// Draws one output letter from W(·|x).
    pub fn sample_output(&self, x: usize, rng: &mut impl Rng) -> Result<usize> {
        if x >= self.rows.len() {
            return Err(Error::UnknownLetter {
                letter: x,
                alphabet: self.rows.len(),
            });
        }
        let u: f64 = rng.random();
        let row = self.rows[x].as_slice();
        let mut acc = 0.0;
        for (y, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(y);
            }
        }
        Ok(row.len() - 1)
    }
}

/// Validates a raw matrix into a [`Dmc`]. Same as [`Dmc::new`]; named entry
/// point for config loading.
pub fn validate_dmc(rows: &[Vec<f64>], silent_index: usize) -> Result<Dmc> {
    Dmc::new(rows, silent_index)
}

/// M codewords of length n over the message letters, all with the same
/// composition.
#[derive(Clone, Debug)]
pub struct Codebook {
    codewords: Vec<Vec<usize>>,
    composition: TypeDescriptor,
    n: usize,
}

impl Codebook {
    pub fn new(codewords: Vec<Vec<usize>>, composition: TypeDescriptor) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::EmptyInput("codebook with no codewords"));
        }
        let n = composition.n();
        for cw in &codewords {
            if cw.len() != n {
                return Err(Error::LengthMismatch {
                    left: cw.len(),
                    right: n,
                });
            }
        }
        Ok(Self {
            codewords,
            composition,
            n,
        })
    }

    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn codeword(&self, m: usize) -> &[usize] {
        &self.codewords[m]
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    /// Composition counts, indexed over the message letters of the channel.
    pub fn composition(&self) -> &TypeDescriptor {
        &self.composition
    }

    /// Realized rate ln(M)/n in nats per channel use.
    pub fn rate(&self) -> f64 {
        (self.size() as f64).ln() / self.n as f64
    }
}

/// Everything needed to draw and evaluate one random-code ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Composition counts over the message letters (ordered as
    /// [`Dmc::message_letters`]); their sum is the block length n.
    pub composition: Vec<usize>,
    /// Codebook size M ≥ 1.
    pub codebook_size: usize,
    /// Base RNG seed.
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn block_length(&self) -> usize {
        self.composition.iter().sum()
    }

    pub fn composition_descriptor(&self) -> Result<TypeDescriptor> {
        TypeDescriptor::new(self.composition.clone())
    }
}

/// Draws M codewords uniformly from the type class by Fisher–Yates shuffling
/// the composition multiset; exact and O(n) per codeword.
pub fn sample_codebook_with(dmc: &Dmc, cfg: &EnsembleConfig, rng: &mut impl Rng) -> Result<Codebook> {
    if cfg.composition.len() != dmc.message_letters().len() {
        return Err(Error::ShapeMismatch(format!(
            "composition over {} letters, channel has {} message letters",
            cfg.composition.len(),
            dmc.message_letters().len()
        )));
    }
    if cfg.codebook_size == 0 {
        return Err(Error::EmptyInput("codebook of size 0"));
    }
    let n = cfg.block_length();
    let mut base = Vec::with_capacity(n);
    for (slot, &count) in cfg.composition.iter().enumerate() {
        base.extend(std::iter::repeat(dmc.message_letters()[slot]).take(count));
    }
    let mut codewords = Vec::with_capacity(cfg.codebook_size);
    for _ in 0..cfg.codebook_size {
        let mut cw = base.clone();
        for i in (1..cw.len()).rev() {
            let j = rng.random_range(0..=i);
            cw.swap(i, j);
        }
        codewords.push(cw);
    }
    Codebook::new(codewords, cfg.composition_descriptor()?)
}

/// [`sample_codebook_with`] seeded deterministically from the config
/// (ChaCha8, stream 0).
pub fn sample_codebook(dmc: &Dmc, cfg: &EnsembleConfig) -> Result<Codebook> {
    let mut rng = crate::validation::seeded_rng(cfg.seed, 0);
    sample_codebook_with(dmc, cfg, &mut rng)
}

/// Sends `x` through the channel letter by letter.
pub fn transmit(dmc: &Dmc, x: &[usize], rng: &mut impl Rng) -> Result<Vec<usize>> {
    x.iter().map(|&xi| dmc.sample_output(xi, rng)).collect()
}

/// Σ_i ln W(y_i|x_i); −∞ if any factor is zero.
pub fn log_likelihood(dmc: &Dmc, x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let mut acc = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        if xi >= dmc.input_len() {
            return Err(Error::UnknownLetter {
                letter: xi,
                alphabet: dmc.input_len(),
            });
        }
        let p = dmc.row(xi).get(yi);
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += p.ln();
    }
    Ok(acc)
}

/// Σ_i ln Q₀(y_i).
pub fn log_noise_likelihood(dmc: &Dmc, y: &[usize]) -> f64 {
    let q0 = dmc.noise_row();
    let mut acc = 0.0;
    for &yi in y {
        let p = q0.get(yi);
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += p.ln();
    }
    acc
}

/// The canonical test channel used throughout the test suite:
/// 𝒳₀ = {0, 1, 2} with silent 0, 𝒴 = {0, 1},
/// W(·|0) = (0.95, 0.05), W(·|1) = (0.8, 0.2), W(·|2) = (0.2, 0.8).
pub fn reference_channel() -> Dmc {
    Dmc::new(
        &[vec![0.95, 0.05], vec![0.8, 0.2], vec![0.2, 0.8]],
        0,
    )
    .expect("reference channel is valid")
}
