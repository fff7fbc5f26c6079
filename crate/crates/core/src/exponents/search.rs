//! Outer minimization over a product of probability simplices: coarse grid,
//! then Nelder–Mead refinement on a softmax reparameterization of the best
//! cells. The outer objectives need not be convex (and may be +∞ on
//! infeasible regions), so this is a best-effort global search whose error is
//! bounded by the brute-force oracles in the test suite.

use crate::exec;
use crate::probability::simplex_grid;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Target per-simplex grid resolution; lowered automatically when the
    /// product grid would exceed `cell_budget`.
    pub grid_resolution: usize,
    /// Nelder–Mead restarts from the best distinct grid cells.
    pub nm_restarts: usize,
    pub nm_max_iters: usize,
    pub cell_budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_resolution: 64,
            nm_restarts: 3,
            nm_max_iters: 400,
            cell_budget: 200_000,
        }
    }
}

/// Minimizes `f` over `rows` stacked simplices of dimension `dim` each
/// (the argument is the concatenation of the rows). Returns the best value
/// and point. `seeds` are extra candidate points evaluated and refined
/// alongside the grid cells. Grid ties break to the lowest cell index, so
/// results do not depend on scheduling.
pub fn minimize_product_simplex<F>(
    rows: usize,
    dim: usize,
    opts: &SearchOptions,
    seeds: &[Vec<f64>],
    f: F,
) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(rows >= 1 && dim >= 1);
    if dim == 1 {
        let point = vec![1.0; rows];
        return (f(&point), point);
    }

    // Pick the finest resolution whose product grid fits the budget.
    let mut res = opts.grid_resolution.max(1);
    loop {
        let per_row = simplex_points(res, dim);
        if per_row.pow(rows as u32) <= opts.cell_budget || res <= 2 {
            break;
        }
        res /= 2;
    }
    let row_grid = simplex_grid(dim, res);
    let per_row = row_grid.len();
    let total = per_row.pow(rows as u32);

    // Parallel evaluation in fixed chunks with a deterministic argmin.
    let chunk_size = total.div_ceil(256).max(1);
    let chunks = total.div_ceil(chunk_size);
    let best_per_chunk = exec::map_chunks(chunks, |c| {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut point = vec![0.0; rows * dim];
        for idx in c * chunk_size..(total.min((c + 1) * chunk_size)) {
            let mut rem = idx;
            for r in 0..rows {
                let cell = rem % per_row;
                rem /= per_row;
                point[r * dim..(r + 1) * dim].copy_from_slice(row_grid[cell].as_slice());
            }
            let v = f(&point);
            if v < best.0 {
                best = (v, idx);
            }
        }
        best
    });
    let mut ranked: Vec<(f64, usize)> = best_per_chunk.into_iter().filter(|b| b.1 != usize::MAX).collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));

    let decode = |idx: usize| -> Vec<f64> {
        let mut rem = idx;
        let mut point = vec![0.0; rows * dim];
        for r in 0..rows {
            let cell = rem % per_row;
            rem /= per_row;
            point[r * dim..(r + 1) * dim].copy_from_slice(row_grid[cell].as_slice());
        }
        point
    };

    let mut best_value = f64::INFINITY;
    let mut best_point = decode(ranked.first().map(|b| b.1).unwrap_or(0));
    let consider = |value: f64, point: Vec<f64>, best_value: &mut f64, best_point: &mut Vec<f64>| {
        if value < *best_value {
            *best_value = value;
            *best_point = point;
        }
    };
    for b in ranked.iter().take(opts.nm_restarts.max(1)) {
        consider(b.0, decode(b.1), &mut best_value, &mut best_point);
    }
    for seed in seeds {
        consider(f(seed), seed.clone(), &mut best_value, &mut best_point);
    }

    // Refine from the best grid cells and the seeds.
    let starts: Vec<Vec<f64>> = ranked
        .iter()
        .take(opts.nm_restarts.max(1))
        .map(|b| decode(b.1))
        .chain(seeds.iter().cloned())
        .collect();
    for start in starts {
        let (v, p) = nelder_mead(rows, dim, &start, opts.nm_max_iters, &f);
        consider(v, p, &mut best_value, &mut best_point);
    }
    (best_value, best_point)
}

fn simplex_points(res: usize, dim: usize) -> usize {
    // C(res + dim - 1, dim - 1), saturating.
    let mut acc: usize = 1;
    for i in 1..dim {
        acc = acc.saturating_mul(res + i);
        acc /= i;
    }
    acc
}

/// Softmax over [0, z_1..z_{dim-1}] per row.
fn unpack(rows: usize, dim: usize, z: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let zr = &z[r * (dim - 1)..(r + 1) * (dim - 1)];
        let mut max = 0.0f64;
        for &v in zr {
            max = max.max(v);
        }
        let mut sum = (-max).exp();
        out[r * dim] = (-max).exp();
        for (k, &v) in zr.iter().enumerate() {
            let e = (v - max).exp();
            out[r * dim + 1 + k] = e;
            sum += e;
        }
        for v in &mut out[r * dim..(r + 1) * dim] {
            *v /= sum;
        }
    }
}

fn pack(rows: usize, dim: usize, point: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; rows * (dim - 1)];
    for r in 0..rows {
        let base = point[r * dim].max(1e-9);
        for k in 0..dim - 1 {
            z[r * (dim - 1) + k] = (point[r * dim + 1 + k].max(1e-9) / base).ln();
        }
    }
    z
}

fn nelder_mead<F>(rows: usize, dim: usize, start: &[f64], max_iters: usize, f: &F) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let k = rows * (dim - 1);
    let mut probs = vec![0.0; rows * dim];
    let eval = |z: &[f64], probs: &mut Vec<f64>| -> f64 {
        unpack(rows, dim, z, probs);
        f(probs)
    };
    let z0 = pack(rows, dim, start);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    simplex.push(z0.clone());
    for i in 0..k {
        let mut z = z0.clone();
        z[i] += 0.25;
        simplex.push(z);
    }
    let mut values: Vec<f64> = simplex.iter().map(|z| eval(z, &mut probs)).collect();

    for _ in 0..max_iters {
        // Order: best first.
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let sorted: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let sorted_vals: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = sorted;
        values = sorted_vals;
        let spread = if values[k].is_finite() && values[0].is_finite() {
            values[k] - values[0]
        } else {
            f64::INFINITY
        };
        let geom: f64 = (1..=k)
            .map(|i| {
                simplex[i]
                    .iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread < 1e-12 && geom < 1e-10 {
            break;
        }

        let centroid: Vec<f64> = (0..k)
            .map(|i| simplex[..k].iter().map(|z| z[i]).sum::<f64>() / k as f64)
            .collect();
        let worst = values[k];
        let second_worst = values[k - 1];
        let reflect: Vec<f64> = centroid.iter().zip(&simplex[k]).map(|(c, w)| 2.0 * c - w).collect();
        let fr = eval(&reflect, &mut probs);
        if fr < values[0] {
            let expand: Vec<f64> = centroid.iter().zip(&simplex[k]).map(|(c, w)| 3.0 * c - 2.0 * w).collect();
            let fe = eval(&expand, &mut probs);
            if fe < fr {
                simplex[k] = expand;
                values[k] = fe;
            } else {
                simplex[k] = reflect;
                values[k] = fr;
            }
        } else if fr < second_worst {
            simplex[k] = reflect;
            values[k] = fr;
        } else {
            let contract: Vec<f64> = if fr < worst {
                centroid.iter().zip(&reflect).map(|(c, r)| 0.5 * (c + r)).collect()
            } else {
                centroid.iter().zip(&simplex[k]).map(|(c, w)| 0.5 * (c + w)).collect()
            };
            let fc = eval(&contract, &mut probs);
            if fc < worst.min(fr) {
                simplex[k] = contract;
                values[k] = fc;
            } else {
                // Shrink towards the best vertex.
                for i in 1..=k {
                    let best = simplex[0].clone();
                    for (zi, bi) in simplex[i].iter_mut().zip(best) {
                        *zi = bi + 0.5 * (*zi - bi);
                    }
                    values[i] = eval(&simplex[i], &mut probs);
                }
            }
        }
    }
    let mut best = 0usize;
    for i in 1..=k {
        if values[i] < values[best] {
            best = i;
        }
    }
    unpack(rows, dim, &simplex[best], &mut probs);
    (values[best], probs)
}
