//! Spectral norms by power iteration on `WᵀW`.

/// Relative change of the estimate at which iteration stops.
pub const POWER_TOL: f64 = 1e-13;
pub const POWER_MAX_ITERS: usize = 10_000;

fn gram(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.first().map_or(0, Vec::len);
    let mut g = vec![vec![0.0; n]; n];
    for row in w {
        for i in 0..n {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    g
}

fn mul(g: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    g.iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn iterate(g: &[Vec<f64>], mut v: Vec<f64>) -> f64 {
    let n0 = norm(&v);
    v.iter_mut().for_each(|a| *a /= n0);
    let mut est = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let gv = mul(g, &v);
        // Rayleigh quotient vᵀ(WᵀW)v = ‖Wv‖²
        let lambda: f64 = gv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let next = lambda.max(0.0).sqrt();
        let ng = norm(&gv);
        if ng == 0.0 {
            return 0.0;
        }
        let converged = (next - est).abs() <= POWER_TOL * next;
        est = next;
        v = gv.into_iter().map(|a| a / ng).collect();
        if converged {
            break;
        }
    }
    est
}

/// Largest singular value of a row-major matrix.
pub fn spectral_norm(w: &[Vec<f64>]) -> f64 {
    let n = w.first().map_or(0, Vec::len);
    if n == 0 {
        return 0.0;
    }
    let g = gram(w);
    let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 / (i as f64 + 1.0)).collect();
    let est = iterate(&g, start);
    if est > 0.0 || g.iter().all(|r| r.iter().all(|&a| a == 0.0)) {
        return est;
    }
    // start vector orthogonal to the row space; fall back to the basis
    (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            iterate(&g, e)
        })
        .fold(0.0, f64::max)
}
