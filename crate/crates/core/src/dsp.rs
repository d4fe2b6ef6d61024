//! Small numeric helpers shared by the processing stages.

use std::f64::consts::PI;

use num_complex::Complex64;

/// One-dimensional phase unwrap: removes 2π jumps between consecutive
/// samples so that successive differences lie in `(-π, π]`.
pub fn unwrap(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    let mut prev = match phase.first() {
        Some(&p) => p,
        None => return out,
    };
    out.push(prev);
    for &p in &phase[1..] {
        let d = p - prev;
        if d > PI {
            offset -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
        } else if d < -PI {
            offset += 2.0 * PI * ((-d + PI) / (2.0 * PI)).floor();
        }
        out.push(p + offset);
        prev = p;
    }
    out
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn mean_complex(x: &[Complex64]) -> Complex64 {
    if x.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    x.iter().sum::<Complex64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// Centred moving average of odd or even length `len`; the window is
/// truncated at the edges, so the output length equals the input length.
pub fn moving_average_centered(x: &[Complex64], len: usize) -> Vec<Complex64> {
    let n = x.len();
    if len <= 1 || n == 0 {
        return x.to_vec();
    }
    let back = (len - 1) / 2;
    let fwd = len - 1 - back;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(Complex64::new(0.0, 0.0));
    for v in x {
        let last = *prefix.last().unwrap();
        prefix.push(last + v);
    }
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(back);
            let hi = (k + fwd + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Non-overlapping block means; a trailing partial block is dropped.
pub fn block_average(x: &[Complex64], len: usize) -> Vec<Complex64> {
    if len <= 1 {
        return x.to_vec();
    }
    x.chunks_exact(len)
        .map(|c| c.iter().sum::<Complex64>() / len as f64)
        .collect()
}

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Index of the largest element; the first one wins ties.
pub fn argmax(x: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in x.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some(b) if x[b] >= *v => {}
            _ => best = Some(i),
        }
    }
    best
}

pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
