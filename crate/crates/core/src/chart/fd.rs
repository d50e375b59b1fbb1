//! Central finite differences with one Richardson step.

use super::MetricJet;
use crate::scalar::Scalar;

/// Relative base step; order-`k` derivatives use `BASE_STEP * 10^(k-1) * width`.
pub(crate) const BASE_STEP: f64 = 1e-4;

fn nested<S: Scalar>(f: &impl Fn(&[S]) -> Vec<S>, p: &mut Vec<S>, dirs: &[usize], steps: &[S]) -> Vec<S> {
    match dirs.split_first() {
        None => f(p),
        Some((&k, rest)) => {
            let h = steps[k];
            let x0 = p[k];
            p[k] = x0 + h;
            let plus = nested(f, p, rest, steps);
            p[k] = x0 - h;
            let minus = nested(f, p, rest, steps);
            p[k] = x0;
            let inv = S::one() / (h + h);
            plus.iter().zip(&minus).map(|(a, b)| (*a - *b) * inv).collect()
        }
    }
}

/// Mixed partial along `dirs`, Richardson-extrapolated from steps `h` and `h/2`.
fn derivative<S: Scalar>(f: &impl Fn(&[S]) -> Vec<S>, p: &[S], dirs: &[usize], steps: &[S]) -> Vec<S> {
    let mut q = p.to_vec();
    let coarse = nested(f, &mut q, dirs, steps);
    let half: Vec<S> = steps.iter().map(|h| *h * S::lit(0.5)).collect();
    let fine = nested(f, &mut q, dirs, &half);
    let three = S::lit(3.0);
    let four = S::lit(4.0);
    fine.iter()
        .zip(&coarse)
        .map(|(a, b)| (four * *a - *b) / three)
        .collect()
}

pub(crate) fn jet<S: Scalar>(f: impl Fn(&[S]) -> Vec<S>, p: &[S], widths: &[f64], order: usize) -> MetricJet<S> {
    let n = p.len();
    let steps = |k: i32| -> Vec<S> {
        widths
            .iter()
            .map(|w| S::lit(BASE_STEP * 10f64.powi(k - 1) * w))
            .collect()
    };
    let g = f(p);
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    let mut d3 = Vec::new();
    if order >= 1 {
        let h = steps(1);
        for k in 0..n {
            d1.extend(derivative(&f, p, &[k], &h));
        }
    }
    if order >= 2 {
        let h = steps(2);
        let mut table = vec![Vec::new(); n * n];
        for k in 0..n {
            for l in k..n {
                let d = derivative(&f, p, &[k, l], &h);
                table[l * n + k] = d.clone();
                table[k * n + l] = d;
            }
        }
        d2 = table.concat();
    }
    if order >= 3 {
        let h = steps(3);
        let mut table = vec![Vec::new(); n * n * n];
        for k in 0..n {
            for l in k..n {
                for m in l..n {
                    let d = derivative(&f, p, &[k, l, m], &h);
                    for (a, b, c) in [(k, l, m), (k, m, l), (l, k, m), (l, m, k), (m, k, l), (m, l, k)] {
                        table[(a * n + b) * n + c] = d.clone();
                    }
                }
            }
        }
        d3 = table.concat();
    }
    MetricJet {
        dim: n,
        order,
        g,
        d1,
        d2,
        d3,
    }
}
