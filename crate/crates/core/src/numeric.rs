//! Small numerical helpers: log-factorial tables, compensated summation and
//! the Gaussian tail.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

/// `ln(k!)` for `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(n: usize) -> Self {
        let table = (0..=n)
            .map(|k| if k < 2 { 0.0 } else { ln_gamma(k as f64 + 1.0) })
            .collect();
        Self { table }
    }

    #[inline(always)]
    pub fn get(&self, k: u32) -> f64 {
        self.table[k as usize]
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        iter.into_iter().for_each(|x| acc.add(x));
        acc
    }
}

/// Standard Gaussian CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `2 (1 - Φ(|z|))`, evaluated through `erfc` so deep tails keep their
/// relative precision.
pub fn two_sided_normal_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Combines `(max, scaled_sum)` log-sum-exp partials: the represented value
/// is `exp(max) * scaled_sum`.
#[inline]
pub(crate) fn lse_combine(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    if a.1 == 0.0 {
        return b;
    }
    if b.1 == 0.0 {
        return a;
    }
    if a.0 >= b.0 {
        (a.0, a.1 + b.1 * (b.0 - a.0).exp())
    } else {
        (b.0, b.1 + a.1 * (a.0 - b.0).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Simpson's rule on the Gaussian density over [|z|, 40], doubled.
    fn quadrature_two_sided(z: f64) -> f64 {
        let (a, b, n) = (z.abs(), 40.0, 200_000);
        let h = (b - a) / n as f64;
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(a) + pdf(b);
        for k in 1..n {
            let x = a + k as f64 * h;
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(x);
        }
        2.0 * s * h / 3.0
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        assert_eq!(two_sided_normal_p(0.0), 1.0);
    }

    #[test]
    fn tail_matches_quadrature() {
        for z in [0.5, 1.0, 1.96, 3.0, 4.330127, 6.0, 8.0] {
            let expected = quadrature_two_sided(z);
            let got = two_sided_normal_p(z);
            assert!(
                ((got - expected) / expected).abs() < 1e-9,
                "z={z}: {got} vs {expected}"
            );
            assert_eq!(two_sided_normal_p(-z), got);
        }
    }

    #[test]
    fn log_factorials() {
        let lf = LogFactorials::new(20);
        let mut f = 1.0f64;
        for k in 1..=20u32 {
            f *= k as f64;
            assert!((lf.get(k) - f.ln()).abs() < 1e-12);
        }
        assert_eq!(lf.get(0), 0.0);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-15);
    }

    #[test]
    fn lse_combine_is_exact_for_simple_cases() {
        let (m, s) = lse_combine((0.0, 1.0), ((2.0f64).ln(), 1.0));
        assert!((m.exp() * s - 3.0).abs() < 1e-12);
        assert_eq!(lse_combine((0.0, 0.0), (1.0, 2.0)), (1.0, 2.0));
    }
}
