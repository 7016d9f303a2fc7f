//! Modified Bessel functions of the first kind, integer order.
//!
//! Small arguments use the power series; everything else goes through
//! Miller's downward recurrence normalized with e^x = I_0 + 2 Σ_k I_k.

use crate::error::{PendulumError, Result};

/// Largest argument before e^x leaves the f64 range.
pub const MAX_ARGUMENT: f64 = 700.0;

const SERIES_CUTOFF: f64 = 2.0;

fn check_argument(order: u32, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(PendulumError::InvalidParameter(format!("Bessel argument must be >= 0 (got {x})")));
    }
    if x > MAX_ARGUMENT {
        return Err(PendulumError::BesselOverflow { order, x });
    }
    Ok(())
}

fn power_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^ν / ν!
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + order as f64));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Start index for the downward recurrence.
fn miller_start(max_order: usize, x: f64) -> usize {
    let base = max_order.max(x.ceil() as usize).max(1);
    2 * (base + ((200 * base) as f64).sqrt() as usize) + 20
}

/// I_0..=I_{max_order} at `x` by downward recurrence.
fn miller_table(max_order: usize, x: f64) -> Vec<f64> {
    let start = miller_start(max_order, x);
    let mut values = vec![0.0; max_order + 1];
    let two_over_x = 2.0 / x;
    let (mut above, mut current) = (0.0f64, 1e-300f64);
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        if k <= max_order {
            values[k] = current;
        }
        sum += 2.0 * current;
        let below = above + k as f64 * two_over_x * current;
        above = current;
        current = below;
        if current.abs() > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            sum *= 1e-250;
            for v in values.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    values[0] = current;
    sum += current;
    // I_k = f_k e^x / Σ, evaluated in log space to stay in range
    let log_scale = x - sum.ln();
    for v in values.iter_mut() {
        *v = if *v == 0.0 { 0.0 } else { (v.ln() + log_scale).exp() };
    }
    values
}

/// I_order(x) for x in [0, 700].
pub fn modified_bessel_i(order: u32, x: f64) -> Result<f64> {
    check_argument(order, x)?;
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if x < SERIES_CUTOFF {
        return Ok(power_series(order, x));
    }
    Ok(miller_table(order as usize, x)[order as usize])
}

/// I_0..=I_{max_order} at one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    argument: f64,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn new(max_order: usize, x: f64) -> Result<Self> {
        check_argument(max_order as u32, x)?;
        let values = if x == 0.0 {
            let mut v = vec![0.0; max_order + 1];
            v[0] = 1.0;
            v
        } else if x < SERIES_CUTOFF {
            (0..=max_order).map(|k| power_series(k as u32, x)).collect()
        } else {
            miller_table(max_order, x)
        };
        Ok(Self { argument: x, values })
    }

    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// I_ρ for any integer ρ, using I_{−ρ} = I_ρ.
    ///
    /// Panics if |ρ| exceeds the tabulated range.
    pub fn get(&self, order: i64) -> f64 {
        self.values[order.unsigned_abs() as usize]
    }

    /// max_ρ |I_{ρ−1} − I_{ρ+1} − (2ρ/x) I_ρ| / I_0 over the interior orders.
    pub fn recurrence_residual(&self) -> f64 {
        if self.argument == 0.0 {
            return 0.0;
        }
        (1..self.max_order())
            .map(|r| {
                let lhs = self.values[r - 1] - self.values[r + 1];
                (lhs - 2.0 * r as f64 / self.argument * self.values[r]).abs()
            })
            .fold(0.0, f64::max)
            / self.values[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// (1/π) ∫_0^π e^{x cos θ} cos(νθ) dθ by the trapezoid rule on the full
    /// period, which is spectrally accurate for this integrand.
    fn integral_oracle(order: u32, x: f64) -> f64 {
        let n = 4096;
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|k| {
                let t = k as f64 * h;
                (x * t.cos()).exp() * (order as f64 * t).cos()
            })
            .sum::<f64>()
            * h
            / (2.0 * PI)
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(modified_bessel_i(0, 0.0).unwrap(), 1.0);
        for n in 1..6 {
            assert_eq!(modified_bessel_i(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn matches_integral_representation() {
        let i1 = modified_bessel_i(1, 10.0).unwrap();
        let oracle = integral_oracle(1, 10.0);
        assert!(((i1 - oracle) / oracle).abs() < 1e-10, "{i1} vs {oracle}");
        for &x in &[0.3, 1.0, 1.99, 2.0, 5.0, 10.0, 14.14, 40.0] {
            for order in [0u32, 1, 2, 3, 7, 12] {
                let v = modified_bessel_i(order, x).unwrap();
                let o = integral_oracle(order, x);
                // the oracle is only accurate relative to I_0
                let scale = integral_oracle(0, x);
                assert!(((v - o) / scale).abs() < 1e-13, "I_{order}({x}) = {v} vs {o}");
            }
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_switch_point() {
        for order in 0..20 {
            let s = power_series(order, 2.0);
            let m = miller_table(order as usize, 2.0)[order as usize];
            assert!(((s - m) / s).abs() < 1e-13, "order {order}: {s} vs {m}");
        }
    }

    #[test]
    fn table_properties() {
        for &x in &[0.5, 5.0, 10.0, 100.0] {
            let t = BesselTable::new(60, x).unwrap();
            assert!(t.recurrence_residual() < 1e-10);
            for r in 1..=60 {
                assert!(t.get(r) >= 0.0);
                assert!(t.get(r) <= t.get(r - 1));
            }
            assert!(t.get(10) > 0.0);
            assert_eq!(t.get(-3), t.get(3));
        }
    }

    #[test]
    fn large_argument() {
        // I_0(700) ≈ e^700 / sqrt(2π·700)
        let v = modified_bessel_i(0, 700.0).unwrap();
        let asym = 700f64.exp() / (2.0 * PI * 700.0).sqrt() * (1.0 + 1.0 / 5600.0 + 9.0 / (2.0 * 5600.0 * 5600.0));
        assert!(((v - asym) / asym).abs() < 1e-9);
        assert!(matches!(modified_bessel_i(0, 701.0), Err(PendulumError::BesselOverflow { .. })));
        assert!(modified_bessel_i(0, -1.0).is_err());
    }
}
