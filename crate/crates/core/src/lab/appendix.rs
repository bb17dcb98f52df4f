//! Exhaustive sweeps of the counting inequalities used by the query bounds.
//! Every transcendental on the larger side is replaced by a rational lower
//! bound, so a pass here implies the real inequality.

use num::{BigInt, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bitcore::{binom, prefix_len};
use crate::exact::{self, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct AppendixRanges {
    pub k_max: usize,
    pub m_max: usize,
    /// Slack factors `a` for the falling-factorial bound.
    pub a_values: Vec<usize>,
    /// Largest `n` in the `(h, q, n)` grid.
    pub n_max: usize,
}

impl Default for AppendixRanges {
    fn default() -> Self {
        AppendixRanges { k_max: 6, m_max: 200, a_values: vec![1, 2, 3, 4], n_max: 32 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub name: &'static str,
    pub grid: String,
    pub checked: usize,
    pub counterexamples: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub sweeps: Vec<SweepReport>,
}

impl AppendixReport {
    pub fn clean(&self) -> bool {
        self.sweeps.iter().all(|s| s.counterexamples.is_empty())
    }
}

/// `Σ_{j ≤ terms} x^j / j!`, below `e^x` for `x > 0`.
pub fn exp_lower(x: &Rational, terms: usize) -> Rational {
    let mut term = exact::one();
    let mut sum = exact::one();
    for j in 1..=terms {
        term = term * x / exact::int(j as i64);
        sum += &term;
    }
    sum
}

/// Rational `L ≤ e^x` for `x ≥ 0`, as `(T(x/r) rounded down to 2^-64)^r`
/// with `r = ⌈x⌉`, so the Taylor argument stays in `[0, 1]`.
pub fn exp_lower_large(x: &Rational) -> Rational {
    if x.is_zero() {
        return exact::one();
    }
    let r = exact::ceil_usize(x).max(1);
    let base = exp_lower(&(x / exact::int(r as i64)), 24);
    let scale = BigInt::one() << 64;
    let floored = Rational::new((base.numer() * &scale) / base.denom(), scale);
    num::pow(floored, r)
}

fn falling(m: usize, k: usize) -> BigInt {
    // (m-1)!/(m-k)!
    ((m - k + 1)..m).map(BigInt::from).product()
}

/// `m^{k-1} < e^{1/a}·(m-1)!/(m-k)!` for `m ∈ (a·k², m_max]`.
pub fn sweep_falling_factorial(r: &AppendixRanges) -> SweepReport {
    let mut out = SweepReport {
        name: "falling-factorial",
        grid: format!("k ∈ [2,{}], a ∈ {:?}, m ∈ (a·k², {}]", r.k_max, r.a_values, r.m_max),
        checked: 0,
        counterexamples: Vec::new(),
    };
    for &a in &r.a_values {
        let e = exp_lower(&exact::ratio(1, a as i64), 30);
        for k in 2..=r.k_max {
            for m in (a * k * k + 1)..=r.m_max {
                out.checked += 1;
                let lhs = Rational::from_integer(num::pow(BigInt::from(m), k - 1));
                let rhs = &e * Rational::from_integer(falling(m, k));
                if lhs >= rhs {
                    out.counterexamples.push(format!("a={a}, k={k}, m={m}"));
                }
            }
        }
    }
    out
}

/// `⌈log2 m⌉ ≤ log2(n)/(k-1) + log2 k + 1` with `n = binom(m-1, k-1)`,
/// as `2^{(k-1)(⌈log2 m⌉-1)} ≤ n·k^{k-1}` in integers, for `m ∈ [2k², m_max]`.
pub fn sweep_key_length(r: &AppendixRanges) -> SweepReport {
    let mut out = SweepReport {
        name: "key-length",
        grid: format!("k ∈ [2,{}], m ∈ [2k², {}]", r.k_max, r.m_max),
        checked: 0,
        counterexamples: Vec::new(),
    };
    for k in 2..=r.k_max {
        for m in (2 * k * k)..=r.m_max {
            out.checked += 1;
            let l = prefix_len(m);
            let n = BigInt::from(binom(m - 1, k - 1));
            let lhs = BigInt::one() << ((k - 1) * l.saturating_sub(1));
            let rhs = n * num::pow(BigInt::from(k), k - 1);
            // l = 0 only for m = 1, outside the grid
            if lhs > rhs {
                out.counterexamples.push(format!("k={k}, m={m}"));
            }
        }
    }
    out
}

/// `k^k ≤ binom(m-1, k-1)` on `m ∈ (lower(k), m_max]`.
fn sweep_power(r: &AppendixRanges, name: &'static str, lower: impl Fn(usize) -> usize, grid: String) -> SweepReport {
    let mut out = SweepReport { name, grid, checked: 0, counterexamples: Vec::new() };
    for k in 2..=r.k_max {
        for m in (lower(k) + 1)..=r.m_max {
            out.checked += 1;
            let n = BigInt::from(binom(m - 1, k - 1));
            if num::pow(BigInt::from(k), k) > n {
                out.counterexamples.push(format!("k={k}, m={m}"));
            }
        }
    }
    out
}

/// `k log2 k ≤ log2 n`, i.e. `k^k ≤ n`, for `m > 2k²`, the range the
/// iteration count is used on.
pub fn sweep_power_bound(r: &AppendixRanges) -> SweepReport {
    sweep_power(r, "power", |k| 2 * k * k, format!("k ∈ [2,{}], m ∈ (2k², {}]", r.k_max, r.m_max))
}

/// Same inequality on the looser range `m ≥ k²`; fails at `k = 2, m = 4`.
pub fn sweep_power_bound_loose(r: &AppendixRanges) -> SweepReport {
    sweep_power(r, "power-loose", |k| k * k - 1, format!("k ∈ [2,{}], m ∈ [k², {}]", r.k_max, r.m_max))
}

/// `(n/(n-q))^h < e^{q²/(n-q)}` for `0 ≤ h ≤ q < n`, `q ≥ 1`.
pub fn sweep_trap_bound(r: &AppendixRanges, q_min: usize) -> SweepReport {
    let mut out = SweepReport {
        name: if q_min == 0 { "trap-with-q0" } else { "trap" },
        grid: format!("n ∈ [1,{}], q ∈ [{q_min}, n), h ∈ [0, q]", r.n_max),
        checked: 0,
        counterexamples: Vec::new(),
    };
    for n in 1..=r.n_max {
        for q in q_min..n {
            let base = exact::ratio(n as i64, (n - q) as i64);
            let rhs = exp_lower_large(&exact::ratio((q * q) as i64, (n - q) as i64));
            let mut lhs = exact::one();
            for h in 0..=q {
                out.checked += 1;
                if lhs >= rhs {
                    out.counterexamples.push(format!("h={h}, q={q}, n={n}"));
                }
                lhs *= &base;
            }
        }
    }
    out
}

/// Runs the four sweeps on their declared grids.
pub fn check_appendix_bounds(r: &AppendixRanges) -> AppendixReport {
    AppendixReport {
        sweeps: vec![sweep_falling_factorial(r), sweep_key_length(r), sweep_power_bound(r), sweep_trap_bound(r, 1)],
    }
}

/// `log2` of a rational as `f64`, for display only.
pub fn approx_log2(x: &Rational) -> f64 {
    x.to_f64().map(f64::log2).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    #[test]
    fn exp_lower_bounds() {
        let e = exp_lower(&int(1), 20);
        assert!(e < ratio(27183, 10000) && e > ratio(27182, 10000));
        let big = exp_lower_large(&ratio(9, 7));
        assert!(exact::to_f64(&big) <= (9f64 / 7.0).exp());
        assert!(exact::to_f64(&big) > (9f64 / 7.0).exp() * (1.0 - 1e-12));
        assert_eq!(exp_lower_large(&int(0)), int(1));
        let huge = exp_lower_large(&int(300));
        assert!((approx_log2(&huge) - 300.0 / 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn worked_examples() {
        // k=2, a=2, m=9: 9 < e^{1/2}·8
        assert!(int(9) < exp_lower(&ratio(1, 2), 20) * Rational::from_integer(falling(9, 2)));
        // k=2, m=9: ⌈log2 9⌉ = 4 ≤ log2 8 + 2, i.e. 2^{3} ≤ 8·2
        assert_eq!(prefix_len(9), 4);
        assert!(8 <= binom(8, 1) * 2);
        // h=q=3, n=10: (10/7)^3 < e^{9/7}
        assert!(num::pow(ratio(10, 7), 3) < exp_lower_large(&ratio(9, 7)));
    }

    #[test]
    fn declared_grids_are_clean() {
        let report = check_appendix_bounds(&AppendixRanges::default());
        for s in &report.sweeps {
            assert!(s.checked > 0, "{}", s.name);
            assert!(s.counterexamples.is_empty(), "{}: {:?}", s.name, s.counterexamples);
        }
        assert!(report.clean());
    }

    #[test]
    fn boundary_cases_fail_as_expected() {
        let r = AppendixRanges::default();
        let loose = sweep_power_bound_loose(&r);
        assert_eq!(loose.counterexamples, vec!["k=2, m=4".to_string()]);
        // h = q = 0 makes both sides 1
        let q0 = sweep_trap_bound(&AppendixRanges { n_max: 4, ..r }, 0);
        assert_eq!(q0.counterexamples.len(), 4);
        assert!(q0.counterexamples.iter().all(|c| c.starts_with("h=0, q=0")));
    }
}
