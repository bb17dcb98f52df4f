//! Distances between distributions and exact distance-to-property oracles.

mod emd;
mod oracles;

use std::collections::BTreeMap;

use num::{BigInt, Integer, One, Signed, Zero};

pub use emd::{emd, PlanEntry, TransferPlan};
pub use oracles::*;

use crate::bitcore::{mismatches, SymString};
use crate::dists::{dist_from_weighted_support, Dist, MapFn, PairFn, SetFn};
use crate::exact::{self, Rational};
use crate::{Error, Result};

/// Half the L1 distance between probability vectors.
pub fn variation(p: &Dist, q: &Dist) -> Result<Rational> {
    p.same_shape(q)?;
    let mut diff: BTreeMap<&SymString, Rational> = BTreeMap::new();
    for (s, w) in p.support() {
        *diff.entry(s).or_insert_with(Rational::zero) += w;
    }
    for (s, w) in q.support() {
        *diff.entry(s).or_insert_with(Rational::zero) -= w;
    }
    let l1: Rational = diff.values().map(|d| d.abs()).sum();
    Ok(l1 / exact::int(2))
}

/// `E[d(x, 0^n)]`.
pub fn dist_to_all_zero(p: &Dist) -> Result<Rational> {
    if !p.is_binary() {
        return Err(Error::AlphabetMismatch(p.alphabet(), 2));
    }
    let n = p.n() as i64;
    Ok(p.support()
        .iter()
        .map(|(x, w)| w * exact::ratio(x.symbols().iter().filter(|&&b| b == 1).count() as i64, n))
        .sum())
}

pub const SUPPORT_GUARD: usize = 12;

/// Integer weights sharing one denominator.
fn common_weights(p: &Dist) -> (Vec<BigInt>, BigInt) {
    let den = p.support().iter().fold(BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
    let ws = p.support().iter().map(|(_, w)| w.numer() * (&den / w.denom())).collect();
    (ws, den)
}

/// Exact distance to the set of distributions with support size at most `m`,
/// plus the witness it is attained at.
pub fn dist_to_support_m(p: &Dist, m: usize) -> Result<(Rational, Dist)> {
    let s = p.support_len();
    if s > SUPPORT_GUARD {
        return Err(Error::Guard(format!("support size {s} exceeds {SUPPORT_GUARD}")));
    }
    if m == 0 {
        return Err(crate::error::param("m must be positive"));
    }
    if s <= m {
        return Ok((exact::zero(), p.clone()));
    }
    let (w, den) = common_weights(p);
    let strings: Vec<&SymString> = p.strings().collect();
    let full = (1usize << s) - 1;
    // per subset: cost and coordinatewise weighted majority
    let mut cost: Vec<BigInt> = vec![BigInt::zero(); full + 1];
    let mut center: Vec<Vec<u32>> = vec![Vec::new(); full + 1];
    for mask in 1..=full {
        let members: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
        let total: BigInt = members.iter().map(|&i| &w[i]).sum();
        let mut c = BigInt::zero();
        let mut z = Vec::with_capacity(p.n());
        for j in 0..p.n() {
            let mut by_symbol: BTreeMap<u32, BigInt> = BTreeMap::new();
            for &i in &members {
                *by_symbol.entry(strings[i].get(j)).or_insert_with(BigInt::zero) += &w[i];
            }
            let (sym, best) = by_symbol
                .iter()
                .fold((0u32, BigInt::from(-1)), |acc, (k, v)| if *v > acc.1 { (*k, v.clone()) } else { acc });
            c += &total - best;
            z.push(sym);
        }
        cost[mask] = c;
        center[mask] = z;
    }
    // best[g][mask]: cheapest split of mask into at most g groups
    let groups = m.min(s);
    let mut best: Vec<Vec<Option<BigInt>>> = vec![vec![None; full + 1]; groups + 1];
    let mut choice: Vec<Vec<usize>> = vec![vec![0; full + 1]; groups + 1];
    best[0][0] = Some(BigInt::zero());
    for g in 1..=groups {
        best[g][0] = Some(BigInt::zero());
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut top: Option<BigInt> = None;
            let mut pick = 0;
            // enumerate submasks of rest, each joined with the low bit
            let mut sub = rest;
            loop {
                let group = sub | low;
                if let Some(prev) = &best[g - 1][mask ^ group] {
                    let v = &cost[group] + prev;
                    if top.as_ref().is_none_or(|t| &v < t) {
                        top = Some(v);
                        pick = group;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            best[g][mask] = top;
            choice[g][mask] = pick;
        }
    }
    let value = best[groups][full].clone().expect("some partition exists");
    let mut entries = Vec::new();
    let (mut g, mut mask) = (groups, full);
    while mask != 0 {
        let group = choice[g][mask];
        let z = SymString::new(p.alphabet(), center[group].clone())?;
        for i in (0..s).filter(|i| group >> i & 1 == 1) {
            entries.push((z.clone(), p.support()[i].1.clone()));
        }
        mask ^= group;
        g -= 1;
    }
    let witness = dist_from_weighted_support(entries)?;
    Ok((Rational::new(value, den * BigInt::from(p.n())), witness))
}

/// Per-pair repair cost under a symbol cost, minimized over the sub-alphabet.
fn cpal_costs<F: Fn(usize, u32) -> Rational>(len: usize, cost: F) -> Rational {
    // cost(i, c): price of turning position i into symbol c
    let pal = |lo: usize, hi: usize, alpha: [u32; 2]| -> Rational {
        let mut total = Rational::zero();
        let (mut a, mut b) = (lo, hi);
        while a + 1 < b {
            let v = alpha.iter().map(|&c| cost(a, c) + cost(b - 1, c)).min().expect("two symbols");
            total += v;
            a += 1;
            b -= 1;
        }
        if a + 1 == b {
            total += alpha.iter().map(|&c| cost(a, c)).min().expect("two symbols");
        }
        total
    };
    (0..=len).map(|t| pal(0, t, [0, 1]) + pal(t, len, [2, 3])).min().expect("at least one split")
}

/// Symbol-level distance from `x ∈ {0,1,2,3}^n` to the split palindromes:
/// a {0,1}-palindrome followed by a {2,3}-palindrome.
pub fn dist_to_cpal(x: &SymString) -> Result<Rational> {
    if x.alphabet() != 4 {
        return Err(Error::AlphabetMismatch(x.alphabet(), 4));
    }
    let total = cpal_costs(x.len(), |i, c| if x.get(i) == c { exact::zero() } else { exact::one() });
    Ok(total / exact::int(x.len() as i64))
}

/// Exact `d(P, CPal)` for a distribution over encoded strings. Members of the
/// property are point masses, so the cost is linear in `P` and still splits
/// into independent mirror pairs.
pub fn dist_to_cpal_dist(p: &Dist) -> Result<Rational> {
    if !p.is_binary() || p.n() % 2 != 0 {
        return Err(crate::error::param("CPal inputs are even-length binary strings"));
    }
    let len = p.n() / 2;
    let words: Vec<(Vec<u32>, &Rational)> = p
        .support()
        .iter()
        .map(|(x, w)| (x.symbols().chunks(2).map(|c| (c[0] << 1) | c[1]).collect(), w))
        .collect();
    let total = cpal_costs(len, |i, c| {
        words
            .iter()
            .map(|(s, w)| *w * exact::int((s[i] ^ c).count_ones() as i64))
            .sum()
    });
    Ok(total / exact::int(p.n() as i64))
}

/// Lower bound on `d(P_{f,g}, Inv)`: `min(d(f,g)/2, d(g∘f, id)/2)`.
pub fn inv_farness_certificate(f: &MapFn, g: &MapFn) -> Result<Rational> {
    if f.n() != g.n() {
        return Err(Error::LengthMismatch(f.n(), g.n()));
    }
    let n = f.n() as i64;
    let fg = (0..f.n()).filter(|&i| f.apply(i) != g.apply(i)).count() as i64;
    let gf = g.after(f);
    let off = (0..f.n()).filter(|&i| gf.apply(i) != i).count() as i64;
    Ok(exact::ratio(fg.min(off), 2 * n))
}

/// Unordered violating pairs over `m²`.
pub fn dist_f_to_sym(f: &PairFn) -> Rational {
    let m = f.m();
    let bad = (1..=m)
        .flat_map(|a| (a + 1..=m).map(move |b| (a, b)))
        .filter(|&(a, b)| f.get(a, b) != f.get(b, a))
        .count();
    exact::ratio(bad as i64, (m * m) as i64)
}

/// Odd sets over `k·binom(m,k)`.
pub fn dist_f_to_par_k(f: &SetFn) -> Rational {
    exact::ratio(f.odd_sets() as i64, (f.k() * f.values().len()) as i64)
}

/// Expected distance when each support string moves to `h(x)`.
pub fn map_cost<F: Fn(&SymString) -> SymString>(p: &Dist, h: F) -> Rational {
    let n = p.n() as i64;
    p.support()
        .iter()
        .map(|(x, w)| w * exact::ratio(mismatches(x, &h(x)) as i64, n))
        .sum()
}
