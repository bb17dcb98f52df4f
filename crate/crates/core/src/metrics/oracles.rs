use std::fmt;
use std::str::FromStr;

use num::Zero;

use crate::bitcore::{colex_subsets, key_of_word, key_valid_word, mismatches, SymString, SystematicCode};
use crate::dists::{cpal_decode, par_code, par_data_index, par_data_len, sym_code, Dist, MapFn};
use crate::exact::{self, Rational};
use crate::{Error, Result};

use super::{dist_to_all_zero, dist_to_cpal, dist_to_cpal_dist, dist_to_support_m};

/// Membership in `Sym` over strings of length `2m`: valid keys, and
/// `φ_x(κ(y)) = φ_y(κ(x))` for every pair of support strings, equal keys included.
pub fn sym_member_with(strings: &[&SymString], code: &SystematicCode) -> bool {
    let m = code.m();
    if !strings.iter().all(|x| x.alphabet() == 2 && x.len() == 2 * m && key_valid_word(*x, code)) {
        return false;
    }
    let keys: Vec<usize> = strings.iter().map(|x| key_of_word(*x, m).value()).collect();
    for (i, x) in strings.iter().enumerate() {
        for (j, y) in strings.iter().enumerate().skip(i + 1) {
            let (a, b) = (keys[i], keys[j]);
            if x.get(m + b - 1) != y.get(m + a - 1) {
                return false;
            }
        }
    }
    true
}

pub fn sym_member(p: &Dist, m: usize) -> Result<bool> {
    if p.n() != 2 * m || !p.is_binary() {
        return Ok(false);
    }
    let code = sym_code(m)?;
    Ok(sym_member_with(&p.strings().collect::<Vec<_>>(), &code))
}

/// Membership in `Par_k`: valid keys and, for every `A` whose keys all appear,
/// a single even-parity pattern across all choices of representatives.
pub fn par_member_with(strings: &[&SymString], k: usize, code: &SystematicCode) -> bool {
    let (m, n) = (code.m(), code.n());
    if !strings.iter().all(|x| x.alphabet() == 2 && x.len() == 2 * n && key_valid_word(*x, code)) {
        return false;
    }
    let mut by_key: Vec<Vec<&SymString>> = vec![Vec::new(); m + 1];
    for x in strings {
        by_key[key_of_word(*x, m).value()].push(x);
    }
    for set in colex_subsets(m, k) {
        let set: Vec<usize> = set.iter().map(|c| c + 1).collect();
        if set.iter().any(|&a| by_key[a].is_empty()) {
            continue;
        }
        let mut parity = 0;
        for &a in &set {
            let pos = n + par_data_index(a, &set);
            let first = by_key[a][0].get(pos);
            if by_key[a].iter().any(|x| x.get(pos) != first) {
                return false;
            }
            parity ^= first;
        }
        if parity == 1 {
            return false;
        }
    }
    true
}

pub fn par_member(p: &Dist, k: usize, m: usize) -> Result<bool> {
    let n = par_data_len(k, m)?;
    if p.n() != 2 * n || !p.is_binary() {
        return Ok(false);
    }
    let code = par_code(k, m)?;
    Ok(par_member_with(&p.strings().collect::<Vec<_>>(), k, &code))
}

/// Membership in `Inv`: support `{f}` or `{f, g}` with `g∘f = id`.
pub fn inv_member(p: &Dist) -> Result<bool> {
    let maps: Vec<MapFn> = p.strings().map(MapFn::from_word).collect::<Result<_>>()?;
    Ok(match maps.as_slice() {
        [_] => true,
        [f, g] => g.after(f) == MapFn::identity(f.n()),
        _ => false,
    })
}

pub const SYM_EXACT_M: usize = 3;
pub const SYM_EXACT_SUPPORT: usize = 3;

/// Exact `d(P, Sym)` by enumerating every map of the support onto key-valid
/// strings and keeping those whose image lies in `Sym`.
pub fn dist_to_sym_exact(p: &Dist, code: &SystematicCode) -> Result<Rational> {
    let m = code.m();
    if m > SYM_EXACT_M || p.support_len() > SYM_EXACT_SUPPORT {
        return Err(Error::Guard(format!(
            "exact Sym distance needs m ≤ {SYM_EXACT_M} and support ≤ {SYM_EXACT_SUPPORT}"
        )));
    }
    if p.n() != 2 * m || !p.is_binary() {
        return Err(Error::LengthMismatch(p.n(), 2 * m));
    }
    // every image must carry a valid key, so candidates are codeword ∥ data
    let mut candidates = Vec::new();
    for a in 1..=m {
        for data in 0..(1u32 << m) {
            let mut bits: Vec<u32> = code.codeword_of(a).bits().iter().map(|&b| b as u32).collect();
            bits.extend((0..m).map(|j| (data >> j) & 1));
            candidates.push(SymString::new(2, bits)?);
        }
    }
    let support = p.support();
    let mut best: Option<Rational> = None;
    let mut choice = vec![0usize; support.len()];
    loop {
        let images: Vec<&SymString> = choice.iter().map(|&c| &candidates[c]).collect();
        if sym_member_with(&images, code) {
            let v: Rational = support
                .iter()
                .zip(&images)
                .map(|((x, w), y)| w * exact::ratio(mismatches(x, *y) as i64, p.n() as i64))
                .sum();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == choice.len() {
                // the all-zero data patterns always form a member
                return Ok(best.expect("some image lies in Sym"));
            }
            choice[i] += 1;
            if choice[i] < candidates.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

pub const INV_EXACT_N: usize = 6;

/// Exact `d(P, Inv)` for functions on `[n]`, `n ≤ 6`: either everything moves
/// to one function, or each string moves to the nearer of `a` and `a⁻¹`.
pub fn dist_to_inv_exact(p: &Dist) -> Result<Rational> {
    let n = p.n();
    if n > INV_EXACT_N {
        return Err(Error::Guard(format!("exact Inv distance needs n ≤ {INV_EXACT_N}")));
    }
    let maps: Vec<(MapFn, &Rational)> = p
        .support()
        .iter()
        .map(|(x, w)| Ok((MapFn::from_word(x)?, w)))
        .collect::<Result<_>>()?;
    let nn = n as i64;
    // single target: coordinatewise weighted majority
    let mut single = Rational::zero();
    for i in 0..n {
        let mut tally: Vec<Rational> = vec![Rational::zero(); n];
        let mut total = Rational::zero();
        for (f, w) in &maps {
            tally[f.apply(i)] += *w;
            total += *w;
        }
        single += total - tally.into_iter().max().expect("n ≥ 1");
    }
    let mut best = single / exact::int(nn);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    loop {
        let a = MapFn::new(perm.clone())?;
        let inv = a.inverse().expect("permutation");
        let cost: Rational = maps
            .iter()
            .map(|(f, w)| {
                let d1 = (0..n).filter(|&i| f.apply(i) != a.apply(i)).count();
                let d2 = (0..n).filter(|&i| f.apply(i) != inv.apply(i)).count();
                *w * exact::ratio(d1.min(d2) as i64, nn)
            })
            .sum();
        if cost < best {
            best = cost;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best)
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// The properties the testers target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    AllZero,
    Determinism,
    Support(usize),
    CPal,
    Inv,
    Sym { m: usize },
    ParK { k: usize, m: usize },
}

impl Property {
    pub fn contains(&self, p: &Dist) -> Result<bool> {
        Ok(match *self {
            Property::AllZero => p.is_binary() && p.support_len() == 1 && p.strings().all(|x| x.symbols().iter().all(|&b| b == 0)),
            Property::Determinism => p.support_len() == 1,
            Property::Support(m) => p.support_len() <= m,
            Property::CPal => {
                p.support_len() == 1
                    && p.is_binary()
                    && p.n() % 2 == 0
                    && dist_to_cpal(&cpal_decode(p.strings().next().expect("nonempty"))?)?.is_zero()
            }
            Property::Inv => inv_member(p)?,
            Property::Sym { m } => sym_member(p, m)?,
            Property::ParK { k, m } => par_member(p, k, m)?,
        })
    }

    /// How [`Property::distance`] obtains its value.
    pub fn distance_method(&self) -> &'static str {
        match self {
            Property::AllZero => "expected weight",
            Property::Determinism | Property::Support(_) => "partition enumeration (support ≤ 12)",
            Property::CPal => "split-point minimization",
            Property::Inv => "exhaustive over [n]→[n] (n ≤ 6)",
            Property::Sym { .. } => "exhaustive maps (m ≤ 3, support ≤ 3)",
            Property::ParK { .. } => "none (constructive upper bound only)",
        }
    }

    /// Exact distance where an oracle exists; guard errors otherwise.
    pub fn distance(&self, p: &Dist) -> Result<Rational> {
        match *self {
            Property::AllZero => dist_to_all_zero(p),
            Property::Determinism => Ok(dist_to_support_m(p, 1)?.0),
            Property::Support(m) => Ok(dist_to_support_m(p, m)?.0),
            Property::CPal => dist_to_cpal_dist(p),
            Property::Inv => dist_to_inv_exact(p),
            Property::Sym { m } => dist_to_sym_exact(p, &sym_code(m)?),
            Property::ParK { .. } => Err(Error::Guard("no exact Par_k oracle".into())),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::AllZero => write!(f, "all-zero"),
            Property::Determinism => write!(f, "determinism"),
            Property::Support(m) => write!(f, "support:{m}"),
            Property::CPal => write!(f, "cpal"),
            Property::Inv => write!(f, "inv"),
            Property::Sym { m } => write!(f, "sym:{m}"),
            Property::ParK { k, m } => write!(f, "par:{k}:{m}"),
        }
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad property {s:?}")))
        };
        Ok(match parts[0] {
            "all-zero" => Property::AllZero,
            "determinism" => Property::Determinism,
            "support" => Property::Support(num(1)?),
            "cpal" => Property::CPal,
            "inv" => Property::Inv,
            "sym" => Property::Sym { m: num(1)? },
            "par" => Property::ParK { k: num(1)?, m: num(2)? },
            _ => return Err(Error::Format(format!("unknown property {s:?}"))),
        })
    }
}
