//! Hard-instance families and random in-property inputs for every tester.

use std::fmt;
use std::str::FromStr;

use num::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitcore::{binom, BitString, SymString};
use crate::dists::{cpal_encode, dist_from_weighted_support, par_code, sym_code, u_f_par, u_f_sym, Dist, FnTable, MapFn, PairFn, SetFn};
use crate::error::param;
use crate::exact::{self, Rational};
use crate::metrics::{dist_f_to_par_k, dist_f_to_sym, inv_farness_certificate, Property};
use crate::testers::{TesterKind, TesterSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    InvYes,
    InvNo,
    SymYes,
    SymNo,
    ParYes { k: usize },
    ParNo { k: usize },
}

impl Family {
    pub fn is_yes(&self) -> bool {
        matches!(self, Family::InvYes | Family::SymYes | Family::ParYes { .. })
    }

    /// Property the family is built around, at size `size` (`n` for Inv, `m` otherwise).
    pub fn property(&self, size: usize) -> Property {
        match *self {
            Family::InvYes | Family::InvNo => Property::Inv,
            Family::SymYes | Family::SymNo => Property::Sym { m: size },
            Family::ParYes { k } | Family::ParNo { k } => Property::ParK { k, m: size },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::InvYes => write!(f, "inv-yes"),
            Family::InvNo => write!(f, "inv-no"),
            Family::SymYes => write!(f, "sym-yes"),
            Family::SymNo => write!(f, "sym-no"),
            Family::ParYes { k } => write!(f, "par-yes:{k}"),
            Family::ParNo { k } => write!(f, "par-no:{k}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = |t: &str| -> Result<usize> {
            t.parse().map_err(|_| Error::Format(format!("bad family parameter in {s:?}")))
        };
        Ok(match s.split_once(':') {
            None => match s {
                "inv-yes" => Family::InvYes,
                "inv-no" => Family::InvNo,
                "sym-yes" => Family::SymYes,
                "sym-no" => Family::SymNo,
                _ => return Err(Error::Format(format!("unknown family {s:?}"))),
            },
            Some(("par-yes", t)) => Family::ParYes { k: k(t)? },
            Some(("par-no", t)) => Family::ParNo { k: k(t)? },
            _ => return Err(Error::Format(format!("unknown family {s:?}"))),
        })
    }
}

/// A generated input with the table it came from.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub family: Family,
    /// `n` for the Inv families, `m` for Sym and Par.
    pub size: usize,
    pub dist: Dist,
    pub table: FnTable,
    pub certified_farness: Option<Rational>,
    /// Parameter ranges below the ones the farness guarantees assume.
    pub warnings: Vec<String>,
}

/// JSON summary written next to a generated distribution.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceSummary {
    pub family: String,
    pub size: usize,
    pub n: usize,
    pub support: usize,
    pub certified_farness: Option<String>,
    pub warnings: Vec<String>,
    pub table: FnTable,
}

impl HardInstance {
    pub fn summary(&self) -> InstanceSummary {
        InstanceSummary {
            family: self.family.to_string(),
            size: self.size,
            n: self.dist.n(),
            support: self.dist.support_len(),
            certified_farness: self.certified_farness.as_ref().map(exact::format),
            warnings: self.warnings.clone(),
            table: self.table.clone(),
        }
    }

    fn checked(self) -> Result<Self> {
        if self.family.is_yes() && !self.family.property(self.size).contains(&self.dist)? {
            return Err(param(format!("{} payload is not a member", self.family)));
        }
        Ok(self)
    }
}

/// Dispatches on the family; `size` is `n` for Inv and `m` for Sym/Par.
pub fn generate(family: Family, size: usize, seed: u64) -> Result<HardInstance> {
    match family {
        Family::InvYes | Family::InvNo => gen_inv(family, size, seed),
        Family::SymYes | Family::SymNo => gen_sym(family, size, seed),
        Family::ParYes { k } | Family::ParNo { k } => gen_par(family, k, size, seed),
    }
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> MapFn {
    let mut v: Vec<u32> = (0..n as u32).collect();
    v.shuffle(rng);
    MapFn::new(v).expect("permutation")
}

pub fn gen_inv(family: Family, n: usize, seed: u64) -> Result<HardInstance> {
    if n == 0 {
        return Err(param("n must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_perm(n, &mut rng);
    let (g, cert) = match family {
        Family::InvYes => (f.inverse().expect("permutation"), None),
        Family::InvNo => {
            let g = random_perm(n, &mut rng);
            let c = inv_farness_certificate(&f, &g)?;
            (g, Some(c))
        }
        _ => return Err(param(format!("{family} is not an Inv family"))),
    };
    let dist = Dist::uniform(vec![f.to_word(), g.to_word()])?;
    let mut warnings = Vec::new();
    if n <= 60 {
        warnings.push(format!("n = {n} ≤ 60: the farness guarantee does not apply"));
    }
    HardInstance { family, size: n, dist, table: FnTable::Map { f, g: Some(g) }, certified_farness: cert, warnings }.checked()
}

pub fn gen_sym(family: Family, m: usize, seed: u64) -> Result<HardInstance> {
    if m < 2 {
        return Err(param("Sym instances need m ≥ 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = PairFn::new(m, vec![0; m * m])?;
    let anti = match family {
        Family::SymYes => false,
        Family::SymNo => true,
        _ => return Err(param(format!("{family} is not a Sym family"))),
    };
    for a in 1..=m {
        f.set(a, a, rng.random_range(0..2));
        for b in a + 1..=m {
            let v = rng.random_range(0..2);
            f.set(a, b, v);
            f.set(b, a, if anti { 1 - v } else { v });
        }
    }
    let dist = u_f_sym(&f, &sym_code(m)?)?;
    let cert = anti.then(|| dist_f_to_sym(&f) / exact::int(6));
    let mut warnings = Vec::new();
    if m < 10 {
        warnings.push(format!("m = {m} < 10: below the lower-bound construction's range"));
    }
    HardInstance { family, size: m, dist, table: FnTable::Pair(f), certified_farness: cert, warnings }.checked()
}

pub fn gen_par(family: Family, k: usize, m: usize, seed: u64) -> Result<HardInstance> {
    let odd = match family {
        Family::ParYes { k: fk } if fk == k => 0,
        Family::ParNo { k: fk } if fk == k => 1,
        _ => return Err(param(format!("{family} is not a Par family with k = {k}"))),
    };
    let code = par_code(k, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<u64> = (0..binom(m, k))
        .map(|_| {
            let low: u64 = rng.random_range(0..1u64 << (k - 1));
            let last = (low.count_ones() as u64 + odd) & 1;
            low | (last << (k - 1))
        })
        .collect();
    let f = SetFn::new(m, k, values)?;
    let dist = u_f_par(&f, &code)?;
    let cert = (odd == 1).then(|| dist_f_to_par_k(&f) / exact::int(6));
    let mut warnings = Vec::new();
    if m <= 2 * k * k {
        warnings.push(format!("m = {m} ≤ 2k² = {}: below the analysed range", 2 * k * k));
    }
    HardInstance { family, size: m, dist, table: FnTable::Sets(f), certified_farness: cert, warnings }.checked()
}

/// A random split palindrome over `{0,1,2,3}` of `len` symbols.
pub fn random_cpal_word(len: usize, rng: &mut impl Rng) -> SymString {
    let t = rng.random_range(0..=len);
    let mut s = vec![0u32; len];
    for i in 0..t.div_ceil(2) {
        let v = rng.random_range(0..2);
        s[i] = v;
        s[t - 1 - i] = v;
    }
    let rest = len - t;
    for i in 0..rest.div_ceil(2) {
        let v = 2 + rng.random_range(0..2);
        s[t + i] = v;
        s[len - 1 - i] = v;
    }
    SymString::new(4, s).expect("symbols below 4")
}

fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> SymString {
    SymString::new(2, (0..n).map(|_| rng.random_range(0..2)).collect()).expect("binary")
}

/// Keeps a random nonempty subset of `d`'s support with random weights in `1..=9`.
fn reweigh_subset(d: &Dist, rng: &mut ChaCha8Rng) -> Result<Dist> {
    let keep = rng.random_range(1..=d.support_len());
    let mut strings: Vec<&SymString> = d.strings().collect();
    strings.shuffle(rng);
    dist_from_weighted_support(
        strings[..keep].iter().map(|&x| (x.clone(), exact::int(rng.random_range(1..10)))).collect(),
    )
}

/// A random member of the tester's property, shaped for `spec`.
pub fn random_member(spec: &TesterSpec, seed: u64) -> Result<Dist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n;
    match spec.kind {
        TesterKind::AllZero => Ok(Dist::point(BitString::zeros(n).to_sym())),
        TesterKind::Determinism => Ok(Dist::point(random_bits(n, &mut rng))),
        TesterKind::SupportNa { m } | TesterKind::SupportStrongMem { m } | TesterKind::SupportForward { m } => {
            let size = rng.random_range(1..=m);
            dist_from_weighted_support((0..size).map(|_| (random_bits(n, &mut rng), exact::int(rng.random_range(1..10)))).collect())
        }
        TesterKind::InvForward => {
            let inst = gen_inv(Family::InvYes, n, rng.random())?;
            // half the time a lone function, also a member
            if rng.random_bool(0.5) {
                Ok(Dist::point(inst.dist.strings().next().expect("nonempty").clone()))
            } else {
                Ok(inst.dist)
            }
        }
        TesterKind::SymWeak2 => reweigh_subset(&gen_sym(Family::SymYes, n / 2, rng.random())?.dist, &mut rng),
        TesterKind::ParK { k } => {
            let m = crate::dists::par_m_for(k, n / 2)?;
            reweigh_subset(&gen_par(Family::ParYes { k }, k, m, rng.random())?.dist, &mut rng)
        }
        TesterKind::CpalLocal => Ok(Dist::point(cpal_encode(&random_cpal_word(n / 2, &mut rng))?)),
    }
}

/// Mixes `d` with noisy copies: each support string spawns up to `copies`
/// variants with `flips` random bit flips, all with random weights. Used to
/// feed the repair analysis inputs with invalid keys and inconsistent data.
pub fn perturb(d: &Dist, copies: usize, flips: usize, seed: u64) -> Result<Dist> {
    if !d.is_binary() {
        return Err(Error::AlphabetMismatch(d.alphabet(), 2));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for (x, w) in d.support() {
        if w.is_zero() {
            continue;
        }
        entries.push((x.clone(), exact::int(rng.random_range(1..10))));
        for _ in 0..rng.random_range(0..=copies) {
            let mut bits = x.symbols().to_vec();
            for _ in 0..flips {
                let j = rng.random_range(0..bits.len());
                bits[j] ^= 1;
            }
            entries.push((SymString::new(2, bits)?, exact::int(rng.random_range(1..10))));
        }
    }
    dist_from_weighted_support(entries)
}
