//! Finite distributions with exact probabilities, and the structured
//! constructions built on top of them.

use std::collections::BTreeMap;
use std::path::Path;

use num::{BigInt, One, Signed, ToPrimitive, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bitcore::{binom, colex_rank, colex_subsets, prefix_len, BitString, SymString, SystematicCode};
use crate::error::param;
use crate::exact::{self, Rational};
use crate::{Error, Result};

/// A distribution over equal-length strings. Support is kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dist {
    n: usize,
    alphabet: u32,
    support: Vec<(SymString, Rational)>,
    /// `floor(2^64 · cumulative probability)`; the last entry is `2^64`.
    thresholds: Vec<u128>,
}

impl Dist {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn support(&self) -> &[(SymString, Rational)] {
        &self.support
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn strings(&self) -> impl Iterator<Item = &SymString> {
        self.support.iter().map(|(s, _)| s)
    }

    pub fn prob(&self, x: &SymString) -> Rational {
        match self.support.binary_search_by(|(s, _)| s.cmp(x)) {
            Ok(i) => self.support[i].1.clone(),
            Err(_) => exact::zero(),
        }
    }

    pub fn is_binary(&self) -> bool {
        self.alphabet == 2
    }

    pub fn point(x: SymString) -> Dist {
        dist_from_weighted_support(vec![(x, exact::one())]).expect("point mass is valid")
    }

    pub fn uniform(strings: Vec<SymString>) -> Result<Dist> {
        dist_from_weighted_support(strings.into_iter().map(|s| (s, exact::one())).collect())
    }

    /// Support index selected by a 64-bit uniform draw.
    pub fn index_for(&self, u: u64) -> usize {
        let u = u as u128;
        self.thresholds.partition_point(|&t| t <= u)
    }

    pub fn draw<'a, R: RngCore>(&'a self, rng: &mut R) -> &'a SymString {
        &self.support[self.index_for(rng.next_u64())].0
    }

    /// Same probabilities as [`Dist::n`]-length strings over a new alphabet.
    fn check_same_shape(&self, other: &Dist) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch(self.n, other.n));
        }
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(self.alphabet, other.alphabet));
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Dist) -> Result<()> {
        self.check_same_shape(other)
    }

    pub fn to_file(&self) -> DistFile {
        DistFile {
            n: self.n,
            alphabet_size: self.alphabet,
            support: self
                .support
                .iter()
                .map(|(s, p)| DistEntry {
                    string: s.to_string(),
                    num: p.numer().to_u64().expect("numerator fits u64"),
                    den: p.denom().to_u64().expect("denominator fits u64"),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &DistFile) -> Result<Dist> {
        let mut entries = Vec::with_capacity(file.support.len());
        for e in &file.support {
            let s = SymString::parse(file.alphabet_size, &e.string)?;
            if s.len() != file.n {
                return Err(Error::LengthMismatch(file.n, s.len()));
            }
            if e.den == 0 {
                return Err(Error::Format("zero denominator".into()));
            }
            entries.push((s, Rational::new(BigInt::from(e.num), BigInt::from(e.den))));
        }
        let d = dist_from_weighted_support(entries)?;
        if d.alphabet != file.alphabet_size {
            return Err(Error::AlphabetMismatch(file.alphabet_size, d.alphabet));
        }
        Ok(d)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Dist> {
        let file: DistFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Dist::from_file(&file)
    }
}

/// On-disk form `{n, alphabet_size, support: [{string, num, den}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DistFile {
    pub n: usize,
    pub alphabet_size: u32,
    pub support: Vec<DistEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DistEntry {
    pub string: String,
    pub num: u64,
    pub den: u64,
}

/// Normalizes positive weights into a distribution, merging duplicates.
pub fn dist_from_weighted_support(entries: Vec<(SymString, Rational)>) -> Result<Dist> {
    let first = entries.first().ok_or(Error::EmptySupport)?;
    let (n, alphabet) = (first.0.len(), first.0.alphabet());
    let mut merged: BTreeMap<SymString, Rational> = BTreeMap::new();
    for (s, w) in entries {
        if s.len() != n {
            return Err(Error::LengthMismatch(n, s.len()));
        }
        if s.alphabet() != alphabet {
            return Err(Error::AlphabetMismatch(alphabet, s.alphabet()));
        }
        if !w.is_positive() {
            return Err(Error::NonPositiveWeight);
        }
        *merged.entry(s).or_insert_with(Rational::zero) += w;
    }
    let total: Rational = merged.values().sum();
    let support: Vec<(SymString, Rational)> = merged.into_iter().map(|(s, w)| (s, w / &total)).collect();
    let thresholds = thresholds(&support);
    Ok(Dist { n, alphabet, support, thresholds })
}

fn thresholds(support: &[(SymString, Rational)]) -> Vec<u128> {
    let scale = BigInt::one() << 64;
    let mut cum = Rational::zero();
    let mut out = Vec::with_capacity(support.len());
    for (i, (_, p)) in support.iter().enumerate() {
        cum += p;
        if i + 1 == support.len() {
            out.push(1u128 << 64);
        } else {
            let t: BigInt = (cum.numer() * &scale) / cum.denom();
            out.push(t.to_u128().expect("threshold fits u128"));
        }
    }
    out
}

/// Pushforward of `p` under `f`, merging collisions.
pub fn sample_map<F: Fn(&SymString) -> SymString>(f: F, p: &Dist) -> Result<Dist> {
    dist_from_weighted_support(p.support.iter().map(|(s, w)| (f(s), w.clone())).collect())
}

/// Uniform over `{u, v}`; a point mass when they coincide.
pub fn p_uv(u: &SymString, v: &SymString) -> Result<Dist> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    Dist::uniform(vec![u.clone(), v.clone()])
}

/// Per-symbol code for an alphabet of size `c`, of length `2⌈log2 c⌉`.
pub fn symbol_code(c: u32) -> Result<SystematicCode> {
    let c = c as usize;
    SystematicCode::relaxed(c, 2 * prefix_len(c))
}

/// Replaces every symbol `s` by the codeword of key `s+1`.
pub fn encode_word(x: &SymString, code: &SystematicCode) -> Result<SymString> {
    if x.alphabet() as usize > code.m() {
        return Err(Error::AlphabetMismatch(x.alphabet(), code.m() as u32));
    }
    let mut bits = Vec::with_capacity(x.len() * code.n());
    for &s in x.symbols() {
        bits.extend(code.codeword_of(s as usize + 1).bits().iter().map(|&b| b as u32));
    }
    SymString::new(2, bits)
}

pub fn encode_binary(p: &Dist, code: &SystematicCode) -> Result<Dist> {
    let mut entries = Vec::with_capacity(p.support_len());
    for (s, w) in &p.support {
        entries.push((encode_word(s, code)?, w.clone()));
    }
    dist_from_weighted_support(entries)
}

/// The fixed pairing `0,1,2,3 ↦ 00,01,10,11`.
pub fn cpal_encode(x: &SymString) -> Result<SymString> {
    if x.alphabet() != 4 {
        return Err(Error::AlphabetMismatch(x.alphabet(), 4));
    }
    let bits = x.symbols().iter().flat_map(|&s| [s >> 1, s & 1]).collect();
    SymString::new(2, bits)
}

pub fn cpal_decode(x: &SymString) -> Result<SymString> {
    if x.alphabet() != 2 || x.len() % 2 != 0 {
        return Err(param("cpal decoding needs an even-length binary string"));
    }
    let s = x.symbols().chunks(2).map(|p| (p[0] << 1) | p[1]).collect();
    SymString::new(4, s)
}

/// A function `[n] → [n]`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFn {
    values: Vec<u32>,
}

impl MapFn {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(param("empty function table"));
        }
        if values.iter().any(|&v| v as usize >= n) {
            return Err(param("function value outside [n]"));
        }
        Ok(MapFn { values })
    }

    pub fn identity(n: usize) -> Self {
        MapFn { values: (0..n as u32).collect() }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i] as usize
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.n()];
        self.values.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
    }

    pub fn inverse(&self) -> Option<MapFn> {
        if !self.is_permutation() {
            return None;
        }
        let mut inv = vec![0u32; self.n()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Some(MapFn { values: inv })
    }

    /// `i ↦ self(first(i))`.
    pub fn after(&self, first: &MapFn) -> MapFn {
        MapFn { values: first.values.iter().map(|&v| self.values[v as usize]).collect() }
    }

    pub fn to_word(&self) -> SymString {
        SymString::new(self.n().max(2) as u32, self.values.clone()).expect("values are in range")
    }

    pub fn from_word(x: &SymString) -> Result<MapFn> {
        MapFn::new(x.symbols().to_vec())
    }
}

/// A function `S² → {0,1}` with `S = [m]`, row-major and 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFn {
    m: usize,
    values: Vec<u8>,
}

impl PairFn {
    pub fn new(m: usize, values: Vec<u8>) -> Result<Self> {
        if values.len() != m * m || values.iter().any(|&v| v > 1) {
            return Err(param("pair table must hold m² bits"));
        }
        Ok(PairFn { m, values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `f(a, b)` for 1-based `a, b`.
    pub fn get(&self, a: usize, b: usize) -> u8 {
        self.values[(a - 1) * self.m + (b - 1)]
    }

    pub fn set(&mut self, a: usize, b: usize, v: u8) {
        self.values[(a - 1) * self.m + (b - 1)] = v;
    }
}

/// A function `C(S, k) → {0,1}^k`, indexed by colex rank. Bit `i` of an entry
/// is the value at the `(i+1)`-th smallest element of the set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFn {
    m: usize,
    k: usize,
    values: Vec<u64>,
}

impl SetFn {
    pub fn new(m: usize, k: usize, values: Vec<u64>) -> Result<Self> {
        if k == 0 || k > m || k > 63 {
            return Err(param("set function needs 1 ≤ k ≤ min(m, 63)"));
        }
        if values.len() as u64 != binom(m, k) || values.iter().any(|&v| v >> k != 0) {
            return Err(param("set table must hold binom(m,k) words of k bits"));
        }
        Ok(SetFn { m, k, values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Value for a sorted set of 1-based keys.
    pub fn get(&self, set: &[usize]) -> u64 {
        self.values[rank_of_keys(set) as usize]
    }

    pub fn odd_sets(&self) -> usize {
        self.values.iter().filter(|v| v.count_ones() % 2 == 1).count()
    }
}

/// Which of the three tables a function is.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum FnTable {
    Map { f: MapFn, g: Option<MapFn> },
    Pair(PairFn),
    Sets(SetFn),
}

fn rank_of_keys(set: &[usize]) -> u64 {
    let zero_based: Vec<usize> = set.iter().map(|&a| a - 1).collect();
    colex_rank(&zero_based)
}

/// Code used by `Sym` at key-space size `m`: length `m`.
pub fn sym_code(m: usize) -> Result<SystematicCode> {
    SystematicCode::relaxed(m, m)
}

/// Data length `binom(m-1, k-1)` of `Par_k`.
pub fn par_data_len(k: usize, m: usize) -> Result<usize> {
    if k < 2 || m <= k {
        return Err(param(format!("Par_k needs k ≥ 2 and m > k, got k={k}, m={m}")));
    }
    Ok(binom(m - 1, k - 1) as usize)
}

/// Code used by `Par_k`: `[m] → {0,1}^n` with `n = binom(m-1, k-1)`.
pub fn par_code(k: usize, m: usize) -> Result<SystematicCode> {
    SystematicCode::relaxed(m, par_data_len(k, m)?)
}

/// Recovers `m` from the data length `n = binom(m-1, k-1)`.
pub fn par_m_for(k: usize, n: usize) -> Result<usize> {
    if k < 2 {
        return Err(param("k must be at least 2"));
    }
    let mut m = k + 1;
    loop {
        let v = binom(m - 1, k - 1);
        if v as usize == n {
            return Ok(m);
        }
        if v as usize > n {
            return Err(param(format!("{n} is not binom(m-1, {}) for any m", k - 1)));
        }
        m += 1;
    }
}

/// Offset inside the data half where a string with key `a` stores
/// `Φ(A) = φ(A ∖ {a})`; `set` holds sorted 1-based keys and contains `a`.
pub fn par_data_index(a: usize, set: &[usize]) -> usize {
    let rest: Vec<usize> = set
        .iter()
        .filter(|&&b| b != a)
        .map(|&b| if b < a { b - 1 } else { b - 2 })
        .collect();
    colex_rank(&rest) as usize
}

/// Uniform over `C(a) ∥ ⟨f(a,b) | b ∈ S⟩`.
pub fn u_f_sym(f: &PairFn, code: &SystematicCode) -> Result<Dist> {
    let m = f.m();
    if code.m() != m || code.n() != m {
        return Err(param("Sym needs a code [m] → {0,1}^m"));
    }
    let strings = (1..=m)
        .map(|a| {
            let mut bits: Vec<u32> = code.codeword_of(a).bits().iter().map(|&b| b as u32).collect();
            bits.extend((1..=m).map(|b| f.get(a, b) as u32));
            SymString::new(2, bits).expect("binary")
        })
        .collect();
    Dist::uniform(strings)
}

/// Uniform over `C(a) ∥ ⟨f(B ∪ {a})_{ord(a, B ∪ {a})} | B ∈ C(S∖{a}, k-1)⟩`,
/// with the `B` in colex order.
pub fn u_f_par(f: &SetFn, code: &SystematicCode) -> Result<Dist> {
    let (m, k) = (f.m(), f.k());
    let n = par_data_len(k, m)?;
    if code.m() != m || code.n() != n {
        return Err(param("Par_k needs a code [m] → {0,1}^binom(m-1,k-1)"));
    }
    let strings = (1..=m)
        .map(|a| {
            let mut bits: Vec<u32> = code.codeword_of(a).bits().iter().map(|&b| b as u32).collect();
            for rest in colex_subsets(m - 1, k - 1) {
                // relabel [m-1] back to S ∖ {a}
                let mut set: Vec<usize> = rest.iter().map(|&c| if c + 1 < a { c + 1 } else { c + 2 }).collect();
                set.push(a);
                set.sort_unstable();
                let pos = set.iter().position(|&b| b == a).expect("a is in the set");
                bits.push(((f.get(&set) >> pos) & 1) as u32);
            }
            SymString::new(2, bits).expect("binary")
        })
        .collect();
    Dist::uniform(strings)
}

/// Convenience: a binary string distribution from bit strings.
pub fn binary_dist(entries: Vec<(BitString, Rational)>) -> Result<Dist> {
    dist_from_weighted_support(entries.into_iter().map(|(b, w)| (b.to_sym(), w)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::{key_of_word, key_valid_word, ord};
    use crate::exact::{int, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b(s: &str) -> SymString {
        SymString::parse(2, s).unwrap()
    }

    #[test]
    fn weighted_support_examples() {
        let p = dist_from_weighted_support(vec![(b("00"), int(1))]).unwrap();
        assert_eq!(p.support_len(), 1);
        let q = dist_from_weighted_support(vec![(b("00"), int(1)), (b("11"), int(1))]).unwrap();
        assert_eq!(q.prob(&b("00")), ratio(1, 2));
        let r = dist_from_weighted_support(vec![(b("00"), int(1)), (b("00"), int(1)), (b("11"), int(2))]).unwrap();
        assert_eq!(r.prob(&b("00")), ratio(1, 2));
        assert_eq!(r.prob(&b("11")), ratio(1, 2));
        assert!(dist_from_weighted_support(vec![]).is_err());
        assert!(dist_from_weighted_support(vec![(b("00"), int(0))]).is_err());
        assert!(dist_from_weighted_support(vec![(b("00"), int(1)), (b("0"), int(1))]).is_err());
    }

    #[test]
    fn draws_follow_probabilities() {
        let p = Dist::uniform(vec![b("0000"), b("1111")]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let zeros = (0..10_000).filter(|_| p.draw(&mut rng) == &b("0000")).count();
        assert!((zeros as f64 / 1e4 - 0.5).abs() < 0.02);
        let point = Dist::point(b("0101"));
        assert!((0..100).all(|_| point.draw(&mut rng) == &b("0101")));
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            assert_eq!(p.draw(&mut r1), p.draw(&mut r2));
        }
    }

    #[test]
    fn thresholds_split_the_range() {
        let p = dist_from_weighted_support(vec![(b("00"), int(1)), (b("01"), int(3))]).unwrap();
        assert_eq!(p.index_for(0), 0);
        assert_eq!(p.index_for((1u64 << 62) - 1), 0);
        assert_eq!(p.index_for(1u64 << 62), 1);
        assert_eq!(p.index_for(u64::MAX), 1);
    }

    #[test]
    fn sample_map_examples() {
        let p = Dist::uniform(vec![b("00"), b("01")]).unwrap();
        assert_eq!(sample_map(|x| x.clone(), &p).unwrap(), p);
        assert_eq!(sample_map(|_| b("11"), &p).unwrap(), Dist::point(b("11")));
        let flip = |x: &SymString| {
            let mut s = x.symbols().to_vec();
            s[0] ^= 1;
            SymString::new(2, s).unwrap()
        };
        assert_eq!(sample_map(flip, &p).unwrap(), Dist::uniform(vec![b("10"), b("11")]).unwrap());
    }

    #[test]
    fn symbol_codes_and_encoding() {
        let code = symbol_code(4).unwrap();
        assert_eq!(code.n(), 4);
        let x = SymString::parse(4, "0 3 1").unwrap();
        let p = Dist::point(x.clone());
        let e = encode_binary(&p, &code).unwrap();
        assert_eq!(e.support_len(), 1);
        assert_eq!(e.n(), 12);
        assert_eq!(cpal_encode(&SymString::parse(4, "0 1 2 3").unwrap()).unwrap(), b("00011011"));
        assert_eq!(cpal_decode(&b("00011011")).unwrap(), SymString::parse(4, "0 1 2 3").unwrap());
        assert_eq!(symbol_code(2).unwrap().n(), 2);
    }

    #[test]
    fn p_uv_shapes() {
        assert_eq!(p_uv(&b("01"), &b("01")).unwrap().support_len(), 1);
        assert_eq!(p_uv(&b("01"), &b("10")).unwrap().support_len(), 2);
        assert!(p_uv(&b("01"), &b("1")).is_err());
    }

    #[test]
    fn u_f_sym_shape() {
        let m = 4;
        let code = sym_code(m).unwrap();
        let f = PairFn::new(m, (0..16).map(|i| (i % 3 == 0) as u8).collect()).unwrap();
        let p = u_f_sym(&f, &code).unwrap();
        assert_eq!(p.support_len(), m);
        assert_eq!(p.n(), 2 * m);
        for (x, w) in p.support() {
            assert_eq!(w, &ratio(1, 4));
            assert!(key_valid_word(x, &code));
            let a = key_of_word(x, m).value();
            for bb in 1..=m {
                assert_eq!(x.get(m + bb - 1), f.get(a, bb) as u32);
            }
        }
    }

    #[test]
    fn u_f_par_layout() {
        let (k, m) = (2, 4);
        assert_eq!(par_data_len(k, m).unwrap(), 3);
        let code = SystematicCode::relaxed(m, 3).unwrap();
        let values: Vec<u64> = (0..binom(m, k)).map(|r| r % 4).collect();
        let f = SetFn::new(m, k, values).unwrap();
        let p = u_f_par(&f, &code).unwrap();
        assert_eq!(p.n(), 6);
        assert_eq!(p.support_len(), m);
        // every bit of every f(A) shows up in the string of the matching key
        let mut seen = 0;
        for set in colex_subsets(m, k) {
            let set: Vec<usize> = set.iter().map(|c| c + 1).collect();
            for &a in &set {
                let x = p.strings().find(|x| key_of_word(*x, m).value() == a).unwrap();
                let bit = x.get(3 + par_data_index(a, &set)) as u64;
                let i = ord(a, &set).unwrap() - 1;
                assert_eq!(bit, (f.get(&set) >> i) & 1);
                seen += 1;
            }
        }
        assert_eq!(seen, 6 * 2);
    }

    #[test]
    fn par_index_is_a_bijection_per_key() {
        let (k, m) = (3, 7);
        for a in 1..=m {
            let mut hit = vec![false; binom(m - 1, k - 1) as usize];
            for set in colex_subsets(m, k) {
                let set: Vec<usize> = set.iter().map(|c| c + 1).collect();
                if set.contains(&a) {
                    let i = par_data_index(a, &set);
                    assert!(!hit[i]);
                    hit[i] = true;
                }
            }
            assert!(hit.iter().all(|&h| h));
        }
        assert_eq!(par_m_for(3, 153).unwrap(), 19);
        assert_eq!(par_m_for(2, 8).unwrap(), 9);
        assert!(par_m_for(3, 154).is_err());
    }

    #[test]
    fn map_fn_algebra() {
        let f = MapFn::new(vec![1, 2, 0]).unwrap();
        let inv = f.inverse().unwrap();
        assert_eq!(inv.after(&f), MapFn::identity(3));
        assert!(MapFn::new(vec![0, 0, 1]).unwrap().inverse().is_none());
        assert!(MapFn::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let p = dist_from_weighted_support(vec![(b("0110"), int(1)), (b("1111"), int(2))]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        p.save(&path).unwrap();
        assert_eq!(Dist::load(&path).unwrap(), p);
        let q = Dist::point(SymString::parse(5, "0 4 2").unwrap());
        assert_eq!(Dist::from_file(&q.to_file()).unwrap(), q);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn small_dist() -> impl Strategy<Value = Dist> {
        (1usize..5).prop_flat_map(|n| {
            proptest::collection::vec((proptest::collection::vec(0u32..2, n), 1i64..6), 1..6).prop_map(|entries| {
                dist_from_weighted_support(
                    entries.into_iter().map(|(s, w)| (SymString::new(2, s).unwrap(), exact::int(w))).collect(),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn invariants_hold(p in small_dist()) {
            let total: Rational = p.support().iter().map(|(_, w)| w.clone()).sum();
            prop_assert_eq!(total, exact::one());
            prop_assert!(p.support().iter().all(|(_, w)| w.is_positive()));
            prop_assert!(p.support().windows(2).all(|w| w[0].0 < w[1].0));
        }

        #[test]
        fn sample_map_composes(p in small_dist(), shift in 0usize..4) {
            let f = |x: &SymString| {
                let mut s = x.symbols().to_vec();
                let len = s.len();
                s.rotate_left(shift % len);
                SymString::new(2, s).unwrap()
            };
            let g = |x: &SymString| {
                let mut s = x.symbols().to_vec();
                s[0] = 0;
                SymString::new(2, s).unwrap()
            };
            let both = sample_map(|x| g(&f(x)), &p).unwrap();
            prop_assert_eq!(both, sample_map(g, &sample_map(f, &p).unwrap()).unwrap());
        }

        #[test]
        fn encoding_is_injective(p in small_dist()) {
            let code = symbol_code(2).unwrap();
            let e = encode_binary(&p, &code).unwrap();
            prop_assert_eq!(e.support_len(), p.support_len());
            let mut a: Vec<Rational> = p.support().iter().map(|(_, w)| w.clone()).collect();
            let mut b: Vec<Rational> = e.support().iter().map(|(_, w)| w.clone()).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }
    }
}
