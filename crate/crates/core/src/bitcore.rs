//! Strings, the systematic code, keys and ordinal helpers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::param;
use crate::exact::{self, Rational};
use crate::{Error, Result};

/// A binary word of length at least one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(param("bit string must be non-empty"));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(param(format!("bit value {b} is not 0 or 1")));
        }
        Ok(BitString(bits))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0);
        BitString(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        assert!(n > 0);
        BitString(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u8 {
        self.0[j]
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    pub fn to_sym(&self) -> SymString {
        SymString {
            alphabet: 2,
            symbols: self.0.iter().map(|&b| b as u32).collect(),
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Format(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        BitString::new(bits)
    }
}

/// A word over the alphabet `{0, .., alphabet-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymString {
    alphabet: u32,
    symbols: Vec<u32>,
}

impl SymString {
    pub fn new(alphabet: u32, symbols: Vec<u32>) -> Result<Self> {
        if alphabet < 2 {
            return Err(param("alphabet size must be at least 2"));
        }
        if symbols.is_empty() {
            return Err(param("string must be non-empty"));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(param(format!("symbol {s} outside alphabet of size {alphabet}")));
        }
        Ok(SymString { alphabet, symbols })
    }

    pub fn binary(bits: &[u8]) -> Result<Self> {
        Ok(BitString::new(bits.to_vec())?.to_sym())
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn get(&self, j: usize) -> u32 {
        self.symbols[j]
    }

    pub fn to_bits(&self) -> Result<BitString> {
        if self.alphabet != 2 {
            return Err(Error::AlphabetMismatch(self.alphabet, 2));
        }
        Ok(BitString(self.symbols.iter().map(|&s| s as u8).collect()))
    }

    /// Parses `0101` for binary alphabets and space separated symbols otherwise.
    pub fn parse(alphabet: u32, text: &str) -> Result<Self> {
        // compact digit form for alphabets up to 10, otherwise whitespace-separated
        let symbols = if alphabet <= 10 && !text.trim().contains(char::is_whitespace) {
            text.trim()
                .chars()
                .map(|c| c.to_digit(alphabet).ok_or_else(|| Error::Format(format!("bad symbol {c:?}"))))
                .collect::<Result<Vec<u32>>>()?
        } else {
            text.split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|_| Error::Format(format!("bad symbol {t:?}"))))
                .collect::<Result<Vec<u32>>>()?
        };
        SymString::new(alphabet, symbols)
    }
}

impl fmt::Display for SymString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet == 2 {
            for &s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            f.write_str(&parts.join(" "))
        }
    }
}

/// Anything with a length, an alphabet and positional symbols.
pub trait Word {
    fn word_len(&self) -> usize;
    fn word_alphabet(&self) -> u32;
    fn symbol(&self, j: usize) -> u32;
}

impl Word for BitString {
    fn word_len(&self) -> usize {
        self.len()
    }
    fn word_alphabet(&self) -> u32 {
        2
    }
    fn symbol(&self, j: usize) -> u32 {
        self.0[j] as u32
    }
}

impl Word for SymString {
    fn word_len(&self) -> usize {
        self.len()
    }
    fn word_alphabet(&self) -> u32 {
        self.alphabet
    }
    fn symbol(&self, j: usize) -> u32 {
        self.symbols[j]
    }
}

/// Number of positions where the two words differ (no shape checks).
pub fn mismatches<W: Word>(x: &W, y: &W) -> usize {
    (0..x.word_len().min(y.word_len())).filter(|&j| x.symbol(j) != y.symbol(j)).count()
}

/// Normalized Hamming distance.
pub fn hamming<W: Word>(x: &W, y: &W) -> Result<Rational> {
    if x.word_len() != y.word_len() {
        return Err(Error::LengthMismatch(x.word_len(), y.word_len()));
    }
    if x.word_alphabet() != y.word_alphabet() {
        return Err(Error::AlphabetMismatch(x.word_alphabet(), y.word_alphabet()));
    }
    Ok(exact::ratio(mismatches(x, y) as i64, x.word_len() as i64))
}

/// `⌈log2 m⌉`, with `prefix_len(1) = 0`.
pub fn prefix_len(m: usize) -> usize {
    assert!(m >= 1);
    (usize::BITS - (m - 1).leading_zeros()) as usize
}

/// A key in `[m]`, stored 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key(usize);

impl Key {
    pub fn new(value: usize, m: usize) -> Result<Self> {
        if value == 0 || value > m {
            return Err(param(format!("key {value} outside [1, {m}]")));
        }
        Ok(Key(value))
    }

    pub fn value(self) -> usize {
        self.0
    }

    /// 0-based index of the key.
    pub fn index(self) -> usize {
        self.0 - 1
    }
}

/// Decodes a key from the first `⌈log2 m⌉` bits, most significant first.
/// Prefixes that read as `b ≥ m` wrap around, so every string has a key.
pub fn key_from_prefix<I: IntoIterator<Item = u32>>(prefix: I, m: usize) -> Key {
    let l = prefix_len(m);
    let mut b: u64 = 0;
    for bit in prefix.into_iter().take(l) {
        b = (b << 1) | bit as u64;
    }
    Key((b % m as u64) as usize + 1)
}

pub fn key_of(x: &BitString, m: usize) -> Result<Key> {
    if x.len() < prefix_len(m) {
        return Err(Error::LengthMismatch(x.len(), prefix_len(m)));
    }
    Ok(key_from_prefix(x.bits().iter().map(|&b| b as u32), m))
}

pub(crate) fn key_of_word<W: Word>(x: &W, m: usize) -> Key {
    key_from_prefix((0..prefix_len(m)).map(|j| x.symbol(j)), m)
}

pub fn key_valid(x: &BitString, code: &SystematicCode) -> bool {
    key_valid_word(x, code)
}

pub(crate) fn key_valid_word<W: Word>(x: &W, code: &SystematicCode) -> bool {
    if x.word_len() < code.n() {
        return false;
    }
    let c = code.codeword(key_of_word(x, code.m()));
    (0..code.n()).all(|j| x.symbol(j) == c.get(j) as u32)
}

/// Number of key-part positions where `x` disagrees with the codeword of its own key.
pub(crate) fn key_part_mismatches<W: Word>(x: &W, code: &SystematicCode) -> usize {
    let c = code.codeword(key_of_word(x, code.m()));
    (0..code.n()).filter(|&j| x.symbol(j) != c.get(j) as u32).count()
}

/// Rank of `a` inside the set `set`, counting from 1.
pub fn ord(a: usize, set: &[usize]) -> Result<usize> {
    if !set.contains(&a) {
        return Err(param(format!("{a} is not an element of the set")));
    }
    let mut seen: Vec<usize> = set.to_vec();
    seen.sort_unstable();
    seen.dedup();
    Ok(seen.iter().filter(|&&b| b <= a).count())
}

pub fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// Colexicographic rank of a strictly increasing tuple of 0-based elements.
pub fn colex_rank(sorted: &[usize]) -> u64 {
    sorted.iter().enumerate().map(|(i, &c)| binom(c, i + 1)).sum()
}

/// Inverse of [`colex_rank`] for `r`-element tuples.
pub fn colex_unrank(mut rank: u64, r: usize) -> Vec<usize> {
    let mut out = vec![0; r];
    for i in (0..r).rev() {
        // largest c with binom(c, i+1) <= rank
        let mut c = i;
        while binom(c + 1, i + 1) <= rank {
            c += 1;
        }
        out[i] = c;
        rank -= binom(c, i + 1);
    }
    out
}

/// Distinct 0-based elements of `[m]` with `r` members, in colex order.
pub fn colex_subsets(m: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = binom(m, r);
    (0..total).map(move |rank| colex_unrank(rank, r))
}

/// A binary code `[m] → {0,1}^n` whose first `⌈log2 m⌉` bits spell `a-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystematicCode {
    m: usize,
    n: usize,
    prefix: usize,
    codewords: Vec<BitString>,
}

/// Pairwise checks above this many codewords are skipped.
pub const VERIFY_LIMIT: usize = 4096;

impl SystematicCode {
    /// Builds the parity-padded code for any `m ≥ 1` and `n ≥ ⌈log2 m⌉`,
    /// failing if the verified minimum distance falls below 1/3.
    pub fn relaxed(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(param("code needs m ≥ 1 and n ≥ 1"));
        }
        let l = prefix_len(m);
        if n < l {
            return Err(param(format!("codeword length {n} is shorter than the prefix {l}")));
        }
        let masks = parity_masks(l);
        let codewords = (0..m)
            .map(|v| {
                let mut bits = Vec::with_capacity(n);
                for p in 0..l {
                    bits.push(((v >> (l - 1 - p)) & 1) as u8);
                }
                for j in 0..n - l {
                    let bit = if masks.is_empty() { 0 } else { ((v & masks[j % masks.len()]).count_ones() & 1) as u8 };
                    bits.push(bit);
                }
                BitString(bits)
            })
            .collect();
        let code = SystematicCode { m, n, prefix: l, codewords };
        if m <= VERIFY_LIMIT {
            let d = verify_code_distance(&code);
            if d < exact::ratio(1, 3) {
                return Err(Error::CodeDistance(exact::format(&d)));
            }
        }
        Ok(code)
    }

    /// Wraps arbitrary equal-length codewords without any distance requirement.
    pub fn from_codewords(codewords: Vec<BitString>) -> Result<Self> {
        let first = codewords.first().ok_or(Error::EmptySupport)?;
        let n = first.len();
        if let Some(c) = codewords.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch(n, c.len()));
        }
        let m = codewords.len();
        let prefix = prefix_len(m);
        if n < prefix {
            return Err(param("codewords shorter than the key prefix"));
        }
        Ok(SystematicCode { m, n, prefix, codewords })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `L = ⌈log2 m⌉`.
    pub fn prefix(&self) -> usize {
        self.prefix
    }

    /// Codeword of the 1-based key `a`.
    pub fn codeword(&self, key: Key) -> &BitString {
        &self.codewords[key.index()]
    }

    pub fn codeword_of(&self, a: usize) -> &BitString {
        &self.codewords[a - 1]
    }

    pub fn codewords(&self) -> &[BitString] {
        &self.codewords
    }

    pub fn decode(&self, x: &BitString) -> Result<Key> {
        key_of(x, self.m)
    }

    pub fn descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            m: self.m,
            n: self.n,
            L: self.prefix,
            codewords: self.codewords.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.codewords {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

/// The parity-padding masks, in the order they are used: higher weight first,
/// ascending value within a weight class.
fn parity_masks(l: usize) -> Vec<usize> {
    let mut masks: Vec<usize> = (1..(1usize << l)).collect();
    masks.sort_by_key(|&v| (std::cmp::Reverse(v.count_ones()), v));
    masks
}

/// JSON form `{m, n, L, codewords}`.
#[allow(non_snake_case)]
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CodeDescriptor {
    pub m: usize,
    pub n: usize,
    pub L: usize,
    pub codewords: Vec<String>,
}

pub fn make_systematic_code(m: usize, n: usize) -> Result<SystematicCode> {
    if m < 10 || n < m {
        return Err(param(format!("make_systematic_code needs n ≥ m ≥ 10, got m={m}, n={n}")));
    }
    SystematicCode::relaxed(m, n)
}

/// Exact minimum pairwise distance; 1 for a single codeword.
pub fn verify_code_distance(code: &SystematicCode) -> Rational {
    let cw = code.codewords();
    let mut best = code.n;
    for a in 0..cw.len() {
        for b in a + 1..cw.len() {
            best = best.min(mismatches(&cw[a], &cw[b]));
            if best == 0 {
                return exact::zero();
            }
        }
    }
    exact::ratio(best as i64, code.n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&bs("0101"), &bs("0101")).unwrap(), ratio(0, 1));
        assert_eq!(hamming(&bs("0000"), &bs("1111")).unwrap(), ratio(1, 1));
        assert_eq!(hamming(&bs("0101"), &bs("0111")).unwrap(), ratio(1, 4));
        assert!(hamming(&bs("01"), &bs("011")).is_err());
    }

    #[test]
    fn small_code_matches_hand_listing() {
        let code = SystematicCode::relaxed(4, 3).unwrap();
        let words: Vec<String> = code.codewords().iter().map(|c| c.to_string()).collect();
        assert_eq!(words, ["000", "011", "101", "110"]);
        assert_eq!(verify_code_distance(&code), ratio(2, 3));
    }

    #[test]
    fn code_16() {
        let code = make_systematic_code(16, 16).unwrap();
        assert_eq!(code.codewords().len(), 16);
        assert!(verify_code_distance(&code) >= ratio(1, 3));
        for a in 1..=16 {
            assert_eq!(code.decode(code.codeword_of(a)).unwrap().value(), a);
        }
    }

    #[test]
    fn strict_constructor_rejects_small_parameters() {
        assert!(make_systematic_code(9, 20).is_err());
        assert!(make_systematic_code(20, 19).is_err());
    }

    #[test]
    fn degenerate_codes() {
        let single = SystematicCode::from_codewords(vec![bs("010")]).unwrap();
        assert_eq!(verify_code_distance(&single), ratio(1, 1));
        let dup = SystematicCode::from_codewords(vec![bs("010"), bs("010")]).unwrap();
        assert_eq!(verify_code_distance(&dup), ratio(0, 1));
        let hand = SystematicCode::from_codewords(["000", "011", "101", "110"].map(bs).to_vec()).unwrap();
        assert_eq!(verify_code_distance(&hand), ratio(2, 3));
    }

    #[test]
    fn every_length_used_by_the_experiments_verifies() {
        // Sym uses n = m, Par_k uses n = binom(m-1, k-1).
        for m in 2..=200 {
            SystematicCode::relaxed(m, m).unwrap();
        }
        for m in 10..=40 {
            for n in m..=3 * m {
                make_systematic_code(m, n).unwrap();
            }
        }
        for (k, m) in [(2, 9), (2, 64), (2, 100), (3, 19), (3, 25), (4, 33)] {
            SystematicCode::relaxed(m, binom(m - 1, k - 1) as usize).unwrap();
        }
    }

    #[test]
    fn key_examples() {
        assert_eq!(key_of(&bs("0011"), 4).unwrap().value(), 1);
        assert_eq!(key_of(&bs("0111"), 4).unwrap().value(), 2);
        assert_eq!(key_of(&bs("1100"), 3).unwrap().value(), 1);
        assert_eq!(key_of(&bs("1"), 1).unwrap().value(), 1);
    }

    #[test]
    fn key_validity() {
        let code = make_systematic_code(12, 12).unwrap();
        let c5 = code.codeword_of(5).clone();
        assert!(key_valid(&c5.concat(&bs("1011")), &code));
        let mut flipped = c5.bits().to_vec();
        flipped[code.prefix() + 2] ^= 1;
        assert!(!key_valid(&BitString::new(flipped).unwrap(), &code));
        // prefix says 5 but body belongs to 9
        let mut mixed = code.codeword_of(9).bits().to_vec();
        mixed[..code.prefix()].copy_from_slice(&c5.bits()[..code.prefix()]);
        assert!(!key_valid(&BitString::new(mixed).unwrap(), &code));
    }

    #[test]
    fn ord_examples() {
        assert_eq!(ord(2, &[1, 2, 4]).unwrap(), 2);
        assert_eq!(ord(1, &[1, 2, 3, 4, 5]).unwrap(), 1);
        assert_eq!(ord(4, &[1, 2, 4]).unwrap(), 3);
        assert!(ord(3, &[1, 2, 4]).is_err());
    }

    #[test]
    fn colex_roundtrip() {
        for r in 1..4 {
            let all: Vec<Vec<usize>> = colex_subsets(7, r).collect();
            assert_eq!(all.len() as u64, binom(7, r));
            for (rank, s) in all.iter().enumerate() {
                assert!(s.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(colex_rank(s), rank as u64);
            }
        }
        assert_eq!(colex_unrank(0, 2), vec![0, 1]);
        assert_eq!(colex_unrank(1, 2), vec![0, 2]);
        assert_eq!(colex_unrank(2, 2), vec![1, 2]);
    }

    #[test]
    fn prefix_lengths() {
        assert_eq!(prefix_len(1), 0);
        assert_eq!(prefix_len(2), 1);
        assert_eq!(prefix_len(3), 2);
        assert_eq!(prefix_len(4), 2);
        assert_eq!(prefix_len(9), 4);
        assert_eq!(prefix_len(128), 7);
    }

    #[test]
    fn symstring_text() {
        let s = SymString::parse(4, "0 1 2 3").unwrap();
        assert_eq!(s.to_string(), "0 1 2 3");
        assert!(SymString::parse(3, "0 3").is_err());
        assert_eq!(SymString::parse(2, "0110").unwrap().to_string(), "0110");
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn triple(n: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u8>)> {
        let v = proptest::collection::vec(0u8..2, n);
        (v.clone(), v.clone(), v)
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric((a, b, c) in (1usize..24).prop_flat_map(triple)) {
            let (x, y, z) = (BitString::new(a).unwrap(), BitString::new(b).unwrap(), BitString::new(c).unwrap());
            let dxy = hamming(&x, &y).unwrap();
            prop_assert_eq!(dxy.clone(), hamming(&y, &x).unwrap());
            prop_assert_eq!(dxy == exact::zero(), x == y);
            prop_assert!(dxy <= hamming(&x, &z).unwrap() + hamming(&z, &y).unwrap());
        }

        #[test]
        fn codewords_decode_with_padding(m in 10usize..80, extra in 0usize..20, pad in proptest::collection::vec(0u8..2, 1..8)) {
            let code = make_systematic_code(m, m + extra).unwrap();
            let tail = BitString::new(pad).unwrap();
            for a in 1..=m {
                let x = code.codeword_of(a).concat(&tail);
                prop_assert_eq!(key_of(&x, m).unwrap().value(), a);
                prop_assert!(key_valid(&x, &code));
            }
        }

        #[test]
        fn ord_is_a_bijection(set in proptest::collection::btree_set(0usize..100, 1..20)) {
            let v: Vec<usize> = set.iter().copied().collect();
            let ranks: Vec<usize> = v.iter().map(|&a| ord(a, &v).unwrap()).collect();
            prop_assert_eq!(ranks, (1..=v.len()).collect::<Vec<_>>());
        }
    }
}
