//! Key invalidity, asymmetry and fixing costs for `Sym` and `Par_k` inputs,
//! and the repair maps built from them.

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::bitcore::{binom, colex_rank, colex_unrank, key_of_word, key_part_mismatches, SymString, SystematicCode};
use crate::dists::{dist_from_weighted_support, par_code, par_data_index, par_m_for, sample_map, sym_code, Dist};
use crate::error::param;
use crate::exact::{self, Rational};
use crate::metrics::{map_cost, par_member_with, sym_member_with};
use crate::{Error, Result};

fn check_binary(p: &Dist) -> Result<()> {
    if p.is_binary() {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch(p.alphabet(), 2))
    }
}

/// Expected relative distance of the key part from the codeword of its key.
fn key_invalidity(p: &Dist, code: &SystematicCode) -> Rational {
    let n = exact::int(code.n() as i64);
    p.support()
        .iter()
        .map(|(x, w)| w * exact::int(key_part_mismatches(x, code) as i64))
        .sum::<Rational>()
        / n
}

/// `Pr[κ = a]`, indexed by `a - 1`.
fn key_masses(p: &Dist, m: usize) -> Vec<Rational> {
    let mut mass = vec![Rational::zero(); m];
    for (x, w) in p.support() {
        mass[key_of_word(x, m).index()] += w;
    }
    mass
}

/// Exact quantities of a distribution over `{0,1}^{2m}` against `Sym`.
#[derive(Clone, Debug)]
pub struct SymReport {
    pub m: usize,
    /// `K(P)`.
    pub key_invalidity: Rational,
    /// `I(P)`.
    pub asymmetry: Rational,
    /// `Pr[κ = a]`, indexed by `a - 1`.
    pub key_mass: Vec<Rational>,
    /// `Pr[κ(x) = a ∧ φ_x(b) = 0]`, row-major by `(a-1, b-1)`.
    zero_mass: Vec<Rational>,
}

impl SymReport {
    fn z(&self, a: usize, b: usize) -> &Rational {
        &self.zero_mass[(a - 1) * self.m + (b - 1)]
    }

    pub fn key_prob(&self, a: usize) -> &Rational {
        &self.key_mass[a - 1]
    }

    /// `p_{a,b} = Pr[φ_x(b) = 0 | κ(x) = a]`; `None` when `a` never occurs.
    pub fn p(&self, a: usize, b: usize) -> Option<Rational> {
        let pa = self.key_prob(a);
        (!pa.is_zero()).then(|| self.z(a, b) / pa)
    }

    /// `c_{a,b,v}`: price of setting both `φ(a,b)` and `φ(b,a)` to `v`.
    pub fn fixing_cost(&self, a: usize, b: usize, v: u8) -> Rational {
        let scale = exact::ratio(1, 2 * self.m as i64);
        let (zab, zba) = (self.z(a, b), self.z(b, a));
        let raw = if v == 0 {
            (self.key_prob(a) - zab) + (self.key_prob(b) - zba)
        } else {
            zab + zba
        };
        raw * scale
    }

    /// `c_{a,b}`.
    pub fn cost(&self, a: usize, b: usize) -> Rational {
        self.fixing_cost(a, b, 0).min(self.fixing_cost(a, b, 1))
    }
}

pub fn analyze_sym(p: &Dist) -> Result<SymReport> {
    check_binary(p)?;
    if p.n() % 2 != 0 || p.n() < 2 {
        return Err(param("Sym inputs have length 2m"));
    }
    let m = p.n() / 2;
    let code = sym_code(m)?;
    let key_mass = key_masses(p, m);
    let mut zero_mass = vec![Rational::zero(); m * m];
    for (x, w) in p.support() {
        let a = key_of_word(x, m).index();
        for b in 0..m {
            if x.get(m + b) == 0 {
                zero_mass[a * m + b] += w;
            }
        }
    }
    let mut report = SymReport { m, key_invalidity: key_invalidity(p, &code), asymmetry: Rational::zero(), key_mass, zero_mass };
    // x and y are independent, so the pair expectation factors through the
    // joint masses of (key, data bit)
    let mut asym = Rational::zero();
    for a in 1..=m {
        for b in 1..=m {
            let (zab, zba) = (report.z(a, b), report.z(b, a));
            let (oab, oba) = (report.key_prob(a) - zab, report.key_prob(b) - zba);
            asym += zab * &oba + oab * zba;
        }
    }
    report.asymmetry = asym;
    Ok(report)
}

/// The repaired image `h(P)` and what it cost.
#[derive(Clone, Debug)]
pub struct Repair {
    pub image: Dist,
    /// `d(P, h(P))`, evaluated through the map itself.
    pub cost: Rational,
    /// The right-hand side the cost is compared against.
    pub bound: Rational,
    /// `h(P)` conditioned on keys of mass at least `δ/m`; `None` if no key is that heavy.
    pub pruned: Option<Dist>,
    pub pruned_member: bool,
}

impl Repair {
    pub fn bound_holds(&self) -> bool {
        self.cost <= self.bound
    }

    /// Flat view for reports.
    pub fn summary(&self) -> RepairSummary {
        RepairSummary {
            cost: exact::format(&self.cost),
            bound: exact::format(&self.bound),
            bound_holds: self.bound_holds(),
            pruned_member: self.pruned_member,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RepairSummary {
    pub cost: String,
    pub bound: String,
    pub bound_holds: bool,
    pub pruned_member: bool,
}

fn check_delta(delta: &Rational) -> Result<()> {
    if delta.is_positive() && delta <= &exact::one() {
        Ok(())
    } else {
        Err(param("δ must lie in (0,1]"))
    }
}

fn heavy_keys(mass: &[Rational], delta: &Rational) -> Vec<bool> {
    let m = exact::int(mass.len() as i64);
    let cut = delta / m;
    mass.iter().map(|w| w >= &cut).collect()
}

fn prune(image: &Dist, heavy: &[bool], m: usize) -> Result<Option<Dist>> {
    let kept: Vec<(SymString, Rational)> =
        image.support().iter().filter(|(x, _)| heavy[key_of_word(x, m).index()]).cloned().collect();
    if kept.is_empty() {
        return Ok(None);
    }
    dist_from_weighted_support(kept).map(Some)
}

fn with_key_part(x: &SymString, code: &SystematicCode, data: impl Iterator<Item = u32>) -> SymString {
    let a = key_of_word(x, code.m()).value();
    let mut bits: Vec<u32> = code.codeword_of(a).bits().iter().map(|&b| b as u32).collect();
    bits.extend(data);
    SymString::new(2, bits).expect("binary")
}

/// Rewrites every key part to its codeword and, on pairs of heavy keys,
/// the data cells to the cheaper common value.
pub fn repair_sym(p: &Dist, delta: &Rational) -> Result<Repair> {
    check_delta(delta)?;
    let report = analyze_sym(p)?;
    let m = report.m;
    let code = sym_code(m)?;
    let heavy = heavy_keys(&report.key_mass, delta);
    let mut f = vec![0u32; m * m];
    for a in 1..=m {
        for b in 1..=m {
            f[(a - 1) * m + (b - 1)] = u32::from(report.fixing_cost(a, b, 1) <= report.fixing_cost(a, b, 0));
        }
    }
    let h = |x: &SymString| {
        let a = key_of_word(x, m).index();
        with_key_part(
            x,
            &code,
            (0..m).map(|b| if heavy[a] && heavy[b] { f[a * m + b] } else { x.get(m + b) }),
        )
    };
    let image = sample_map(h, p)?;
    let cost = map_cost(p, h);
    let bound = &report.key_invalidity / exact::int(2) + &report.asymmetry / delta;
    let pruned = prune(&image, &heavy, m)?;
    let pruned_member = match &pruned {
        Some(d) => sym_member_with(&d.strings().collect::<Vec<_>>(), &code),
        None => true,
    };
    Ok(Repair { image, cost, bound, pruned, pruned_member })
}

/// Exact quantities of a distribution over `{0,1}^{2n}` against `Par_k`.
#[derive(Clone, Debug)]
pub struct ParReport {
    pub k: usize,
    pub m: usize,
    /// Code length `binom(m-1, k-1)`.
    pub n: usize,
    /// `K_k(P)`.
    pub key_invalidity: Rational,
    /// `I_k(P)`.
    pub inconsistency: Rational,
    pub key_mass: Vec<Rational>,
    /// `Pr[κ(x) = a_i ∧ Φ_x(A) = 0]` for the `i`-th smallest `a_i ∈ A`,
    /// indexed by the colex rank of `A`.
    zero_mass: Vec<Vec<Rational>>,
}

/// 1-based keys of the set with the given colex rank.
fn set_of_rank(rank: u64, k: usize) -> Vec<usize> {
    colex_unrank(rank, k).into_iter().map(|c| c + 1).collect()
}

impl ParReport {
    pub fn key_prob(&self, a: usize) -> &Rational {
        &self.key_mass[a - 1]
    }

    pub fn sets(&self) -> u64 {
        binom(self.m, self.k)
    }

    /// `p_{A,a}`; `None` when `a` never occurs. `set` is sorted, 1-based.
    pub fn p(&self, set: &[usize], a: usize) -> Option<Rational> {
        let i = set.iter().position(|&b| b == a)?;
        let pa = self.key_prob(a);
        let rank = colex_rank(&set.iter().map(|&b| b - 1).collect::<Vec<_>>()) as usize;
        (!pa.is_zero()).then(|| &self.zero_mass[rank][i] / pa)
    }

    /// `c_{A,s}` for the set of colex rank `rank`; bit `i` of `s` is the value
    /// at the `(i+1)`-th smallest key.
    pub fn fixing_cost(&self, rank: u64, s: u64) -> Rational {
        let set = set_of_rank(rank, self.k);
        let z = &self.zero_mass[rank as usize];
        let raw: Rational = set
            .iter()
            .enumerate()
            .map(|(i, &a)| if (s >> i) & 1 == 1 { z[i].clone() } else { self.key_prob(a) - &z[i] })
            .sum();
        raw / exact::int(2 * self.n as i64)
    }

    /// `(argmin, min)` of `c_{A,s}` over even-weight `s`, ties to the smallest `s`.
    pub fn best_even(&self, rank: u64) -> (u64, Rational) {
        (0..1u64 << self.k)
            .filter(|s| s.count_ones() % 2 == 0)
            .map(|s| (s, self.fixing_cost(rank, s)))
            .fold(None, |best: Option<(u64, Rational)>, (s, c)| match best {
                Some((_, ref b)) if *b <= c => best,
                _ => Some((s, c)),
            })
            .expect("the zero pattern is even")
    }

    /// `c_A`.
    pub fn cost(&self, rank: u64) -> Rational {
        self.best_even(rank).1
    }
}

pub fn analyze_par(p: &Dist, k: usize) -> Result<ParReport> {
    check_binary(p)?;
    if p.n() % 2 != 0 {
        return Err(param("Par_k inputs have length 2·binom(m-1, k-1)"));
    }
    let n = p.n() / 2;
    let m = par_m_for(k, n)?;
    let code = par_code(k, m)?;
    let key_mass = key_masses(p, m);
    let mut zero_mass = vec![vec![Rational::zero(); k]; binom(m, k) as usize];
    // data position j of a key-a string holds Φ(A) for A = (j-th (k-1)-subset of [m]∖{a}) ∪ {a}
    let rests: Vec<Vec<usize>> = (0..n as u64).map(|j| colex_unrank(j, k - 1)).collect();
    for (x, w) in p.support() {
        let a = key_of_word(x, m).value();
        for (j, rest) in rests.iter().enumerate() {
            if x.get(n + j) != 0 {
                continue;
            }
            let mut set: Vec<usize> = rest.iter().map(|&c| if c + 1 < a { c + 1 } else { c + 2 }).collect();
            set.push(a);
            set.sort_unstable();
            debug_assert_eq!(par_data_index(a, &set), j);
            let i = set.iter().position(|&b| b == a).expect("a in set");
            let rank = colex_rank(&set.iter().map(|&b| b - 1).collect::<Vec<_>>()) as usize;
            zero_mass[rank][i] += w;
        }
    }
    let mut report = ParReport {
        k,
        m,
        n,
        key_invalidity: key_invalidity(p, &code),
        inconsistency: Rational::zero(),
        key_mass,
        zero_mass,
    };
    // independent samples: over each set, (even, odd) mass of the joint
    // event "keys are exactly A in a fixed order", then k! orders
    let mut total = Rational::zero();
    for rank in 0..report.sets() {
        let set = set_of_rank(rank, k);
        let (mut even, mut odd) = (Rational::one(), Rational::zero());
        for (i, &a) in set.iter().enumerate() {
            let zero = &report.zero_mass[rank as usize][i];
            let one = report.key_prob(a) - zero;
            let next_even = &even * zero + &odd * &one;
            odd = &even * &one + &odd * zero;
            even = next_even;
        }
        total += odd;
    }
    let orders: i64 = (1..=k as i64).product();
    report.inconsistency = total * exact::int(orders);
    Ok(report)
}

/// Rewrites key parts to codewords and, on sets of heavy keys, the data
/// cells to the cheapest even pattern.
pub fn repair_par(p: &Dist, delta: &Rational, k: usize) -> Result<Repair> {
    check_delta(delta)?;
    let report = analyze_par(p, k)?;
    let (m, n) = (report.m, report.n);
    let code = par_code(k, m)?;
    let heavy = heavy_keys(&report.key_mass, delta);
    let f: Vec<u64> = (0..report.sets()).map(|r| report.best_even(r).0).collect();
    let rests: Vec<Vec<usize>> = (0..n as u64).map(|j| colex_unrank(j, k - 1)).collect();
    let h = |x: &SymString| {
        let a = key_of_word(x, m).value();
        let data = rests.iter().enumerate().map(|(j, rest)| {
            let mut set: Vec<usize> = rest.iter().map(|&c| if c + 1 < a { c + 1 } else { c + 2 }).collect();
            set.push(a);
            set.sort_unstable();
            if set.iter().all(|&b| heavy[b - 1]) {
                let i = set.iter().position(|&b| b == a).expect("a in set");
                let rank = colex_rank(&set.iter().map(|&b| b - 1).collect::<Vec<_>>()) as usize;
                ((f[rank] >> i) & 1) as u32
            } else {
                x.get(n + j)
            }
        });
        with_key_part(x, &code, data)
    };
    let image = sample_map(h, p)?;
    let cost = map_cost(p, h);
    let power = num::pow(delta.recip(), k - 1);
    let bound = &report.key_invalidity / exact::int(2) + exact::int(2) * power * &report.inconsistency;
    let pruned = prune(&image, &heavy, m)?;
    let pruned_member = match &pruned {
        Some(d) => par_member_with(&d.strings().collect::<Vec<_>>(), k, &code),
        None => true,
    };
    Ok(Repair { image, cost, bound, pruned, pruned_member })
}

/// `Pr[X_1 ⊕ … ⊕ X_k = 1]` for independent `X_i` with `Pr[X_i = 1] = p_i`.
pub fn odd_parity_prob(ps: &[Rational]) -> Rational {
    ps.iter().fold(Rational::zero(), |r, p| &r * (exact::one() - p) + (exact::one() - &r) * p)
}

/// Outcome of the even-deviation sweep.
#[derive(Clone, Debug, Serialize)]
pub struct GridReport {
    pub vectors: usize,
    pub counterexamples: Vec<String>,
}

/// Checks `max p_i ≤ Pr[⊕ X_i = 1] ≤ 1/2` for every nondecreasing vector of
/// length `1..=k_max` with entries in `{0, 1/(2g), …, 1/2}`.
pub fn even_deviation_grid(k_max: usize, g: u32) -> GridReport {
    let values: Vec<Rational> = (0..=g).map(|j| exact::ratio(j as i64, 2 * g as i64)).collect();
    let half = exact::ratio(1, 2);
    let mut report = GridReport { vectors: 0, counterexamples: Vec::new() };
    for k in 1..=k_max {
        let mut idx = vec![0usize; k];
        loop {
            let ps: Vec<Rational> = idx.iter().map(|&i| values[i].clone()).collect();
            let r = odd_parity_prob(&ps);
            let max = ps.iter().max().expect("k ≥ 1");
            report.vectors += 1;
            if &r < max || r > half {
                report.counterexamples.push(format!(
                    "p = [{}], Pr[odd] = {}",
                    ps.iter().map(exact::format).collect::<Vec<_>>().join(", "),
                    exact::format(&r)
                ));
            }
            // next nondecreasing index vector
            let mut i = k;
            while i > 0 && idx[i - 1] == g as usize {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            let v = idx[i - 1];
            for slot in &mut idx[i..] {
                *slot = v;
            }
        }
    }
    report
}
