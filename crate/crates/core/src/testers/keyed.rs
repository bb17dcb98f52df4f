//! Testers that relate several samples: co-inverse pairs (forward-only),
//! symmetric pair functions (weak 2-memory) and parity of k-sets (weak
//! k-memory).

use rand::Rng;

use super::TesterSpec;
use crate::access::{Session, Verdict};
use crate::bitcore::{key_from_prefix, prefix_len, SystematicCode};
use crate::dists::par_data_index;
use crate::Result;

pub(super) fn inv_forward(session: &mut Session<'_>, spec: &TesterSpec) -> Result<Verdict> {
    let n = session.n();
    let s = spec.samples();
    let js: Vec<usize> = (1..s).map(|_| session.coins().random_range(0..n)).collect();
    let ks: Vec<usize> = (1..s).map(|_| session.coins().random_range(0..n)).collect();
    let mut f_j = Vec::with_capacity(s - 1);
    for &j in &js {
        f_j.push(session.query(0, j)?);
    }
    let mut f_k = Vec::with_capacity(s - 1);
    for &k in &ks {
        f_k.push(session.query(0, k)?);
    }
    for i in 1..s {
        let g_j = session.query(i, js[i - 1])?;
        let g_fk = session.query(i, f_k[i - 1] as usize)?;
        if f_j[i - 1] != g_j && g_fk as usize != ks[i - 1] {
            return session.decide(false);
        }
    }
    session.decide(true)
}

fn read_key(session: &mut Session<'_>, i: usize, m: usize) -> Result<usize> {
    let mut prefix = Vec::with_capacity(prefix_len(m));
    for j in 0..prefix_len(m) {
        prefix.push(session.query(i, j)?);
    }
    Ok(key_from_prefix(prefix, m).value())
}

/// Two fresh samples per iteration. Every query of the iteration is made
/// before either check, so each iteration costs exactly `2⌈log2 m⌉ + 4`.
pub(super) fn sym_weak2(session: &mut Session<'_>, code: &SystematicCode, spec: &TesterSpec) -> Result<Verdict> {
    let m = code.m();
    for it in 0..spec.iterations() {
        let (x, y) = (2 * it, 2 * it + 1);
        let a = read_key(session, x, m)?;
        let b = read_key(session, y, m)?;
        let i = session.coins().random_range(0..m);
        let x_i = session.query(x, i)?;
        let y_i = session.query(y, i)?;
        let phi_x = session.query(x, m + b - 1)?;
        let phi_y = session.query(y, m + a - 1)?;
        if x_i != code.codeword_of(a).get(i) as u32 || y_i != code.codeword_of(b).get(i) as u32 {
            return session.decide(false);
        }
        if phi_x != phi_y {
            return session.decide(false);
        }
    }
    session.decide(true)
}

/// `k` fresh samples per iteration; the codeword check position ranges over
/// the whole codeword of length `binom(m-1, k-1)`.
pub(super) fn par_k(session: &mut Session<'_>, code: &SystematicCode, spec: &TesterSpec, k: usize) -> Result<Verdict> {
    let (m, n) = (code.m(), code.n());
    for it in 0..spec.iterations() {
        let first = k * it;
        let mut keys = Vec::with_capacity(k);
        for t in 0..k {
            let a = read_key(session, first + t, m)?;
            let i = session.coins().random_range(0..n);
            if session.query(first + t, i)? != code.codeword_of(a).get(i) as u32 {
                return session.decide(false);
            }
            keys.push(a);
        }
        let mut set = keys.clone();
        set.sort_unstable();
        set.dedup();
        if set.len() == k {
            let mut parity = 0;
            for (t, &a) in keys.iter().enumerate() {
                parity ^= session.query(first + t, n + par_data_index(a, &set))?;
            }
            if parity == 1 {
                return session.decide(false);
            }
        }
    }
    session.decide(true)
}

#[cfg(test)]
mod tests {
    use crate::access::{validate_log, ModelSpec};
    use crate::dists::{par_code, sym_code, u_f_par, u_f_sym, Dist, MapFn, PairFn, SetFn};
    use crate::exact::{ratio, Rational};
    use crate::testers::{TesterKind, TesterSpec};

    fn inv_dist(f: &MapFn, g: &MapFn) -> Dist {
        Dist::uniform(vec![f.to_word(), g.to_word()]).unwrap()
    }

    #[test]
    fn inv_accepts_members() {
        let f = MapFn::new(vec![2, 0, 4, 1, 3]).unwrap();
        let t = TesterSpec::new(TesterKind::InvForward, ratio(1, 2), 5).unwrap().build().unwrap();
        for seed in 0..200 {
            assert!(t.run(&inv_dist(&f, &f.inverse().unwrap()), seed).unwrap().0.accept);
            assert!(t.run(&Dist::point(f.to_word()), seed).unwrap().0.accept);
        }
    }

    /// For a fixed first sample `f` and every later sample `g`, one round
    /// rejects with probability `d(g,f)·d(g∘f, id)`; checked by summing over
    /// all `(j, k)`.
    #[test]
    fn inv_round_probability() {
        let n = 4;
        let maps: Vec<MapFn> = (0..256u32)
            .map(|v| MapFn::new((0..n).map(|i| (v >> (2 * i)) & 3).collect()).unwrap())
            .collect();
        for f in maps.iter().step_by(37) {
            for g in maps.iter().step_by(11) {
                let mut rejects = 0;
                for j in 0..n as usize {
                    for k in 0..n as usize {
                        if f.apply(j) != g.apply(j) && g.apply(f.apply(k)) != k {
                            rejects += 1;
                        }
                    }
                }
                let d_gf = (0..n as usize).filter(|&i| f.apply(i) != g.apply(i)).count();
                let gf = g.after(f);
                let d_id = (0..n as usize).filter(|&i| gf.apply(i) != i).count();
                assert_eq!(ratio(rejects, 16), ratio((d_gf * d_id) as i64, 16));
            }
        }
    }

    fn pattern_pair(m: usize, pattern: impl Fn(usize, usize) -> u8) -> PairFn {
        let mut f = PairFn::new(m, vec![0; m * m]).unwrap();
        for a in 1..=m {
            for b in 1..=m {
                f.set(a, b, pattern(a, b));
            }
        }
        f
    }

    #[test]
    fn sym_counts_and_models() {
        let m = 8;
        let code = sym_code(m).unwrap();
        let eps: Rational = ratio(1, 2);
        let t = TesterSpec::new(TesterKind::SymWeak2, eps, 2 * m).unwrap().build().unwrap();
        let sym = u_f_sym(&pattern_pair(m, |a, b| ((a + b) % 2) as u8), &code).unwrap();
        let s = t.spec().samples();
        let mut forward_invalid = false;
        for seed in 0..100 {
            let (v, log) = t.run(&sym, seed).unwrap();
            assert!(v.accept);
            assert_eq!(v.queries, t.spec().iterations() * (2 * 3 + 4));
            assert!(validate_log(ModelSpec::WeakMemory(2), &log, s, 2 * m).is_ok());
            forward_invalid |= validate_log(ModelSpec::ForwardOnly, &log, s, 2 * m).is_err();
        }
        assert!(forward_invalid);
        // under forward-only the session refuses the back query
        assert!(t.run_as(&sym, ModelSpec::ForwardOnly, 0).is_err());
    }

    #[test]
    fn sym_rejects_anti_symmetric() {
        let m = 16;
        let code = sym_code(m).unwrap();
        let anti = u_f_sym(&pattern_pair(m, |a, b| (a < b) as u8), &code).unwrap();
        let t = TesterSpec::new(TesterKind::SymWeak2, ratio(1, 4), 2 * m).unwrap().build().unwrap();
        let rejects = (0..200).filter(|&seed| !t.run(&anti, seed).unwrap().0.accept).count();
        assert!(rejects > 100, "{rejects}");
    }

    #[test]
    fn par_even_and_odd() {
        let (k, m) = (2, 9);
        let code = par_code(k, m).unwrap();
        let sets = crate::bitcore::binom(m, k) as usize;
        let even = u_f_par(&SetFn::new(m, k, vec![0b11; sets]).unwrap(), &code).unwrap();
        let odd = u_f_par(&SetFn::new(m, k, vec![0b01; sets]).unwrap(), &code).unwrap();
        let n = even.n();
        let t = TesterSpec::new(TesterKind::ParK { k }, ratio(1, 3), n).unwrap().build().unwrap();
        let s = t.spec().samples();
        let mut rejects = 0;
        for seed in 0..200 {
            let (v, log) = t.run(&even, seed).unwrap();
            assert!(v.accept);
            assert!(validate_log(ModelSpec::WeakMemory(k), &log, s, n).is_ok());
            assert!(v.queries <= t.spec().query_budget());
            rejects += !t.run(&odd, seed).unwrap().0.accept as usize;
        }
        assert!(rejects > 100, "{rejects}");
    }
}
