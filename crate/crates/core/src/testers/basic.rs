//! Non-adaptive testers: all-zero, determinism, bounded support.

use std::collections::HashSet;

use rand::Rng;

use super::TesterSpec;
use crate::access::{Session, Verdict};
use crate::Result;

pub(super) fn all_zero(session: &mut Session<'_>, spec: &TesterSpec) -> Result<Verdict> {
    let n = session.n();
    let s = spec.samples();
    let batch: Vec<(usize, usize)> = (0..s).map(|i| (i, session.coins().random_range(0..n))).collect();
    let answers = session.query_batch(&batch)?;
    session.decide(answers.iter().all(|&a| a == 0))
}

/// Sample 1 is the reference `z`; sample `i` is compared with it at `j_i`.
pub(super) fn determinism(session: &mut Session<'_>, spec: &TesterSpec) -> Result<Verdict> {
    let n = session.n();
    let s = spec.samples();
    let js: Vec<usize> = (1..s).map(|_| session.coins().random_range(0..n)).collect();
    let batch: Vec<(usize, usize)> = js.iter().enumerate().flat_map(|(i, &j)| [(0, j), (i + 1, j)]).collect();
    let answers = session.query_batch(&batch)?;
    session.decide(answers.chunks(2).all(|pair| pair[0] == pair[1]))
}

/// Restricts every sample to one shared random set of positions and counts
/// distinct restrictions.
pub(super) fn support_na(session: &mut Session<'_>, spec: &TesterSpec, m: usize) -> Result<Verdict> {
    let n = session.n();
    let s = spec.samples();
    let t = spec.support_positions();
    let js: Vec<usize> = (0..t).map(|_| session.coins().random_range(0..n)).collect();
    let batch: Vec<(usize, usize)> = (0..s).flat_map(|i| js.iter().map(move |&j| (i, j))).collect();
    let answers = session.query_batch(&batch)?;
    let distinct: HashSet<&[u32]> = answers.chunks(t).collect();
    session.decide(distinct.len() <= m)
}

#[cfg(test)]
mod tests {
    use crate::access::ModelSpec;
    use crate::bitcore::SymString;
    use crate::dists::Dist;
    use crate::exact::ratio;
    use crate::testers::{TesterKind, TesterSpec};

    fn unif(strings: &[&str]) -> Dist {
        Dist::uniform(strings.iter().map(|s| SymString::parse(2, s).unwrap()).collect()).unwrap()
    }

    fn accept_rate(kind: TesterKind, eps: (i64, i64), d: &Dist, trials: u64) -> f64 {
        let t = TesterSpec::new(kind, ratio(eps.0, eps.1), d.n()).unwrap().build().unwrap();
        (0..trials).filter(|&seed| t.run(d, seed).unwrap().0.accept).count() as f64 / trials as f64
    }

    #[test]
    fn all_zero_extremes() {
        assert_eq!(accept_rate(TesterKind::AllZero, (1, 3), &unif(&["0000"]), 200), 1.0);
        assert_eq!(accept_rate(TesterKind::AllZero, (1, 3), &unif(&["1111"]), 200), 0.0);
    }

    #[test]
    fn all_zero_uses_one_batch() {
        let d = unif(&["0100"]);
        let t = TesterSpec::new(TesterKind::AllZero, ratio(1, 4), 4).unwrap().build().unwrap();
        let (v, log) = t.run(&d, 3).unwrap();
        assert_eq!(v.queries, 4);
        assert!(crate::access::validate_log(ModelSpec::NonAdaptive, &log, 4, 4).is_ok());
        // a batch is refused when only cursors are allowed
        assert!(t.run_as(&d, ModelSpec::LocallyBounded, 3).is_err());
    }

    #[test]
    fn determinism_cases() {
        assert_eq!(accept_rate(TesterKind::Determinism, (1, 5), &unif(&["0110"]), 200), 1.0);
        let rate = accept_rate(TesterKind::Determinism, (1, 2), &unif(&["0000", "1111"]), 4000);
        assert!((rate - 0.25).abs() < 0.03, "{rate}");
        let t = TesterSpec::new(TesterKind::Determinism, ratio(1, 2), 4).unwrap().build().unwrap();
        assert_eq!(t.run(&unif(&["0000", "1111"]), 0).unwrap().0.queries, 4);
    }

    #[test]
    fn support_na_cases() {
        let d = unif(&["00000000", "11110000"]);
        assert_eq!(accept_rate(TesterKind::SupportNa { m: 2 }, (1, 2), &d, 100), 1.0);
        let far = unif(&["00000000", "11110000", "00001111", "11111111"]);
        let rate = accept_rate(TesterKind::SupportNa { m: 2 }, (1, 4), &far, 300);
        assert!(rate < 0.5, "{rate}");
    }
}
