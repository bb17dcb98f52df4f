//! Locally-bounded tester for split palindromes over the 2-bit pairing
//! `0,1,2,3 ↦ 00,01,10,11`.
//!
//! Each cursor binary-searches the first `{2,3}` symbol, then checks random
//! mirror pairs against that split. Shared positions `p_0..p_s`, drawn before
//! any query, let the decision compare consecutive samples bit by bit.

use rand::Rng;

use super::TesterSpec;
use crate::access::{Cursor, Session, Verdict};
use crate::exact;
use crate::Result;

fn symbol(c: &mut Cursor<'_, '_>, r: usize) -> Result<u32> {
    Ok((c.query(2 * r)? << 1) | c.query(2 * r + 1)?)
}

struct Local {
    ok: bool,
    left: u32,
    right: u32,
}

pub(super) fn cpal_local(session: &mut Session<'_>, spec: &TesterSpec) -> Result<Verdict> {
    let bits = session.n();
    let symbols = bits / 2;
    let s = spec.samples();
    let checks = exact::ceil_usize(&(exact::int(2) * exact::recip(&spec.epsilon)));
    let shared: Vec<usize> = (0..=s).map(|_| session.coins().random_range(0..bits)).collect();
    let results = session.run_local(s, |c| {
        let i = c.index();
        let left = c.query(shared[i])?;
        let right = c.query(shared[i + 1])?;
        let (mut lo, mut hi) = (0, symbols);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if symbol(c, mid)? >= 2 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let t = lo;
        let mut ok = true;
        for _ in 0..checks {
            let r = c.rng().random_range(0..symbols);
            let (mirror, low_half) = if r < t { (t - 1 - r, true) } else { (t + symbols - 1 - r, false) };
            let (u, v) = (symbol(c, r)?, symbol(c, mirror)?);
            if u != v || (u < 2) != low_half {
                ok = false;
                break;
            }
        }
        Ok(Local { ok, left, right })
    })?;
    let chain = results.windows(2).all(|w| w[0].right == w[1].left);
    session.decide(chain && results.iter().all(|r| r.ok))
}
