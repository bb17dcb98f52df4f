//! Bounded support with memory: the strong-memory listing and its
//! forward-only rewrite by speculative queries.
//!
//! Both draw `j_1..j_s` from the coins before touching any sample, so two
//! runs with one seed see the same matrix and the same positions.

use std::collections::HashMap;

use rand::Rng;

use super::TesterSpec;
use crate::access::{Session, Verdict};
use crate::Result;

fn draw_positions(session: &mut Session<'_>, s: usize) -> Vec<usize> {
    let n = session.n();
    (0..s).map(|_| session.coins().random_range(0..n)).collect()
}

/// A stored representative: its sample index and the answers read so far.
struct Rep {
    sample: usize,
    known: HashMap<usize, u32>,
}

impl Rep {
    fn read(&mut self, session: &mut Session<'_>, j: usize) -> Result<u32> {
        if let Some(&a) = self.known.get(&j) {
            return Ok(a);
        }
        let a = session.query(self.sample, j)?;
        self.known.insert(j, a);
        Ok(a)
    }
}

/// Strong `(m+1)`-memory: representatives `z^1..z^c` stay in memory, the
/// current sample `x` is forgotten unless promoted. Answers of stored samples
/// are kept, so each `(z^i, j)` is queried at most once.
pub(crate) fn support_strongmem(session: &mut Session<'_>, spec: &TesterSpec, m: usize) -> Result<Verdict> {
    let s = spec.samples();
    let js = draw_positions(session, s);
    let mut reps: Vec<Rep> = Vec::new();
    let mut big_j: Vec<usize> = Vec::new();
    for (k, &j) in js.iter().enumerate() {
        let mut y_k = Vec::with_capacity(big_j.len());
        for &jj in &big_j {
            y_k.push(session.query(k, jj)?);
        }
        let mut matching = None;
        for (i, rep) in reps.iter_mut().enumerate() {
            let mut same = true;
            for (t, &jj) in big_j.iter().enumerate() {
                if rep.read(session, jj)? != y_k[t] {
                    same = false;
                }
            }
            if same {
                matching = Some(i);
            }
        }
        let x_j = session.query(k, j)?;
        let mut known: HashMap<usize, u32> = big_j.iter().copied().zip(y_k.iter().copied()).collect();
        known.insert(j, x_j);
        let promote = match matching {
            Some(i) => {
                if reps[i].read(session, j)? != x_j {
                    big_j.push(j);
                    true
                } else {
                    false
                }
            }
            None => true,
        };
        if promote {
            reps.push(Rep { sample: k, known });
            if reps.len() > m {
                return session.decide(false);
            }
        } else {
            session.forget(k)?;
        }
    }
    session.decide(true)
}

/// Forward-only: on promotion the current sample is queried at every
/// `j_1..j_s` right away, and later comparisons read the stored rows.
pub(crate) fn support_forward(session: &mut Session<'_>, spec: &TesterSpec, m: usize) -> Result<Verdict> {
    let s = spec.samples();
    let js = draw_positions(session, s);
    // rows[i][t] = M_{i, j_t}
    let mut rows: Vec<Vec<u32>> = Vec::new();
    // A, as indices into js
    let mut a_list: Vec<usize> = Vec::new();
    for k in 0..s {
        let mut x_a = Vec::with_capacity(a_list.len());
        for &t in &a_list {
            x_a.push(session.query(k, js[t])?);
        }
        let found = rows.iter().position(|row| a_list.iter().zip(&x_a).all(|(&t, &v)| row[t] == v));
        let promote = match found {
            Some(i) => {
                let x_j = session.query(k, js[k])?;
                if rows[i][k] != x_j {
                    a_list.push(k);
                    true
                } else {
                    false
                }
            }
            None => true,
        };
        if promote {
            let mut row = Vec::with_capacity(s);
            for &j in &js {
                row.push(session.query(k, j)?);
            }
            rows.push(row);
            if rows.len() > m {
                return session.decide(false);
            }
        }
    }
    session.decide(true)
}
