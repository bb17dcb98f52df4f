//! The sample matrix behind a tester: rows drawn lazily from a seed, every
//! query checked against the session's adaptivity model and recorded.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dists::Dist;
use crate::{Error, Result};

/// Adaptivity regimes, weakest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelSpec {
    NonAdaptive,
    LocallyBounded,
    ForwardOnly,
    WeakMemory(usize),
    StrongMemory(usize),
    FullyAdaptive,
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::NonAdaptive => write!(f, "non-adaptive"),
            ModelSpec::LocallyBounded => write!(f, "locally-bounded"),
            ModelSpec::ForwardOnly => write!(f, "forward-only"),
            ModelSpec::WeakMemory(m) => write!(f, "weak-memory:{m}"),
            ModelSpec::StrongMemory(m) => write!(f, "strong-memory:{m}"),
            ModelSpec::FullyAdaptive => write!(f, "fully-adaptive"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let mem = || -> Result<usize> {
            let v: usize = arg
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Format(format!("model {s:?} needs a memory size")))?;
            if v == 0 {
                return Err(Error::Format("memory size must be positive".into()));
            }
            Ok(v)
        };
        let model = match name {
            "non-adaptive" => ModelSpec::NonAdaptive,
            "locally-bounded" => ModelSpec::LocallyBounded,
            "forward-only" => ModelSpec::ForwardOnly,
            "weak-memory" => ModelSpec::WeakMemory(mem()?),
            "strong-memory" => ModelSpec::StrongMemory(mem()?),
            "fully-adaptive" => ModelSpec::FullyAdaptive,
            _ => return Err(Error::Format(format!("unknown model {s:?}"))),
        };
        if arg.is_some() && !matches!(model, ModelSpec::WeakMemory(_) | ModelSpec::StrongMemory(_)) {
            return Err(Error::Format(format!("model {name} takes no parameter")));
        }
        Ok(model)
    }
}

/// The rule a query or forget broke.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    OutOfRange,
    AfterDecision,
    BatchOnly,
    BatchReused,
    CursorOnly,
    CursorsReused,
    CursorReopened,
    BackwardQuery,
    OutsideWindow,
    Recall,
    OutOfOrder,
    MemoryFull,
    ForgetUnknown,
    ForgetWithoutMemory,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Rule::OutOfRange => "index outside the sample matrix",
            Rule::AfterDecision => "query after the decision",
            Rule::BatchOnly => "queries must be registered in one batch",
            Rule::BatchReused => "only one batch is allowed",
            Rule::CursorOnly => "queries must go through per-sample cursors",
            Rule::CursorsReused => "cursors can be run only once",
            Rule::CursorReopened => "a sealed cursor cannot be reopened",
            Rule::BackwardQuery => "cannot query a sample after querying a later one",
            Rule::OutsideWindow => "sample left the memory window",
            Rule::Recall => "a forgotten sample cannot be recalled",
            Rule::OutOfOrder => "new samples are admitted in order",
            Rule::MemoryFull => "memory is full",
            Rule::ForgetUnknown => "sample is not in memory",
            Rule::ForgetWithoutMemory => "forget is only defined under strong memory",
        };
        f.write_str(text)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{model}: {rule} (sample {sample})")]
pub struct ModelViolation {
    pub model: ModelSpec,
    pub rule: Rule,
    /// 1-based, as in the log format.
    pub sample: usize,
}

/// One log entry; indices are 0-based in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Query { i: usize, j: usize, a: u32 },
    Forget { i: usize },
    Decide { accept: bool },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "t")]
enum WireEvent {
    #[serde(rename = "q")]
    Query { i: usize, j: usize, a: u32 },
    #[serde(rename = "f")]
    Forget { i: usize },
    #[serde(rename = "d")]
    Decide { v: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryLog {
    pub events: Vec<Event>,
}

impl QueryLog {
    pub fn new() -> Self {
        QueryLog::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn queries(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            Event::Query { i, j, a } => Some((i, j, a)),
            _ => None,
        })
    }

    pub fn verdict(&self) -> Option<bool> {
        self.events.iter().find_map(|e| match *e {
            Event::Decide { accept } => Some(accept),
            _ => None,
        })
    }

    /// JSON lines, 1-based indices.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            let wire = match *e {
                Event::Query { i, j, a } => WireEvent::Query { i: i + 1, j: j + 1, a },
                Event::Forget { i } => WireEvent::Forget { i: i + 1 },
                Event::Decide { accept } => WireEvent::Decide { v: if accept { "accept" } else { "reject" }.into() },
            };
            serde_json::to_writer(&mut out, &wire)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<QueryLog> {
        let mut log = QueryLog::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let wire: WireEvent = serde_json::from_str(&line)?;
            let bad = |what: &str| Error::Format(format!("line {}: {what}", n + 1));
            let e = match wire {
                WireEvent::Query { i, j, a } => {
                    if i == 0 || j == 0 {
                        return Err(bad("indices are 1-based"));
                    }
                    Event::Query { i: i - 1, j: j - 1, a }
                }
                WireEvent::Forget { i } => {
                    if i == 0 {
                        return Err(bad("indices are 1-based"));
                    }
                    Event::Forget { i: i - 1 }
                }
                WireEvent::Decide { v } => match v.as_str() {
                    "accept" => Event::Decide { accept: true },
                    "reject" => Event::Decide { accept: false },
                    _ => return Err(bad("verdict must be accept or reject")),
                },
            };
            log.push(e);
        }
        Ok(log)
    }

    pub fn from_jsonl(text: &str) -> Result<QueryLog> {
        QueryLog::read_jsonl(text.as_bytes())
    }
}

/// First offending event of a log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogViolation {
    /// 0-based position in the event list.
    pub index: usize,
    pub rule: Rule,
}

/// Online per-model state, shared by live sessions and [`replay_log`].
#[derive(Clone, Debug)]
struct Guard {
    model: ModelSpec,
    decided: bool,
    // highest sample queried so far
    high: Option<usize>,
    // strong memory
    members: Vec<usize>,
    admitted_upto: usize,
    // locally bounded
    open: Option<usize>,
    sealed: Vec<usize>,
}

impl Guard {
    fn new(model: ModelSpec, s: usize) -> Self {
        let (members, admitted_upto) = match model {
            ModelSpec::StrongMemory(mem) => {
                let k = mem.min(s);
                ((0..k).collect(), k)
            }
            _ => (Vec::new(), 0),
        };
        Guard { model, decided: false, high: None, members, admitted_upto, open: None, sealed: Vec::new() }
    }

    fn violation(&self, rule: Rule, i: usize) -> ModelViolation {
        ModelViolation { model: self.model, rule, sample: i + 1 }
    }

    /// Applies the sample-order rules of the model to a query on sample `i`.
    fn admit_query(&mut self, i: usize) -> std::result::Result<(), ModelViolation> {
        if self.decided {
            return Err(self.violation(Rule::AfterDecision, i));
        }
        match self.model {
            ModelSpec::NonAdaptive | ModelSpec::FullyAdaptive => {}
            ModelSpec::ForwardOnly => {
                if self.high.is_some_and(|h| i < h) {
                    return Err(self.violation(Rule::BackwardQuery, i));
                }
            }
            ModelSpec::WeakMemory(mem) => {
                if self.high.is_some_and(|h| h >= i + mem) {
                    return Err(self.violation(Rule::OutsideWindow, i));
                }
            }
            ModelSpec::StrongMemory(mem) => {
                if !self.members.contains(&i) {
                    if i < self.admitted_upto {
                        return Err(self.violation(Rule::Recall, i));
                    }
                    if i > self.admitted_upto {
                        return Err(self.violation(Rule::OutOfOrder, i));
                    }
                    if self.members.len() >= mem {
                        return Err(self.violation(Rule::MemoryFull, i));
                    }
                    self.members.push(i);
                    self.admitted_upto += 1;
                }
            }
            ModelSpec::LocallyBounded => {
                if self.open != Some(i) {
                    if self.sealed.contains(&i) {
                        return Err(self.violation(Rule::CursorReopened, i));
                    }
                    if let Some(prev) = self.open.replace(i) {
                        self.sealed.push(prev);
                    }
                }
            }
        }
        self.high = Some(self.high.map_or(i, |h| h.max(i)));
        Ok(())
    }

    fn forget(&mut self, i: usize) -> std::result::Result<(), ModelViolation> {
        if self.decided {
            return Err(self.violation(Rule::AfterDecision, i));
        }
        if !matches!(self.model, ModelSpec::StrongMemory(_)) {
            return Err(self.violation(Rule::ForgetWithoutMemory, i));
        }
        match self.members.iter().position(|&x| x == i) {
            Some(pos) => {
                self.members.remove(pos);
                Ok(())
            }
            None => Err(self.violation(Rule::ForgetUnknown, i)),
        }
    }
}

/// Drives the online guard over a recorded log. Non-adaptive logs are treated
/// as one batch and locally-bounded logs as a sequence of cursors.
pub fn replay_log(model: ModelSpec, log: &QueryLog, s: usize, n: usize) -> std::result::Result<(), LogViolation> {
    let mut guard = Guard::new(model, s);
    for (index, e) in log.events.iter().enumerate() {
        let r = match *e {
            Event::Query { i, j, .. } => {
                if i >= s || j >= n {
                    Err(guard.violation(Rule::OutOfRange, i))
                } else {
                    guard.admit_query(i)
                }
            }
            Event::Forget { i } => {
                if i >= s {
                    Err(guard.violation(Rule::OutOfRange, i))
                } else {
                    guard.forget(i)
                }
            }
            Event::Decide { .. } => {
                if guard.decided {
                    Err(guard.violation(Rule::AfterDecision, 0))
                } else {
                    guard.decided = true;
                    Ok(())
                }
            }
        };
        if let Err(v) = r {
            return Err(LogViolation { index, rule: v.rule });
        }
    }
    Ok(())
}

/// Offline re-check of a log against the model's rules, written against the
/// definitions rather than the session's state machine.
pub fn validate_log(model: ModelSpec, log: &QueryLog, s: usize, n: usize) -> std::result::Result<(), LogViolation> {
    const UNSEEN: u8 = 0;
    const HELD: u8 = 1;
    const GONE: u8 = 2;
    let fail = |index, rule| Err(LogViolation { index, rule });

    let mut status = vec![UNSEEN; s];
    let mut held = 0usize;
    let mut next_new = 0usize;
    if let ModelSpec::StrongMemory(mem) = model {
        for st in status.iter_mut().take(mem) {
            *st = HELD;
            held += 1;
            next_new += 1;
        }
    }
    // samples queried so far, in first-touch order, for the cursor rule
    let mut finished = vec![false; s];
    let mut current: Option<usize> = None;
    let mut ancestors_max: Option<usize> = None;
    let mut decided = false;

    for (index, e) in log.events.iter().enumerate() {
        match *e {
            Event::Decide { .. } => {
                if decided {
                    return fail(index, Rule::AfterDecision);
                }
                decided = true;
            }
            Event::Forget { i } => {
                if i >= s {
                    return fail(index, Rule::OutOfRange);
                }
                if decided {
                    return fail(index, Rule::AfterDecision);
                }
                if !matches!(model, ModelSpec::StrongMemory(_)) {
                    return fail(index, Rule::ForgetWithoutMemory);
                }
                if status[i] != HELD {
                    return fail(index, Rule::ForgetUnknown);
                }
                status[i] = GONE;
                held -= 1;
            }
            Event::Query { i, j, .. } => {
                if i >= s || j >= n {
                    return fail(index, Rule::OutOfRange);
                }
                if decided {
                    return fail(index, Rule::AfterDecision);
                }
                match model {
                    ModelSpec::NonAdaptive | ModelSpec::FullyAdaptive => {}
                    ModelSpec::ForwardOnly => {
                        // every ancestor (i', j') must have i' ≤ i
                        if ancestors_max.is_some_and(|a| a > i) {
                            return fail(index, Rule::BackwardQuery);
                        }
                    }
                    ModelSpec::WeakMemory(mem) => {
                        // every ancestor must satisfy i' − mem < i
                        if ancestors_max.is_some_and(|a| a + 1 > i + mem) {
                            return fail(index, Rule::OutsideWindow);
                        }
                    }
                    ModelSpec::StrongMemory(mem) => match status[i] {
                        HELD => {}
                        GONE => return fail(index, Rule::Recall),
                        _ => {
                            if i != next_new {
                                return fail(index, Rule::OutOfOrder);
                            }
                            if held == mem {
                                return fail(index, Rule::MemoryFull);
                            }
                            status[i] = HELD;
                            held += 1;
                            next_new += 1;
                        }
                    },
                    ModelSpec::LocallyBounded => {
                        if current != Some(i) {
                            if finished[i] {
                                return fail(index, Rule::CursorReopened);
                            }
                            if let Some(c) = current {
                                finished[c] = true;
                            }
                            current = Some(i);
                        }
                    }
                }
                ancestors_max = Some(ancestors_max.map_or(i, |a| a.max(i)));
            }
        }
    }
    Ok(())
}

/// Result of a single tester run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accept: bool,
    pub queries: usize,
    pub samples: usize,
}

const CURSOR_STREAM: u64 = 1 << 62;

/// Oracle access to `s` samples of `dist`, fixed by `seed`.
pub struct Session<'d> {
    dist: &'d Dist,
    s: usize,
    model: ModelSpec,
    seed: u64,
    rows: Vec<usize>,
    touched: Vec<bool>,
    samples_touched: usize,
    queries: usize,
    log: QueryLog,
    guard: Guard,
    coins: ChaCha8Rng,
    batch_used: bool,
    cursors_used: bool,
}

const UNDRAWN: usize = usize::MAX;

impl<'d> Session<'d> {
    pub fn open(dist: &'d Dist, s: usize, model: ModelSpec, seed: u64) -> Result<Self> {
        if s == 0 {
            return Err(crate::error::param("a session needs at least one sample"));
        }
        Ok(Session {
            dist,
            s,
            model,
            seed,
            rows: Vec::new(),
            touched: Vec::new(),
            samples_touched: 0,
            queries: 0,
            log: QueryLog::new(),
            guard: Guard::new(model, s),
            coins: ChaCha8Rng::seed_from_u64(seed),
            batch_used: false,
            cursors_used: false,
        })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.dist.n()
    }

    pub fn model(&self) -> ModelSpec {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The tester's own random coins.
    pub fn coins(&mut self) -> &mut ChaCha8Rng {
        &mut self.coins
    }

    /// `(queries, samples touched)`.
    pub fn accounting(&self) -> (usize, usize) {
        (self.queries, self.samples_touched)
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    pub fn into_log(self) -> QueryLog {
        self.log
    }

    /// Support index of row `i`; drawn on first use from stream `i+1`.
    fn row(&mut self, i: usize) -> usize {
        if i >= self.rows.len() {
            self.rows.resize(i + 1, UNDRAWN);
            self.touched.resize(i + 1, false);
        }
        if self.rows[i] == UNDRAWN {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(i as u64 + 1);
            self.rows[i] = self.dist.index_for(rng.next_u64());
        }
        self.rows[i]
    }

    /// The full row, for tests and diagnostics; not an oracle query.
    pub fn peek_row(&mut self, i: usize) -> &'d crate::SymString {
        let r = self.row(i);
        &self.dist.support()[r].0
    }

    fn answer(&mut self, i: usize, j: usize) -> u32 {
        let r = self.row(i);
        let a = self.dist.support()[r].0.get(j);
        if !self.touched[i] {
            self.touched[i] = true;
            self.samples_touched += 1;
        }
        self.queries += 1;
        self.log.push(Event::Query { i, j, a });
        a
    }

    fn in_range(&self, i: usize, j: usize) -> std::result::Result<(), ModelViolation> {
        if i >= self.s || j >= self.n() {
            return Err(self.guard.violation(Rule::OutOfRange, i));
        }
        Ok(())
    }

    /// Query position `j` of sample `i` (0-based).
    pub fn query(&mut self, i: usize, j: usize) -> Result<u32> {
        self.in_range(i, j)?;
        match self.model {
            ModelSpec::NonAdaptive => return Err(self.guard.violation(Rule::BatchOnly, i).into()),
            ModelSpec::LocallyBounded => return Err(self.guard.violation(Rule::CursorOnly, i).into()),
            _ => {}
        }
        self.guard.admit_query(i)?;
        Ok(self.answer(i, j))
    }

    /// Registers every query before any answer is revealed. Under the
    /// non-adaptive model this is the only access path, usable once.
    pub fn query_batch(&mut self, batch: &[(usize, usize)]) -> Result<Vec<u32>> {
        match self.model {
            ModelSpec::NonAdaptive => {
                let first = batch.first().map_or(0, |q| q.0);
                if self.batch_used {
                    return Err(self.guard.violation(Rule::BatchReused, first).into());
                }
                if self.guard.decided {
                    return Err(self.guard.violation(Rule::AfterDecision, first).into());
                }
                for &(i, j) in batch {
                    self.in_range(i, j)?;
                }
                self.batch_used = true;
                Ok(batch.iter().map(|&(i, j)| self.answer(i, j)).collect())
            }
            _ => batch.iter().map(|&(i, j)| self.query(i, j)).collect(),
        }
    }

    pub fn forget(&mut self, i: usize) -> Result<()> {
        if i >= self.s {
            return Err(self.guard.violation(Rule::OutOfRange, i).into());
        }
        self.guard.forget(i)?;
        self.log.push(Event::Forget { i });
        Ok(())
    }

    /// Runs `local` once per sample `0..count`, each run seeing only its own
    /// row through a [`Cursor`]. Results come back together, after every
    /// cursor is sealed.
    pub fn run_local<R, F>(&mut self, count: usize, mut local: F) -> Result<Vec<R>>
    where
        F: FnMut(&mut Cursor<'_, 'd>) -> Result<R>,
    {
        if self.cursors_used {
            return Err(self.guard.violation(Rule::CursorsReused, 0).into());
        }
        if count > self.s {
            return Err(self.guard.violation(Rule::OutOfRange, count - 1).into());
        }
        self.cursors_used = true;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(CURSOR_STREAM + i as u64);
            let mut cursor = Cursor { session: self, i, rng };
            out.push(local(&mut cursor)?);
        }
        Ok(out)
    }

    /// Records the decision and reports the run.
    pub fn decide(&mut self, accept: bool) -> Result<Verdict> {
        if self.guard.decided {
            return Err(self.guard.violation(Rule::AfterDecision, 0).into());
        }
        self.guard.decided = true;
        self.log.push(Event::Decide { accept });
        let (queries, samples) = self.accounting();
        Ok(Verdict { accept, queries, samples })
    }
}

/// Access to a single row inside [`Session::run_local`].
pub struct Cursor<'a, 'd> {
    session: &'a mut Session<'d>,
    i: usize,
    rng: ChaCha8Rng,
}

impl Cursor<'_, '_> {
    pub fn index(&self) -> usize {
        self.i
    }

    pub fn n(&self) -> usize {
        self.session.n()
    }

    /// Coins private to this cursor.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn query(&mut self, j: usize) -> Result<u32> {
        let i = self.i;
        self.session.in_range(i, j)?;
        self.session.guard.admit_query(i)?;
        Ok(self.session.answer(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::SymString;
    use proptest::prelude::*;

    fn bits(s: &str) -> SymString {
        SymString::parse(2, s).unwrap()
    }

    fn uniform(strings: &[&str]) -> Dist {
        Dist::uniform(strings.iter().map(|s| bits(s)).collect()).unwrap()
    }

    fn q(i: usize, j: usize) -> Event {
        Event::Query { i, j, a: 0 }
    }

    fn log(events: Vec<Event>) -> QueryLog {
        QueryLog { events }
    }

    #[test]
    fn model_names_round_trip() {
        for m in [
            ModelSpec::NonAdaptive,
            ModelSpec::LocallyBounded,
            ModelSpec::ForwardOnly,
            ModelSpec::WeakMemory(3),
            ModelSpec::StrongMemory(2),
            ModelSpec::FullyAdaptive,
        ] {
            assert_eq!(m.to_string().parse::<ModelSpec>().unwrap(), m);
        }
        assert!("weak-memory:0".parse::<ModelSpec>().is_err());
        assert!("weak-memory".parse::<ModelSpec>().is_err());
        assert!("forward-only:2".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn same_seed_same_matrix() {
        let d = uniform(&["0000", "0101", "1111", "1000"]);
        let mut a = Session::open(&d, 50, ModelSpec::FullyAdaptive, 9).unwrap();
        let mut b = Session::open(&d, 50, ModelSpec::FullyAdaptive, 9).unwrap();
        let ra: Vec<_> = (0..50).map(|i| a.peek_row(i).clone()).collect();
        let rb: Vec<_> = (0..50).map(|i| b.peek_row(i).clone()).collect();
        assert_eq!(ra, rb);
        // rows drawn out of order agree with rows drawn in order
        let mut c = Session::open(&d, 50, ModelSpec::FullyAdaptive, 9).unwrap();
        assert_eq!(c.peek_row(37), &ra[37]);
    }

    #[test]
    fn point_mass_rows_are_equal() {
        let d = uniform(&["0110"]);
        let mut sess = Session::open(&d, 5, ModelSpec::FullyAdaptive, 1).unwrap();
        for i in 0..5 {
            assert_eq!(sess.peek_row(i), &bits("0110"));
        }
    }

    #[test]
    fn single_sample_session() {
        let d = uniform(&["01"]);
        let mut sess = Session::open(&d, 1, ModelSpec::FullyAdaptive, 0).unwrap();
        assert_eq!(sess.query(0, 1).unwrap(), 1);
        assert!(sess.query(1, 0).is_err());
        assert!(Session::open(&d, 0, ModelSpec::FullyAdaptive, 0).is_err());
    }

    #[test]
    fn accounting_counts() {
        let d = uniform(&["0101"]);
        let mut sess = Session::open(&d, 3, ModelSpec::FullyAdaptive, 0).unwrap();
        assert_eq!(sess.accounting(), (0, 0));
        for j in 0..3 {
            sess.query(1, j).unwrap();
        }
        assert_eq!(sess.accounting(), (3, 1));
    }

    #[test]
    fn forward_only_back_query() {
        let d = uniform(&["0101"]);
        let mut sess = Session::open(&d, 3, ModelSpec::ForwardOnly, 0).unwrap();
        sess.query(0, 0).unwrap();
        sess.query(1, 0).unwrap();
        let err = sess.query(0, 0).unwrap_err();
        match err {
            Error::Model(v) => assert_eq!(v.rule, Rule::BackwardQuery),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn weak_memory_window() {
        let d = uniform(&["0101"]);
        let mut sess = Session::open(&d, 4, ModelSpec::WeakMemory(2), 0).unwrap();
        sess.query(0, 0).unwrap();
        sess.query(2, 0).unwrap();
        sess.query(1, 0).unwrap();

        let mut sess = Session::open(&d, 4, ModelSpec::WeakMemory(2), 0).unwrap();
        sess.query(0, 0).unwrap();
        sess.query(2, 0).unwrap();
        assert!(sess.query(0, 0).is_err());
    }

    #[test]
    fn strong_memory_rules() {
        let d = uniform(&["0101"]);
        let mut sess = Session::open(&d, 4, ModelSpec::StrongMemory(2), 0).unwrap();
        sess.forget(0).unwrap();
        assert!(matches!(sess.query(0, 0), Err(Error::Model(ModelViolation { rule: Rule::Recall, .. }))));

        // memory {1,2}, forget(1), admit 3 → memory {2,3}
        let mut sess = Session::open(&d, 4, ModelSpec::StrongMemory(2), 0).unwrap();
        sess.forget(0).unwrap();
        sess.query(2, 0).unwrap();
        assert_eq!(sess.guard.members, vec![1, 2]);
        assert!(matches!(sess.query(3, 0), Err(Error::Model(ModelViolation { rule: Rule::MemoryFull, .. }))));

        let mut sess = Session::open(&d, 6, ModelSpec::StrongMemory(2), 0).unwrap();
        assert!(sess.forget(4).is_err());
        sess.forget(1).unwrap();
        assert!(sess.forget(1).is_err());
        assert!(matches!(sess.query(3, 0), Err(Error::Model(ModelViolation { rule: Rule::OutOfOrder, .. }))));
    }

    #[test]
    fn forget_needs_strong_memory() {
        let d = uniform(&["0101"]);
        let mut sess = Session::open(&d, 4, ModelSpec::FullyAdaptive, 0).unwrap();
        assert!(sess.forget(0).is_err());
    }

    #[test]
    fn non_adaptive_single_batch() {
        let d = uniform(&["0101"]);
        let mut sess = Session::open(&d, 4, ModelSpec::NonAdaptive, 0).unwrap();
        assert!(sess.query(0, 0).is_err());
        assert_eq!(sess.query_batch(&[(0, 1), (3, 2)]).unwrap(), vec![1, 0]);
        assert!(sess.query_batch(&[(1, 1)]).is_err());
        assert_eq!(sess.accounting(), (2, 2));
    }

    #[test]
    fn locally_bounded_cursors() {
        let d = uniform(&["0101", "1010"]);
        let mut sess = Session::open(&d, 3, ModelSpec::LocallyBounded, 4).unwrap();
        assert!(sess.query(0, 0).is_err());
        let firsts = sess.run_local(3, |c| c.query(0)).unwrap();
        assert_eq!(firsts.len(), 3);
        assert!(sess.run_local(1, |c| c.query(0)).is_err());
        assert!(validate_log(ModelSpec::LocallyBounded, sess.log(), 3, 4).is_ok());
    }

    #[test]
    fn decide_is_last() {
        let d = uniform(&["0101"]);
        let mut sess = Session::open(&d, 2, ModelSpec::FullyAdaptive, 0).unwrap();
        sess.query(0, 0).unwrap();
        let v = sess.decide(true).unwrap();
        assert_eq!(v, Verdict { accept: true, queries: 1, samples: 1 });
        assert!(sess.query(0, 1).is_err());
        assert!(sess.decide(false).is_err());
        assert_eq!(sess.log().verdict(), Some(true));
    }

    #[test]
    fn jsonl_round_trip_is_one_based() {
        let l = log(vec![
            Event::Query { i: 0, j: 2, a: 1 },
            Event::Forget { i: 0 },
            Event::Decide { accept: false },
        ]);
        let text = l.to_jsonl();
        assert!(text.starts_with(r#"{"t":"q","i":1,"j":3,"a":1}"#));
        assert!(text.contains(r#"{"t":"f","i":1}"#));
        assert!(text.contains(r#"{"t":"d","v":"reject"}"#));
        assert_eq!(QueryLog::from_jsonl(&text).unwrap(), l);
        assert!(QueryLog::from_jsonl(r#"{"t":"q","i":0,"j":1,"a":0}"#).is_err());
    }

    #[test]
    fn offline_examples() {
        let fo = log(vec![q(0, 0), q(1, 0), q(0, 0)]);
        assert_eq!(
            validate_log(ModelSpec::ForwardOnly, &fo, 3, 1),
            Err(LogViolation { index: 2, rule: Rule::BackwardQuery })
        );
        let w_ok = log(vec![q(0, 0), q(2, 0), q(1, 0)]);
        assert!(validate_log(ModelSpec::WeakMemory(2), &w_ok, 3, 1).is_ok());
        let w_bad = log(vec![q(0, 0), q(2, 0), q(0, 0)]);
        assert!(validate_log(ModelSpec::WeakMemory(2), &w_bad, 3, 1).is_err());
        let strong = log(vec![Event::Forget { i: 0 }, q(0, 0)]);
        assert_eq!(
            validate_log(ModelSpec::StrongMemory(2), &strong, 3, 1),
            Err(LogViolation { index: 1, rule: Rule::Recall })
        );
        let two_decisions = log(vec![Event::Decide { accept: true }, Event::Decide { accept: true }]);
        assert!(validate_log(ModelSpec::FullyAdaptive, &two_decisions, 1, 1).is_err());
        let local = log(vec![q(0, 0), q(1, 0), q(0, 1)]);
        assert_eq!(
            validate_log(ModelSpec::LocallyBounded, &local, 2, 2),
            Err(LogViolation { index: 2, rule: Rule::CursorReopened })
        );
    }

    fn arb_event(s: usize, n: usize) -> impl Strategy<Value = Event> {
        prop_oneof![
            8 => (0..s + 1, 0..n + 1).prop_map(|(i, j)| Event::Query { i, j, a: 0 }),
            1 => (0..s + 1).prop_map(|i| Event::Forget { i }),
            1 => any::<bool>().prop_map(|accept| Event::Decide { accept }),
        ]
    }

    fn arb_model() -> impl Strategy<Value = ModelSpec> {
        prop_oneof![
            Just(ModelSpec::NonAdaptive),
            Just(ModelSpec::LocallyBounded),
            Just(ModelSpec::ForwardOnly),
            (1usize..4).prop_map(ModelSpec::WeakMemory),
            (1usize..4).prop_map(ModelSpec::StrongMemory),
            Just(ModelSpec::FullyAdaptive),
        ]
    }

    /// Logs that only step forward, with occasional short back-steps.
    fn arb_walk(s: usize) -> impl Strategy<Value = QueryLog> {
        prop::collection::vec((0usize..3, 0usize..4), 0..30).prop_map(move |steps| {
            let mut i = 0usize;
            let mut events = Vec::new();
            for (step, back) in steps {
                i = (i + step).min(s - 1);
                events.push(q(i.saturating_sub(back % 2 * back), 0));
            }
            log(events)
        })
    }

    proptest! {
        #[test]
        fn online_and_offline_agree(model in arb_model(), events in prop::collection::vec(arb_event(6, 3), 0..25)) {
            let l = log(events);
            prop_assert_eq!(replay_log(model, &l, 6, 3), validate_log(model, &l, 6, 3));
        }

        #[test]
        fn forward_only_is_weak_one(l in arb_walk(8)) {
            prop_assert_eq!(
                validate_log(ModelSpec::ForwardOnly, &l, 8, 1).is_ok(),
                validate_log(ModelSpec::WeakMemory(1), &l, 8, 1).is_ok()
            );
        }

        #[test]
        fn weak_memory_is_monotone(l in arb_walk(8), m in 1usize..4) {
            if validate_log(ModelSpec::WeakMemory(m), &l, 8, 1).is_ok() {
                prop_assert!(validate_log(ModelSpec::WeakMemory(m + 1), &l, 8, 1).is_ok());
            }
        }

        #[test]
        fn weak_memory_has_strong_realization(l in arb_walk(8), m in 1usize..4) {
            if validate_log(ModelSpec::WeakMemory(m), &l, 8, 1).is_ok() {
                let strong = weak_to_strong(&l, m);
                prop_assert!(validate_log(ModelSpec::StrongMemory(m), &strong, 8, 1).is_ok(), "{:?}", strong);
            }
        }
    }

    /// Strong-memory version of a weak-memory log: samples are admitted in
    /// order (touching skipped ones) and the oldest is forgotten when full.
    fn weak_to_strong(l: &QueryLog, m: usize) -> QueryLog {
        QueryLog { events: realize(l.events.clone(), m) }
    }

    fn realize(events: Vec<Event>, m: usize) -> Vec<Event> {
        let mut out = Vec::new();
        let mut held: Vec<usize> = (0..m).collect();
        let mut next = m;
        for e in events {
            if let Event::Query { i, .. } = e {
                while next < i {
                    // sample `next` is never queried; admit it by touching it
                    if held.len() == m {
                        let oldest = *held.iter().min().unwrap();
                        held.retain(|&x| x != oldest);
                        out.push(Event::Forget { i: oldest });
                    }
                    out.push(Event::Query { i: next, j: 0, a: 0 });
                    held.push(next);
                    next += 1;
                }
                if i == next {
                    if held.len() == m {
                        let oldest = *held.iter().min().unwrap();
                        held.retain(|&x| x != oldest);
                        out.push(Event::Forget { i: oldest });
                    }
                    held.push(next);
                    next += 1;
                }
                out.push(e);
            }
        }
        out
    }
}
