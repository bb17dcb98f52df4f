//! Testers for the properties of the hierarchy, each bound to the access
//! model it is written for.

mod basic;
mod cpal;
mod keyed;
mod support;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::access::{ModelSpec, QueryLog, Session, Verdict};
use crate::bitcore::{prefix_len, SystematicCode};
use crate::dists::{par_code, par_data_len, par_m_for, sym_code, Dist};
use crate::exact::{self, Rational};
use crate::metrics::Property;
use crate::{Error, Result};

use support::{support_forward, support_strongmem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TesterKind {
    AllZero,
    Determinism,
    SupportNa { m: usize },
    SupportStrongMem { m: usize },
    SupportForward { m: usize },
    InvForward,
    SymWeak2,
    ParK { k: usize },
    CpalLocal,
}

impl TesterKind {
    pub const NAMES: [&'static str; 9] = [
        "all-zero",
        "determinism",
        "support-na:M",
        "support-strongmem:M",
        "support-forward:M",
        "inv-forward",
        "sym-weak2",
        "par-k:K",
        "cpal-local",
    ];
}

impl fmt::Display for TesterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TesterKind::AllZero => write!(f, "all-zero"),
            TesterKind::Determinism => write!(f, "determinism"),
            TesterKind::SupportNa { m } => write!(f, "support-na:{m}"),
            TesterKind::SupportStrongMem { m } => write!(f, "support-strongmem:{m}"),
            TesterKind::SupportForward { m } => write!(f, "support-forward:{m}"),
            TesterKind::InvForward => write!(f, "inv-forward"),
            TesterKind::SymWeak2 => write!(f, "sym-weak2"),
            TesterKind::ParK { k } => write!(f, "par-k:{k}"),
            TesterKind::CpalLocal => write!(f, "cpal-local"),
        }
    }
}

impl FromStr for TesterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let num = || -> Result<usize> {
            match arg.and_then(|t| t.parse::<usize>().ok()) {
                Some(v) if v > 0 => Ok(v),
                _ => Err(Error::Format(format!("tester {name} needs a positive parameter, e.g. {name}:2"))),
            }
        };
        let kind = match name {
            "all-zero" => TesterKind::AllZero,
            "determinism" => TesterKind::Determinism,
            "support-na" => TesterKind::SupportNa { m: num()? },
            "support-strongmem" => TesterKind::SupportStrongMem { m: num()? },
            "support-forward" => TesterKind::SupportForward { m: num()? },
            "inv-forward" => TesterKind::InvForward,
            "sym-weak2" => TesterKind::SymWeak2,
            "par-k" => TesterKind::ParK { k: num()? },
            "cpal-local" => TesterKind::CpalLocal,
            _ => return Err(Error::Format(format!("unknown tester {s:?}; known: {}", TesterKind::NAMES.join(", ")))),
        };
        let takes_arg = matches!(
            kind,
            TesterKind::SupportNa { .. } | TesterKind::SupportStrongMem { .. } | TesterKind::SupportForward { .. } | TesterKind::ParK { .. }
        );
        if arg.is_some() && !takes_arg {
            return Err(Error::Format(format!("tester {name} takes no parameter")));
        }
        Ok(kind)
    }
}

/// A tester with its proximity parameter and input length fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TesterSpec {
    pub kind: TesterKind,
    pub epsilon: Rational,
    /// Length of the input strings.
    pub n: usize,
}

/// Closed-form resources of a spec.
#[derive(Clone, Debug, Serialize)]
pub struct Budget {
    pub samples: usize,
    pub queries: usize,
}

impl TesterSpec {
    pub fn new(kind: TesterKind, epsilon: Rational, n: usize) -> Result<Self> {
        exact::check_epsilon(&epsilon)?;
        if n == 0 {
            return Err(crate::error::param("input length must be positive"));
        }
        let spec = TesterSpec { kind, epsilon, n };
        match kind {
            TesterKind::SymWeak2 if n % 2 != 0 || n < 4 => {
                return Err(crate::error::param("sym-weak2 needs inputs of length 2m with m ≥ 2"))
            }
            TesterKind::CpalLocal if n % 2 != 0 => return Err(crate::error::param("cpal-local needs even-length inputs")),
            TesterKind::ParK { k } => {
                if k < 2 {
                    return Err(crate::error::param("par-k needs k ≥ 2"));
                }
                if n % 2 != 0 {
                    return Err(crate::error::param("par-k inputs have length 2·binom(m-1, k-1)"));
                }
                par_m_for(k, n / 2)?;
            }
            _ => {}
        }
        Ok(spec)
    }

    pub fn required_model(&self) -> ModelSpec {
        match self.kind {
            TesterKind::AllZero | TesterKind::Determinism | TesterKind::SupportNa { .. } => ModelSpec::NonAdaptive,
            TesterKind::SupportStrongMem { m } => ModelSpec::StrongMemory(m + 1),
            TesterKind::SupportForward { .. } | TesterKind::InvForward => ModelSpec::ForwardOnly,
            TesterKind::SymWeak2 => ModelSpec::WeakMemory(2),
            TesterKind::ParK { k } => ModelSpec::WeakMemory(k),
            TesterKind::CpalLocal => ModelSpec::LocallyBounded,
        }
    }

    /// The `m` the key code is built for (Sym, Par_k).
    pub fn key_range(&self) -> Option<usize> {
        match self.kind {
            TesterKind::SymWeak2 => Some(self.n / 2),
            TesterKind::ParK { k } => par_m_for(k, self.n / 2).ok(),
            _ => None,
        }
    }

    pub fn property(&self) -> Property {
        match self.kind {
            TesterKind::AllZero => Property::AllZero,
            TesterKind::Determinism => Property::Determinism,
            TesterKind::SupportNa { m } | TesterKind::SupportStrongMem { m } | TesterKind::SupportForward { m } => {
                Property::Support(m)
            }
            TesterKind::InvForward => Property::Inv,
            TesterKind::SymWeak2 => Property::Sym { m: self.n / 2 },
            TesterKind::ParK { k } => Property::ParK { k, m: self.key_range().expect("checked in new") },
            TesterKind::CpalLocal => Property::CPal,
        }
    }

    fn eps_inv(&self) -> Rational {
        exact::recip(&self.epsilon)
    }

    fn eps_pow_inv(&self, k: usize) -> Rational {
        (0..k).fold(exact::one(), |acc, _| acc * self.eps_inv())
    }

    /// Iterations of the keyed testers.
    pub fn iterations(&self) -> usize {
        match self.kind {
            TesterKind::SymWeak2 => exact::ceil_usize(&(exact::int(8) * self.eps_pow_inv(2))),
            TesterKind::ParK { k } => exact::ceil_usize(&(exact::int(4 * k as i64) * self.eps_pow_inv(k))),
            _ => 1,
        }
    }

    /// `t = ⌈4ε⁻¹(ln m + 2)⌉` positions of the non-adaptive support test.
    pub fn support_positions(&self) -> usize {
        let m = match self.kind {
            TesterKind::SupportNa { m } => m,
            _ => return 0,
        };
        (4.0 * exact::to_f64(&self.eps_inv()) * ((m as f64).ln() + 2.0)).ceil() as usize
    }

    /// Per-cursor bit-query bound of the CPal tester.
    pub fn cpal_cursor_budget(&self) -> usize {
        let symbols = self.n / 2;
        let checks = exact::ceil_usize(&(exact::int(2) * self.eps_inv()));
        2 * (ceil_log2(symbols) + 2 * checks + 2)
    }

    pub fn samples(&self) -> usize {
        let e = self.eps_inv();
        match self.kind {
            TesterKind::AllZero => exact::ceil_usize(&e),
            TesterKind::Determinism => 1 + exact::ceil_usize(&e),
            TesterKind::SupportNa { m } => 1 + exact::ceil_usize(&(exact::int(8 * m as i64) * e)),
            TesterKind::SupportStrongMem { m } | TesterKind::SupportForward { m } => {
                1 + exact::ceil_usize(&(exact::int(2 * m as i64) * e))
            }
            TesterKind::InvForward => 1 + exact::ceil_usize(&(exact::int(3) * self.eps_pow_inv(2))),
            TesterKind::SymWeak2 => 2 * self.iterations(),
            TesterKind::ParK { k } => k * self.iterations(),
            TesterKind::CpalLocal => 1 + exact::ceil_usize(&(exact::int(2) * e)),
        }
    }

    /// Worst-case number of queries.
    pub fn query_budget(&self) -> usize {
        let s = self.samples();
        match self.kind {
            TesterKind::AllZero => s,
            TesterKind::Determinism => 2 * (s - 1),
            TesterKind::SupportNa { .. } => s * self.support_positions(),
            TesterKind::SupportStrongMem { m } => (m + 1) * s + s,
            TesterKind::SupportForward { m } => 2 * (m + 1) * s,
            TesterKind::InvForward => 4 * (s - 1),
            TesterKind::SymWeak2 => self.iterations() * self.per_iteration_queries(),
            TesterKind::ParK { .. } => self.iterations() * self.per_iteration_queries(),
            TesterKind::CpalLocal => s * self.cpal_cursor_budget(),
        }
    }

    /// Sym: exactly `2⌈log2 m⌉ + 4`; Par_k: at most `k(⌈log2 m⌉ + 2)`.
    pub fn per_iteration_queries(&self) -> usize {
        match self.kind {
            TesterKind::SymWeak2 => 2 * prefix_len(self.n / 2) + 4,
            TesterKind::ParK { k } => k * (prefix_len(self.key_range().expect("checked in new")) + 2),
            _ => 0,
        }
    }

    pub fn budget(&self) -> Budget {
        Budget { samples: self.samples(), queries: self.query_budget() }
    }

    /// Builds the per-spec tables (key codes) once for many runs.
    pub fn build(&self) -> Result<Tester> {
        let code = match self.kind {
            TesterKind::SymWeak2 => Some(sym_code(self.n / 2)?),
            TesterKind::ParK { k } => {
                let m = par_m_for(k, self.n / 2)?;
                debug_assert_eq!(par_data_len(k, m)?, self.n / 2);
                Some(par_code(k, m)?)
            }
            _ => None,
        };
        Ok(Tester { spec: self.clone(), code })
    }
}

pub(crate) fn ceil_log2(v: usize) -> usize {
    prefix_len(v.max(1))
}

/// A spec with its tables; cheap to run many times.
#[derive(Clone, Debug)]
pub struct Tester {
    spec: TesterSpec,
    code: Option<SystematicCode>,
}

impl Tester {
    pub fn spec(&self) -> &TesterSpec {
        &self.spec
    }

    fn check_input(&self, dist: &Dist) -> Result<()> {
        if dist.n() != self.spec.n {
            return Err(Error::LengthMismatch(dist.n(), self.spec.n));
        }
        let binary_needed = !matches!(self.spec.kind, TesterKind::InvForward | TesterKind::Determinism | TesterKind::SupportNa { .. } | TesterKind::SupportStrongMem { .. } | TesterKind::SupportForward { .. });
        if binary_needed && !dist.is_binary() {
            return Err(Error::AlphabetMismatch(dist.alphabet(), 2));
        }
        if self.spec.kind == TesterKind::InvForward && dist.alphabet() as usize != dist.n() {
            return Err(Error::AlphabetMismatch(dist.alphabet(), dist.n() as u32));
        }
        Ok(())
    }

    /// One run under the tester's own model.
    pub fn run(&self, dist: &Dist, seed: u64) -> Result<(Verdict, QueryLog)> {
        self.run_as(dist, self.spec.required_model(), seed)
    }

    /// One run with the session opened under `model`; a model the tester's
    /// access pattern does not fit surfaces as [`Error::Model`].
    pub fn run_as(&self, dist: &Dist, model: ModelSpec, seed: u64) -> Result<(Verdict, QueryLog)> {
        self.check_input(dist)?;
        let mut session = Session::open(dist, self.spec.samples(), model, seed)?;
        let verdict = self.drive(&mut session)?;
        Ok((verdict, session.into_log()))
    }

    /// Runs on an already opened session.
    pub fn drive(&self, session: &mut Session<'_>) -> Result<Verdict> {
        let spec = &self.spec;
        match spec.kind {
            TesterKind::AllZero => basic::all_zero(session, spec),
            TesterKind::Determinism => basic::determinism(session, spec),
            TesterKind::SupportNa { m } => basic::support_na(session, spec, m),
            TesterKind::SupportStrongMem { m } => support_strongmem(session, spec, m),
            TesterKind::SupportForward { m } => support_forward(session, spec, m),
            TesterKind::InvForward => keyed::inv_forward(session, spec),
            TesterKind::SymWeak2 => keyed::sym_weak2(session, self.code.as_ref().expect("built"), spec),
            TesterKind::ParK { k } => keyed::par_k(session, self.code.as_ref().expect("built"), spec, k),
            TesterKind::CpalLocal => cpal::cpal_local(session, spec),
        }
    }
}
