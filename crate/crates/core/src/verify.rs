//! Bound-verification sweep over `n = 1..=n_max`.
//!
//! Every check is exact or rationally certified. Reports are deterministic
//! unless timings are requested.

use std::time::Instant;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{decimal30, format_rational, PiEnclosure, Rational, Verdict};
use crate::measure::{Bijection, KsMeasure, Representation};
use crate::rect::{certify_bound2, sup_rect_bruteforce, sup_rect_fast, BRUTE_MAX_N};
use crate::tensor::{certify_bound3, tensor_sup_exact, TENSOR_MAX_N};

/// Largest `n` whose total variation is summed atom by atom in the sweep.
pub const SWEEP_EXPLICIT_MAX_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub brute_max_n: usize,
    pub tensor_max_n: usize,
    pub explicit_max_n: usize,
    pub bijection: Bijection,
    #[serde(skip)]
    pub timings: bool,
    #[serde(skip)]
    pub pi: PiEnclosure,
}

impl VerifyConfig {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            brute_max_n: BRUTE_MAX_N,
            tensor_max_n: TENSOR_MAX_N,
            explicit_max_n: SWEEP_EXPLICIT_MAX_N,
            bijection: Bijection::Canonical,
            timings: false,
            pi: PiEnclosure::published(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be >= 1".into()));
        }
        let guards = [
            ("sup_rect_bruteforce", self.brute_max_n, BRUTE_MAX_N),
            ("tensor_sup_exact", self.tensor_max_n, TENSOR_MAX_N),
            ("explicit atoms", self.explicit_max_n, crate::measure::EXPLICIT_MAX_N),
        ];
        for (op, n, limit) in guards {
            if n > limit {
                return Err(Error::GuardExceeded { op, n, limit });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub n: usize,
    pub verdict: Verdict,
    pub value: String,
    pub value_decimal: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_us: Option<u64>,
}

impl CheckResult {
    pub fn label(&self) -> String {
        format!("{}[n={}]", self.name, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiBounds {
    pub lower: String,
    pub upper: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationRun {
    pub config: VerifyConfig,
    pub pi: PiBounds,
    pub checks: Vec<CheckResult>,
    pub verdict: Verdict,
    pub failing: Vec<String>,
}

impl VerificationRun {
    pub fn is_pass(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,n,verdict,value,value_decimal\n");
        for c in &self.checks {
            let verdict = serde_json::to_value(c.verdict).expect("enum");
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.name,
                c.n,
                verdict.as_str().unwrap_or_default(),
                c.value,
                c.value_decimal
            ));
        }
        out
    }
}

struct Timer(Option<Instant>);

impl Timer {
    fn start(on: bool) -> Self {
        Timer(on.then(Instant::now))
    }

    fn stop(&self) -> Option<u64> {
        self.0.map(|t| t.elapsed().as_micros() as u64)
    }
}

fn check(name: &'static str, n: usize, verdict: Verdict, value: &Rational, timer: &Timer) -> CheckResult {
    CheckResult {
        name,
        n,
        verdict,
        value: format_rational(value),
        value_decimal: decimal30(value),
        detail: None,
        elapsed_us: timer.stop(),
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn checks_for(n: usize, cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let repr = if n <= cfg.explicit_max_n {
        Representation::Explicit
    } else {
        Representation::Implicit
    };
    let m = KsMeasure::build(n, cfg.bijection, repr)?;

    let t = Timer::start(cfg.timings);
    let tv = m.total_variation();
    let support = m.support_size();
    let ok = tv.is_one() && support == BigUint::from(n) << n;
    let mut c = check("total_variation", n, pass_if(ok), &tv, &t);
    c.detail = Some(format!("support_size={support}"));
    out.push(c);

    let t = Timer::start(cfg.timings);
    let fast = sup_rect_fast(&m)?;
    out.push(check("bound2", n, certify_bound2(&fast, &cfg.pi), &fast.sup, &t));

    if n <= cfg.brute_max_n {
        let t = Timer::start(cfg.timings);
        let brute = sup_rect_bruteforce(&m)?;
        out.push(check("brute_force", n, pass_if(brute.sup == fast.sup), &brute.sup, &t));
    }

    if n <= cfg.tensor_max_n {
        let t = Timer::start(cfg.timings);
        let tm = if m.is_explicit() {
            m
        } else {
            KsMeasure::build(n, cfg.bijection, Representation::Explicit)?
        };
        let sup = tensor_sup_exact(&tm)?;
        let mut c = check("bound3", n, certify_bound3(n, &sup, &cfg.pi), &sup, &t);
        c.detail = Some(format!("rect_sup={}", format_rational(&fast.sup)));
        out.push(c);
    }
    Ok(out)
}

/// Runs the sweep. Independent `n` are processed in parallel; the result is
/// ordered by `n`, then by check.
pub fn run_verification(cfg: &VerifyConfig) -> Result<VerificationRun> {
    cfg.validate()?;
    let per_n = (1..=cfg.n_max)
        .into_par_iter()
        .map(|n| checks_for(n, cfg))
        .collect::<Result<Vec<_>>>()?;
    let checks: Vec<CheckResult> = per_n.into_iter().flatten().collect();
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.verdict.is_pass())
        .map(CheckResult::label)
        .collect();
    let verdict = if failing.is_empty() {
        Verdict::Pass
    } else if checks.iter().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Undecided
    };
    Ok(VerificationRun {
        config: cfg.clone(),
        pi: PiBounds {
            lower: format_rational(cfg.pi.lower()),
            upper: format_rational(cfg.pi.upper()),
        },
        checks,
        verdict,
        failing,
    })
}
