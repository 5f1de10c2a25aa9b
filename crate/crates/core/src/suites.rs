//! Seeded randomized verification suites.
//!
//! Every suite draws `count` instances; instance `i` uses its own seed
//! derived from the run seed, printed in each certificate so a single
//! instance can be replayed with the `*_instance` functions.

use std::fmt::Write as _;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conditional::{
    compare_oracles, conditional_polar_membership, g_convex_combine, pairwise_max_closure,
    secondpolar_decompose, BipolarVerdict, GUnitBall, HullVerdict, PolarWitness,
};
use crate::fuzz;
use crate::lp::{self, ConstraintSystem, LpOutcome, LpProblem, Relation, Sense};
use crate::market::{
    budget_check, density_process, min_budget, sample_consumption_pair, superhedge_value, y_enlargement_membership,
    verify_market_duality, Claim, Market,
};
use crate::polar::{
    polar_membership, verify_fbt, BipolarCheck, IncrementalOutcome, IncrementalVerdict, LpBipolarVerdict, ProcessWitness,
};
use crate::process::{fork_splice, random_nonincreasing, random_splice_weight, solid_multiply, AdaptedProcess};
use crate::rational::rat;
use crate::report::{fmt_values, Check, Report};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Cbt,
    Fbt,
    Market,
    Closure,
    Props,
    Lp,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Cbt => "cbt",
            Suite::Fbt => "fbt",
            Suite::Market => "market",
            Suite::Closure => "closure",
            Suite::Props => "props",
            Suite::Lp => "lp",
        }
    }

    pub fn instance(self, seed: u64) -> Vec<Check> {
        match self {
            Suite::Cbt => cbt_instance(seed),
            Suite::Fbt => fbt_instance(seed),
            Suite::Market => market_instance(seed),
            Suite::Closure => closure_instance(seed),
            Suite::Props => props_instance(seed),
            Suite::Lp => lp_instance(seed),
        }
    }
}

/// Seed of instance `i` in a run seeded with `seed`.
pub fn instance_seed(seed: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng.random()
}

/// Runs `count` instances in parallel; checks come back in instance order
/// with ids prefixed by `suite/i`.
pub fn run(suite: Suite, count: usize, seed: u64) -> Report {
    let per_instance: Vec<Vec<Check>> = (0..count)
        .into_par_iter()
        .map(|i| {
            suite
                .instance(instance_seed(seed, i))
                .into_iter()
                .map(|mut c| {
                    c.id = format!("{}/{i}/{}", suite.name(), c.id);
                    c
                })
                .collect()
        })
        .collect();
    let mut report = Report::new(format!("fuzz {}", suite.name()));
    report.seed = Some(seed);
    report.checks = per_instance.into_iter().flatten().collect();
    report
}

fn error_check(id: &str, seed: u64, e: impl std::fmt::Display) -> Check {
    Check::new(id, false, "error", format!("seed {seed}\n{e}"))
}

pub(crate) fn hull_text(v: &HullVerdict) -> String {
    match v {
        HullVerdict::In { weights } => {
            let w: Vec<String> = weights.iter().map(|b| fmt_values(b)).collect();
            format!("hull in, weights {}", w.join(" "))
        }
        HullVerdict::Out { block, farkas } => format!("hull out on block {block}, farkas {}", fmt_values(farkas)),
    }
}

pub(crate) fn witness_text(w: &PolarWitness) -> String {
    match w {
        PolarWitness::Point { g, value } => format!("polar point {} pairing {value}", fmt_values(g)),
        PolarWitness::Ray { point, ray } => format!("polar ray {} + s {}", fmt_values(point), fmt_values(ray)),
    }
}

pub(crate) fn bipolar_text(v: &BipolarVerdict) -> String {
    match v {
        BipolarVerdict::In { block_max } => format!("bipolar in, block maxima {}", fmt_values(block_max)),
        BipolarVerdict::Out { block, witness } => format!("bipolar out on block {block}, {}", witness_text(witness)),
    }
}

/// Hull oracle against bipolar oracle on at least ten probes.
pub fn cbt_instance(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = fuzz::random_rv_set(&mut rng);
    let probes = fuzz::cbt_probes(&mut rng, &c);
    probes
        .iter()
        .enumerate()
        .map(|(j, (kind, h))| {
            let id = format!("probe{j}-{kind:?}").to_lowercase();
            match compare_oracles(h, &c) {
                Ok(cmp) => {
                    let known = matches!(kind, fuzz::ProbeKind::Generator | fuzz::ProbeKind::Interior | fuzz::ProbeKind::Boundary);
                    let passed = cmp.agree() && (!known || cmp.hull.is_in());
                    let verdict = if !cmp.agree() {
                        "disagree"
                    } else if cmp.hull.is_in() {
                        "in"
                    } else {
                        "out"
                    };
                    let cert = format!(
                        "seed {seed}\nprobe {}\n{}\n{}",
                        fmt_values(h.values()),
                        hull_text(&cmp.hull),
                        bipolar_text(&cmp.bipolar)
                    );
                    Check::new(id, passed, verdict, cert)
                }
                Err(e) => error_check(&id, seed, e),
            }
        })
        .collect()
}

pub(crate) fn lp_verdict_text(v: &LpBipolarVerdict) -> String {
    match v {
        LpBipolarVerdict::In => "lp in".into(),
        LpBipolarVerdict::Out { check, witness } => {
            let at = match check {
                BipolarCheck::Root => "the root".to_string(),
                BipolarCheck::Node(n) => n.to_string(),
            };
            let w = match witness {
                ProcessWitness::Point { y, value } => format!("polar point {} pairing {value}", fmt_values(y)),
                ProcessWitness::Ray { point, ray } => {
                    format!("polar ray {} + s {}", fmt_values(point), fmt_values(ray))
                }
            };
            format!("lp out at {at}, {w}")
        }
    }
}

pub(crate) fn incremental_text(v: &IncrementalOutcome) -> String {
    match v {
        IncrementalOutcome::NotAbsorbing(n) => format!("incremental out: revives after zero at {n}"),
        IncrementalOutcome::Verdict(IncrementalVerdict::In) => "incremental in".into(),
        IncrementalOutcome::Verdict(IncrementalVerdict::InitialValue { z0, max }) => {
            format!("incremental out: initial value {z0} above {max}")
        }
        IncrementalOutcome::Verdict(IncrementalVerdict::Step { t, atom, witness }) => {
            format!("incremental out at step {t} on {atom}, {}", witness_text(witness))
        }
    }
}

/// LP bipolar oracle against the incremental oracle on one far-reaching set.
pub fn fbt_instance(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = fuzz::random_process_set(&mut rng);
    let probes = fuzz::fbt_probes(&mut rng, &c);
    match verify_fbt(&c, &probes) {
        Ok(report) => report
            .rows
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let verdict = if !row.agree() {
                    "disagree"
                } else if row.lp.is_in() {
                    "in"
                } else {
                    "out"
                };
                let cert = format!(
                    "seed {seed}\n{}\nprobe {}\n{}\n{}",
                    row.label,
                    fmt_values(probes[j].process.values()),
                    lp_verdict_text(&row.lp),
                    incremental_text(&row.incremental)
                );
                Check::new(format!("probe{j}"), row.agree(), verdict, cert)
            })
            .collect(),
        Err(e) => vec![error_check("set", seed, e)],
    }
}

/// Compositions of splices and solid multiplications of polar elements.
pub const CLOSURE_COMPOSITIONS: usize = 4;

fn compose<R: Rng>(rng: &mut R, base: &[AdaptedProcess], c: &crate::process::ProcessSet, depth: usize, trace: &mut String) -> Result<AdaptedProcess, crate::process::ProcessError> {
    let tree = c.tree();
    if depth == 0 {
        let i = rng.random_range(0..base.len());
        write!(trace, "y{i}").unwrap();
        return Ok(base[i].clone());
    }
    if rng.random_bool(0.4) {
        let b = random_nonincreasing(rng, tree);
        trace.push_str("mul(");
        let y = compose(rng, base, c, depth - 1, trace)?;
        write!(trace, ", {})", fmt_values(b.process().values())).unwrap();
        Ok(solid_multiply(&y, &b, tree))
    } else {
        let s = rng.random_range(0..=tree.horizon());
        let h = random_splice_weight(rng, tree, s);
        trace.push_str("splice(");
        let y1 = compose(rng, base, c, depth - 1, trace)?;
        trace.push_str(", ");
        let d2 = rng.random_range(0..depth);
        let y2 = compose(rng, base, c, d2, trace)?;
        trace.push_str(", ");
        let d3 = rng.random_range(0..depth);
        let y3 = compose(rng, base, c, d3, trace)?;
        write!(trace, ", s={s}, h={})", fmt_values(&h)).unwrap();
        fork_splice(tree, &y1, &y2, &y3, s, &h)
    }
}

/// The polar stays closed under the hull operations.
pub fn closure_instance(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = fuzz::random_process_set(&mut rng);
    let base: Vec<AdaptedProcess> = (0..3).map(|_| fuzz::lp_polar_element(&mut rng, &c)).collect();
    (0..CLOSURE_COMPOSITIONS)
        .map(|j| {
            let id = format!("composition{j}");
            let depth = rng.random_range(1..=3);
            let mut trace = String::new();
            match compose(&mut rng, &base, &c, depth, &mut trace) {
                Ok(y) => {
                    let ok = polar_membership(&y, &c);
                    let cert = format!("seed {seed}\n{trace}\nresult {}", fmt_values(y.values()));
                    Check::new(id, ok, if ok { "in polar" } else { "left polar" }, cert)
                }
                Err(e) => error_check(&id, seed, e),
            }
        })
        .collect()
}

/// Closure of the conditional polar, the decomposition round trip and the
/// pairwise maximum in `H^f`.
pub fn props_instance(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = fuzz::random_rv_set(&mut rng);
    let mut out = Vec::new();

    let g1 = fuzz::random_polar_element(&mut rng, &c);
    let g2 = fuzz::random_polar_element(&mut rng, &c);
    if let (Some(g1), Some(g2)) = (g1, g2) {
        let h = fuzz::random_block_weight(&mut rng, c.partition());
        match g_convex_combine(&g1, &g2, &h, c.partition()) {
            Ok(mix) => {
                let ok = conditional_polar_membership(&mix, &c);
                let cert = format!("seed {seed}\nweight {}\nmix {}", fmt_values(&h), fmt_values(mix.values()));
                out.push(Check::new("polar-mix", ok, if ok { "in polar" } else { "left polar" }, cert));
            }
            Err(e) => out.push(error_check("polar-mix", seed, e)),
        }
        let shrunk = fuzz::random_shrink(&mut rng, &g1);
        let ok = conditional_polar_membership(&shrunk, &c);
        let cert = format!("seed {seed}\nshrunk {}", fmt_values(shrunk.values()));
        out.push(Check::new("polar-solid", ok, if ok { "in polar" } else { "left polar" }, cert));
    }

    let f = fuzz::random_hull_rv(&mut rng, &c);
    let l = fuzz::random_unit_ball_element(&mut rng, &c);
    match secondpolar_decompose(&f, &l, &c) {
        Ok(d) => {
            let product = (0..c.len()).all(|w| f.get(w) * l.get(w) == d.h.get(w) * d.k.get(w));
            let ball = GUnitBall::of(&c).contains(&d.k);
            let ok = product && ball;
            let cert = format!(
                "seed {seed}\nf {}\nl {}\nh {}\nk {}",
                fmt_values(f.values()),
                fmt_values(l.values()),
                fmt_values(d.h.values()),
                fmt_values(d.k.values())
            );
            out.push(Check::new("decomposition", ok, if ok { "fl = hk" } else { "mismatch" }, cert));
        }
        Err(e) => out.push(error_check("decomposition", seed, e)),
    }

    let f = fuzz::random_hull_rv(&mut rng, &c);
    let hs = fuzz::random_hf_family(&mut rng, &c, &f);
    match pairwise_max_closure(&hs, &f, &c) {
        Ok(m) => {
            let cert = format!("seed {seed}\nf {}\nmax {}", fmt_values(f.values()), fmt_values(m.values()));
            out.push(Check::new("hf-max", true, "in H^f", cert));
        }
        Err(e) => out.push(error_check("hf-max", seed, e)),
    }
    out
}

/// Density and wealth polar relations plus budget duality on one random market.
pub fn market_instance(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = fuzz::random_market(&mut rng);
    match market_checks(&mut rng, &m, seed) {
        Ok(checks) => checks,
        Err(e) => vec![error_check("market", seed, e)],
    }
}

fn market_checks(rng: &mut ChaCha8Rng, m: &Market, seed: u64) -> Result<Vec<Check>, crate::market::MarketError> {
    let tree = m.tree();
    let mut out = Vec::new();
    let density = density_process(m.interior_measure(), m)?.process;
    let b = random_nonincreasing(rng, tree);
    let free = AdaptedProcess::new(tree, tree.nodes().map(|_| fuzz::small_nonneg(rng, 2)).collect())?;
    let y_probes = vec![
        density.clone(),
        density.scale(&rat(1, 2)),
        solid_multiply(&density, &b, tree),
        AdaptedProcess::constant(tree, Rational::from_integer(1.into())),
        free,
    ];
    let pairs = (0..3)
        .map(|_| sample_consumption_pair(rng, m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut z_probes: Vec<AdaptedProcess> = pairs
        .iter()
        .map(|p| AdaptedProcess::new(tree, p.net()))
        .collect::<Result<_, _>>()?;
    // Carries a payoff that costs more than 1 to superhedge.
    let leaves = tree.leaves().len();
    let payoff: Vec<Rational> = (0..leaves).map(|_| fuzz::small_nonneg(rng, 3)).collect();
    let sh = superhedge_value(&Claim::Terminal(payoff), m)?;
    if sh.value.is_positive() {
        let scale = rat(11, 10) / &sh.value;
        let mut over: Vec<Rational> = sh.wealth.iter().map(|v| v * &scale).collect();
        over[tree.root().0] = Rational::from_integer(1.into());
        if over.iter().all(|v| !v.is_negative()) {
            z_probes.push(AdaptedProcess::new(tree, over)?);
        }
    }
    z_probes.push(AdaptedProcess::new(tree, tree.nodes().map(|_| fuzz::small_nonneg(rng, 2)).collect())?);

    let report = verify_market_duality(m, &y_probes, &pairs, &z_probes)?;
    let prices: Vec<String> = m.prices().iter().map(|p| fmt_values(p.values())).collect();
    let head = format!("seed {seed}\nprices {}", prices.join(" "));
    out.push(Check::new(
        "supermartingale-pairs",
        report.product_violations.is_empty() && report.products_checked > 0,
        format!("{} pairs", report.products_checked),
        format!("{head}\nviolations {:?}", report.product_violations),
    ));
    out.push(Check::new(
        "polar-identity",
        report.polar_oracles_agree(),
        if report.polar_oracles_agree() { "agree" } else { "disagree" },
        format!("{head}\n(pure, consumption, extended) {:?}", report.polar_oracles),
    ));
    out.push(Check::new(
        "bipolar-feasibility",
        report.bipolar_oracles_agree(),
        if report.bipolar_oracles_agree() { "agree" } else { "disagree" },
        format!("{head}\n(bipolar, feasible) {:?}", report.bipolar_oracles),
    ));
    let density_in = y_enlargement_membership(&density, m)?;
    out.push(Check::new("density-in-enlargement", density_in, density_in.to_string(), head.clone()));

    let dens = fuzz::random_consumption_density(rng, tree);
    let value = superhedge_value(&Claim::Consumption(dens.clone()), m)?.value;
    let primal = min_budget(&dens, m)?;
    out.push(Check::new(
        "budget-values",
        primal == value,
        if primal == value { "equal" } else { "differ" },
        format!("{head}\nprimal {primal}\ndual {value}"),
    ));
    let mut budgets = vec![value.clone(), fuzz::small_nonneg(rng, 4)];
    if value.is_positive() {
        budgets.push(&value - rat(1, 100));
    }
    for (k, x) in budgets.iter().filter(|x| !x.is_negative()).enumerate() {
        let id = format!("budget{k}");
        match budget_check(&dens, x, m) {
            Ok(v) => out.push(Check::new(
                id,
                v.affordable == (x >= &value),
                v.affordable.to_string(),
                format!("{head}\nbudget {x}\nvalue {}", v.superhedge_value),
            )),
            Err(e) => out.push(error_check(&id, seed, e)),
        }
    }
    Ok(out)
}

/// `max c.x, Ax <= b, x >= 0` against its dual `min b.y, A'y >= c, y >= 0`,
/// solved independently.
pub fn lp_instance(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=4);
    let entry = |rng: &mut ChaCha8Rng| rat(rng.random_range(-4..=6), rng.random_range(1..=3));
    let a: Vec<Vec<Rational>> = (0..m).map(|_| (0..n).map(|_| entry(&mut rng)).collect()).collect();
    let b: Vec<Rational> = (0..m).map(|_| entry(&mut rng)).collect();
    let c: Vec<Rational> = (0..n).map(|_| entry(&mut rng)).collect();

    let mut primal = ConstraintSystem::nonnegative(n);
    for (row, rhs) in a.iter().zip(&b) {
        primal.push(row.iter().cloned().enumerate().collect(), Relation::Le, rhs.clone());
    }
    let mut dual = ConstraintSystem::nonnegative(m);
    for j in 0..n {
        dual.push((0..m).map(|i| (i, a[i][j].clone())).collect(), Relation::Ge, c[j].clone());
    }
    let p = lp::solve(&LpProblem::new(Sense::Maximize, c.clone(), primal));
    let d = lp::solve(&LpProblem::new(Sense::Minimize, b.clone(), dual));
    let rows: Vec<String> = a.iter().map(|r| fmt_values(r)).collect();
    let head = format!("seed {seed}\nA {}\nb {}\nc {}", rows.join(" "), fmt_values(&b), fmt_values(&c));
    let (p, d) = match (p, d) {
        (Ok(p), Ok(d)) => (p, d),
        (Err(e), _) | (_, Err(e)) => return vec![error_check("duality", seed, e)],
    };
    use LpOutcome::*;
    let (ok, verdict) = match (&p, &d) {
        (Optimal { value: v, .. }, Optimal { value: w, .. }) => (v == w, format!("optimal {v} = {w}")),
        (Unbounded { .. }, Infeasible { .. }) => (true, "primal unbounded".into()),
        (Infeasible { .. }, Unbounded { .. }) | (Infeasible { .. }, Infeasible { .. }) => {
            (true, "primal infeasible".into())
        }
        _ => (false, format!("{:?} vs {:?}", p.status(), d.status())),
    };
    vec![Check::new("duality", ok, verdict, head)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_are_reproducible() {
        for suite in [Suite::Cbt, Suite::Lp] {
            let a = run(suite, 3, 11);
            let b = run(suite, 3, 11);
            assert_eq!(a, b);
            assert!(a.passed(), "{a}");
        }
    }

    #[test]
    fn instance_seeds_differ() {
        assert_ne!(instance_seed(1, 0), instance_seed(1, 1));
        assert_ne!(instance_seed(1, 0), instance_seed(2, 0));
    }

    #[test]
    fn every_suite_passes_a_small_run() {
        for suite in [Suite::Fbt, Suite::Market, Suite::Closure, Suite::Props] {
            let r = run(suite, 4, 5);
            assert!(r.passed(), "{r}");
            assert!(!r.checks.is_empty());
        }
    }
}
