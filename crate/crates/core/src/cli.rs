//! Command-line front end: `check` runs one family of checks on an instance
//! file, `fuzz` runs a randomized suite.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! carries the certificate), 2 for unreadable or invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conditional::{compare_oracles, RvSet};
use crate::fuzz;
use crate::instance::{Instance, InstanceError};
use crate::market::{
    budget_check, density_process, sample_consumption_pair, superhedge_value, verify_market_duality,
    BudgetCertificate, Claim, MarketError,
};
use crate::polar::{
    bipolar_membership_lp, polar_constraints, verify_fbt, FbtProbe, LpBipolarVerdict, PolarError,
};
use crate::process::{absorption_violation, in_s1, supermartingale_violation, AdaptedProcess};
use crate::rational::parse_rational;
use crate::report::{digest, fmt_values, Check, Format, Report};
use crate::suites::{self, bipolar_text, hull_text, incremental_text, lp_verdict_text, Suite};
use crate::tree::TreeError;
use crate::Rational;

#[derive(Debug, Parser)]
#[command(name = "procpolar", version, about = "Exact polar and bipolar checks on finite event trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Output {
    /// Also write the report body to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text, global = true)]
    pub format: FormatArg,
    /// Seed for generated probes and fuzz instances.
    #[arg(long, env = "PROCPOLAR_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Machine,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Machine => Format::Machine,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run checks on an instance file.
    Check {
        what: CheckKind,
        instance: PathBuf,
        /// Initial capital for `budget`, overriding the instance.
        #[arg(long)]
        budget: Option<String>,
        /// Number of generated probes added to `cbt` and `fbt` checks.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run a randomized verification suite.
    Fuzz {
        suite: SuiteArg,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Tree,
    Supermartingale,
    Polar,
    Bipolar,
    Cbt,
    Fbt,
    Market,
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Cbt,
    Fbt,
    Market,
    Closure,
    Props,
    Lp,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Cbt => Suite::Cbt,
            SuiteArg::Fbt => Suite::Fbt,
            SuiteArg::Market => Suite::Market,
            SuiteArg::Closure => Suite::Closure,
            SuiteArg::Props => Suite::Props,
            SuiteArg::Lp => Suite::Lp,
        }
    }
}

/// Input problems; always exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("--budget: exact rationals required, got {0:?}")]
    Budget(String),
    #[error("the budget check needs a capital: pass --budget or set market.budget")]
    NoBudget,
    #[error("the instance has no {0}")]
    Missing(&'static str),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Rv(#[from] crate::conditional::RvError),
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let start = Instant::now();
    let (result, output) = match &cli.command {
        Command::Check {
            what,
            instance,
            budget,
            count,
            output,
        } => (check(*what, instance, budget.as_deref(), *count, output.seed), output),
        Command::Fuzz { suite, count, output } => {
            (Ok(suites::run((*suite).into(), *count as usize, output.seed)), output)
        }
    };
    let mut report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    report.elapsed = Some(start.elapsed());
    let body = report.body(output.format.into());
    let _ = write!(stdout, "{body}");
    if let Some(path) = &output.out {
        if let Err(source) = std::fs::write(path, &body) {
            let e = InputError::Write {
                path: path.clone(),
                source,
            };
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    }
    let _ = writeln!(stderr, "elapsed: {:.3?}", start.elapsed());
    report.exit_code()
}

/// Loads an instance and runs one family of checks on it.
pub fn check(what: CheckKind, path: &PathBuf, budget: Option<&str>, count: usize, seed: u64) -> Result<Report, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Read {
        path: path.clone(),
        source,
    })?;
    let name = format!("check {}", what.to_possible_value().unwrap().get_name());
    let mut report = Report::new(name);
    report.instance_digest = Some(digest(text.as_bytes()));
    if matches!(what, CheckKind::Cbt | CheckKind::Fbt | CheckKind::Market) {
        report.seed = Some(seed);
    }
    let inst = match Instance::parse(&text) {
        Ok(i) => i,
        Err(InstanceError::Tree(TreeError::Invalid(violations))) if what == CheckKind::Tree => {
            report.push(Check::new("tree", false, "invalid", violations.to_string()));
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    let checks = match what {
        CheckKind::Tree => check_tree(&inst),
        CheckKind::Supermartingale => check_supermartingale(&inst)?,
        CheckKind::Polar => check_polar(&inst)?,
        CheckKind::Bipolar => check_bipolar(&inst)?,
        CheckKind::Cbt => check_cbt(&inst, count, seed)?,
        CheckKind::Fbt => check_fbt(&inst, count, seed)?,
        CheckKind::Market => check_market(&inst, seed)?,
        CheckKind::Budget => check_budget(&inst, budget)?,
    };
    report.checks = checks;
    Ok(report)
}

fn check_tree(inst: &Instance) -> Vec<Check> {
    let t = &inst.tree;
    let leaves: Vec<String> = t.leaves().iter().map(|&l| t.name(crate::tree::NodeId(l))).collect();
    vec![Check::new(
        "tree",
        true,
        "valid",
        format!("nodes {}\nhorizon {}\nleaves {}", t.len(), t.horizon(), leaves.join(" ")),
    )]
}

fn all_processes(inst: &Instance) -> Result<Vec<(String, &AdaptedProcess)>, InputError> {
    let p = inst.process_section()?;
    let mut out: Vec<(String, &AdaptedProcess)> =
        p.generators.iter().enumerate().map(|(i, g)| (format!("generator{i}"), g)).collect();
    out.extend(p.probes.iter().map(|pr| (pr.label.clone(), &pr.value)));
    Ok(out)
}

fn check_supermartingale(inst: &Instance) -> Result<Vec<Check>, InputError> {
    let tree = &inst.tree;
    Ok(all_processes(inst)?
        .into_iter()
        .map(|(id, y)| match supermartingale_violation(y, tree) {
            None => {
                let extra = format!(
                    "in S_1: {}\nzero absorbing: {}",
                    in_s1(y, tree),
                    absorption_violation(y, tree).is_none()
                );
                Check::new(id, true, "supermartingale", extra)
            }
            Some(n) => {
                let mean = tree.expect_children(n, y.values());
                Check::new(
                    id,
                    false,
                    "not a supermartingale",
                    format!("at {}: value {} below next-step mean {mean}", tree.name(n), y.get(n)),
                )
            }
        })
        .collect())
}

fn check_polar(inst: &Instance) -> Result<Vec<Check>, InputError> {
    let c = inst.process_set()?;
    let sys = polar_constraints(&c);
    let p = inst.process_section()?;
    Ok(p.probes
        .iter()
        .map(|pr| match sys.first_violation(pr.value.values()) {
            None => Check::new(pr.label.clone(), true, "in", String::new()),
            Some(row) => {
                let row = match row {
                    Ok(r) | Err(r) => r,
                };
                Check::new(pr.label.clone(), false, "out", format!("violates polar constraint {row}"))
            }
        })
        .collect())
}

fn lp_verdict_check(label: &str, v: &LpBipolarVerdict) -> Check {
    Check::new(label, v.is_in(), if v.is_in() { "in" } else { "out" }, lp_verdict_text(v))
}

fn check_bipolar(inst: &Instance) -> Result<Vec<Check>, InputError> {
    let c = inst.process_set()?;
    let p = inst.process_section()?;
    p.probes
        .iter()
        .map(|pr| Ok(lp_verdict_check(&pr.label, &bipolar_membership_lp(&pr.value, &c)?)))
        .collect()
}

fn check_cbt(inst: &Instance, count: usize, seed: u64) -> Result<Vec<Check>, InputError> {
    let sec = inst.conditional_section()?;
    let c: &RvSet = &sec.set;
    let mut probes: Vec<(String, crate::conditional::RandomVariable)> =
        sec.probes.iter().map(|p| (p.label.clone(), p.value.clone())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..count {
        for (j, (kind, v)) in fuzz::cbt_probes(&mut rng, c).into_iter().enumerate() {
            probes.push((format!("generated{k}.{j}-{kind:?}").to_lowercase(), v));
        }
    }
    probes
        .iter()
        .map(|(label, h)| {
            let cmp = compare_oracles(h, c)?;
            let verdict = match (cmp.agree(), cmp.hull.is_in()) {
                (false, _) => "disagree",
                (true, true) => "in",
                (true, false) => "out",
            };
            Ok(Check::new(
                label.clone(),
                cmp.agree(),
                verdict,
                format!("probe {}\n{}\n{}", fmt_values(h.values()), hull_text(&cmp.hull), bipolar_text(&cmp.bipolar)),
            ))
        })
        .collect()
}

fn check_fbt(inst: &Instance, count: usize, seed: u64) -> Result<Vec<Check>, InputError> {
    let c = inst.process_set()?;
    let p = inst.process_section()?;
    let mut probes: Vec<FbtProbe> = p
        .probes
        .iter()
        .map(|pr| FbtProbe {
            label: pr.label.clone(),
            process: pr.value.clone(),
            known_in: None,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        probes.extend(fuzz::fbt_probes(&mut rng, &c));
    }
    let report = verify_fbt(&c, &probes)?;
    Ok(report
        .rows
        .iter()
        .map(|row| {
            let verdict = match (row.agree(), row.lp.is_in()) {
                (false, _) => "disagree",
                (true, true) => "in",
                (true, false) => "out",
            };
            Check::new(row.label.clone(), row.agree(), verdict, format!("{}\n{}", lp_verdict_text(&row.lp), incremental_text(&row.incremental)))
        })
        .collect())
}

fn check_market(inst: &Instance, seed: u64) -> Result<Vec<Check>, InputError> {
    let sec = inst.market_section()?;
    let m = &sec.market;
    let tree = m.tree();
    let mut out = Vec::new();
    let q = m.interior_measure();
    let density = density_process(q, m)?;
    out.push(Check::new(
        "martingale-measure",
        density.equivalent,
        "equivalent",
        format!("weights {}\ndensity {}", fmt_values(q), fmt_values(density.process.values())),
    ));
    if let Some(claim) = &sec.claim {
        let sh = superhedge_value(&Claim::Terminal(claim.clone()), m)?;
        let holdings: Vec<String> = tree.non_terminal().map(|n| fmt_values(sh.strategy.at(n))).collect();
        out.push(Check::new(
            "superhedge",
            true,
            sh.value.to_string(),
            format!(
                "envelope {}\nholdings {}\nresidual {}\nworst weights {}",
                fmt_values(&sh.envelope),
                holdings.join(" "),
                fmt_values(&sh.residual),
                fmt_values(&sh.worst_measure)
            ),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..3)
        .map(|_| sample_consumption_pair(&mut rng, m))
        .collect::<Result<Vec<_>, _>>()?;
    let y_probes = vec![density.process.clone(), AdaptedProcess::constant(tree, Rational::from_integer(1.into()))];
    let z_probes = pairs
        .iter()
        .map(|p| AdaptedProcess::new(tree, p.net()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(MarketError::from)?;
    let r = verify_market_duality(m, &y_probes, &pairs, &z_probes)?;
    out.push(Check::new(
        "structure",
        r.all_ok(),
        if r.all_ok() { "consistent" } else { "inconsistent" },
        format!("{r:?}"),
    ));
    Ok(out)
}

fn check_budget(inst: &Instance, budget: Option<&str>) -> Result<Vec<Check>, InputError> {
    let sec = inst.market_section()?;
    let x = match budget {
        Some(s) if s.contains(['.', 'e', 'E']) => return Err(InputError::Budget(s.into())),
        Some(s) => parse_rational(s).ok_or_else(|| InputError::Budget(s.into()))?,
        None => sec.budget.clone().ok_or(InputError::NoBudget)?,
    };
    let c = sec.consumption.as_ref().ok_or(InputError::Missing("market.consumption section"))?;
    let v = budget_check(c, &x, &sec.market)?;
    let tree = sec.market.tree();
    let cert = match &v.certificate {
        BudgetCertificate::Strategy { strategy, wealth } => {
            let holdings: Vec<String> = tree.non_terminal().map(|n| fmt_values(strategy.at(n))).collect();
            format!("holdings {}\nwealth {}", holdings.join(" "), fmt_values(wealth))
        }
        BudgetCertificate::ViolatingMeasure { weights, expected_cost } => {
            let children: Vec<Rational> = weights.iter().skip(1).cloned().collect();
            format!("measure {}\nexpected cost {expected_cost}", fmt_values(&children))
        }
    };
    Ok(vec![Check::new(
        "budget",
        v.affordable,
        v.affordable.to_string(),
        format!("capital {x}\nsuperhedge value {}\n{cert}", v.superhedge_value),
    )])
}
