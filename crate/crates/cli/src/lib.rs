//! The `tautsys` command line: build systems, compute period series, verify
//! annihilation, check volume forms and compute topological invariants. All
//! artifacts are canonical JSON.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tautsys_core::exact::rat;
use tautsys_core::json::to_canonical_string;
use tautsys_core::periods::{chart_period_series, ci_period_series, g24_interpretation_report, toric_period_series};
use tautsys_core::systems::{build_ci_system, build_extended_gkz, build_flag_system, build_gkz, SystemJson};
use tautsys_core::topology::{
    chi_y_genus_ci, euler_char_ci, eval_poly, is_palindromic, pn_euler_oracle,
};
use tautsys_core::varieties::{degree_grassmannian, poincare_polynomial};
use tautsys_core::verify::{
    annihilation_report, lie_closure_report, period_sheaf_rank_pn, rank_bound_grassmannian,
};
use tautsys_core::volform::volform_report;
use tautsys_core::weyl::SeriesJson;
use tautsys_core::{Error, Int, Rat, SparseSeries, TautSystem, ToricData, Variety};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "TAUTSYS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "tautsys", version, about = "Tautological systems, period series and their exact verification")]
pub struct Cli {
    /// Worker threads (default: TAUTSYS_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the system of differential operators for a variety.
    Build(BuildArgs),
    /// Compute the period series along the torus cycle.
    Period(PeriodArgs),
    /// Check that every generator of a system annihilates a series.
    Verify(VerifyArgs),
    /// Volume-form checks on the Stiefel chart.
    Volform {
        #[command(subcommand)]
        action: VolformAction,
    },
    /// Euler characteristic, χ_y-genus or Poincaré polynomial.
    Topology(TopologyArgs),
    /// Run the P^2 and G(2,4) pipelines end to end.
    Selftest,
}

#[derive(Args, Debug)]
pub struct VarietyArgs {
    /// p:<n> | g:<d>,<n> | f:<d1>,<d2>,..;<n> | toric:@<file>
    #[arg(long)]
    pub variety: String,
    /// Complete-intersection degrees: `d1,d2,..` for projective spaces and
    /// Grassmannians, `;`-separated multidegrees for flags.
    #[arg(long)]
    pub ci: Option<String>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    pub target: VarietyArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest degree of box operators for toric input.
    #[arg(long, default_value_t = 3)]
    pub box_degree: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PeriodArgs {
    #[command(flatten)]
    pub target: VarietyArgs,
    #[arg(long)]
    pub order: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum VolformAction {
    /// Compare both constructions and check invariance.
    Check {
        /// g:<d>,<n> or p:<n>
        #[arg(long)]
        variety: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariant {
    Euler,
    Chiy,
    Poincare,
}

#[derive(Args, Debug)]
pub struct TopologyArgs {
    pub invariant: Invariant,
    #[command(flatten)]
    pub target: VarietyArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a subcommand that ran to completion.
enum Done {
    Ok,
    Failed,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match thread_count(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(Done::Ok) => EXIT_OK,
        Ok(Done::Failed) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    let t = match flag {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| format!("{THREADS_ENV} must be a positive integer"))?),
            Err(_) => None,
        },
    };
    if t == Some(0) {
        return Err("thread count must be positive".into());
    }
    Ok(t)
}

fn dispatch(cmd: Command) -> tautsys_core::Result<Done> {
    match cmd {
        Command::Build(a) => build(a),
        Command::Period(a) => period(a),
        Command::Verify(a) => verify(a),
        Command::Volform { action: VolformAction::Check { variety, out } } => volform(&variety, out.as_deref()),
        Command::Topology(a) => topology(a),
        Command::Selftest => Ok(selftest()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> tautsys_core::Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Factor multidegrees from `--ci`, or `None` for the anticanonical
/// hypersurface.
pub fn parse_ci(x: &Variety, ci: Option<&str>) -> tautsys_core::Result<Option<Vec<Vec<usize>>>> {
    let Some(text) = ci else { return Ok(None) };
    let bad = || Error::InvalidDescriptor(format!("--ci {text}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let degrees = if x.steps().len() <= 1 {
        text.split(',').map(|s| num(s).map(|d| vec![d])).collect::<tautsys_core::Result<Vec<_>>>()?
    } else {
        text.split(';')
            .map(|f| f.split(',').map(num).collect::<tautsys_core::Result<Vec<_>>>())
            .collect::<tautsys_core::Result<Vec<_>>>()?
    };
    if degrees.is_empty() {
        return Err(bad());
    }
    Ok(Some(degrees))
}

fn build(a: BuildArgs) -> tautsys_core::Result<Done> {
    let x = Variety::parse(&a.target.variety)?;
    let ci = parse_ci(&x, a.target.ci.as_deref())?;
    let sys = match (&x, ci) {
        (Variety::Toric(t), None) => {
            let mut beta = vec![rat(0); t.a.rows()];
            beta[0] = rat(-1);
            build_gkz(t, &beta, a.box_degree)?
        }
        (Variety::Toric(_), Some(_)) => return Err(Error::Unsupported("--ci with toric input".into())),
        (_, None) => build_flag_system(&x, a.seed)?,
        (_, Some(md)) => {
            let betas = vec![Rat::from_integer(1.into()); md.len()];
            build_ci_system(&x, &md, &betas, a.seed)?
        }
    };
    emit(&to_canonical_string(&sys.to_json())?, a.out.as_deref())?;
    Ok(Done::Ok)
}

fn period(a: PeriodArgs) -> tautsys_core::Result<Done> {
    let x = Variety::parse(&a.target.variety)?;
    let ci = parse_ci(&x, a.target.ci.as_deref())?;
    let s = match (&x, ci) {
        (Variety::Toric(t), None) => toric_period_series(t, a.order)?,
        (Variety::Toric(_), Some(_)) => return Err(Error::Unsupported("--ci with toric input".into())),
        (_, None) => chart_period_series(&x, a.order)?,
        (_, Some(md)) => ci_period_series(&x, &md, a.order)?,
    };
    emit(&to_canonical_string(&s.to_json())?, a.out.as_deref())?;
    Ok(Done::Ok)
}

fn verify(a: VerifyArgs) -> tautsys_core::Result<Done> {
    let sys: SystemJson = serde_json::from_str(&fs::read_to_string(&a.system)?)?;
    let sys = TautSystem::from_json(&sys)?;
    let series: SeriesJson = serde_json::from_str(&fs::read_to_string(&a.series)?)?;
    let series = SparseSeries::from_json(&series)?;
    let report = annihilation_report(&sys, &series)?;
    for line in report.summary() {
        eprintln!("{line}");
    }
    emit(&to_canonical_string(&report)?, a.out.as_deref())?;
    Ok(if report.passed { Done::Ok } else { Done::Failed })
}

fn volform(desc: &str, out: Option<&Path>) -> tautsys_core::Result<Done> {
    let (d, n) = match Variety::parse(desc)? {
        Variety::Grassmannian { d, n } => (d, n),
        _ => return Err(Error::Unsupported("volume forms are implemented for Grassmannians".into())),
    };
    let report = volform_report(d, n)?;
    emit(&to_canonical_string(&report)?, out)?;
    Ok(if report.passed { Done::Ok } else { Done::Failed })
}

fn ints(v: &[Int]) -> Vec<String> {
    v.iter().map(Int::to_string).collect()
}

fn topology(a: TopologyArgs) -> tautsys_core::Result<Done> {
    let x = Variety::parse(&a.target.variety)?;
    let degrees: Vec<usize> = match parse_ci(&x, a.target.ci.as_deref())? {
        Some(md) if md.iter().all(|d| d.len() == 1) => md.into_iter().map(|d| d[0]).collect(),
        Some(_) => return Err(Error::Unsupported("invariants of complete intersections in flag varieties".into())),
        None => x.ambient().into_iter().collect(),
    };
    let value: Value = match a.invariant {
        Invariant::Euler => {
            json!({"variety": x.descriptor(), "degrees": degrees, "euler": euler_char_ci(&x, &degrees)?.to_string()})
        }
        Invariant::Chiy => {
            let c = chi_y_genus_ci(&x, &degrees)?;
            json!({"variety": x.descriptor(), "degrees": degrees, "chi_y": ints(&c), "palindromic": is_palindromic(&c)})
        }
        Invariant::Poincare => json!({"variety": x.descriptor(), "poincare": ints(&poincare_polynomial(&x)?)}),
    };
    emit(&to_canonical_string(&value)?, a.out.as_deref())?;
    Ok(Done::Ok)
}

fn check(name: &str, result: Result<String, String>) -> bool {
    match result {
        Ok(detail) => {
            println!("PASS  {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL  {name}: {detail}");
            false
        }
    }
}

fn annihilation(sys: tautsys_core::Result<TautSystem>, s: tautsys_core::Result<SparseSeries>) -> Result<String, String> {
    let sys = sys.map_err(|e| e.to_string())?;
    let s = s.map_err(|e| e.to_string())?;
    let r = annihilation_report(&sys, &s).map_err(|e| e.to_string())?;
    let summary = r.summary().join("; ");
    if r.passed {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn selftest() -> Done {
    let g24 = Variety::Grassmannian { d: 2, n: 4 };
    let p2 = Variety::Grassmannian { d: 1, n: 3 };
    let mut ok = true;
    ok &= check(
        "P2 extended GKZ kills the toric period, T = 8",
        annihilation(build_extended_gkz(3, 3), ToricData::projective(3).and_then(|t| toric_period_series(&t, 8))),
    );
    ok &= check(
        "G(2,4) system kills the chart period, T = 3",
        annihilation(build_flag_system(&g24, 0), chart_period_series(&g24, 3)),
    );
    ok &= check("toric and chart periods agree for P^1..P^3, T = 6", {
        (2..=4)
            .map(|n| {
                let t = ToricData::projective(n).and_then(|t| toric_period_series(&t, 6));
                let c = chart_period_series(&Variety::Grassmannian { d: 1, n }, 6);
                match (t, c) {
                    (Ok(t), Ok(c)) if t == c => Ok(()),
                    (Ok(_), Ok(_)) => Err(format!("P^{} differs", n - 1)),
                    (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|_| "equal".to_string())
    });
    ok &= check("G(2,4) closed-form reading", {
        g24_interpretation_report(3).map_err(|e| e.to_string()).and_then(|r| {
            let m: Vec<String> = r.iter().filter(|(_, m)| m.is_none()).map(|(i, _)| i.to_string()).collect();
            if m.len() == 1 {
                Ok(m[0].clone())
            } else {
                Err(format!("{} readings match", m.len()))
            }
        })
    });
    ok &= check("volume forms of G(1,2), G(1,3), G(2,4)", {
        [(1, 2), (1, 3), (2, 4)]
            .iter()
            .map(|&(d, n)| match volform_report(d, n) {
                Ok(r) if r.passed => Ok(format!("G({d},{n}) sign {:+}", r.global_sign.unwrap_or(0))),
                Ok(r) => Err(format!("G({d},{n}): {r:?}")),
                Err(e) => Err(e.to_string()),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.join(", "))
    });
    ok &= check("rank numbers", {
        let pr = period_sheaf_rank_pn(4).map(|r| r.rank);
        let chain = (2..=12).all(|n| period_sheaf_rank_pn(n).is_ok_and(|r| r.strict && r.weak));
        if degree_grassmannian(2, 4) == Int::from(2)
            && rank_bound_grassmannian(2, 4) == Int::from(512)
            && pr.is_ok_and(|r| r == Int::from(204))
            && chain
        {
            Ok("deg 2, bound 512, period rank 204".into())
        } else {
            Err("mismatch".into())
        }
    });
    ok &= check("topology", {
        let run = || -> tautsys_core::Result<Result<String, String>> {
            let cubic = euler_char_ci(&p2, &[3])?;
            let quintic = euler_char_ci(&Variety::Grassmannian { d: 1, n: 5 }, &[5])?;
            let oracle = pn_euler_oracle(4, &[5])?;
            let a = euler_char_ci(&g24, &[4])?;
            let b = euler_char_ci(&Variety::Grassmannian { d: 1, n: 6 }, &[2, 4])?;
            let cy = chi_y_genus_ci(&g24, &[4])?;
            let good = cubic == Int::from(0)
                && quintic == Int::from(-200)
                && oracle == quintic
                && a == b
                && eval_poly(&cy, -1) == a
                && is_palindromic(&cy);
            let detail = format!("cubic {cubic}, quintic {quintic}, G(2,4) {a}, CI(2,4) {b}");
            Ok(if good { Ok(detail) } else { Err(detail) })
        };
        run().unwrap_or_else(|e| Err(e.to_string()))
    });
    ok &= check("Lie closure", {
        let systems = [build_extended_gkz(3, 3), build_flag_system(&g24, 0)];
        systems
            .into_iter()
            .map(|s| s.map_err(|e| e.to_string()).map(|s| lie_closure_report(&s)))
            .collect::<Result<Vec<_>, _>>()
            .and_then(|r| {
                if r.iter().all(|r| r.passed) {
                    Ok(format!("{} pairs", r.iter().map(|r| r.pairs_checked).sum::<usize>()))
                } else {
                    Err("closure fails".into())
                }
            })
    });
    if ok {
        Done::Ok
    } else {
        Done::Failed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_grammar() {
        let p = Variety::parse("p:4").unwrap();
        assert_eq!(parse_ci(&p, Some("2,3")).unwrap(), Some(vec![vec![2], vec![3]]));
        assert_eq!(parse_ci(&p, None).unwrap(), None);
        assert!(parse_ci(&p, Some("2,,3")).is_err());
        let f = Variety::parse("f:1,2;3").unwrap();
        assert_eq!(parse_ci(&f, Some("1,1;2,2")).unwrap(), Some(vec![vec![1, 1], vec![2, 2]]));
    }

    #[test]
    fn explicit_thread_count_wins() {
        assert_eq!(thread_count(Some(3)), Ok(Some(3)));
        assert!(thread_count(Some(0)).is_err());
    }
}
