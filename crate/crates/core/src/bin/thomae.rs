use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use thomae::cx::lift;
use thomae::degeneration::{
    det_pb_limit_of, merge_family, period_limits_of, theta_factorization_of, DegenerationSettings,
};
use thomae::io::{load_config, periods_with_cache, PeriodCache, PeriodsSummary, Problem, Report};
use thomae::linalg::Mat;
use thomae::periods::PeriodSettings;
use thomae::selftest::run_selftest;
use thomae::theta::{theta_constant, Characteristic, ThetaSettings};
use thomae::thomae::{example7_check, example7_problem, verify_with_periods, Tolerances};
use thomae::tree::equidistribution;
use thomae::{Dd, Error, Real, Result};

#[derive(Parser)]
#[command(name = "thomae", version, about = "Period matrices, theta constants and Thomae's formula for cyclic trigonal curves")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// Target accuracy for quadrature and theta truncation (defaults depend on precision).
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Precision::Double)]
    precision: Precision,
    /// Period cache directory (else $THOMAE_CACHE_DIR, else ~/.cache/thomae).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Disable the period cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Seed for base-point search and intersection jitter.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the full JSON report instead of a summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    Double,
    Extended,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a configuration file and its tree.
    Validate { config: PathBuf },
    /// Period matrices P_A, P_B and τ.
    Periods { config: PathBuf },
    /// A theta constant ϑ(τ)[α;β].
    Theta {
        /// JSON file holding τ as [[[re, im], ...], ...] or a report with a "tau" field.
        #[arg(long)]
        tau: PathBuf,
        /// Characteristic "a1,a2,..;b1,b2,.." with entries in (1/6)ℤ.
        #[arg(long = "char")]
        chi: String,
    },
    /// Thomae's formula for the labeling in the file's "Lambda" field.
    Verify { config: PathBuf },
    /// Limits along the family merging terminals i and i+1 at λ̃.
    Degenerate {
        config: PathBuf,
        /// 0-based index i of the first merged terminal.
        #[arg(long)]
        merge: usize,
        /// Merge point λ̃ as "re" or "re,im".
        #[arg(long, allow_hyphen_values = true)]
        tilde: String,
        /// Values of t in (0, 1], comma separated or repeated.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        t_seq: Option<Vec<f64>>,
    },
    /// The genus-2 worked example end to end, phase included.
    Example7,
    /// Closed-form constants and worked examples, re-derived.
    Selftest,
}

struct Output {
    report: serde_json::Value,
    summary: String,
    /// Exit with the verification code when false.
    pass: bool,
}

fn output<T: Serialize>(report: &Report<T>, summary: String, pass: bool) -> Output {
    Output { report: serde_json::to_value(report).expect("report serializes"), summary, pass }
}

struct Session<'a> {
    opts: &'a Opts,
    cache: Option<PeriodCache>,
}

impl Session<'_> {
    fn periods_settings<R: Real>(&self) -> PeriodSettings {
        let mut s = PeriodSettings::for_precision::<R>();
        s.seed = self.opts.seed;
        if let Some(e) = self.opts.eps {
            s.quad.tol = e;
        }
        s
    }

    fn theta_settings<R: Real>(&self) -> ThetaSettings {
        let mut s = ThetaSettings::for_precision::<R>();
        if let Some(e) = self.opts.eps {
            s.eps = e;
        }
        s
    }

    fn load(&self, path: &Path) -> Result<Problem> {
        let p = load_config(path)?;
        p.tree.validate(&p.config).into_result()?;
        Ok(p)
    }
}

fn c2(z: Complex64) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}

fn run<R: Real>(cmd: &Cmd, s: &Session) -> Result<Output> {
    if let Some(e) = s.opts.eps {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::invalid(format!("--eps {e} must lie in (0, 1)")));
        }
    }
    let settings = |extra: serde_json::Value| {
        json!({ "periods": s.periods_settings::<R>(), "theta": s.theta_settings::<R>(), "extra": extra })
    };
    match cmd {
        Cmd::Validate { config } => {
            let p = load_config(config)?;
            let v = p.tree.validate(&p.config);
            let summary = match v.genus {
                Some(g) if v.valid => format!("valid, genus {g}"),
                _ => v.failures().join("; "),
            };
            if !v.valid {
                return Err(Error::invalid(summary));
            }
            Ok(output(&Report::new::<R>("validate", Some(&p.hash), json!({}), v), summary, true))
        }
        Cmd::Periods { config } => {
            let p = s.load(config)?;
            let (pd, _) = periods_with_cache::<R>(s.cache.as_ref(), &p.config, &p.tree, &s.periods_settings::<R>())?;
            let sum = PeriodsSummary::of(&pd);
            let text = format!(
                "genus {}, base point {}, cond(P_B) {:.3e}, τ = {:?}",
                sum.genus,
                c2(pd.spider.base),
                sum.cond_b,
                sum.tau
            );
            Ok(output(&Report::new::<R>("periods", Some(&p.hash), settings(json!({})), sum), text, true))
        }
        Cmd::Theta { tau, chi } => {
            let text = std::fs::read_to_string(tau)?;
            let doc: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::Schema { path: tau.display().to_string(), msg: e.to_string() })?;
            let m = find_tau(&doc).ok_or_else(|| Error::Schema {
                path: "tau".into(),
                msg: "expected a square matrix of [re, im] pairs, bare or under \"tau\" or \"result.tau\"".into(),
            })?;
            let chi = Characteristic::parse(chi)?;
            let tau: Mat<R> = Mat::from_rows(m.iter().map(|r| r.iter().map(|&z| lift(z)).collect()).collect());
            let th = theta_constant(&tau, &chi, &s.theta_settings::<R>())?;
            let v = Complex64::new(th.value.re.to_f64(), th.value.im.to_f64());
            let res = json!({
                "characteristic": chi.to_string(),
                "value": [v.re, v.im],
                "sixth_power": [v.powi(6).re, v.powi(6).im],
                "tail_bound": th.bound,
                "radius": th.radius,
                "lattice_points": th.points,
            });
            let summary = format!("ϑ{chi} = {}", c2(v));
            Ok(output(&Report::new::<R>("theta", None, json!({ "theta": s.theta_settings::<R>() }), res), summary, true))
        }
        Cmd::Verify { config } => {
            let p = s.load(config)?;
            let lambda = p.require_labeling()?;
            let (pd, _) = periods_with_cache::<R>(s.cache.as_ref(), &p.config, &p.tree, &s.periods_settings::<R>())?;
            let tol = Tolerances::for_precision::<R>();
            let v = verify_with_periods(&p.config, &p.tree, lambda, &pd, &s.theta_settings::<R>(), &tol)?;
            let summary = format!(
                "{}: χ = {}, |r⁶/κ^{{6g}} − 1| = {:.2e}, ||r|/|κ|^g − 1| = {:.2e}",
                if v.pass { "PASS" } else { "FAIL" },
                v.characteristic,
                v.phase_test,
                v.modulus_dev
            );
            let pass = v.pass;
            let res = json!({ "verification": v, "periods": PeriodsSummary::of(&pd) });
            Ok(output(&Report::new::<R>("verify", Some(&p.hash), settings(json!({ "tolerances": tol })), res), summary, pass))
        }
        Cmd::Degenerate { config, merge, tilde, t_seq } => {
            let p = s.load(config)?;
            let tilde = parse_complex(tilde)?;
            let mut ds = DegenerationSettings::for_precision::<R>();
            ds.seed = s.opts.seed;
            if let Some(t) = t_seq {
                ds.t_seq = t.clone();
            }
            if let Some(e) = s.opts.eps {
                ds.quad.tol = e;
            }
            let fam = merge_family::<R>(&p.config, &p.tree, *merge, tilde, &ds)?;
            let periods = period_limits_of(&p.config, &fam, &ds)?;
            let det = det_pb_limit_of(&p.config, &fam, &ds)?;
            let theta = match &p.labeling {
                Some(l) => {
                    let k = l.coeffs();
                    if !equidistribution(p.config.indices(), k).balanced {
                        json!({ "skipped": "Λ is not equi-distributed" })
                    } else if k[*merge] == k[*merge + 1] {
                        json!({ "skipped": "k_i = k_{i+1}" })
                    } else {
                        serde_json::to_value(theta_factorization_of(&p.tree, l, &fam, &ds)?).expect("serializes")
                    }
                }
                None => json!({ "skipped": "no \"Lambda\" field" }),
            };
            let theta_pass = theta.get("pass").and_then(|x| x.as_bool()).unwrap_or(true);
            let pass = periods.pass && det.pass.unwrap_or(true) && theta_pass;
            let summary = format!(
                "{}: periods {}, det P_B limit {}, theta factorization {}",
                if pass { "PASS" } else { "FAIL" },
                periods.pass,
                det.rel_error.map_or("no closed form".into(), |e| format!("{e:.2e}")),
                theta.get("rel_error").and_then(|x| x.as_f64()).map_or("skipped".into(), |e| format!("{e:.2e}")),
            );
            let res = json!({ "period_limits": periods, "det_pb_limit": det, "theta_factorization": theta });
            Ok(output(&Report::new::<R>("degenerate", Some(&p.hash), json!({ "degeneration": ds }), res), summary, pass))
        }
        Cmd::Example7 => {
            let (c, t, l) = example7_problem();
            let (pd, _) = periods_with_cache::<R>(s.cache.as_ref(), &c, &t, &s.periods_settings::<R>())?;
            let tol = Tolerances::for_precision::<R>();
            let r = example7_check(&c, &t, &l, &pd, &s.theta_settings::<R>(), &tol)?;
            let summary = format!(
                "{}: ϑ{}⁶ vs closed-form right-hand side, relative error {:.2e} (tolerance {:.0e})",
                if r.pass { "PASS" } else { "FAIL" },
                r.verification.characteristic,
                r.closed_form_rel_error,
                r.closed_form_tol
            );
            let pass = r.pass;
            let res = json!({ "example": r, "periods": PeriodsSummary::of(&pd) });
            Ok(output(&Report::new::<R>("example7", None, settings(json!({ "tolerances": tol })), res), summary, pass))
        }
        Cmd::Selftest => {
            let r = run_selftest();
            let summary = r
                .checks
                .iter()
                .map(|c| format!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail))
                .collect::<Vec<_>>()
                .join("\n");
            let pass = r.pass;
            Ok(output(&Report::new::<R>("selftest", None, json!({}), r), summary, pass))
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| Error::invalid(format!("'{s}' is not a complex number \"re\" or \"re,im\"")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Error::invalid(format!("'{s}' is not a complex number \"re\" or \"re,im\""))),
    }
}

fn find_tau(doc: &serde_json::Value) -> Option<Vec<Vec<Complex64>>> {
    let cands = [Some(doc), doc.get("tau"), doc.get("result").and_then(|r| r.get("tau"))];
    cands.into_iter().flatten().find_map(|v| {
        let m: Vec<Vec<[f64; 2]>> = serde_json::from_value(v.clone()).ok()?;
        let n = m.len();
        (n > 0 && m.iter().all(|r| r.len() == n))
            .then(|| m.into_iter().map(|r| r.into_iter().map(|[a, b]| Complex64::new(a, b)).collect()).collect())
    })
}

fn error_object(e: &Error) -> serde_json::Value {
    let mut o = json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() } });
    match e {
        Error::Schema { path, .. } => o["error"]["path"] = json!(path),
        Error::Numerical { stage, .. } => o["error"]["stage"] = json!(stage),
        _ => {}
    }
    o
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let msg = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", error_object(&Error::invalid(msg)));
            return ExitCode::from(1);
        }
    };
    let cache = if cli.opts.no_cache { None } else { PeriodCache::locate(cli.opts.cache_dir.as_deref()) };
    let session = Session { opts: &cli.opts, cache };
    let res = match cli.opts.precision {
        Precision::Double => run::<f64>(&cli.cmd, &session),
        Precision::Extended => run::<Dd>(&cli.cmd, &session),
    };
    match res {
        Ok(out) => {
            let text = if cli.opts.json { serde_json::to_string_pretty(&out.report).expect("json") } else { out.summary.clone() };
            // A closed pipe downstream is not our failure.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if out.pass {
                ExitCode::SUCCESS
            } else {
                let e = Error::Verification(out.summary.lines().filter(|l| l.starts_with("FAIL")).collect::<Vec<_>>().join("; "));
                eprintln!("{}", error_object(&e));
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("{}", error_object(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
