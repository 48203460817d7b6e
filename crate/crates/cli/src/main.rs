use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lqdim::constructors::{
    imubsi_check, imubsi_nu, jensen_l1_check, jensen_lq_check, packing_measure_lower, packing_measure_upper, CheckResult,
};
use lqdim::convexdim::{profile_estimate, summarize, RateProfile};
use lqdim::counting::{box_dim_estimate, moran_beta};
use lqdim::geometry::{Norm, SetSpec};
use lqdim::measures::{fm_distance, iv_root, lq_profile, stability_probe, FiniteMeasure, IvRoot, ProbeConfig, QValue};
use lqdim::separation::{bsi_estimate, components};
use lqdim::{parse_number, Error};
use serde_json::{Map, Value};

#[derive(Parser)]
#[command(name = "lqdim", version, about = "Box, separation, convex and Lq dimensions of finite descriptions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Linf,
    L2,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Norm {
        match n {
            NormArg::Linf => Norm::Chebyshev,
            NormArg::L2 => Norm::Euclidean,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, value_enum, default_value = "linf")]
    norm: NormArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Box-counting series and dimension estimates.
    Dims {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        levels: String,
        #[arg(long, default_value_t = 2)]
        base: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Component counts of dyadic covers and the separation index.
    Bsi {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        levels: String,
        /// Dump the components at this level instead.
        #[arg(long)]
        dump: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Local uniform, convex and maximal convex upper box dimensions.
    Convdim {
        #[arg(long, conflicts_with = "set")]
        profile: Option<PathBuf>,
        /// A union whose members are the separated components.
        #[arg(long, requires = "levels")]
        set: Option<PathBuf>,
        #[arg(long)]
        levels: Option<String>,
        #[arg(long, default_value_t = 2)]
        base: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Lq profile of a measure over a list of radii or dyadic levels.
    Lq {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        /// Comma-separated radii.
        #[arg(long, conflicts_with = "levels")]
        r: Option<String>,
        /// Radii 2^-n for n in A:B.
        #[arg(long)]
        levels: Option<String>,
        /// Solve phi = tau between the first two radii instead.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Fortet-Mourier distance between two measures.
    Dist {
        #[arg(long, num_args = 2, required = true)]
        measure: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a measure with certified ball-mass bounds.
    Construct {
        #[command(subcommand)]
        what: Construct,
    },
    /// Evaluate an inequality; exits with 4 when it fails.
    Check {
        #[command(subcommand)]
        what: Check,
    },
    /// Random perturbation probe of the stability bounds.
    Probe {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        r: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Similarity dimension of a list of contraction ratios.
    Moran {
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Construct {
    PackingUpper {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        t: String,
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        common: Common,
    },
    PackingLower {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        t: String,
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        common: Common,
    },
    Nu {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Check {
    Imubsi {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        theta: String,
        #[command(flatten)]
        common: Common,
    },
    JensenLq {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        r: String,
        #[arg(long)]
        q: String,
        #[command(flatten)]
        common: Common,
    },
    JensenL1 {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        r: String,
        #[command(flatten)]
        common: Common,
    },
}

/// What a successful run prints, and whether a check failed.
struct Output {
    csv: String,
    json: Option<String>,
    failed: bool,
}

impl Output {
    fn csv(csv: String) -> Self {
        Output { csv, json: None, failed: false }
    }

    fn check(c: CheckResult) -> Self {
        Output { failed: !c.pass, csv: c.to_csv(), json: None }
    }

    fn render(&self, format: Format) -> String {
        match (format, &self.json) {
            (Format::Csv, _) => self.csv.clone(),
            (Format::Json, Some(j)) => j.clone(),
            (Format::Json, None) => csv_to_json(&self.csv),
        }
    }
}

/// One object per CSV row keyed by the header; numeric cells become
/// numbers and empty cells null.
fn csv_to_json(csv: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let rows: Vec<Value> = lines
        .map(|line| {
            let mut obj = Map::new();
            for (k, cell) in header.iter().zip(line.split(',')) {
                let v = if cell.is_empty() {
                    Value::Null
                } else if let Some(x) = cell.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                    Value::Number(x)
                } else if let Ok(b) = cell.parse::<bool>() {
                    Value::Bool(b)
                } else {
                    Value::String(cell.to_string())
                };
                obj.insert(k.to_string(), v);
            }
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("json");
    s.push('\n');
    s
}

fn levels(s: &str) -> Result<(u32, u32), Error> {
    let bad = || Error::InvalidInput(format!("levels must look like A:B, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn q_value(s: &str) -> Result<QValue, Error> {
    s.parse()
}

fn real_q(s: &str) -> Result<f64, Error> {
    match q_value(s)? {
        QValue::Real(q) => Ok(q),
        _ => Err(Error::InvalidInput(format!("q must be finite here, got '{s}'"))),
    }
}

fn radii(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',').map(parse_number).collect()
}

fn run(cmd: Cmd) -> Result<(Output, Format), Error> {
    Ok(match cmd {
        Cmd::Dims { set, levels: lv, base, common } => {
            let (a, b) = levels(&lv)?;
            let (series, est) = box_dim_estimate(&SetSpec::load(set)?, base, a, b)?;
            (Output::csv(series.to_csv() + &est.csv_rows()), common.format)
        }
        Cmd::Bsi { set, levels: lv, dump, common } => {
            let set = SetSpec::load(set)?;
            if let Some(n) = dump {
                return Ok((Output::csv(components(&set, n)?.to_csv()), common.format));
            }
            let (a, b) = levels(&lv)?;
            let (series, est) = bsi_estimate(&set, a, b)?;
            (Output::csv(series.to_csv() + &est.csv_rows()), common.format)
        }
        Cmd::Convdim { profile, set, levels: lv, base, common } => {
            let p = match (profile, set) {
                (Some(path), _) => RateProfile::load(path)?,
                (None, Some(path)) => {
                    let members = match SetSpec::load(path)? {
                        SetSpec::Union { members } => members,
                        other => vec![other],
                    };
                    let (a, b) = levels(lv.as_deref().unwrap_or(""))?;
                    profile_estimate(&members, base, a, b)?
                }
                (None, None) => return Err(Error::InvalidInput("give --profile or --set".into())),
            };
            (Output::csv(summarize(&p)?.to_csv()), common.format)
        }
        Cmd::Lq { measure, q, r, levels: lv, tau, common } => {
            let mu = FiniteMeasure::load(measure)?;
            let q = q_value(&q)?;
            let rs = match (r, lv) {
                (Some(r), _) => radii(&r)?,
                (None, Some(lv)) => {
                    let (a, b) = levels(&lv)?;
                    (a..=b).map(|n| (-(n as f64)).exp2()).collect()
                }
                (None, None) => return Err(Error::InvalidInput("give --r or --levels".into())),
            };
            if let Some(tau) = tau {
                if rs.len() != 2 {
                    return Err(Error::InvalidInput("--tau needs exactly two radii".into()));
                }
                let csv = match iv_root(&mu, q, parse_number(&tau)?, rs[0], rs[1], common.norm.into())? {
                    IvRoot::Root { r, phi } => format!("kind,r,phi,left,right\nroot,{r},{phi},,\n"),
                    IvRoot::Jump { radius, left, right } => format!("kind,r,phi,left,right\njump,{radius},,{left},{right}\n"),
                };
                return Ok((Output::csv(csv), common.format));
            }
            let prof = lq_profile(&mu, q, &rs, common.norm.into())?;
            let csv = prof.to_csv()
                + &format!("lower_window,{}\nupper_window,{}\nslope,{}\n", prof.lower_window, prof.upper_window, prof.slope_fit);
            (Output::csv(csv), common.format)
        }
        Cmd::Dist { measure, common } => {
            let mu = FiniteMeasure::load(&measure[0])?;
            let nu = FiniteMeasure::load(&measure[1])?;
            let d = fm_distance(&mu, &nu, common.norm.into())?;
            (Output::csv(format!("quantity,value\nfm,{}\nprimal,{}\ndual,{}\n", d.value(), d.primal, d.dual)), common.format)
        }
        Cmd::Construct { what } => {
            let (mu, format) = match what {
                Construct::PackingUpper { set, t, alpha, common } => {
                    (packing_measure_upper(&SetSpec::load(set)?, parse_number(&t)?, parse_number(&alpha)?)?.measure, common.format)
                }
                Construct::PackingLower { set, t, alpha, common } => {
                    (packing_measure_lower(&SetSpec::load(set)?, parse_number(&t)?, parse_number(&alpha)?)?.measure, common.format)
                }
                Construct::Nu { set, n, q, common } => (imubsi_nu(&SetSpec::load(set)?, n, real_q(&q)?)?.measure, common.format),
            };
            (Output { csv: mu.to_csv(), json: Some(mu.to_json()), failed: false }, format)
        }
        Cmd::Check { what } => match what {
            Check::Imubsi { set, n, q, measure, theta, common } => {
                let c = imubsi_check(&SetSpec::load(set)?, n, real_q(&q)?, &FiniteMeasure::load(measure)?, parse_number(&theta)?)?;
                (Output::check(c), common.format)
            }
            Check::JensenLq { measure, r, q, common } => {
                let c = jensen_lq_check(&FiniteMeasure::load(measure)?, None, parse_number(&r)?, real_q(&q)?, common.norm.into())?;
                (Output::check(c), common.format)
            }
            Check::JensenL1 { measure, r, common } => {
                let c = jensen_l1_check(&FiniteMeasure::load(measure)?, None, parse_number(&r)?, common.norm.into())?;
                (Output::check(c), common.format)
            }
        },
        Cmd::Probe { measure, r, q, seed, trials, common } => {
            let mut cfg = ProbeConfig::new(trials, seed);
            cfg.norm = common.norm.into();
            let rep = stability_probe(&FiniteMeasure::load(measure)?, parse_number(&r)?, real_q(&q)?, &cfg)?;
            (Output { failed: rep.delta.is_none(), csv: rep.to_csv(), json: None }, common.format)
        }
        Cmd::Moran { ratios, common } => {
            let rs: Vec<f64> = ratios.iter().map(|s| parse_number(s)).collect::<Result<_, _>>()?;
            (Output::csv(format!("quantity,value\nbeta,{}\n", moran_beta(&rs)?)), common.format)
        }
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_input_error() => 2,
        Error::Precondition(_) | Error::Domain(_) | Error::NotExact { .. } | Error::RefinementLimit { .. } | Error::SearchFailed(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok((out, format)) => {
            print!("{}", out.render(format));
            if out.failed {
                eprintln!("check failed");
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
