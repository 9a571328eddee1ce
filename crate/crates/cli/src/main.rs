//! `nmc`: encode, tamper and certify with the non-malleable code.

mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nmc_core::amd::{security_oracle, AmdParams};
use nmc_core::analysis::{self, Mode, DEFAULT_SAMPLES};
use nmc_core::gf2::BitWord;
use nmc_core::lecss::{certify_all, search_lecss, LecssParams, LINEARITY_EXHAUSTIVE_MAX_N};
use nmc_core::nmcode::{Outcome, Scheme, SchemeParams};
use nmc_core::scalar::{parse_rational, rational_string};
use nmc_core::tamper::TamperFunction;
use nmc_core::{NmcError, Probability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CERTIFICATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nmc",
    version,
    about = "Non-malleable codes against bitwise and affine tampering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print a human-readable table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a message with seeded randomness.
    Encode {
        #[arg(long)]
        params: PathBuf,
        /// Message in word text form (`hex` or `len:hex`).
        #[arg(long)]
        message: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decode a codeword.
    Decode {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        codeword: String,
    },
    /// Apply a tampering function to a codeword.
    Tamper {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        codeword: String,
    },
    /// Certify non-malleability of a scheme against one tampering function.
    Analyze {
        #[arg(long)]
        params: PathBuf,
        #[arg(long = "fn")]
        function: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
        /// Include the per-message statistical distances.
        #[arg(long)]
        per_s: bool,
    },
    /// Evaluate the epsilon bound, and the tail bound when `--p` and `--r` are given.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: usize,
        /// AMD error probability, as `a/b`, an integer or a decimal.
        #[arg(long)]
        rho: String,
        #[arg(long, requires = "r")]
        p: Option<usize>,
        #[arg(long, requires = "p")]
        r: Option<usize>,
    },
    /// Randomized greedy search for a LECSS.
    SearchLecss {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Run the certifiers and set the `certified` flag.
        #[arg(long)]
        certify: bool,
        /// Pair the result with AMD(m, u) and emit scheme parameters.
        #[arg(long, requires = "amd_u")]
        amd_m: Option<u32>,
        #[arg(long, requires = "amd_m")]
        amd_u: Option<u32>,
    },
    /// Run the linearity, distance and secrecy certifiers.
    CertifyLecss {
        /// Scheme or bare LECSS parameters.
        #[arg(long)]
        params: PathBuf,
        /// Needed when linearity is sampled (n > 12).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exhaustive AMD security audit.
    AmdAudit {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        u: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeKind {
    Exact,
    Sampled,
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value_t = ModeKind::Exact)]
    mode: ModeKind,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
}

/// A failed command: exit code and message for stderr.
struct Failure {
    code: u8,
    message: String,
    report: Option<Value>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
            report: None,
        }
    }
}

impl From<NmcError> for Failure {
    fn from(e: NmcError) -> Self {
        let code = match e {
            NmcError::Parse(_) => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

/// A successful command's report and exit code.
struct Report {
    value: Value,
    code: u8,
}

impl Report {
    fn ok(value: Value) -> Self {
        Self { value, code: 0 }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::usage(format!("--seed is required for {what}")))
}

fn load_scheme(path: &Path) -> Result<Scheme, Failure> {
    Ok(Scheme::new(SchemeParams::from_json(&read(path)?)?)?)
}

fn load_function(path: &Path) -> Result<TamperFunction, Failure> {
    Ok(TamperFunction::from_json(&read(path)?)?)
}

fn check_valid(f: &TamperFunction) -> Result<(), Failure> {
    let validation = f.validate();
    if validation.is_ok() {
        return Ok(());
    }
    let msgs: Vec<String> = validation
        .violations
        .iter()
        .map(ToString::to_string)
        .collect();
    Err(Failure {
        code: EXIT_VALIDATION,
        message: msgs.join("; "),
        report: Some(json!({"valid": false, "validation": to_json(&validation)})),
    })
}

fn word(text: &str) -> Result<BitWord, Failure> {
    Ok(BitWord::from_text(text)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn run(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Encode {
            params,
            message,
            seed,
        } => {
            let scheme = load_scheme(&params)?;
            let seed = require_seed(seed, "encode")?;
            let s = word(&message)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (c, rand) = scheme.enc_random(&s, &mut rng)?;
            Ok(Report::ok(json!({
                "message": s.to_text(),
                "codeword": c.to_text(),
                "x": rand.x.value(),
                "r": rand.r.to_text(),
                "seed": seed,
            })))
        }
        Command::Decode { params, codeword } => {
            let scheme = load_scheme(&params)?;
            let c = word(&codeword)?;
            let out = Outcome::from_decoded(scheme.dec(&c)?);
            Ok(Report::ok(
                json!({"codeword": c.to_text(), "outcome": out.label()}),
            ))
        }
        Command::Tamper { function, codeword } => {
            let f = load_function(&function)?;
            check_valid(&f)?;
            let c = word(&codeword)?;
            let out = f.apply(&c)?;
            Ok(Report::ok(
                json!({"input": c.to_text(), "output": out.to_text()}),
            ))
        }
        Command::Analyze {
            params,
            function,
            mode,
            per_s,
        } => {
            let scheme = load_scheme(&params)?;
            let f = load_function(&function)?;
            let mode = match mode.mode {
                ModeKind::Exact => Mode::Exact,
                ModeKind::Sampled => Mode::Sampled {
                    samples: mode.samples,
                    seed: require_seed(mode.seed, "sampled mode")?,
                },
            };
            check_valid(&f)?;
            let mut report = analysis::nm_certify(&scheme, &f, mode)?;
            if !per_s {
                report.per_s_sd = None;
            }
            // a failure only counts when the premises make the threshold meaningful
            let code = if report.pass || !report.premises.all_met() {
                0
            } else {
                EXIT_CERTIFICATION
            };
            Ok(Report {
                value: to_json(&report),
                code,
            })
        }
        Command::Bound { n, d, t, rho, p, r } => {
            let rho = parse_rational(&rho)
                .ok_or_else(|| Failure::usage(format!("invalid rho {rho:?}")))?;
            let bound = analysis::epsilon_bound(rho.to_f64_lossy(), n, d, t);
            let mut value = to_json(&bound);
            let obj = value.as_object_mut().expect("object");
            obj.insert("n".into(), json!(n));
            obj.insert("d".into(), json!(d));
            obj.insert("t".into(), json!(t));
            obj.insert("rho_exact".into(), json!(rational_string(&rho)));
            if let Some(eps) = analysis::epsilon_bound_exact(&rho, n, d, t) {
                obj.insert("epsilon_exact".into(), json!(rational_string(&eps)));
            }
            if let (Some(p), Some(r)) = (p, r) {
                obj.insert("p".into(), json!(p));
                obj.insert("r".into(), json!(r));
                obj.insert(
                    "tail_bound".into(),
                    json!(analysis::tail_bound::<f64>(n, d, p, r, t)),
                );
                if let Some(tb) = analysis::tail_bound_exact(n, d, p, r, t) {
                    obj.insert("tail_bound_exact".into(), json!(rational_string(&tb)));
                }
            }
            Ok(Report::ok(value))
        }
        Command::SearchLecss {
            n,
            k,
            d,
            t,
            trials,
            seed,
            certify,
            amd_m,
            amd_u,
        } => {
            let seed = require_seed(seed, "search-lecss")?;
            let mut lecss = search_lecss(n, k, d, t, trials, seed)?;
            if certify {
                certify_all(&mut lecss, seed)?;
            }
            match (amd_m, amd_u) {
                (Some(m), Some(u)) => {
                    let params = SchemeParams::new(AmdParams::new(m, u)?, lecss)?;
                    Ok(Report::ok(to_json(&params)))
                }
                _ => Ok(Report::ok(to_json(&lecss))),
            }
        }
        Command::CertifyLecss { params, seed } => {
            let text = read(&params)?;
            let raw: Value =
                serde_json::from_str(&text).map_err(|e| Failure::usage(e.to_string()))?;
            let mut lecss = match raw.get("lecss") {
                Some(_) => SchemeParams::from_json(&text)?.lecss,
                None => serde_json::from_value::<LecssParams>(raw)
                    .map_err(|e| Failure::usage(e.to_string()))?,
            };
            let seed = if lecss.n > LINEARITY_EXHAUSTIVE_MAX_N {
                require_seed(seed, "sampled linearity (n > 12)")?
            } else {
                seed.unwrap_or(0)
            };
            let certs = certify_all(&mut lecss, seed)?;
            let code = if lecss.certified {
                0
            } else {
                EXIT_CERTIFICATION
            };
            Ok(Report {
                value: json!({
                    "n": lecss.n,
                    "k_msg": lecss.k_msg,
                    "z": lecss.z,
                    "d": lecss.d,
                    "t": lecss.t,
                    "certified": lecss.certified,
                    "certificates": to_json(&certs),
                }),
                code,
            })
        }
        Command::AmdAudit { m, u } => {
            let params = AmdParams::new(m, u)?;
            let audit = security_oracle(&params)?;
            let code = if audit.holds() { 0 } else { EXIT_CERTIFICATION };
            Ok(Report {
                value: json!({
                    "m": m,
                    "u": u,
                    "max_acceptance": audit.max_acceptance.to_f64_lossy(),
                    "max_acceptance_exact": rational_string(&audit.max_acceptance),
                    "rho": audit.rho.to_f64_lossy(),
                    "rho_exact": rational_string(&audit.rho),
                    "worst_message": audit.worst_message.to_text(),
                    "worst_delta": audit.worst_delta.to_text(),
                    "holds": audit.holds(),
                }),
                code,
            })
        }
    }
}

fn emit(value: &Value, pretty: bool, output: Option<&Path>) -> Result<(), Failure> {
    let text = if pretty {
        table::render(value)
    } else {
        format!("{value}\n")
    };
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("NMC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!("NMC_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(report) => match emit(&report.value, cli.pretty, cli.output.as_deref()) {
            Ok(()) => ExitCode::from(report.code),
            Err(f) => {
                eprintln!("error: {}", f.message);
                ExitCode::from(f.code)
            }
        },
        Err(f) => {
            if let Some(report) = &f.report {
                let _ = emit(report, cli.pretty, cli.output.as_deref());
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
