use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use distinct_powers::assemble::{build_window, decompose, verify_theorem};
use distinct_powers::delta::{delta_constant, expand_delta};
use distinct_powers::params::bound_report;
use distinct_powers::partition::{default_corollary1_prefix, verify_corollary1, verify_lemma3};
use distinct_powers::progression::{progression_c, verify_lemma6, SumMode};
use distinct_powers::residue::{residue_system, verify_lemma4_dp, DP_N_CAP, MATERIALIZE_N_CAP};
use distinct_powers::threshold::{find_threshold, ThresholdLimits};
use distinct_powers::{derive_params, Error, Params};

#[derive(Parser)]
#[command(name = "distinct-powers", version, about = "Exact verification toolkit for sums of distinct n-th powers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived constants and the explicit upper bound.
    Bound {
        #[arg(long)]
        n: u32,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Also print a bit-length report for exponents up to this value.
        #[arg(long)]
        report: Option<u32>,
    },
    /// Run one lemma verifier.
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
    /// Build and verify the window of `a` consecutive representable values.
    Window {
        #[arg(long)]
        n: u32,
        /// Write the window certificate as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Decompose an integer into distinct n-th powers (n = 2).
    Decompose {
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// The integer to decompose, decimal.
        #[arg(long)]
        x: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compute the threshold of completeness by exact reachability.
    Threshold {
        #[arg(long)]
        n: u32,
        /// Allow the heavy exponents (n = 5, 6).
        #[arg(long)]
        heavy: bool,
        /// Memory budget in GiB for the bit array.
        #[arg(long, default_value_t = 1)]
        mem_gb: u64,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Append `<n> <theta>` in OEIS b-file format to this path.
        #[arg(long)]
        bfile: Option<PathBuf>,
    },
    /// Run every verifier feasible at this exponent, in dependency order.
    All {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Adjacent-ratio inequalities by exact cross-multiplication.
    Lemma3 {
        #[arg(long)]
        n: u32,
    },
    /// Sigma(a) prefix check of the leftover sequence W.
    Corollary1 {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        prefix: Option<usize>,
    },
    /// Residue coverage: greedy representation plus exhaustive reachability.
    Lemma4 {
        #[arg(long)]
        n: u32,
        /// Write the full residue system as JSON to this path.
        #[arg(long)]
        emit_certs: Option<PathBuf>,
    },
    /// Difference-operator expansion and its constant value.
    Lemma5 {
        #[arg(long)]
        n: u32,
        /// Number of random anchors to evaluate.
        #[arg(long, default_value_t = 100)]
        samples: u64,
    },
    /// Arithmetic progression of subset sums with common difference a.
    Lemma6 {
        #[arg(long)]
        n: u32,
        /// Progression length; defaults to b.
        #[arg(long)]
        t: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Closed)]
        mode: ModeArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Iterate,
    Closed,
}

impl From<ModeArg> for SumMode {
    fn from(m: ModeArg) -> SumMode {
        match m {
            ModeArg::Iterate => SumMode::Iterate,
            ModeArg::Closed => SumMode::ClosedForm,
        }
    }
}

#[derive(Serialize)]
struct CheckEntry {
    name: String,
    status: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    subcommand: String,
    parameters: serde_json::Value,
    checks: Vec<CheckEntry>,
    status: String,
    wall_ms: u128,
    peak_mem_estimate_bytes: u64,
    artifacts: Vec<String>,
}

struct Run {
    subcommand: String,
    parameters: serde_json::Value,
    checks: Vec<CheckEntry>,
    artifacts: Vec<String>,
    started: Instant,
    mem_estimate: u64,
}

impl Run {
    fn new(subcommand: &str, parameters: serde_json::Value) -> Self {
        Run {
            subcommand: subcommand.into(),
            parameters,
            checks: Vec::new(),
            artifacts: Vec::new(),
            started: Instant::now(),
            mem_estimate: 0,
        }
    }

    fn check(&mut self, name: &str, ok: bool) {
        println!("{}: {}", name, if ok { "PASS" } else { "FAIL" });
        self.checks.push(CheckEntry {
            name: name.into(),
            status: if ok { "pass" } else { "fail" }.into(),
        });
    }

    fn artifact(&mut self, path: &std::path::Path) {
        self.artifacts.push(path.display().to_string());
    }

    fn finish(self) -> ExitCode {
        let all_pass = self.checks.iter().all(|c| c.status == "pass");
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: self.subcommand,
            parameters: self.parameters,
            checks: self.checks,
            status: if all_pass { "pass" } else { "fail" }.into(),
            wall_ms: self.started.elapsed().as_millis(),
            peak_mem_estimate_bytes: self.mem_estimate,
            artifacts: self.artifacts,
        };
        println!("{}", serde_json::to_string_pretty(&manifest).unwrap());
        if all_pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

/// Deterministic anchor stream for the lemma-5 sampling (SplitMix64).
fn anchor_stream(count: u64) -> impl Iterator<Item = u64> {
    let mut state = 0x9e3779b97f4a7c15u64;
    (0..count).map(move |_| {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    })
}

fn write_json<T: Serialize>(path: &PathBuf, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn run_bound(n: u32, as_json: bool, report: Option<u32>, run: &mut Run) -> Result<(), Error> {
    let p = derive_params(n)?;
    let bound = p.theorem_bound();
    if as_json {
        let payload = json!({
            "n": n,
            "a": p.a.to_str_radix(10),
            "b": p.b.to_str_radix(10),
            "r": p.r.to_str_radix(10),
            "alpha": p.alpha.to_str_radix(10),
            "bound": bound.to_str_radix(10),
        });
        println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    } else {
        println!("n     = {n}");
        println!("a     = {}", p.a);
        println!("b     = {}", p.b);
        println!("r     = {}", p.r);
        println!("alpha = {}", p.alpha);
        println!("bound = {bound}");
    }
    run.check("bound.evaluates", true);
    run.check("bound.exceeds_r_pow_n", bound > p.r.pow(n));
    if let Some(n_max) = report {
        for row in bound_report(n_max)? {
            println!("n = {}: bound has {} bits", row.n, row.bound_bits);
        }
    }
    Ok(())
}

fn run_lemma5(p: &Params, samples: u64, run: &mut Run) -> Result<(), Error> {
    let set = expand_delta(p.n)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "level": set.level,
            "scale": set.scale,
            "positives": set.positives,
            "negatives": set.negatives,
            "constant": p.a.to_str_radix(10),
        }))
        .unwrap()
    );
    let mut ok = true;
    for m in anchor_stream(samples) {
        if delta_constant(p.n, &BigUint::from(m))? != p.a {
            ok = false;
            break;
        }
    }
    run.check("lemma5.constant_anchor_independent", ok);
    Ok(())
}

fn run_lemma6(p: &Params, t: Option<u64>, mode: SumMode, run: &mut Run) -> Result<(), Error> {
    let t = t.map(BigUint::from).unwrap_or_else(|| p.b.clone());
    let cert = verify_lemma6(&t, p, mode)?;
    println!("{}", serde_json::to_string_pretty(&cert).unwrap());
    run.check("lemma6.c_bound", cert.bound_ok);
    run.check("lemma6.members_step_by_a", cert.members_ok);
    run.check("lemma6.blocks_disjoint", cert.blocks_disjoint);
    Ok(())
}

fn heavy_estimate_gb(n: u32) -> u64 {
    match n {
        5 => 1,
        6 => 4,
        _ => u64::MAX,
    }
}

fn run_threshold(
    n: u32,
    heavy: bool,
    mem_gb: u64,
    json_path: Option<PathBuf>,
    bfile: Option<PathBuf>,
    run: &mut Run,
) -> Result<(), Error> {
    if n >= 7 {
        return Err(Error::ResourceLimit(format!(
            "no published threshold for n = {n}; the search space is beyond desk scale"
        )));
    }
    if n >= 5 {
        if !heavy {
            return Err(Error::ResourceLimit(format!(
                "n = {n} is a heavy run (roughly {} GiB of bits and minutes to hours of folding); \
                 pass --heavy to proceed",
                heavy_estimate_gb(n)
            )));
        }
        if mem_gb < heavy_estimate_gb(n) {
            return Err(Error::ResourceLimit(format!(
                "n = {n} needs about {} GiB; raise --mem-gb",
                heavy_estimate_gb(n)
            )));
        }
    }
    let limits = ThresholdLimits::with_mem_gb(mem_gb);
    let (cert, rs) = find_threshold(n, &limits)?;
    run.mem_estimate = rs.cap_bits() / 8;
    println!("theta({n}) = {}", cert.theta);
    println!(
        "certificate: run of {} set bits after {} using bases <= {}, stabilized at {}",
        cert.run_length, cert.run_start, cert.m_star, cert.m_final
    );
    run.check("threshold.certificate", true);
    if let Some(path) = json_path {
        write_json(&path, &cert)?;
        run.artifact(&path);
    }
    if let Some(path) = bfile {
        let line = format!("{} {}\n", n, cert.theta);
        std::fs::write(&path, line)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
        run.artifact(&path);
    }
    Ok(())
}

fn run_all(n: u32, run: &mut Run) -> Result<(), Error> {
    let p = derive_params(n)?;
    let bound = p.theorem_bound();
    run.check("params", bound > p.r.pow(n));

    let prefix = default_corollary1_prefix(&p);
    run.check(
        "partition",
        verify_lemma3(&p).passed && verify_corollary1(&p, prefix)?.passed,
    );

    let mut delta_ok = true;
    for m in anchor_stream(100) {
        if delta_constant(n, &BigUint::from(m))? != p.a {
            delta_ok = false;
        }
    }
    run.check("delta", delta_ok);

    if n <= MATERIALIZE_N_CAP {
        let dp_ok = if n <= DP_N_CAP { verify_lemma4_dp(&p)? } else { true };
        run.check("residue", dp_ok && residue_system(&p).is_ok());
    }

    let cert6 = verify_lemma6(&p.b.clone(), &p, SumMode::ClosedForm)?;
    let iterate_probe = progression_c(&BigUint::from(1000u32), &p, SumMode::Iterate)?
        == progression_c(&BigUint::from(1000u32), &p, SumMode::ClosedForm)?;
    run.check("progression", cert6.passed && iterate_probe);

    if n <= MATERIALIZE_N_CAP {
        run.check("assemble", verify_theorem(&p)?.passed);
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<Run, (Error, Option<Run>)> {
    let usage = |e: Error| (e, None);
    match cli.command {
        Command::Bound { n, json, report } => {
            let mut run = Run::new("bound", json!({ "n": n }));
            run_bound(n, json, report, &mut run).map_err(usage)?;
            Ok(run)
        }
        Command::Verify { which } => match which {
            VerifyCommand::Lemma3 { n } => {
                let mut run = Run::new("verify lemma3", json!({ "n": n }));
                let p = derive_params(n).map_err(usage)?;
                let cert = verify_lemma3(&p);
                println!("{}", serde_json::to_string_pretty(&cert).unwrap());
                run.check("lemma3.ratio_inequalities", cert.passed);
                Ok(run)
            }
            VerifyCommand::Corollary1 { n, prefix } => {
                let mut run = Run::new("verify corollary1", json!({ "n": n, "prefix": prefix }));
                let p = derive_params(n).map_err(usage)?;
                let prefix = prefix.unwrap_or_else(|| default_corollary1_prefix(&p));
                let cert = verify_corollary1(&p, prefix).map_err(usage)?;
                println!("{}", serde_json::to_string_pretty(&cert).unwrap());
                run.check("corollary1.sigma_a_prefix", cert.passed);
                Ok(run)
            }
            VerifyCommand::Lemma4 { n, emit_certs } => {
                let mut run = Run::new("verify lemma4", json!({ "n": n }));
                let p = derive_params(n).map_err(usage)?;
                if n <= DP_N_CAP {
                    let ok = verify_lemma4_dp(&p).map_err(usage)?;
                    run.check("lemma4.reachability_interval", ok);
                }
                let sys = residue_system(&p).map_err(usage)?;
                run.check("lemma4.residue_system", true);
                println!(
                    "residue system mod {}: k_1 = {}, k_a = {}",
                    p.a,
                    sys.k1(),
                    sys.k_max()
                );
                if let Some(path) = emit_certs {
                    write_json(&path, &sys).map_err(usage)?;
                    run.artifact(&path);
                }
                Ok(run)
            }
            VerifyCommand::Lemma5 { n, samples } => {
                let mut run = Run::new("verify lemma5", json!({ "n": n, "samples": samples }));
                let p = derive_params(n).map_err(usage)?;
                run_lemma5(&p, samples, &mut run).map_err(usage)?;
                Ok(run)
            }
            VerifyCommand::Lemma6 { n, t, mode } => {
                let mut run = Run::new("verify lemma6", json!({ "n": n, "t": t }));
                let p = derive_params(n).map_err(usage)?;
                run_lemma6(&p, t, mode.into(), &mut run).map_err(usage)?;
                Ok(run)
            }
        },
        Command::Window { n, json: path } => {
            let mut run = Run::new("window", json!({ "n": n }));
            let p = derive_params(n).map_err(usage)?;
            let w = build_window(&p).map_err(|e| (e, None))?;
            println!("window: d = {}, entries d+1 ..= d+{}", w.d, w.entries.len());
            run.check("window.consecutive", true);
            run.check("window.d_below_bound", w.d < p.theorem_bound());
            if let Some(path) = path {
                write_json(&path, &w).map_err(usage)?;
                run.artifact(&path);
            }
            Ok(run)
        }
        Command::Decompose { n, x, json: path } => {
            let mut run = Run::new("decompose", json!({ "n": n, "x": x }));
            let p = derive_params(n).map_err(usage)?;
            let x: BigUint = x
                .parse()
                .map_err(|_| (Error::InvalidArgument("x must be a decimal integer".into()), None))?;
            let w = build_window(&p).map_err(|e| (e, None))?;
            let dec = decompose(&x, &p, &w).map_err(usage)?;
            println!("{} = sum of {} distinct squares", dec.x, dec.parts.len());
            run.check("decompose.verified", dec.verified);
            if let Some(path) = path {
                write_json(&path, &dec).map_err(usage)?;
                run.artifact(&path);
            }
            Ok(run)
        }
        Command::Threshold {
            n,
            heavy,
            mem_gb,
            json,
            bfile,
        } => {
            let mut run = Run::new(
                "threshold",
                json!({ "n": n, "heavy": heavy, "mem_gb": mem_gb }),
            );
            match run_threshold(n, heavy, mem_gb, json, bfile, &mut run) {
                Ok(()) => Ok(run),
                Err(e) => Err((e, Some(run))),
            }
        }
        Command::All { n } => {
            let mut run = Run::new("all", json!({ "n": n }));
            run_all(n, &mut run).map_err(usage)?;
            Ok(run)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(run) => run.finish(),
        Err((e, _)) => {
            eprintln!("error: {e}");
            match e {
                Error::CheckFailed(_) | Error::CertificateNotFound(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
