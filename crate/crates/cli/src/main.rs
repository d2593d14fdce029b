//! `qmimo` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmimo::harness::audit::{audit_trial, write_audit, AuditInputs};
use qmimo::harness::fig4::run_fig4;
use qmimo::harness::ratecurve::{
    operating_points, run_ratecurve, write_operating_points, OperatingPoint,
};
use qmimo::harness::{presets, resolve_out_dir, run_scenario, HarnessError, ScenarioConfig};
use qmimo::keyrate::{Detection, FiniteSizeParams};

#[derive(Parser, Debug)]
#[command(
    name = "qmimo",
    version,
    about = "Dual-polarization CV-QKD MIMO equalization simulator"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Scenario file (TOML)
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in scenario (see `qmimo presets`)
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Override the master seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory [default: scenario output_dir, $QMIMO_OUT_DIR/<name>, or qmimo-out/<name>]
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the number of trials
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Only print errors
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the trials and write estimation, summary and key-rate CSVs
    Simulate,
    /// Write per-update singular-value and underestimation traces
    Fig4,
    /// Sweep key rate against distance for each configured curve
    Ratecurve,
    /// Key-rate calculator
    Keyrate(KeyrateArgs),
    /// Re-run estimation of one trial from exported logs
    Audit(AuditArgs),
    /// List presets, or print one as TOML
    Presets { name: Option<String> },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DetectionArg {
    Homodyne,
    Heterodyne,
}

#[derive(Args, Debug)]
struct KeyrateArgs {
    #[arg(long)]
    v_a: Option<f64>,
    /// Channel transmittance
    #[arg(long)]
    t: Option<f64>,
    /// Excess noise (SNU, input-referred)
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Symbol rate (Hz)
    #[arg(long)]
    f_rep: Option<f64>,
    /// Training overhead fraction
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eta_d: Option<f64>,
    #[arg(long)]
    v_el: Option<f64>,
    #[arg(long, value_enum)]
    detection: Option<DetectionArg>,
    /// Total symbols N (enables the finite-size rate)
    #[arg(long)]
    n_total: Option<u64>,
    /// Key symbols n [default: N/2]
    #[arg(long)]
    n_key: Option<u64>,
    /// Asymptotic rate only
    #[arg(long)]
    asymptotic: bool,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    taps: PathBuf,
    #[arg(long)]
    symbols: PathBuf,
    #[arg(long)]
    received: PathBuf,
    /// Trial the logs belong to
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

fn load_config(g: &Global) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = match (&g.config, &g.preset) {
        (Some(path), _) => ScenarioConfig::from_file(path)?,
        (None, Some(name)) => presets::load(name)?,
        (None, None) => {
            return Err(HarnessError::Config(
                "no scenario given: pass --config <file> or --preset <name>".into(),
            ))
        }
    };
    if let Some(s) = g.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = g.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(g: &Global, cfg: &ScenarioConfig) -> PathBuf {
    resolve_out_dir(g.out.as_deref(), cfg)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn list_files(quiet: bool, files: &[PathBuf]) {
    if !quiet {
        for f in files {
            println!("  wrote {}", f.display());
        }
    }
}

fn simulate(g: &Global) -> Result<(), HarnessError> {
    let cfg = load_config(g)?;
    let dir = out_dir(g, &cfg);
    let report = run_scenario(&cfg, &dir)?;
    if !g.quiet {
        println!(
            "{}: {} trials x {} symbols, seed {}, {:.2} s",
            report.scenario,
            cfg.trials,
            cfg.symbols_per_trial,
            report.master_seed,
            report.elapsed.as_secs_f64()
        );
        println!(
            "{:<4} {:<7} {:>8} {:>9} {:>9} {:>9}",
            "pol", "method", "T'", "eps_e", "se", "pred"
        );
        for p in &report.pooled {
            println!(
                "{:<4} {:<7} {:>8.4} {:>9.4} {:>9} {:>9.4}",
                p.pol,
                p.method,
                p.t_prime,
                p.eps_e,
                fmt_opt(p.eps_e_se),
                p.delta_eps_pred
            );
        }
        for k in &report.key_rates {
            println!(
                "{:<4} {:<7} K_asy = {} Mbps, K_fin = {} Mbps{}",
                k.pol,
                k.method,
                fmt_opt(k.k_asy.map(|v| v / 1e6)),
                fmt_opt(k.k_fin.map(|v| v / 1e6)),
                if k.error.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", k.error)
                }
            );
        }
        list_files(g.quiet, &report.files);
    }
    let failed = report.failed_trials();
    if !failed.is_empty() {
        let ids: Vec<String> = failed.iter().map(|t| t.trial_index.to_string()).collect();
        return Err(HarnessError::Runtime(format!(
            "{} trial(s) did not complete: {} (see trials.csv)",
            failed.len(),
            ids.join(", ")
        )));
    }
    Ok(())
}

fn fig4(g: &Global) -> Result<(), HarnessError> {
    let cfg = load_config(g)?;
    let dir = out_dir(g, &cfg);
    let report = run_fig4(&cfg, &dir)?;
    if !g.quiet {
        for s in &report.summaries {
            println!(
                "trial {}: mean d_omega = {:.4}, mean d_eps = ({:.4}, {:.4}), last-decile drift = ({:.2e}, {:.2e})",
                s.trial_index,
                s.mean_delta_omega,
                s.mean_delta_eps_x,
                s.mean_delta_eps_y,
                s.last_decile_change_x,
                s.last_decile_change_y
            );
        }
        list_files(g.quiet, &report.files);
    }
    if report.trials.iter().any(|t| !t.outcome.is_completed()) {
        return Err(HarnessError::Runtime("some trials did not complete".into()));
    }
    Ok(())
}

fn ratecurve(g: &Global) -> Result<(), HarnessError> {
    let cfg = load_config(g)?;
    let dir = out_dir(g, &cfg);
    let (curves, files) = run_ratecurve(&cfg, &dir)?;
    if !g.quiet {
        for c in &curves {
            let first = &c.points[0];
            let last_positive = c.points.iter().rfind(|p| p.k_asy > 0.0);
            println!(
                "{}: eps = {}, K_asy(0 km) = {:.3} Mbps, positive up to {} km",
                c.name,
                first.eps,
                first.k_asy / 1e6,
                last_positive
                    .map(|p| p.distance_km.to_string())
                    .unwrap_or_else(|| "-".into())
            );
        }
        list_files(g.quiet, &files);
    }
    Ok(())
}

fn keyrate(g: &Global, a: &KeyrateArgs) -> Result<(), HarnessError> {
    let mut cfg = if g.config.is_some() || g.preset.is_some() {
        load_config(g)?
    } else {
        presets::load("exp_25km")?
    };
    let explicit_point = a.t.is_some() || a.eps.is_some();
    let k = &mut cfg.keyrate;
    macro_rules! set {
        ($field:ident, $arg:expr) => {
            if let Some(v) = $arg {
                k.$field = v;
            }
        };
    }
    set!(v_a, a.v_a);
    set!(t, a.t);
    set!(eps, a.eps);
    set!(beta, a.beta);
    set!(f_rep, a.f_rep);
    set!(overhead, a.alpha);
    set!(eta_d, a.eta_d);
    set!(v_el, a.v_el);
    if let Some(d) = a.detection {
        k.detection = match d {
            DetectionArg::Homodyne => Detection::Homodyne,
            DetectionArg::Heterodyne => Detection::Heterodyne,
        };
    }
    if let Some(n_total) = a.n_total {
        let base = k.finite_size.clone().unwrap_or_default();
        k.finite_size = Some(FiniteSizeParams {
            n_total,
            n_key: a.n_key.unwrap_or(n_total / 2),
            ..base
        });
    } else if let (Some(n_key), Some(fs)) = (a.n_key, k.finite_size.as_mut()) {
        fs.n_key = n_key;
    }
    if a.asymptotic {
        k.finite_size = None;
    }
    if explicit_point {
        cfg.points.clear();
    }
    cfg.validate()?;
    let points = operating_points(&cfg)?;
    if !g.quiet {
        print_points(&points);
    }
    // Calculator output goes to a file only when asked.
    if g.out.is_some() {
        let path = write_operating_points(&points, &out_dir(g, &cfg))?;
        list_files(g.quiet, &[path]);
    }
    Ok(())
}

fn print_points(points: &[OperatingPoint]) {
    println!(
        "{:<12} {:>7} {:>7} {:>8} {:>8} {:>11} {:>11}",
        "point", "T", "eps", "I_AB", "chi_BE", "K_asy/Mbps", "K_fin/Mbps"
    );
    for p in points {
        println!(
            "{:<12} {:>7.4} {:>7.4} {:>8.5} {:>8.5} {:>11.4} {:>11}",
            p.name,
            p.t,
            p.eps,
            p.i_ab,
            p.chi_be,
            p.k_asy / 1e6,
            fmt_opt(p.k_fin.map(|v| v / 1e6))
        );
    }
    if let [a, b] = points {
        if a.k_asy > 0.0 {
            println!("ratio {} / {} = {:.4}", b.name, a.name, b.k_asy / a.k_asy);
        }
    }
}

fn audit(g: &Global, a: &AuditArgs) -> Result<(), HarnessError> {
    let cfg = load_config(g)?;
    let inputs = AuditInputs {
        taps: &a.taps,
        symbols: &a.symbols,
        received: &a.received,
    };
    let rows = audit_trial(&cfg, a.trial, &inputs)?;
    let path = write_audit(&rows, &out_dir(g, &cfg))?;
    if !g.quiet {
        for r in &rows {
            println!(
                "{:<2} {:<7} T' = {:.4}, eps_e = {:.4}, pred = {:.4}",
                r.pol, r.method, r.t_prime, r.eps_e, r.delta_eps_pred
            );
        }
        list_files(g.quiet, &[path]);
    }
    Ok(())
}

fn show_presets(name: Option<&str>) -> Result<(), HarnessError> {
    match name {
        None => {
            for n in presets::NAMES {
                println!("{n}");
            }
            Ok(())
        }
        Some(n) => {
            let text = presets::source(n)
                .ok_or_else(|| HarnessError::Config(format!("unknown preset `{n}`")))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let g = &cli.global;
    match &cli.command {
        Command::Simulate => simulate(g),
        Command::Fig4 => fig4(g),
        Command::Ratecurve => ratecurve(g),
        Command::Keyrate(a) => keyrate(g, a),
        Command::Audit(a) => audit(g, a),
        Command::Presets { name } => show_presets(name.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
