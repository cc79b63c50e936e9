//! Command-line frontend: every experiment is a reproducible, config-driven
//! run that emits CSV or JSON with a header carrying the schema version, the
//! full configuration echo and its content hash. Exit code 0 iff all checks
//! requested by the command pass their stated tolerances.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use starkprufer::coarse::{
    classify_energy, convergence_diagnostic, convergence_guaranteed, extract_coarse,
    predict_l_step, sample_cells, CoarseState,
};
use starkprufer::expsum::{
    cubic_gauss_sum, double_sum, inverse_square_sum, precise_asymptotic, raw_expsum, ExpSumSpec,
    GaussSumSpec, SqrtPhase,
};
use starkprufer::fit::{envelope_slope, log_log_slope};
use starkprufer::oscillatory::{
    nonstationary_expansion, quadrature_oracle, stationary_expansion, PhaseProblem, PolyFn,
};
use starkprufer::prufer::{initial_state, run_prufer, sampling_point};
use starkprufer::random::{mc_radius_exponent, transition_scan, CouplingFamily, CouplingSampler};
use starkprufer::report::{fmt_float, OutputFormat, Report};
use starkprufer::{ModelParams, ReferenceSolution, Result};

#[derive(Parser)]
#[command(
    name = "starkprufer",
    about = "Numerical laboratory for the Kronig-Penney model in a constant electric field",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Field strength F (alternative: the exact pair --p, --q)
    #[arg(long = "F", action = ArgAction::Set)]
    field: Option<f64>,
    /// Rational field encoding: F = pi^2 q / (3 p)
    #[arg(long, action = ArgAction::Set)]
    p: Option<u64>,
    #[arg(long, action = ArgAction::Set)]
    q: Option<u64>,
    /// Energy E
    #[arg(long = "E", default_value_t = 0.0, action = ArgAction::Set, allow_hyphen_values = true)]
    energy: f64,
    /// Coupling strength lambda
    #[arg(long = "lambda", default_value_t = 1.0, action = ArgAction::Set, allow_hyphen_values = true)]
    coupling: f64,
    /// Output path (stdout when omitted)
    #[arg(long, action = ArgAction::Set)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, default_value = "csv", action = ArgAction::Set)]
    format: String,
    /// Worker thread cap (default: STARKPRUFER_THREADS or all cores)
    #[arg(long, action = ArgAction::Set)]
    threads: Option<usize>,
    /// Flat key=value config file; explicit flags override file entries
    #[arg(long, action = ArgAction::Set)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn params(&self) -> Result<ModelParams> {
        match (self.p, self.q, self.field) {
            (Some(p), Some(q), _) => ModelParams::from_rational(p, q, self.energy, self.coupling),
            (None, None, Some(f)) => ModelParams::new(f, self.energy, self.coupling),
            _ => Err(starkprufer::Error::InvalidParameter(
                "give either --F or both --p and --q".into(),
            )),
        }
    }

    fn rational_params(&self) -> Result<ModelParams> {
        match (self.p, self.q) {
            (Some(p), Some(q)) => ModelParams::from_rational(p, q, self.energy, self.coupling),
            _ => Err(starkprufer::Error::InvalidParameter(
                "this command requires the exact rational field: --p and --q".into(),
            )),
        }
    }

    fn config_echo(&self, extra: &str) -> String {
        let f = match (self.p, self.q, self.field) {
            (Some(p), Some(q), _) => format!("p={p} q={q}"),
            (_, _, Some(f)) => format!("F={}", fmt_float(f)),
            _ => String::new(),
        };
        format!(
            "{f} E={} lambda={} {extra}",
            fmt_float(self.energy),
            fmt_float(self.coupling)
        )
        .trim()
        .to_string()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the reference solution: zeta, gamma and the defining identities
    Reference {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "x-min", default_value_t = 0.0, action = ArgAction::Set, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long = "x-max", default_value_t = 100.0, action = ArgAction::Set)]
        x_max: f64,
        #[arg(long, default_value_t = 0.25, action = ArgAction::Set)]
        step: f64,
    },
    /// Trace the exact Prufer recursion (deterministic or seeded random couplings)
    Prufer {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "N", default_value_t = 10_000, action = ArgAction::Set)]
        n_max: i64,
        /// Draw couplings from the random model instead of g_n = lambda
        #[arg(long, action = ArgAction::SetTrue)]
        random: bool,
        #[arg(long, default_value = "gaussian", action = ArgAction::Set)]
        family: String,
        #[arg(long, default_value_t = 0, action = ArgAction::Set)]
        seed: u64,
        #[arg(long, default_value_t = 0, action = ArgAction::Set)]
        realization: u64,
        /// Boundary angle theta0: psi(0) = sin, psi'(0+) = cos
        #[arg(long = "theta0", default_value_t = 0.0, action = ArgAction::Set, allow_hyphen_values = true)]
        theta0: f64,
        /// Also export the solution data: psi, psi', R and log ||T_n||
        #[arg(long = "with-solution", action = ArgAction::SetTrue)]
        with_solution: bool,
    },
    /// Window exponential sums against the precise stationary-phase asymptotic
    Expsum {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "l-min", default_value_t = 30, action = ArgAction::Set)]
        l_min: u32,
        #[arg(long = "l-max", default_value_t = 300, action = ArgAction::Set)]
        l_max: u32,
        /// Emit the certified-envelope sweep (l, lhs, rhs, ratio) for the
        /// interval and away-from-resonance bound families instead
        #[arg(long, action = ArgAction::SetTrue)]
        bounds: bool,
    },
    /// l-scale coarse-graining trace: extracted vs predicted increments
    Coarse {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "l-min", default_value_t = 30, action = ArgAction::Set)]
        l_min: u32,
        #[arg(long = "l-max", default_value_t = 300, action = ArgAction::Set)]
        l_max: u32,
        #[arg(long = "theta0", default_value_t = 0.0, action = ArgAction::Set, allow_hyphen_values = true)]
        theta0: f64,
    },
    /// Monte Carlo radius exponent of the random model
    RandomMc {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "N", default_value_t = 100_000, action = ArgAction::Set)]
        n_max: i64,
        #[arg(long, default_value_t = 100, action = ArgAction::Set)]
        trials: u32,
        #[arg(long, default_value_t = 0, action = ArgAction::Set)]
        seed: u64,
        #[arg(long, default_value = "gaussian", action = ArgAction::Set)]
        family: String,
    },
    /// Cubic Gauss sums w_m for all residues m mod q
    Wsum {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Resonance grid: X_l, x_l and gamma' at the sampling points
    Grid {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "l-min", default_value_t = 20, action = ArgAction::Set)]
        l_min: u32,
        #[arg(long = "l-max", default_value_t = 100, action = ArgAction::Set)]
        l_max: u32,
    },
    /// Stationary/non-stationary phase expansions against the quadrature oracle
    Stationary {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 2, action = ArgAction::Set)]
        k: usize,
        #[arg(long = "omega-min", default_value_t = 50.0, action = ArgAction::Set)]
        omega_min: f64,
        #[arg(long = "omega-max", default_value_t = 5000.0, action = ArgAction::Set)]
        omega_max: f64,
        #[arg(long, default_value_t = 9, action = ArgAction::Set)]
        points: usize,
    },
    /// Energy scan of the rational case: classification + convergence diagnostics
    SpectralScan {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "E-min", default_value_t = -1.0, action = ArgAction::Set, allow_hyphen_values = true)]
        e_min: f64,
        #[arg(long = "E-max", default_value_t = 1.0, action = ArgAction::Set, allow_hyphen_values = true)]
        e_max: f64,
        #[arg(long = "E-count", default_value_t = 5, action = ArgAction::Set)]
        e_count: usize,
        #[arg(long = "l-max", default_value_t = 512, action = ArgAction::Set)]
        l_max: u32,
    },
    /// Spectral-transition proxy scan over F at fixed lambda
    TransitionScan {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated F grid
        #[arg(long = "F-grid", default_value = "0.25,0.4,0.5,0.6,1.0", action = ArgAction::Set)]
        f_grid: String,
        #[arg(long = "N", default_value_t = 100_000, action = ArgAction::Set)]
        n_max: i64,
        #[arg(long, default_value_t = 50, action = ArgAction::Set)]
        trials: u32,
        #[arg(long, default_value_t = 0, action = ArgAction::Set)]
        seed: u64,
        #[arg(long, default_value = "gaussian", action = ArgAction::Set)]
        family: String,
    },
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn init_threads(requested: Option<usize>) {
    let n = requested.or_else(|| {
        std::env::var("STARKPRUFER_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn finish(checks: Vec<Check>) -> ! {
    let failures: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    if failures.is_empty() {
        std::process::exit(0);
    }
    let list: Vec<serde_json::Value> = failures
        .iter()
        .map(|c| json!({"check": c.name, "detail": c.detail}))
        .collect();
    eprintln!("{}", json!({ "failed_checks": list }));
    std::process::exit(1);
}

fn main() {
    let argv = merge_config_tokens(std::env::args().collect());
    let cli = Cli::parse_from(argv);
    match run(cli) {
        Ok(checks) => finish(checks),
        Err(e) => {
            eprintln!("{}", json!({"error": e.to_string()}));
            std::process::exit(2);
        }
    }
}

/// Expand `--config file` into key=value tokens placed before the explicit
/// flags, so the command line keeps the last word.
fn merge_config_tokens(argv: Vec<String>) -> Vec<String> {
    let mut path = None;
    for (i, tok) in argv.iter().enumerate() {
        if tok == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = tok.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return argv;
    };
    let Ok(text) = std::fs::read_to_string(&path) else {
        eprintln!("{}", json!({"error": format!("cannot read config file {path}")}));
        std::process::exit(2);
    };
    // keys already given explicitly win; their config entries are dropped
    let explicit: Vec<String> = argv
        .iter()
        .filter_map(|t| {
            t.strip_prefix("--")
                .map(|rest| rest.split('=').next().unwrap().to_string())
        })
        .collect();
    let mut merged: Vec<String> = argv.iter().take(2).cloned().collect();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let key = key.trim();
            if explicit.iter().any(|e| e == key) {
                continue;
            }
            merged.push(format!("--{key}"));
            merged.push(value.trim().to_string());
        }
    }
    merged.extend(argv.into_iter().skip(2));
    merged
}

fn run(cli: Cli) -> Result<Vec<Check>> {
    match cli.command {
        Command::Reference {
            common,
            x_min,
            x_max,
            step,
        } => cmd_reference(common, x_min, x_max, step),
        Command::Prufer {
            common,
            n_max,
            random,
            family,
            seed,
            realization,
            theta0,
            with_solution,
        } => cmd_prufer(common, n_max, random, family, seed, realization, theta0, with_solution),
        Command::Expsum {
            common,
            l_min,
            l_max,
            bounds,
        } => cmd_expsum(common, l_min, l_max, bounds),
        Command::Coarse {
            common,
            l_min,
            l_max,
            theta0,
        } => cmd_coarse(common, l_min, l_max, theta0),
        Command::RandomMc {
            common,
            n_max,
            trials,
            seed,
            family,
        } => cmd_random_mc(common, n_max, trials, seed, family),
        Command::Wsum { common } => cmd_wsum(common),
        Command::Grid { common, l_min, l_max } => cmd_grid(common, l_min, l_max),
        Command::Stationary {
            common,
            k,
            omega_min,
            omega_max,
            points,
        } => cmd_stationary(common, k, omega_min, omega_max, points),
        Command::SpectralScan {
            common,
            e_min,
            e_max,
            e_count,
            l_max,
        } => cmd_spectral_scan(common, e_min, e_max, e_count, l_max),
        Command::TransitionScan {
            common,
            f_grid,
            n_max,
            trials,
            seed,
            family,
        } => cmd_transition_scan(common, f_grid, n_max, trials, seed, family),
    }
}

fn cmd_reference(common: CommonArgs, x_min: f64, x_max: f64, step: f64) -> Result<Vec<Check>> {
    init_threads(common.threads);
    let params = common.params()?;
    let rs = ReferenceSolution::new(params)?;
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!(
        "x_min={} x_max={} step={}",
        fmt_float(x_min),
        fmt_float(x_max),
        fmt_float(step)
    ));
    let mut report = Report::new(sink(&common.out)?, format, "reference", &config)?;
    report.csv_header(&[
        "x",
        "re_zeta",
        "im_zeta",
        "abs_zeta",
        "gamma",
        "gamma1",
        "gamma2",
        "wronskian_residual",
    ])?;
    let mut worst_wronskian = 0.0f64;
    let mut worst_phase = 0.0f64;
    let mut x = x_min;
    while x <= x_max + 1e-12 {
        let (z, dz) = rs.zeta(x)?;
        let phase = rs.eval_phase(x)?;
        let wr = (z * dz.conj() - dz * z.conj() + Complex64::new(0.0, 2.0)).norm();
        worst_wronskian = worst_wronskian.max(wr);
        worst_phase = worst_phase.max((z.norm_sqr() * phase.gamma1 - 1.0).abs());
        report.csv_row(&[
            x,
            z.re,
            z.im,
            z.norm(),
            phase.gamma,
            phase.gamma1,
            phase.gamma2,
            wr,
        ])?;
        x += step;
    }
    report.json_value(&json!({
        "worst_wronskian_residual": worst_wronskian,
        "worst_phase_identity_residual": worst_phase,
    }))?;
    report.finish()?;
    Ok(vec![
        Check {
            name: "wronskian_identity",
            passed: worst_wronskian <= 1e-10,
            detail: format!("max |zeta zeta_bar' - zeta' zeta_bar + 2i| = {worst_wronskian:.3e}"),
        },
        Check {
            name: "phase_identity",
            passed: worst_phase <= 1e-10,
            detail: format!("max ||zeta|^2 gamma' - 1| = {worst_phase:.3e}"),
        },
    ])
}

#[allow(clippy::too_many_arguments)]
fn cmd_prufer(
    common: CommonArgs,
    n_max: i64,
    random: bool,
    family: String,
    seed: u64,
    realization: u64,
    theta0: f64,
    with_solution: bool,
) -> Result<Vec<Check>> {
    init_threads(common.threads);
    if n_max > 100_000_000 {
        return Err(starkprufer::Error::Resource(
            "N exceeds the 1e8 trajectory guard".into(),
        ));
    }
    let params = common.params()?;
    let rs = ReferenceSolution::new(params)?;
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!(
        "N={n_max} random={random} family={family} seed={seed} realization={realization} theta0={}",
        fmt_float(theta0)
    ));
    let mut report = Report::new(sink(&common.out)?, format, "prufer", &config)?;
    if with_solution {
        report.csv_header(&["n", "psi", "psi_prime", "R", "eta", "theta", "log_norm"])?;
    } else {
        report.csv_header(&["n", "logR", "eta", "theta", "U"])?;
    }

    let fam: CouplingFamily = family.parse()?;
    let sampler = CouplingSampler {
        family: fam,
        coupling: params.coupling,
        seed,
        realization,
    };
    let mut coupling = move |n: i64| {
        if random {
            sampler.coupling_at(n as u64)
        } else {
            params.coupling
        }
    };
    let stride = (n_max / 100_000).max(1);
    let record: Vec<i64> = (1..=n_max).filter(|n| n % stride == 0 || *n == 1).collect();
    let init = initial_state(&rs, theta0)?;
    if with_solution {
        // walk the recursion and the transfer product together
        let mut acc = starkprufer::propagation::TransferAccumulator::new();
        let mut state = init;
        for n in 1..=n_max {
            if n % stride == 0 || n == 1 {
                let (z, dz) = rs.zeta(n as f64)?;
                let rho = state.rho();
                let phase = rs.eval_phase(n as f64)?;
                report.csv_row(&[
                    n as f64,
                    (rho * z).im,
                    (rho * dz).im,
                    state.radius(),
                    state.angle,
                    state.angle + phase.gamma,
                    acc.log_norm(),
                ])?;
            }
            if n == n_max {
                break;
            }
            let g = coupling(n);
            acc.push(&starkprufer::propagation::one_step_su11(&rs, n, g));
            let u = starkprufer::prufer::coupling_u(&rs, n, g);
            state = starkprufer::prufer::step_exact(&state, u, &rs);
        }
        let exponent = (state.log_radius - init.log_radius) / (n_max as f64).ln();
        report.json_value(&json!({
            "final_logR": state.log_radius,
            "endpoint_exponent": exponent,
        }))?;
        report.finish()?;
        return Ok(vec![Check {
            name: "radius_finite",
            passed: state.log_radius.is_finite(),
            detail: format!("final logR = {}", state.log_radius),
        }]);
    }
    let traj = run_prufer(&rs, &mut coupling, init, n_max, &record);
    for s in &traj.samples {
        let g = if random {
            sampler.coupling_at(s.n as u64)
        } else {
            params.coupling
        };
        let phase = rs.eval_phase(s.n as f64)?;
        report.csv_row(&[
            s.n as f64,
            s.log_radius,
            s.angle,
            s.angle + phase.gamma,
            g / phase.gamma1,
        ])?;
    }
    let exponent = (traj.final_state.log_radius - init.log_radius) / (n_max as f64).ln();
    report.json_value(&json!({
        "final_logR": traj.final_state.log_radius,
        "endpoint_exponent": exponent,
    }))?;
    report.finish()?;
    let frozen = !random && params.coupling == 0.0;
    Ok(vec![Check {
        name: "radius_finite",
        passed: traj.final_state.log_radius.is_finite()
            && (!frozen || traj.final_state.log_radius == init.log_radius),
        detail: format!("final logR = {}", traj.final_state.log_radius),
    }])
}

fn cmd_expsum(common: CommonArgs, l_min: u32, l_max: u32, bounds: bool) -> Result<Vec<Check>> {
    init_threads(common.threads);
    let params = common.params()?;
    let rs = ReferenceSolution::new(params)?;
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!("l_min={l_min} l_max={l_max} bounds={bounds}"));
    if bounds {
        return cmd_expsum_bounds(&rs, common, l_min, l_max, format, &config);
    }
    let mut report = Report::new(sink(&common.out)?, format, "expsum", &config)?;
    report.csv_header(&[
        "l", "raw_re", "raw_im", "pred_re", "pred_im", "abs_err", "s_l", "inv_sq_sum",
    ])?;
    let h = SqrtPhase::canonical(&params);
    let f = params.field_strength;
    let mut ls = Vec::new();
    let mut errs = Vec::new();
    let mut l = l_min;
    while l <= l_max {
        let spec = ExpSumSpec {
            a: sampling_point(f, l),
            b: sampling_point(f, l + 1),
            mu: 2.0,
            alpha: 1.0,
            h: &h,
        };
        let raw = raw_expsum(&rs, &spec)?;
        let pred = precise_asymptotic(&rs, l, &h)?;
        let err = (raw - pred.predicted).norm();
        let ds = double_sum(&rs, l)?;
        let inv = inverse_square_sum(&rs, l)?;
        report.csv_row(&[
            l as f64,
            raw.re,
            raw.im,
            pred.predicted.re,
            pred.predicted.im,
            err,
            ds.s_l,
            inv,
        ])?;
        ls.push(l as f64);
        errs.push(err);
        // geometric-ish sampling keeps the runtime flat in l_max
        l += (l / 12).max(1);
    }
    let slope = envelope_slope(&ls, &errs, 6).or_else(|_| log_log_slope(&ls, &errs))?;
    report.json_value(&json!({ "residual_envelope_slope": slope }))?;
    report.finish()?;
    Ok(vec![Check {
        name: "precise_asymptotic_slope",
        passed: slope <= -1.4,
        detail: format!("envelope slope {slope:.3} (theory -3/2)"),
    }])
}

fn cmd_expsum_bounds(
    rs: &ReferenceSolution,
    common: CommonArgs,
    l_min: u32,
    l_max: u32,
    format: OutputFormat,
    config: &str,
) -> Result<Vec<Check>> {
    let params = *rs.params();
    let h = SqrtPhase::canonical(&params);
    let mut report = Report::new(sink(&common.out)?, format, "expsum-bounds", config)?;
    report.csv_header(&["family", "l", "lhs", "rhs", "ratio"])?;
    let mut worst = 0.0f64;
    let mut l = l_min;
    while l <= l_max {
        let interval =
            starkprufer::expsum::interval_bound_check(rs, l, 1.0, 0.5, 2.0, &h)?;
        report.csv_row(&[0.0, l as f64, interval.lhs, interval.rhs, interval.ratio()])?;
        worst = worst.max(interval.ratio());
        if let Ok(away) = starkprufer::expsum::away_bound_check(rs, l, 1.0, 0.5, 0.75, &h) {
            report.csv_row(&[1.0, l as f64, away.lhs, away.rhs, away.ratio()])?;
            worst = worst.max(away.ratio());
        }
        l += (l / 8).max(1);
    }
    report.json_value(&serde_json::json!({"max_ratio": worst}))?;
    report.finish()?;
    Ok(vec![Check {
        name: "bound_envelope_ratio",
        passed: worst <= 10.0,
        detail: format!("max lhs/rhs = {worst:.3} over both families"),
    }])
}

fn cmd_coarse(common: CommonArgs, l_min: u32, l_max: u32, theta0: f64) -> Result<Vec<Check>> {
    init_threads(common.threads);
    let params = common.params()?;
    let rs = ReferenceSolution::new(params)?;
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!("l_min={l_min} l_max={l_max} theta0={theta0}"));
    let mut report = Report::new(sink(&common.out)?, format, "coarse", &config)?;
    report.csv_header(&[
        "l",
        "logR_coarse",
        "Lambda",
        "Theta",
        "residual_R",
        "residual_Lambda",
    ])?;
    let states = run_coarse(&rs, l_min, l_max, theta0)?;
    let mut ls = Vec::new();
    let mut resid = Vec::new();
    for pair in states.windows(2) {
        let s_l = double_sum(&rs, pair[0].l)?.s_l;
        let (dr, da) = predict_l_step(&pair[0], &params, s_l);
        let rr = (pair[1].log_radius - pair[0].log_radius - dr).abs();
        let ra = (pair[1].angle - pair[0].angle - da).abs();
        report.csv_row(&[
            pair[0].l as f64,
            pair[0].log_radius,
            pair[0].angle,
            pair[0].big_theta(&params),
            rr,
            ra,
        ])?;
        ls.push(pair[0].l as f64);
        resid.push(rr);
    }
    let slope = envelope_slope(&ls, &resid, 7).or_else(|_| log_log_slope(&ls, &resid))?;
    report.json_value(&json!({ "radius_residual_envelope_slope": slope }))?;
    report.finish()?;
    Ok(vec![Check {
        name: "l_scale_residual_slope",
        passed: slope <= -1.1,
        detail: format!("envelope slope {slope:.3} (theory -5/4)"),
    }])
}

fn run_coarse(
    rs: &ReferenceSolution,
    l_min: u32,
    l_max: u32,
    theta0: f64,
) -> Result<Vec<CoarseState>> {
    let params = rs.params();
    let cells = sample_cells(params.field_strength, l_min, l_max);
    let init = initial_state(rs, theta0)?;
    let lambda = params.coupling;
    let traj = run_prufer(rs, &mut |_| lambda, init, *cells.last().unwrap(), &cells);
    extract_coarse(rs, &traj.samples, l_min)
}

fn cmd_random_mc(
    common: CommonArgs,
    n_max: i64,
    trials: u32,
    seed: u64,
    family: String,
) -> Result<Vec<Check>> {
    init_threads(common.threads);
    let params = common.params()?;
    let fam: CouplingFamily = family.parse()?;
    let format: OutputFormat = common.format.parse()?;
    let config =
        common.config_echo(&format!("N={n_max} trials={trials} seed={seed} family={family}"));
    let mut report = Report::new(sink(&common.out)?, format, "random-mc", &config)?;
    report.csv_header(&["trial", "exponent"])?;
    let stats = mc_radius_exponent(&params, fam, seed, n_max, trials)?;
    for (t, e) in stats.per_trial.iter().enumerate() {
        report.csv_row(&[t as f64, *e])?;
        if format == OutputFormat::Json {
            report.json_value(&json!({
                "trial": t, "seed": seed, "realization": t, "exponent": e
            }))?;
        }
    }
    let expected = params.coupling * params.coupling / (8.0 * params.field_strength);
    report.json_value(&json!({
        "mean_exp": stats.mean,
        "stderr": stats.stderr,
        "expected": expected,
    }))?;
    report.finish()?;
    let tol = (0.1 * expected).max(0.02);
    Ok(vec![Check {
        name: "radius_exponent",
        passed: (stats.mean - expected).abs() <= tol,
        detail: format!(
            "mean {:.4} +- {:.4} vs lambda^2/(8F) = {expected:.4}",
            stats.mean, stats.stderr
        ),
    }])
}

fn cmd_wsum(common: CommonArgs) -> Result<Vec<Check>> {
    let params = common.rational_params()?;
    let rational = params.rational.unwrap();
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo("");
    let mut report = Report::new(sink(&common.out)?, format, "wsum", &config)?;
    report.csv_header(&["m", "w_re", "w_im", "w_abs"])?;
    let mut total = 0.0;
    let mut nonzero = 0u64;
    for m in 0..rational.q as i64 {
        let w = cubic_gauss_sum(&GaussSumSpec {
            p: rational.p,
            q: rational.q,
            energy: params.energy,
            coupling: params.coupling,
            m: Some(m),
        })?;
        total += w.norm_sqr();
        if w.norm() > starkprufer::expsum::gauss_sum_zero_threshold(rational.q) {
            nonzero += 1;
        }
        report.csv_row(&[m as f64, w.re, w.im, w.norm()])?;
    }
    let q2 = (rational.q * rational.q) as f64;
    report.json_value(&json!({
        "sum_sq": total,
        "q_squared": q2,
        "nonzero_count": nonzero,
    }))?;
    report.finish()?;
    Ok(vec![Check {
        name: "gauss_sum_parseval",
        passed: (total - q2).abs() <= 1e-9 * q2.max(1.0),
        detail: format!("sum |w_m|^2 = {total} vs q^2 = {q2}"),
    }])
}

fn cmd_grid(common: CommonArgs, l_min: u32, l_max: u32) -> Result<Vec<Check>> {
    let params = common.params()?;
    let rs = ReferenceSolution::new(params)?;
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!("l_min={l_min} l_max={l_max}"));
    let mut report = Report::new(sink(&common.out)?, format, "grid", &config)?;
    report.csv_header(&["l", "X_l", "x_l", "gamma1_at_xl"])?;
    let grid = starkprufer::prufer::build_resonance_grid(&rs, l_min, l_max)?;
    let mut worst = 0.0f64;
    for l in l_min..=l_max {
        let big_x = grid.resonant(l);
        let small_x = grid.sampling(l);
        worst = worst.max((rs.gamma1(big_x) - std::f64::consts::PI * l as f64).abs());
        report.csv_row(&[l as f64, big_x, small_x, rs.gamma1(small_x)])?;
    }
    report.json_value(&serde_json::json!({"max_defining_residual": worst}))?;
    report.finish()?;
    Ok(vec![Check {
        name: "resonant_point_residual",
        passed: worst <= 1e-10,
        detail: format!("max |gamma'(X_l) - pi l| = {worst:.2e}"),
    }])
}

fn cmd_stationary(
    common: CommonArgs,
    k: usize,
    omega_min: f64,
    omega_max: f64,
    points: usize,
) -> Result<Vec<Check>> {
    init_threads(common.threads);
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!(
        "k={k} omega_min={omega_min} omega_max={omega_max} points={points}"
    ));
    let mut report = Report::new(sink(&common.out)?, format, "stationary", &config)?;
    report.csv_header(&[
        "omega",
        "oracle_re",
        "oracle_im",
        "expansion_re",
        "expansion_im",
        "abs_err",
    ])?;
    let amplitude = PolyFn(vec![1.0, 0.5, -0.25]);
    let phase = PolyFn(vec![0.2, 0.0, 0.5, 0.1, 0.02]);
    let mut omegas = Vec::new();
    let mut errs = Vec::new();
    for i in 0..points {
        let omega = omega_min * (omega_max / omega_min).powf(i as f64 / (points - 1) as f64);
        let problem = PhaseProblem {
            a: -0.8,
            b: 1.0,
            omega,
            amplitude: &amplitude,
            phase: &phase,
            order: k,
        };
        let oracle = quadrature_oracle(&problem)?;
        let expansion = stationary_expansion(&problem)?.total();
        let err = (oracle - expansion).norm();
        report.csv_row(&[omega, oracle.re, oracle.im, expansion.re, expansion.im, err])?;
        omegas.push(omega);
        errs.push(err);
    }
    let slope = log_log_slope(&omegas, &errs)?;
    // one non-stationary check on a monotone-phase window
    let ns_phase = PolyFn(vec![0.0, 1.0, 0.4, 1.0 / 3.0]);
    let problem = PhaseProblem {
        a: 0.0,
        b: 1.0,
        omega: omega_max,
        amplitude: &amplitude,
        phase: &ns_phase,
        order: k,
    };
    let ns_err = (quadrature_oracle(&problem)? - nonstationary_expansion(&problem)?.total()).norm();
    report.json_value(&json!({
        "stationary_slope": slope,
        "expected_slope": -(k as f64),
        "nonstationary_err_at_omega_max": ns_err,
    }))?;
    report.finish()?;
    Ok(vec![Check {
        name: "stationary_omega_slope",
        passed: (slope + k as f64).abs() <= 0.2,
        detail: format!("slope {slope:.3} vs -{k}"),
    }])
}

fn cmd_spectral_scan(
    common: CommonArgs,
    e_min: f64,
    e_max: f64,
    e_count: usize,
    l_max: u32,
) -> Result<Vec<Check>> {
    init_threads(common.threads);
    let base = common.rational_params()?;
    let rational = base.rational.unwrap();
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!(
        "E_min={e_min} E_max={e_max} E_count={e_count} l_max={l_max}"
    ));
    let mut report = Report::new(sink(&common.out)?, format, "spectral-scan", &config)?;
    let mut all_nonexceptional_converged = true;
    for i in 0..e_count {
        let energy = if e_count == 1 {
            e_min
        } else {
            e_min + (e_max - e_min) * i as f64 / (e_count - 1) as f64
        };
        let params = ModelParams::from_rational(rational.p, rational.q, energy, base.coupling)?;
        let rs = ReferenceSolution::new(params)?;
        let class = classify_energy(&params, energy)?;
        let q = rational.q as u32;
        let l_min = 2 * q.max(2);
        let states = run_coarse(&rs, l_min, l_max, 0.0)?;
        let samples: Vec<(u32, f64)> = states
            .iter()
            .filter(|s| s.l % q == 0)
            .map(|s| (s.l / q, s.raw_log_radius))
            .collect();
        let diag = convergence_diagnostic(&samples)?;
        if !class.exceptional && !diag.converged {
            all_nonexceptional_converged = false;
        }
        report.json_value(&json!({
            "E": energy,
            "exceptional": class.exceptional,
            "m": class.m,
            "w_abs": class.w().norm(),
            "convergence_guaranteed": convergence_guaranteed(&class, rational.q),
            "converged": diag.converged,
            "limit_est": diag.limit_estimate,
            "profile": diag.profile,
        }))?;
    }
    report.finish()?;
    Ok(vec![Check {
        name: "nonexceptional_energies_converge",
        passed: all_nonexceptional_converged,
        detail: "dyadic Cauchy profile within 10 M^{-1/4} at every non-exceptional E".into(),
    }])
}

fn cmd_transition_scan(
    common: CommonArgs,
    f_grid: String,
    n_max: i64,
    trials: u32,
    seed: u64,
    family: String,
) -> Result<Vec<Check>> {
    init_threads(common.threads);
    let fam: CouplingFamily = family.parse()?;
    let grid: Vec<f64> = f_grid
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| starkprufer::Error::InvalidParameter(format!("bad F grid: {e}")))?;
    let format: OutputFormat = common.format.parse()?;
    let config = common.config_echo(&format!(
        "F_grid={f_grid} N={n_max} trials={trials} seed={seed} family={family}"
    ));
    let mut report = Report::new(sink(&common.out)?, format, "transition-scan", &config)?;
    report.csv_header(&[
        "F", "lambda", "N", "trials", "mean_exp", "stderr", "decay_exp", "proxy",
    ])?;
    let rows = transition_scan(
        &grid,
        common.coupling,
        common.energy,
        fam,
        seed,
        n_max,
        trials,
    )?;
    let mut monotone = true;
    let mut signs_ok = true;
    let lambda = common.coupling;
    for w in rows.windows(2) {
        if w[1].mean_exp > w[0].mean_exp + 2.0 * (w[0].stderr + w[1].stderr) {
            monotone = false;
        }
    }
    for row in &rows {
        let critical = lambda * lambda / 2.0;
        if (row.field_strength - critical).abs() > 0.05 * critical {
            let expected_sign = if row.field_strength > critical { 1.0 } else { -1.0 };
            if row.proxy.signum() != expected_sign {
                signs_ok = false;
            }
        } else if row.proxy.abs() > 0.05 {
            signs_ok = false;
        }
        report.csv_row(&[
            row.field_strength,
            row.coupling,
            row.n_max as f64,
            row.trials as f64,
            row.mean_exp,
            row.stderr,
            row.decay_exp,
            row.proxy,
        ])?;
    }
    report.json_value(&json!({"critical_F": lambda * lambda / 2.0}))?;
    report.finish()?;
    Ok(vec![
        Check {
            name: "proxy_signs",
            passed: signs_ok,
            detail: "proxy sign matches F vs lambda^2/2 on the grid".into(),
        },
        Check {
            name: "exponent_monotone_in_F",
            passed: monotone,
            detail: "mean exponent decreases with F within 2 stderr".into(),
        },
    ])
}
