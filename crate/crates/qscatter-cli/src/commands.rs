//! Subcommand implementations.
//!
//! Every run_* resolves its inputs through [`crate::config::Config`] (flag
//! beats config beats default), computes through the library, prints a
//! human-readable summary, and optionally writes a result envelope whose
//! `inputs` map reproduces the run when fed back as a config file.

use crate::config::{self, format_complex, Config};
use crate::csvio::{parse_csv, table_to_csv, write_atomic};
use crate::envelope::ResultEnvelope;
use crate::svg;
use crate::{
    AmpArgs, Cli, CliError, Command, ConcArgs, PlotArgs, PolesArgs, SweepCmd, SweepDkArgs,
    SweepGArgs, SweepKArgs, VerifyArgs,
};
use qscatter::experiments::{
    sweep_concurrence_dk, sweep_concurrence_g, sweep_transmission, ConcurrenceDkSweep,
    ConcurrenceGSweep, ExperimentError, FaultInjection, SweepTable, TransmissionSweep, VerifyGrid,
    VerifyOptions,
};
use qscatter::scattering::{self, ScattererParams, ScatteringError};
use qscatter::twobody::{self, TwoBodyError, TwoParticleInput};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config::load(cli.config.as_deref())?;
    if let Some(n) = cfg.usize_opt("threads", cli.threads)? {
        // Errors only if a global pool already exists, which is fine: sweep
        // output is order-preserving and identical for any thread count.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Amp(a) => run_amp(a, &cfg),
        Command::Conc(a) => run_conc(a, &cfg),
        Command::Sweep { kind } => match kind {
            SweepCmd::K(a) => run_sweep_k(a, &cfg),
            SweepCmd::Dk(a) => run_sweep_dk(a, &cfg),
            SweepCmd::G(a) => run_sweep_g(a, &cfg),
        },
        Command::Poles(a) => run_poles(a, &cfg),
        Command::Verify(a) => run_verify_cmd(a, &cfg),
        Command::Plot(a) => run_plot(a),
    }
}

// Bad inputs exit 2, failed computations exit 1. Validation errors from the
// library constructors count as bad inputs even when they surface deep in a
// call chain.
fn scattering_err(e: ScatteringError) -> CliError {
    match e {
        ScatteringError::InvalidParams(_)
        | ScatteringError::NonPositiveMomentum(_)
        | ScatteringError::InvalidGuess
        | ScatteringError::InvalidBracket(_) => CliError::Usage(e.to_string()),
        _ => CliError::Compute(e.to_string()),
    }
}

fn twobody_err(e: TwoBodyError) -> CliError {
    match e {
        TwoBodyError::NonPositiveMomentum(_) => CliError::Usage(e.to_string()),
        TwoBodyError::Scattering(inner) => scattering_err(inner),
        _ => CliError::Compute(e.to_string()),
    }
}

fn experiment_err(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::InvalidSpec(_)
        | ExperimentError::EmptyGrid
        | ExperimentError::FaultOutOfRange { .. } => CliError::Usage(e.to_string()),
        ExperimentError::Scattering(inner) => scattering_err(inner),
        ExperimentError::TwoBody(inner) => twobody_err(inner),
        ExperimentError::Matrix(_) => CliError::Compute(e.to_string()),
    }
}

// Both branches print the shortest string that parses back to the same
// bits, so echoed inputs reproduce runs exactly.
fn fnum(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e16) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn fnum_list(vs: &[f64]) -> String {
    vs.iter()
        .map(|v| fnum(*v))
        .collect::<Vec<_>>()
        .join(",")
}

fn opt_str(v: Option<f64>) -> String {
    match v {
        Some(x) => fnum(x),
        None => "empty".into(),
    }
}

fn run_amp(a: AmpArgs, cfg: &Config) -> Result<(), CliError> {
    let u0 = cfg.f64("u0", a.u0, 1.0)?;
    let g = cfg.f64("g", a.g, 0.5)?;
    let e_exc = cfg.f64("e_exc", a.e_exc, 1.0)?;
    let k = cfg.f64("k", a.k, 1.0)?;
    let start = Instant::now();

    let p = ScattererParams::new(u0, g, e_exc).map_err(scattering_err)?;
    let amp = scattering::amplitudes(&p, k).map_err(scattering_err)?;
    let k_e = scattering::excited_momentum(&p, k).map_err(scattering_err)?;
    let sum = amp.intensity_sum();

    println!("u0 = {}  g = {}  e_exc = {}  k = {}", fnum(u0), fnum(g), fnum(e_exc), fnum(k));
    println!("k_e           = {}", format_complex(k_e));
    println!("r             = {}", format_complex(amp.r));
    println!("t             = {}", format_complex(amp.t));
    println!("|r|^2         = {}", fnum(amp.r.norm_sqr()));
    println!("|t|^2         = {}", fnum(amp.t.norm_sqr()));
    println!("|r|^2 + |t|^2 = {}", fnum(sum));

    if let Some(path) = &a.json {
        let inputs = BTreeMap::from([
            ("u0".into(), fnum(u0)),
            ("g".into(), fnum(g)),
            ("e_exc".into(), fnum(e_exc)),
            ("k".into(), fnum(k)),
        ]);
        let mut env = ResultEnvelope::new("amp", inputs);
        env.push_row(&[
            ("k", Some(k), ""),
            ("r_re", Some(amp.r.re), ""),
            ("r_im", Some(amp.r.im), ""),
            ("t_re", Some(amp.t.re), ""),
            ("t_im", Some(amp.t.im), ""),
            ("r_sq", Some(amp.r.norm_sqr()), ""),
            ("t_sq", Some(amp.t.norm_sqr()), ""),
            ("sum", Some(sum), ""),
        ]);
        env.timing_s = start.elapsed().as_secs_f64();
        env.write(path)?;
    }
    Ok(())
}

fn run_conc(a: ConcArgs, cfg: &Config) -> Result<(), CliError> {
    let u0 = cfg.f64("u0", a.u0, 1.0)?;
    let g = cfg.f64("g", a.g, 0.5)?;
    let e_exc = cfg.f64("e_exc", a.e_exc, 1.0)?;
    let k1 = cfg.f64("k1", a.k1, 0.5)?;
    let k2 = cfg.f64("k2", a.k2, 1.5)?;
    let start = Instant::now();

    let p = ScattererParams::new(u0, g, e_exc).map_err(scattering_err)?;
    let input = TwoParticleInput::new(p, k1, k2).map_err(twobody_err)?;
    let rep = twobody::concurrence_report(&input).map_err(twobody_err)?;

    println!(
        "u0 = {}  g = {}  e_exc = {}  k1 = {}  k2 = {}",
        fnum(u0), fnum(g), fnum(e_exc), fnum(k1), fnum(k2)
    );
    println!("eta_full         = {}", fnum(rep.eta_full));
    println!("eta_postselected = {}", fnum(rep.eta_postselected));
    println!("sector_ll        = {}", opt_str(rep.sector_ll));
    println!("sector_rr        = {}", opt_str(rep.sector_rr));
    println!("sector_lr        = {}", opt_str(rep.sector_lr));
    println!("gamma_norm       = {}", fnum(rep.gamma_norm));

    if let Some(path) = &a.json {
        let inputs = BTreeMap::from([
            ("u0".into(), fnum(u0)),
            ("g".into(), fnum(g)),
            ("e_exc".into(), fnum(e_exc)),
            ("k1".into(), fnum(k1)),
            ("k2".into(), fnum(k2)),
        ]);
        let sector = |v: Option<f64>| (v, if v.is_some() { "" } else { "empty" });
        let (ll, ll_f) = sector(rep.sector_ll);
        let (rr, rr_f) = sector(rep.sector_rr);
        let (lr, lr_f) = sector(rep.sector_lr);
        let mut env = ResultEnvelope::new("conc", inputs);
        env.push_row(&[
            ("eta_full", Some(rep.eta_full), ""),
            ("eta_postselected", Some(rep.eta_postselected), ""),
            ("sector_ll", ll, ll_f),
            ("sector_rr", rr, rr_f),
            ("sector_lr", lr, lr_f),
            ("gamma_norm", Some(rep.gamma_norm), ""),
        ]);
        env.timing_s = start.elapsed().as_secs_f64();
        env.write(path)?;
    }
    Ok(())
}

fn emit_table(
    command: &str,
    table: &SweepTable,
    inputs: BTreeMap<String, String>,
    out: Option<&PathBuf>,
    json: Option<&PathBuf>,
    start: Instant,
) -> Result<(), CliError> {
    let csv = table_to_csv(table);
    match out {
        Some(path) => {
            write_atomic(path, &csv)?;
            println!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => print!("{csv}"),
    }
    if let Some(path) = json {
        ResultEnvelope::from_table(command, inputs, table, start.elapsed().as_secs_f64())
            .write(path)?;
    }
    Ok(())
}

fn run_sweep_k(a: SweepKArgs, cfg: &Config) -> Result<(), CliError> {
    let d = TransmissionSweep::default();
    let spec = TransmissionSweep {
        u0: cfg.f64("u0", a.u0, d.u0)?,
        g: cfg.f64("g", a.g, d.g)?,
        e_exc: cfg.f64("e_exc", a.e_exc, d.e_exc)?,
        k_lo: cfg.f64("lo", a.lo, d.k_lo)?,
        k_hi: cfg.f64("hi", a.hi, d.k_hi)?,
        steps: cfg.usize("steps", a.steps, d.steps)?,
    };
    let start = Instant::now();
    let table = sweep_transmission(&spec).map_err(experiment_err)?;
    let inputs = BTreeMap::from([
        ("u0".into(), fnum(spec.u0)),
        ("g".into(), fnum(spec.g)),
        ("e_exc".into(), fnum(spec.e_exc)),
        ("lo".into(), fnum(spec.k_lo)),
        ("hi".into(), fnum(spec.k_hi)),
        ("steps".into(), spec.steps.to_string()),
    ]);
    emit_table("sweep-k", &table, inputs, a.out.as_ref(), a.json.as_ref(), start)
}

fn run_sweep_dk(a: SweepDkArgs, cfg: &Config) -> Result<(), CliError> {
    let d = ConcurrenceDkSweep::default();
    let spec = ConcurrenceDkSweep {
        u0: cfg.f64("u0", a.u0, d.u0)?,
        g: cfg.f64("g", a.g, d.g)?,
        k1: cfg.f64("k1", a.k1, d.k1)?,
        e_exc_curves: cfg.list("e_exc_curves", a.e_exc_curves, &d.e_exc_curves)?,
        dk_lo: cfg.f64("lo", a.lo, d.dk_lo)?,
        dk_hi: cfg.f64("hi", a.hi, d.dk_hi)?,
        steps: cfg.usize("steps", a.steps, d.steps)?,
    };
    let start = Instant::now();
    let table = sweep_concurrence_dk(&spec).map_err(experiment_err)?;
    let inputs = BTreeMap::from([
        ("u0".into(), fnum(spec.u0)),
        ("g".into(), fnum(spec.g)),
        ("k1".into(), fnum(spec.k1)),
        ("e_exc_curves".into(), fnum_list(&spec.e_exc_curves)),
        ("lo".into(), fnum(spec.dk_lo)),
        ("hi".into(), fnum(spec.dk_hi)),
        ("steps".into(), spec.steps.to_string()),
    ]);
    emit_table("sweep-dk", &table, inputs, a.out.as_ref(), a.json.as_ref(), start)
}

fn run_sweep_g(a: SweepGArgs, cfg: &Config) -> Result<(), CliError> {
    let d = ConcurrenceGSweep::default();
    let spec = ConcurrenceGSweep {
        u0: cfg.f64("u0", a.u0, d.u0)?,
        k1: cfg.f64("k1", a.k1, d.k1)?,
        k2: cfg.f64("k2", a.k2, d.k2)?,
        e_exc_curves: cfg.list("e_exc_curves", a.e_exc_curves, &d.e_exc_curves)?,
        g_lo: cfg.f64("lo", a.lo, d.g_lo)?,
        g_hi: cfg.f64("hi", a.hi, d.g_hi)?,
        steps: cfg.usize("steps", a.steps, d.steps)?,
    };
    let start = Instant::now();
    let table = sweep_concurrence_g(&spec).map_err(experiment_err)?;
    let inputs = BTreeMap::from([
        ("u0".into(), fnum(spec.u0)),
        ("k1".into(), fnum(spec.k1)),
        ("k2".into(), fnum(spec.k2)),
        ("e_exc_curves".into(), fnum_list(&spec.e_exc_curves)),
        ("lo".into(), fnum(spec.g_lo)),
        ("hi".into(), fnum(spec.g_hi)),
        ("steps".into(), spec.steps.to_string()),
    ]);
    emit_table("sweep-g", &table, inputs, a.out.as_ref(), a.json.as_ref(), start)
}

fn run_poles(a: PolesArgs, cfg: &Config) -> Result<(), CliError> {
    let u0 = cfg.f64("u0", a.u0, 1.0)?;
    let g = cfg.f64("g", a.g, 0.0)?;
    let e_exc = cfg.f64("e_exc", a.e_exc, 0.0)?;
    let guess = cfg.complex("guess", a.guess.as_deref(), "0.4i")?;
    let start = Instant::now();

    let p = ScattererParams::new(u0, g, e_exc).map_err(scattering_err)?;
    let pole = scattering::find_pole(&p, guess).map_err(scattering_err)?;
    let energy = pole.k * pole.k;

    println!(
        "u0 = {}  g = {}  e_exc = {}  guess = {}",
        fnum(u0), fnum(g), fnum(e_exc), format_complex(guess)
    );
    println!("pole k     = {}", format_complex(pole.k));
    println!("energy k^2 = {}", format_complex(energy));
    println!("residual   = {:.3e}", pole.residual);
    println!("iterations = {}", pole.iterations);

    if let Some(path) = &a.json {
        let inputs = BTreeMap::from([
            ("u0".into(), fnum(u0)),
            ("g".into(), fnum(g)),
            ("e_exc".into(), fnum(e_exc)),
            ("guess".into(), format_complex(guess)),
        ]);
        let mut env = ResultEnvelope::new("poles", inputs);
        env.push_row(&[
            ("k_re", Some(pole.k.re), ""),
            ("k_im", Some(pole.k.im), ""),
            ("residual", Some(pole.residual), ""),
            ("iterations", Some(f64::from(pole.iterations)), ""),
        ]);
        env.timing_s = start.elapsed().as_secs_f64();
        env.write(path)?;
    }
    Ok(())
}

fn run_verify_cmd(a: VerifyArgs, cfg: &Config) -> Result<(), CliError> {
    let tol = cfg.f64_opt("tol", a.tol)?;
    let fault = cfg.usize_opt("fault", a.fault)?;
    let opts = VerifyOptions {
        tol_override: tol,
        fault: fault.map(|flat_index| FaultInjection { flat_index }),
    };
    let grid = VerifyGrid::default();
    let report = qscatter::experiments::run_verify(&grid, &opts).map_err(experiment_err)?;

    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} {:<30} worst {:>10.3e}  tol {:.3e}",
            c.name, c.worst, c.tolerance
        );
        if !c.passed {
            println!("     {}", c.detail);
        }
    }
    let total = report.checks.len();
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!(
        "{passed} of {total} checks passed on {} in {:.2}s",
        report.grid_description, report.wall_time_s
    );

    if let Some(path) = &a.json {
        let mut inputs = BTreeMap::new();
        if let Some(t) = tol {
            inputs.insert("tol".into(), fnum(t));
        }
        if let Some(f) = fault {
            inputs.insert("fault".into(), f.to_string());
        }
        let mut env = ResultEnvelope::new("verify", inputs);
        env.columns = report.checks.iter().map(|c| c.name.to_string()).collect();
        env.rows = vec![report.checks.iter().map(|c| Some(c.worst)).collect()];
        env.flags = vec![report
            .checks
            .iter()
            .map(|c| if c.passed { "PASS".into() } else { "FAIL".into() })
            .collect()];
        env.timing_s = report.wall_time_s;
        env.write(path)?;
    }

    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Compute(format!(
            "verification failed: {} of {total} checks",
            total - passed
        )))
    }
}

fn run_plot(a: PlotArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", a.input.display())))?;
    let data = parse_csv(&text).map_err(CliError::Usage)?;
    let rendered = svg::render(&data);
    write_atomic(&a.out, &rendered)?;
    println!("wrote {}", a.out.display());
    Ok(())
}
