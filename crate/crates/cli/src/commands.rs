use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use fnls_core::analysis::{
    accumulator_monotonicity, apriori_bounds_check, check_admissible, identity_refinement, scattering_study,
    sweep_damping_with, SweepResult,
};
use fnls_core::functionals::energy_identity_rhs;
use fnls_core::gn::gn_constant_estimate;
use fnls_core::integrator::{convergence_study, ConvergenceStatus};
use fnls_core::kernel::kernel_l1;
use fnls_core::profile::DEFAULT_TRUNCATION_TOL;
use fnls_core::{evolve, sample_profile, Field, ModelParams, TerminationStatus};
use serde_json::json;

use crate::config::{default_config, parse_config, ParsedConfig};
use crate::error::CliError;
use crate::output::{self, emit_plotdata, PlotSpec, SweepLine, SweepWriter, Table};

#[derive(Debug, Parser)]
#[command(name = "fnls", version, about = "Damped L²-critical fractional NLS simulator")]
pub struct Cli {
    /// Worker threads (fixed execution mode); defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// TOML run configuration; the built-in default run when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one trajectory and write its diagnostics CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Output path (`-` for standard output); overrides `output.timeseries`.
        #[arg(long)]
        out: Option<String>,
        /// Run identifier written in every row; overrides `output.run_id`.
        #[arg(long)]
        run_id: Option<String>,
    },
    /// Damping sweep, one JSONL line per friction coefficient.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated damping values; overrides `sweep.a_values`.
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<String>,
        /// Keep finished points already in the output and run only the rest.
        #[arg(long)]
        resume: bool,
    },
    /// Strichartz admissibility of one pair or a table of pairs.
    Admissible {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Time exponent (`inf` allowed); with `--r`, checks a single pair.
        #[arg(long, value_parser = parse_exponent)]
        q: Option<f64>,
        #[arg(long, value_parser = parse_exponent)]
        r: Option<f64>,
    },
    /// Identity-residual refinement and a-priori bounds.
    Verify {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Empirical Gagliardo–Nirenberg constant.
    GnEstimate {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// L¹ norm of the dissipative kernel.
    Kernel {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated dissipation orders; overrides `kernel.s_values`.
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
    },
    /// Scattering defects `δ(t0, factor·t0)`.
    Scattering {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Time-step convergence order.
    Convergence {
        #[command(flatten)]
        config: ConfigArg,
    },
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other.parse().map_err(|e| format!("`{s}`: {e}")),
    }
}

fn load(arg: &ConfigArg, err: &mut dyn Write) -> Result<ParsedConfig, CliError> {
    let parsed = match &arg.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_config(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        None => default_config(),
    };
    for w in &parsed.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(parsed)
}

/// Runs `f` on a pool of `threads` workers when requested.
fn compute<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

fn w(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|e| CliError::io("<stdout>", e))
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let threads = cli.threads;
    match &cli.command {
        Command::Simulate { config, out: path, run_id } => simulate(config, path.as_deref(), run_id.as_deref(), threads, out, err),
        Command::Sweep { config, a, out: path, resume } => sweep(config, a.as_deref(), path.as_deref(), *resume, threads, out, err),
        Command::Admissible { d, gamma, q, r } => admissible(*d, *gamma, *q, *r, out),
        Command::Verify { config } => verify(config, threads, out, err),
        Command::GnEstimate { config } => gn_estimate(config, threads, out, err),
        Command::Kernel { config, s } => kernel(config, s.as_deref(), threads, out, err),
        Command::Scattering { config } => scattering(config, threads, out, err),
        Command::Convergence { config } => convergence(config, threads, out, err),
    }
}

fn initial_field(parsed: &ParsedConfig) -> Result<(ModelParams, Field), CliError> {
    let c = &parsed.config;
    let u0 = sample_profile(&c.profile()?, &c.grid()?, DEFAULT_TRUNCATION_TOL)?;
    Ok((c.params()?, u0))
}

fn simulate(
    arg: &ConfigArg,
    path: Option<&str>,
    run_id: Option<&str>,
    threads: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let parsed = load(arg, err)?;
    let c = &parsed.config;
    let (params, u0) = initial_field(&parsed)?;
    let stepper = c.stepper();
    let traj = compute(threads, || evolve(&u0, &params, &stepper))??;
    let hash = c.hash();
    let run_id = run_id.unwrap_or(&c.output.run_id);
    if run_id.contains([',', '\n', '"']) {
        return Err(CliError::Config("--run-id must not contain commas, quotes or newlines".into()));
    }
    let path = path.unwrap_or(&c.output.timeseries);
    if path == "-" {
        output::write_csv(&mut *out, &traj.records, run_id, &hash).map_err(|e| CliError::io("<stdout>", e))?;
    } else {
        output::write_timeseries(&traj.records, path, run_id, &hash)?;
    }
    if let Some([x, y]) = &c.output.plot_columns {
        let spec = PlotSpec { x: x.clone(), y: y.clone(), path: c.output.plot.clone(), svg: c.output.svg.clone() };
        emit_plotdata(&Table::from_records(&traj.records), &spec)?;
    }
    let _ = writeln!(
        err,
        "status={} steps={} final_time={} records={} config_hash={hash}",
        status_name(traj.status),
        traj.steps,
        traj.final_time(),
        traj.records.len()
    );
    Ok(())
}

fn status_name(s: TerminationStatus) -> &'static str {
    match s {
        TerminationStatus::Completed => "completed",
        TerminationStatus::BlowupDetected => "blowup_detected",
        TerminationStatus::Instability => "instability",
    }
}

fn sweep(
    arg: &ConfigArg,
    a_values: Option<&[f64]>,
    path: Option<&str>,
    resume: bool,
    threads: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let parsed = load(arg, err)?;
    let c = &parsed.config;
    let base = c.sweep_base()?;
    let hash = c.hash();
    let a_values = a_values.unwrap_or(&c.sweep.a_values).to_vec();
    if a_values.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        return Err(CliError::Config("--a: damping values must be finite and >= 0".into()));
    }
    let path = PathBuf::from(path.unwrap_or(&c.output.sweep));

    let mut done: Vec<SweepLine> = Vec::new();
    if resume {
        done = output::read_sweep_lines(&path)?
            .into_iter()
            .filter(|l| l.config_hash == hash && a_values.contains(&l.result.a))
            .collect();
        // Rewrite without any torn tail before appending.
        let mut writer = SweepWriter::open(&path, false)?;
        for line in &done {
            writer.write(line).map_err(|e| CliError::io(&path, e))?;
        }
    }
    let todo: Vec<f64> = a_values.iter().copied().filter(|a| !done.iter().any(|l| l.result.a == *a)).collect();
    let writer = Mutex::new(SweepWriter::open(&path, resume)?);
    let write_failed = Mutex::new(None);
    let run_id = c.output.run_id.clone();
    let fresh = compute(threads, || {
        sweep_damping_with(&base, &todo, |r| {
            let line = SweepLine { result: r.clone(), run_id: run_id.clone(), config_hash: hash.clone() };
            if let Err(e) = writer.lock().expect("writer lock").write(&line) {
                *write_failed.lock().expect("error lock") = Some(e);
            }
        })
    })??;
    if let Some(e) = write_failed.into_inner().expect("error lock") {
        return Err(CliError::io(&path, e));
    }

    let mut all: Vec<SweepResult> = done.into_iter().map(|l| l.result).chain(fresh).collect();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    w(out, format_args!("{:>10} {:>12} {:>16} {:>14} {:>10}\n", "a", "outcome", "strichartz_acc", "peak_h_alpha", "status"))?;
    for r in &all {
        w(
            out,
            format_args!(
                "{:>10} {:>12} {:>16.8e} {:>14.6e} {:>10}\n",
                r.a,
                format!("{:?}", r.outcome).to_lowercase(),
                r.strichartz_acc,
                r.peak_h_alpha,
                status_name(r.status)
            ),
        )?;
    }
    let mono = accumulator_monotonicity(&all);
    w(out, format_args!("accumulator strictly decreasing in a: {} (over a = {:?})\n", mono.holds, mono.considered))?;
    if let Some([x, y]) = &c.output.plot_columns {
        let spec = PlotSpec { x: x.clone(), y: y.clone(), path: c.output.plot.clone(), svg: c.output.svg.clone() };
        emit_plotdata(&Table::from_sweep(&all), &spec)?;
    }
    Ok(())
}

fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

fn admissible(d: usize, gamma: f64, q: Option<f64>, r: Option<f64>, out: &mut dyn Write) -> Result<(), CliError> {
    if d == 0 {
        return Err(CliError::Config("--d must be at least 1".into()));
    }
    match (q, r) {
        (Some(q), Some(r)) => {
            let e = check_admissible(q, r, d, gamma);
            w(out, format_args!("{}\n", e.describe()))?;
            w(out, format_args!("clause: {}\n", e.clause.map_or("none".into(), |c| format!("{c:?}").to_lowercase())))?;
            w(out, format_args!("scaling 2/q + d/r = d/2 - gamma: {}\n", e.scaling_ok))?;
            match e.dual {
                Some((qd, rd)) => w(out, format_args!("dual (q~', r~'): ({}, {})\n", fmt_exp(qd), fmt_exp(rd)))?,
                None => w(out, format_args!("dual (q~', r~'): none\n"))?,
            }
            Ok(())
        }
        (None, None) => {
            let grid = [2.0, 2.5, 3.0, 4.0, 6.0, 8.0, f64::INFINITY];
            w(out, format_args!("{:>6} {:>6} {:>22} {:>10}\n", "q", "r", "verdict", "scaling"))?;
            for &q in &grid {
                for &r in &grid {
                    let e = check_admissible(q, r, d, gamma);
                    w(out, format_args!("{:>6} {:>6} {:>22} {:>10}\n", fmt_exp(q), fmt_exp(r), e.describe(), e.scaling_ok))?;
                }
            }
            Ok(())
        }
        _ => Err(CliError::Config("give both --q and --r, or neither for a table".into())),
    }
}

fn verify(arg: &ConfigArg, threads: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let parsed = load(arg, err)?;
    let c = &parsed.config;
    let v = &c.verify;
    let (params, u0) = initial_field(&parsed)?;
    let dealias = c.stepper.dealias;
    let (study, apriori) = compute(threads, || -> Result<_, CliError> {
        let study = identity_refinement(&u0, &params, &v.dts, v.t_end, dealias)?;
        let apriori = if params.a() > 0.0 {
            let cfg = fnls_core::StepperConfig { dt: v.dts[v.dts.len() - 1], t_end: v.t_end, dealias, ..Default::default() };
            Some(apriori_bounds_check(&evolve(&u0, &params, &cfg)?, &params)?)
        } else {
            None
        };
        Ok((study, apriori))
    })??;
    let rhs0 = energy_identity_rhs(&u0, &params);

    let tol = v.slope_tolerance;
    let mut failures = Vec::new();
    w(out, format_args!("{:>10} {:>16} {:>16}\n", "dt", "mass_resid", "energy_resid"))?;
    for i in 0..study.dts.len() {
        w(out, format_args!("{:>10} {:>16.6e} {:>16.6e}\n", study.dts[i], study.mass_residuals[i], study.energy_residuals[i]))?;
    }
    // A damped run has nonzero residuals; an exactly conserved one may be at round-off.
    let judge = |name: &str, slope: f64, resid: &[f64], failures: &mut Vec<String>| {
        let at_roundoff = resid.iter().all(|r| *r <= 1e-12);
        let ok = at_roundoff || (slope - 2.0).abs() <= tol;
        if !ok {
            failures.push(format!("{name} residual slope {slope:.3} outside 2 ± {tol}"));
        }
        (ok, at_roundoff)
    };
    for (name, slope, resid) in [
        ("mass", study.mass_slope, &study.mass_residuals),
        ("energy", study.energy_slope, &study.energy_residuals),
    ] {
        let (ok, roundoff) = judge(name, slope, resid, &mut failures);
        let note = if roundoff { " (round-off level)" } else { "" };
        w(out, format_args!("{name} identity: slope {slope:.4}{note} -> {}\n", if ok { "PASS" } else { "FAIL" }))?;
    }
    w(
        out,
        format_args!(
            "energy coupling at t=0: re {:.6e}, im {:.6e} (the identity uses the real part)\n",
            rhs0.coupling_re, rhs0.coupling_im
        ),
    )?;
    if let Some(rep) = apriori {
        let ok = rep.monotone && rep.dissipation_norm <= rep.dissipation_bound + 1e-6;
        if !ok {
            failures.push("a-priori bounds violated".into());
        }
        w(
            out,
            format_args!(
                "a-priori bounds: mass monotone {}, (∫‖(-Δ)^(s/2)u‖²)^(1/2) = {:.6e} <= {:.6e} -> {}\n",
                rep.monotone,
                rep.dissipation_norm,
                rep.dissipation_bound,
                if ok { "PASS" } else { "FAIL" }
            ),
        )?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failures.join("; ")))
    }
}

fn gn_estimate(arg: &ConfigArg, threads: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let parsed = load(arg, err)?;
    let c = &parsed.config;
    let params = c.params()?;
    let grid = c.grid()?;
    let spec = c.gn_spec();
    let gn = compute(threads, || gn_constant_estimate(&params, &grid, &spec))??;
    let report = json!({
        "alpha": gn.alpha,
        "d": gn.d,
        "estimate": gn.estimate,
        "samples": gn.samples,
        "skipped": gn.skipped,
        "maximizer": gn.maximizer,
        "energy_constant": gn.energy_constant(&params),
        "coercivity_mass": gn.coercivity_mass(&params),
    });
    w(out, format_args!("{}\n", serde_json::to_string_pretty(&report).expect("json")))
}

fn kernel(
    arg: &ConfigArg,
    s_values: Option<&[f64]>,
    threads: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let parsed = load(arg, err)?;
    let c = &parsed.config;
    let quad = c.kernel_quadrature();
    let s_values = s_values.unwrap_or(&c.kernel.s_values).to_vec();
    let (a, t) = (c.kernel.a, c.kernel.t);
    let reports = compute(threads, || s_values.iter().map(|&s| kernel_l1(s, t, a, &quad)).collect::<Vec<_>>())?;
    w(out, format_args!("{:>6} {:>8} {:>8} {:>22} {:>20} {:>12} {:>7}\n", "s", "a", "t", "l1_norm", "l1_norm/2pi", "rel_change", "levels"))?;
    let mut unstable = Vec::new();
    for (s, rep) in s_values.iter().zip(reports) {
        match rep {
            Ok(r) => w(
                out,
                format_args!(
                    "{:>6} {:>8} {:>8} {:>22.15e} {:>20.15} {:>12.3e} {:>7}\n",
                    s,
                    a,
                    t,
                    r.value,
                    r.normalized,
                    r.rel_change,
                    r.levels.len()
                ),
            )?,
            Err(fnls_core::Error::KernelUnstable { rel_change, tolerance }) => {
                w(out, format_args!("{:>6} {:>8} {:>8} {:>22}\n", s, a, t, "unstable"))?;
                unstable.push(format!("s = {s}: relative change {rel_change:.3e} > {tolerance:e}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if unstable.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("kernel quadrature not refinement-stable: {}", unstable.join("; "))))
    }
}

fn scattering(arg: &ConfigArg, threads: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let parsed = load(arg, err)?;
    let c = &parsed.config;
    let sc = &c.scattering;
    let (params, u0) = initial_field(&parsed)?;
    let mut stepper = c.stepper();
    let horizons: Vec<f64> = sc.base_times.iter().map(|t| sc.factor * t).collect();
    stepper.t_end = horizons.iter().copied().fold(0.0, f64::max);
    stepper.snapshot_times = sc.base_times.iter().chain(&horizons).copied().collect();
    let res = compute(threads, || -> Result<_, CliError> {
        let traj = evolve(&u0, &params, &stepper)?;
        if traj.status != TerminationStatus::Completed {
            return Err(CliError::Check(format!("run ended with status {}", status_name(traj.status))));
        }
        Ok(scattering_study(&traj, &sc.base_times, sc.factor, &params, sc.tolerance)?)
    })??;
    if params.s() != params.alpha() {
        let _ = writeln!(err, "warning: s != alpha; scattering is only expected for s = alpha");
    }
    w(out, format_args!("{:>8} {:>8} {:>24}\n", "t0", "t1", "defect"))?;
    for e in &res.entries {
        w(out, format_args!("{:>8} {:>8} {:>24.16e}\n", e.t0, e.t1, e.defect))?;
    }
    match &res.u_plus {
        Some(u) => w(out, format_args!("u_plus: t0 = {}, mass = {:.6e}, h_alpha = {:.6e}\n", u.t0, u.mass, u.h_alpha))?,
        None => w(out, format_args!("u_plus: no defect below {:e}\n", sc.tolerance))?,
    }
    if res.strictly_decreasing() {
        w(out, format_args!("defects strictly decreasing: true\n"))
    } else {
        w(out, format_args!("defects strictly decreasing: false\n"))?;
        Err(CliError::Check("scattering defects are not strictly decreasing".into()))
    }
}

fn convergence(arg: &ConfigArg, threads: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let parsed = load(arg, err)?;
    let c = &parsed.config;
    let cv = &c.convergence;
    let (params, u0) = initial_field(&parsed)?;
    let dealias = c.stepper.dealias;
    let rep = compute(threads, || convergence_study(&u0, &params, &cv.dts, cv.t_end, dealias))??;
    w(out, format_args!("{:>12} {:>24}\n", "dt pair", "difference"))?;
    for (i, d) in rep.differences.iter().enumerate() {
        w(out, format_args!("{:>12} {:>24.16e}\n", format!("{}/{}", i, i + 1), d))?;
    }
    w(out, format_args!("pairwise orders: {:?}\n", rep.pairwise_orders))?;
    w(out, format_args!("order: {:.4}\n", rep.order))?;
    let ok = rep.status == ConvergenceStatus::Converged && rep.order >= cv.order_min && rep.order <= cv.order_max;
    if ok {
        Ok(())
    } else {
        Err(CliError::Check(format!("order {:.4} outside [{}, {}] or inconclusive", rep.order, cv.order_min, cv.order_max)))
    }
}
