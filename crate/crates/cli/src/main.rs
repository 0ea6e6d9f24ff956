//! `qutrit`: command-line front end for the spin-1 qutrit simulator.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse errors.

mod report;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qutrit_core::{
    detect, parse_named, program_for_operation, program_for_pps, run_program, synth_spectrum,
    verification_targets, DetectMode, DeviationState, Diagnostic, ExecOptions, Mode, OpName,
    PpsLabel, PpsTarget, PulseProgram, SpinSystem,
};
use report::{relative_error, Expectation, RunReport, VerifyReport, VerifyRow};

#[derive(Debug, Parser)]
#[command(
    name = "qutrit",
    about = "Simulate a single spin-1 nucleus in an oriented medium: pseudopure preparations, basis permutations, pulse programs and doublet readout",
    version
)]
struct Cli {
    /// Doublet splitting in Hz (overrides the config file).
    #[arg(long, global = true)]
    splitting: Option<f64>,

    /// Config file with `key = value` lines (`splitting_hz = 240`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Pulse fidelity mode (default ideal; a config `mode =` key applies
    /// when the flag is absent).
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    /// Integration step for shaped pulses, in seconds (default 1e-5; a
    /// config `dt =` key applies when the flag is absent).
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Ideal,
    Shaped,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ideal => Mode::Ideal,
            ModeArg::Shaped => Mode::Shaped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Write the synthesized doublet spectrum to this CSV file.
    #[arg(long, value_name = "out.csv")]
    spectrum: Option<PathBuf>,

    /// Lorentzian linewidth (FWHM) for the synthesized spectrum, Hz.
    #[arg(long, default_value_t = 5.0)]
    linewidth: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prepare a pseudopure state from equilibrium and read the doublet.
    Prep {
        /// One of: pps0, pps1, pps2m.
        target: String,
        /// Print the pulse-program source instead of running it.
        #[arg(long)]
        emit_source: bool,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Run one of the six basis-permutation operations from equilibrium.
    Op {
        /// One of: U1..U6.
        name: String,
        /// Print the pulse-program source instead of running it.
        #[arg(long)]
        emit_source: bool,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Parse, compile and execute a pulse-program file (`-` for stdin).
    Run {
        /// Path to a `.qp` file, or `-` to read standard input.
        file: String,
        /// Initial state: equilibrium (default), pps0, pps1 or pps2m.
        #[arg(long, default_value = "equilibrium")]
        from: String,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Run every named preparation and operation against its expected
    /// doublet ratios.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qutrit: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, String> {
    let (sys, config_mode, config_dt) = build_system(cli)?;
    let mode = cli
        .mode
        .map(Mode::from)
        .or(config_mode)
        .unwrap_or(Mode::Ideal);
    let dt = cli.dt.or(config_dt).unwrap_or(1e-5);
    if !dt.is_finite() || dt <= 0.0 {
        return Err(format!("--dt must be positive, got {dt}"));
    }
    let opts = ExecOptions { mode, dt };

    match &cli.command {
        Command::Prep {
            target,
            emit_source,
            spectrum,
        } => {
            let label: PpsLabel = target.parse()?;
            let program = program_for_pps(label);
            if *emit_source {
                print!("{}", program.print());
                return Ok(ExitCode::SUCCESS);
            }
            let expected = PpsTarget::get(label).expected_readout();
            let report = run_report(
                &program,
                &sys,
                &opts,
                &DeviationState::equilibrium(),
                Some(expected),
            )
            .map_err(|d| render_diagnostics(&program.name, &d))?;
            emit_report(cli, &sys, &report, spectrum)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Op {
            name,
            emit_source,
            spectrum,
        } => {
            let op: OpName = name.parse()?;
            let program = program_for_operation(op, true);
            if *emit_source {
                print!("{}", program.print());
                return Ok(ExitCode::SUCCESS);
            }
            let expected = qutrit_core::NamedOperation::get(op).expected_readout();
            let report = run_report(
                &program,
                &sys,
                &opts,
                &DeviationState::equilibrium(),
                Some(expected),
            )
            .map_err(|d| render_diagnostics(&program.name, &d))?;
            emit_report(cli, &sys, &report, spectrum)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            file,
            from,
            spectrum,
        } => {
            let (name, source) = read_source(file)?;
            let program = match parse_named(&name, &source) {
                Ok(p) => p,
                Err(diags) => {
                    eprintln!("{}", render_diagnostics(&name, &diags));
                    return Ok(ExitCode::from(2));
                }
            };
            let initial = initial_state(from)?;
            let report = match run_report(&program, &sys, &opts, &initial, None) {
                Ok(r) => r,
                Err(diags) => {
                    eprintln!("{}", render_diagnostics(&name, &diags));
                    return Ok(ExitCode::from(2));
                }
            };
            emit_report(cli, &sys, &report, spectrum)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let report = verify(&sys, &opts)?;
            match cli.format {
                FormatArg::Table => print!("{}", report.to_table()),
                FormatArg::Json => println!("{}", report.to_json()),
                FormatArg::Csv => print!("{}", report.to_csv()),
            }
            Ok(if report.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn build_system(cli: &Cli) -> Result<(SpinSystem, Option<Mode>, Option<f64>), String> {
    let (mut sys, config_mode, config_dt) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let sys = SpinSystem::from_config_str(&text).map_err(|e| e.to_string())?;
            let (mode, dt) = runtime_config_keys(&text)?;
            (sys, mode, dt)
        }
        None => (SpinSystem::default(), None, None),
    };
    if let Some(splitting) = cli.splitting {
        let carrier = sys.carrier_mhz;
        let field = sys.field_tesla;
        sys = SpinSystem::from_splitting_hz(splitting).map_err(|e| e.to_string())?;
        sys.carrier_mhz = carrier;
        sys.field_tesla = field;
    }
    Ok((sys, config_mode, config_dt))
}

/// The `mode` and `dt` config keys belong to the runtime, not the system.
fn runtime_config_keys(text: &str) -> Result<(Option<Mode>, Option<f64>), String> {
    let mut mode = None;
    let mut dt = None;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key.trim() {
            "mode" => mode = Some(value.trim().parse::<Mode>()?),
            "dt" => {
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| format!("config: dt `{}` is not a number", value.trim()))?;
                dt = Some(v);
            }
            _ => {}
        }
    }
    Ok((mode, dt))
}

fn initial_state(from: &str) -> Result<DeviationState, String> {
    match from {
        "equilibrium" => Ok(DeviationState::equilibrium()),
        other => {
            let label: PpsLabel = other.parse().map_err(|_| {
                format!("unknown initial state `{other}` (expected equilibrium|pps0|pps1|pps2m)")
            })?;
            DeviationState::from_populations(PpsTarget::get(label).expected_populations)
                .map_err(|e| e.to_string())
        }
    }
}

fn read_source(file: &str) -> Result<(String, String), String> {
    if file == "-" {
        let mut source = String::new();
        std::io::stdin()
            .read_to_string(&mut source)
            .map_err(|e| format!("cannot read stdin: {e}"))?;
        Ok(("<stdin>".to_string(), source))
    } else {
        let path = Path::new(file);
        let source =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read {file}: {e}"))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| file.to_string());
        Ok((name, source))
    }
}

fn render_diagnostics(name: &str, diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{name}:{d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_report(
    program: &PulseProgram,
    sys: &SpinSystem,
    opts: &ExecOptions,
    initial: &DeviationState,
    expected: Option<(f64, f64)>,
) -> Result<RunReport, Vec<Diagnostic>> {
    let outcome = run_program(program, sys, opts, initial)?;
    // Programs without an acquire still get a default readout.
    let readout = outcome
        .readout
        .unwrap_or_else(|| detect(&outcome.final_state, 5f64.to_radians(), DetectMode::Linear));
    let report = RunReport {
        name: program.name.clone(),
        mode: opts.mode.as_str().to_string(),
        dt_s: opts.dt,
        splitting_hz: sys.splitting_hz(),
        initial_populations: initial.populations(),
        final_populations: outcome.final_state.populations(),
        readout: (&readout).into(),
        expected: expected.map(|(i12, i01)| Expectation {
            i12,
            i01,
            rel_err_i12: relative_error(readout.i12, i12),
            rel_err_i01: relative_error(readout.i01, i01),
        }),
    };
    report.assert_finite();
    Ok(report)
}

fn emit_report(
    cli: &Cli,
    sys: &SpinSystem,
    report: &RunReport,
    spectrum: &SpectrumArgs,
) -> Result<(), String> {
    match cli.format {
        FormatArg::Table => print!("{}", report.to_table()),
        FormatArg::Json => println!("{}", report.to_json()),
        FormatArg::Csv => print!("{}", report.to_csv()),
    }
    if let Some(path) = &spectrum.spectrum {
        let readout = qutrit_core::DoubletReadout {
            i12: report.readout.i12,
            i01: report.readout.i01,
            mode: report.readout.mode.parse().unwrap_or_default(),
            tip_rad: report.readout.tip_deg.to_radians(),
        };
        let sweep = 4.0 * sys.splitting_hz();
        let trace = synth_spectrum(&readout, sys, spectrum.linewidth, sweep, 2001)
            .map_err(|e| e.to_string())?;
        std::fs::write(path, trace.to_csv())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn verify(sys: &SpinSystem, opts: &ExecOptions) -> Result<VerifyReport, String> {
    let tolerance = match opts.mode {
        Mode::Ideal => 1e-9,
        Mode::Shaped => 0.05,
    };
    let mut rows = Vec::new();
    for target in verification_targets() {
        let program = target.program();
        let outcome = run_program(&program, sys, opts, &DeviationState::equilibrium())
            .map_err(|d| render_diagnostics(&program.name, &d))?;
        let r = outcome.readout.expect("named programs acquire");
        let (e12, e01) = target.expected;
        let rel_err_i12 = relative_error(r.i12, e12);
        let rel_err_i01 = relative_error(r.i01, e01);
        rows.push(VerifyRow {
            name: target.name(),
            expected_i12: e12,
            expected_i01: e01,
            observed_i12: r.i12,
            observed_i01: r.i01,
            rel_err_i12,
            rel_err_i01,
            pass: rel_err_i12 <= tolerance && rel_err_i01 <= tolerance,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(VerifyReport {
        mode: opts.mode.as_str().to_string(),
        tolerance,
        rows,
        all_pass,
    })
}
