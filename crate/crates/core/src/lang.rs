//! The pulse-program language: a line-oriented text format for pulse /
//! gradient / delay / acquire sequences, with a parser that reports
//! positioned diagnostics, a canonical printer, and a compiler down to
//! propagators.
//!
//! Grammar (one instruction per line, `#` starts a comment):
//!
//! ```text
//! pulse sel <i> <j> <angle> [phase=<deg>] [shape=ideal|gauss|rect] [dur=<ms>]
//! pulse hard <angle> [phase=<deg>]
//! crush [strength=<x>]            # strength accepted and ignored
//! delay <ms>
//! acquire [tip=<deg>] [mode=linear|exact]
//! ```
//!
//! `<angle>` is `pi`, `pi/2` or `<number>deg`; radians are rejected to keep
//! files unambiguous. At most one `acquire`, and only as the last
//! instruction.

use std::f64::consts::TAU;

use crate::pulse::{
    compile_pulse, free_evolution, Angle, Mode, Propagator, PulseKind, PulseShape, PulseSpec,
};
use crate::readout::{detect, DetectMode, DoubletReadout};
use crate::spin::{DeviationState, SpinSystem};

/// Source position, 1-based. Line 0 marks synthetic (programmatic)
/// instructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn synthetic() -> Self {
        Span { line: 0, col: 0 }
    }

    pub fn is_synthetic(&self) -> bool {
        self.line == 0
    }
}

/// A positioned parse or compile failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        Self {
            span: Span { line, col },
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.span.is_synthetic() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)
        }
    }
}

/// One program instruction.
#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Pulse(PulseSpec),
    Crusher,
    Delay { ms: f64 },
    Acquire { tip_deg: f64, mode: DetectMode },
}

/// An instruction with its source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub item: Instruction,
    pub span: Span,
}

/// A parsed pulse program.
#[derive(Debug, Clone)]
pub struct PulseProgram {
    pub name: String,
    instructions: Vec<Spanned>,
}

impl PulseProgram {
    pub fn from_instructions(name: impl Into<String>, items: Vec<Instruction>) -> Self {
        Self {
            name: name.into(),
            instructions: items
                .into_iter()
                .map(|item| Spanned {
                    item,
                    span: Span::synthetic(),
                })
                .collect(),
        }
    }

    pub fn instructions(&self) -> &[Spanned] {
        &self.instructions
    }

    pub fn items(&self) -> impl Iterator<Item = &Instruction> {
        self.instructions.iter().map(|s| &s.item)
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Structural equality: same instructions, positions and name ignored.
    pub fn structurally_eq(&self, other: &PulseProgram) -> bool {
        self.len() == other.len() && self.items().zip(other.items()).all(|(a, b)| a == b)
    }

    /// Canonical source text. Parsing it back yields a structurally equal
    /// program. (A pulse's carrier-offset override has no source syntax and
    /// is not printed.)
    pub fn print(&self) -> String {
        let mut out = String::new();
        for ins in self.items() {
            out.push_str(&print_instruction(ins));
            out.push('\n');
        }
        out
    }
}

fn print_instruction(ins: &Instruction) -> String {
    match ins {
        Instruction::Pulse(spec) => {
            let mut s = match spec.kind {
                PulseKind::Selective { i, j } => format!("pulse sel {i} {j} {}", spec.flip),
                PulseKind::Hard => format!("pulse hard {}", spec.flip),
            };
            if spec.phase_deg != 0.0 {
                s.push_str(&format!(" phase={}", spec.phase_deg));
            }
            if let PulseKind::Selective { .. } = spec.kind {
                if let Some(shape) = spec.shape {
                    s.push_str(&format!(" shape={}", shape.as_str()));
                }
                if let Some(d) = spec.duration_ms {
                    s.push_str(&format!(" dur={d}"));
                }
            }
            s
        }
        Instruction::Crusher => "crush".to_string(),
        Instruction::Delay { ms } => format!("delay {ms}"),
        Instruction::Acquire { tip_deg, mode } => {
            let mut s = "acquire".to_string();
            if *tip_deg != 5.0 {
                s.push_str(&format!(" tip={tip_deg}"));
            }
            if *mode != DetectMode::Linear {
                s.push_str(&format!(" mode={mode}"));
            }
            s
        }
    }
}

/// Parse pulse-program source. On failure, every problem found is reported
/// as a positioned diagnostic; the parser itself never aborts.
pub fn parse(source: &str) -> Result<PulseProgram, Vec<Diagnostic>> {
    parse_named("program", source)
}

/// [`parse`] with an explicit program name.
pub fn parse_named(name: &str, source: &str) -> Result<PulseProgram, Vec<Diagnostic>> {
    let mut instructions = Vec::new();
    let mut diags = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let code = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens = tokenize(code);
        if tokens.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line_no,
            end_col: code.chars().count() + 1,
            tokens: &tokens,
            pos: 0,
        };
        match parse_line(&mut cur) {
            Ok(item) => instructions.push(Spanned {
                item,
                span: Span {
                    line: line_no,
                    col: tokens[0].0,
                },
            }),
            Err(d) => diags.push(d),
        }
    }

    check_structure(&instructions, &mut diags);

    if diags.is_empty() {
        Ok(PulseProgram {
            name: name.to_string(),
            instructions,
        })
    } else {
        Err(diags)
    }
}

/// Acquire, if present, must be unique and last.
fn check_structure(instructions: &[Spanned], diags: &mut Vec<Diagnostic>) {
    let mut seen_acquire = false;
    let last = instructions.len().saturating_sub(1);
    for (idx, spanned) in instructions.iter().enumerate() {
        if let Instruction::Acquire { .. } = spanned.item {
            if seen_acquire {
                diags.push(Diagnostic {
                    span: spanned.span,
                    message: "at most one `acquire` per program".to_string(),
                });
            } else if idx != last {
                diags.push(Diagnostic {
                    span: spanned.span,
                    message: "`acquire` must be the last instruction".to_string(),
                });
            }
            seen_acquire = true;
        }
    }
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (char_idx, (byte_idx, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((c0, b0)) = start.take() {
                tokens.push((c0, &line[b0..byte_idx]));
            }
        } else if start.is_none() {
            start = Some((char_idx + 1, byte_idx));
        }
    }
    if let Some((c0, b0)) = start {
        tokens.push((c0, &line[b0..]));
    }
    tokens
}

struct Cursor<'a> {
    line_no: usize,
    end_col: usize,
    tokens: &'a [(usize, &'a str)],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.tokens.get(self.pos).copied();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), Diagnostic> {
        self.next()
            .ok_or_else(|| self.err_at_end(format!("expected {what}")))
    }

    fn err(&self, col: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.line_no, col, message)
    }

    fn err_at_end(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.line_no, self.end_col, message)
    }
}

fn parse_line(cur: &mut Cursor) -> Result<Instruction, Diagnostic> {
    let (col, keyword) = cur.next().expect("tokenize returned non-empty");
    match keyword {
        "pulse" => parse_pulse(cur),
        "crush" => parse_crush(cur),
        "delay" => parse_delay(cur),
        "acquire" => parse_acquire(cur),
        other => Err(cur.err(col, format!("unknown keyword `{other}`"))),
    }
}

fn parse_pulse(cur: &mut Cursor) -> Result<Instruction, Diagnostic> {
    let (col, variant) = cur.expect("`sel` or `hard`")?;
    match variant {
        "sel" => parse_selective(cur),
        "hard" => parse_hard(cur),
        other => Err(cur.err(col, format!("expected `sel` or `hard`, got `{other}`"))),
    }
}

fn parse_level(cur: &mut Cursor) -> Result<usize, Diagnostic> {
    let (col, tok) = cur.expect("level index")?;
    let n: usize = tok
        .parse()
        .map_err(|_| cur.err(col, format!("expected a level index, got `{tok}`")))?;
    if n > 2 {
        return Err(cur.err(col, format!("level index {n} outside {{0,1,2}}")));
    }
    Ok(n)
}

fn parse_angle_token(cur: &mut Cursor) -> Result<(usize, Angle), Diagnostic> {
    let (col, tok) = cur.expect("an angle (pi, pi/2, or <number>deg)")?;
    let angle = match tok {
        "pi" => Angle::Pi,
        "pi/2" => Angle::HalfPi,
        _ => match tok.strip_suffix("deg") {
            Some(num) => {
                let v: f64 = num.parse().map_err(|_| {
                    cur.err(
                        col,
                        format!("malformed angle `{tok}` (expected pi, pi/2, or <number>deg)"),
                    )
                })?;
                if !v.is_finite() {
                    return Err(cur.err(col, format!("malformed angle `{tok}`")));
                }
                Angle::Degrees(v)
            }
            None => {
                return Err(cur.err(
                    col,
                    format!("malformed angle `{tok}` (expected pi, pi/2, or <number>deg)"),
                ))
            }
        },
    };
    Ok((col, angle))
}

fn check_flip_range(cur: &Cursor, col: usize, angle: Angle) -> Result<(), Diagnostic> {
    let rad = angle.radians();
    if rad > 0.0 && rad <= TAU + 1e-12 {
        Ok(())
    } else {
        Err(cur.err(col, format!("flip angle must lie in (0, 2pi], got {angle}")))
    }
}

fn parse_f64_value(cur: &Cursor, col: usize, key: &str, value: &str) -> Result<f64, Diagnostic> {
    let v: f64 = value
        .parse()
        .map_err(|_| cur.err(col, format!("option `{key}`: `{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(cur.err(col, format!("option `{key}`: `{value}` is not finite")));
    }
    Ok(v)
}

fn split_option<'a>(
    cur: &Cursor,
    col: usize,
    tok: &'a str,
) -> Result<(&'a str, &'a str), Diagnostic> {
    tok.split_once('=').ok_or_else(|| {
        cur.err(
            col,
            format!("unexpected token `{tok}` (expected key=value)"),
        )
    })
}

fn parse_selective(cur: &mut Cursor) -> Result<Instruction, Diagnostic> {
    let i = parse_level(cur)?;
    let j_col = cur.tokens.get(cur.pos).map(|t| t.0).unwrap_or(cur.end_col);
    let j = parse_level(cur)?;
    if i == j {
        return Err(cur.err(j_col, format!("identical levels {i} and {j}")));
    }
    if i.abs_diff(j) != 1 {
        return Err(cur.err(
            j_col,
            format!("non-adjacent levels {i} and {j}: double-quantum transition not drivable"),
        ));
    }
    let (angle_col, flip) = parse_angle_token(cur)?;
    check_flip_range(cur, angle_col, flip)?;

    let mut spec = PulseSpec::selective(i, j, flip);
    let (mut saw_phase, mut saw_shape, mut saw_dur) = (false, false, false);
    while let Some((col, tok)) = cur.next() {
        let (key, value) = split_option(cur, col, tok)?;
        match key {
            "phase" => {
                if saw_phase {
                    return Err(cur.err(col, "duplicate option `phase`"));
                }
                saw_phase = true;
                spec.phase_deg = parse_f64_value(cur, col, key, value)?;
            }
            "shape" => {
                if saw_shape {
                    return Err(cur.err(col, "duplicate option `shape`"));
                }
                saw_shape = true;
                spec.shape = Some(match value {
                    "ideal" => PulseShape::Ideal,
                    "gauss" => PulseShape::Gaussian,
                    "rect" => PulseShape::Rectangular,
                    other => {
                        return Err(cur.err(
                            col,
                            format!("unknown shape `{other}` (expected ideal|gauss|rect)"),
                        ))
                    }
                });
            }
            "dur" => {
                if saw_dur {
                    return Err(cur.err(col, "duplicate option `dur`"));
                }
                saw_dur = true;
                let v = parse_f64_value(cur, col, key, value)?;
                if v <= 0.0 {
                    return Err(cur.err(col, format!("duration must be positive, got {v} ms")));
                }
                spec.duration_ms = Some(v);
            }
            other => return Err(cur.err(col, format!("unknown option `{other}`"))),
        }
    }
    Ok(Instruction::Pulse(spec))
}

fn parse_hard(cur: &mut Cursor) -> Result<Instruction, Diagnostic> {
    let (angle_col, flip) = parse_angle_token(cur)?;
    check_flip_range(cur, angle_col, flip)?;
    let mut spec = PulseSpec::hard(flip);
    let mut saw_phase = false;
    while let Some((col, tok)) = cur.next() {
        let (key, value) = split_option(cur, col, tok)?;
        match key {
            "phase" => {
                if saw_phase {
                    return Err(cur.err(col, "duplicate option `phase`"));
                }
                saw_phase = true;
                spec.phase_deg = parse_f64_value(cur, col, key, value)?;
            }
            other => return Err(cur.err(col, format!("unknown option `{other}` for hard pulse"))),
        }
    }
    Ok(Instruction::Pulse(spec))
}

fn parse_crush(cur: &mut Cursor) -> Result<Instruction, Diagnostic> {
    while let Some((col, tok)) = cur.next() {
        let (key, _value) = split_option(cur, col, tok)?;
        match key {
            // Gradient strength is irrelevant to an idealized crusher;
            // accepted for forward compatibility.
            "strength" => {}
            other => return Err(cur.err(col, format!("unknown option `{other}` for crush"))),
        }
    }
    Ok(Instruction::Crusher)
}

fn parse_delay(cur: &mut Cursor) -> Result<Instruction, Diagnostic> {
    let (col, tok) = cur.expect("a delay in ms")?;
    let ms: f64 = tok
        .parse()
        .map_err(|_| cur.err(col, format!("expected a delay in ms, got `{tok}`")))?;
    if !ms.is_finite() || ms < 0.0 {
        return Err(cur.err(col, format!("delay must be >= 0 ms, got {tok}")));
    }
    if let Some((col, tok)) = cur.next() {
        return Err(cur.err(col, format!("unexpected token `{tok}` after delay")));
    }
    Ok(Instruction::Delay { ms })
}

fn parse_acquire(cur: &mut Cursor) -> Result<Instruction, Diagnostic> {
    let mut tip_deg = 5.0;
    let mut mode = DetectMode::Linear;
    let (mut saw_tip, mut saw_mode) = (false, false);
    while let Some((col, tok)) = cur.next() {
        let (key, value) = split_option(cur, col, tok)?;
        match key {
            "tip" => {
                if saw_tip {
                    return Err(cur.err(col, "duplicate option `tip`"));
                }
                saw_tip = true;
                let v = parse_f64_value(cur, col, key, value)?;
                if !(v > 0.0 && v < 90.0) {
                    return Err(cur.err(
                        col,
                        format!("tip angle must lie in (0, 90) degrees, got {v}"),
                    ));
                }
                tip_deg = v;
            }
            "mode" => {
                if saw_mode {
                    return Err(cur.err(col, "duplicate option `mode`"));
                }
                saw_mode = true;
                mode = value.parse().map_err(|e: String| cur.err(col, e))?;
            }
            other => return Err(cur.err(col, format!("unknown option `{other}` for acquire"))),
        }
    }
    Ok(Instruction::Acquire { tip_deg, mode })
}

/// Pulse compilation and execution options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecOptions {
    pub mode: Mode,
    /// Integration step for shaped pulses, in seconds.
    pub dt: f64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Ideal,
            dt: 1e-5,
        }
    }
}

/// A compiled instruction: unitaries stay unitaries, markers stay markers.
#[derive(Debug, Clone)]
pub enum CompiledStep {
    Apply(Propagator),
    Crush,
    Acquire { tip_rad: f64, mode: DetectMode },
}

#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub name: String,
    pub steps: Vec<CompiledStep>,
}

impl CompiledProgram {
    pub fn propagator_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, CompiledStep::Apply(_)))
            .count()
    }

    pub fn crusher_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, CompiledStep::Crush))
            .count()
    }
}

/// Compile a program under the given options: pulses become propagators per
/// the execution mode, delays become exact free evolution, order preserved.
pub fn compile(
    program: &PulseProgram,
    sys: &SpinSystem,
    opts: &ExecOptions,
) -> Result<CompiledProgram, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    check_structure(&program.instructions, &mut diags);

    let mut steps = Vec::with_capacity(program.len());
    for spanned in program.instructions() {
        match &spanned.item {
            Instruction::Pulse(spec) => match compile_pulse(spec, sys, opts.mode, opts.dt) {
                Ok(p) => steps.push(CompiledStep::Apply(p)),
                Err(e) => diags.push(Diagnostic {
                    span: spanned.span,
                    message: e.to_string(),
                }),
            },
            Instruction::Crusher => steps.push(CompiledStep::Crush),
            Instruction::Delay { ms } => {
                if !ms.is_finite() || *ms < 0.0 {
                    diags.push(Diagnostic {
                        span: spanned.span,
                        message: format!("delay must be >= 0 ms, got {ms}"),
                    });
                } else {
                    steps.push(CompiledStep::Apply(free_evolution(sys, ms * 1e-3)))
                }
            }
            Instruction::Acquire { tip_deg, mode } => {
                if !(*tip_deg > 0.0 && *tip_deg < 90.0) {
                    diags.push(Diagnostic {
                        span: spanned.span,
                        message: format!("tip angle must lie in (0, 90) degrees, got {tip_deg}"),
                    });
                } else {
                    steps.push(CompiledStep::Acquire {
                        tip_rad: tip_deg.to_radians(),
                        mode: *mode,
                    })
                }
            }
        }
    }

    if diags.is_empty() {
        Ok(CompiledProgram {
            name: program.name.clone(),
            steps,
        })
    } else {
        Err(diags)
    }
}

/// What running a program produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_state: DeviationState,
    /// Present when the program acquired.
    pub readout: Option<DoubletReadout>,
}

/// Run a compiled program from an initial state.
pub fn execute(program: &CompiledProgram, initial: &DeviationState) -> RunOutcome {
    let mut state = initial.clone();
    let mut readout = None;
    for step in &program.steps {
        match step {
            CompiledStep::Apply(p) => state = p.apply(&state),
            CompiledStep::Crush => state = crate::pulse::crusher(&state),
            CompiledStep::Acquire { tip_rad, mode } => {
                readout = Some(detect(&state, *tip_rad, *mode));
            }
        }
    }
    RunOutcome {
        final_state: state,
        readout,
    }
}

/// Parse-free convenience: compile and execute in one call.
pub fn run_program(
    program: &PulseProgram,
    sys: &SpinSystem,
    opts: &ExecOptions,
    initial: &DeviationState,
) -> Result<RunOutcome, Vec<Diagnostic>> {
    let compiled = compile(program, sys, opts)?;
    Ok(execute(&compiled, initial))
}
