use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ehaoi_core::{Discipline, PenaltyKind, PenaltySpec, SystemParams};

use crate::args::{DisciplineArg, OutputArgs, PenaltyArg, PenaltyArgs, SystemArgs};
use crate::failure::Failure;
use crate::record::Value;
use crate::OUTPUT_DIR_ENV;

pub mod analyze;
pub mod qbd;
pub mod selftest;
pub mod simulate;
pub mod sweep;

impl From<DisciplineArg> for Discipline {
    fn from(d: DisciplineArg) -> Self {
        match d {
            DisciplineArg::Fcfs => Discipline::Fcfs,
            DisciplineArg::Lcfs => Discipline::Lcfs,
        }
    }
}

pub fn system_params(a: &SystemArgs) -> Result<SystemParams, Failure> {
    Ok(SystemParams::new(a.lambda, a.rate, a.buffer, a.battery)?)
}

pub fn penalty_spec(kind: PenaltyArg, alpha: Option<f64>, beta: Option<f64>) -> Result<PenaltySpec, Failure> {
    let spec = match kind {
        PenaltyArg::Linear => PenaltySpec::linear(),
        PenaltyArg::Exp => PenaltySpec::exponential(
            alpha.ok_or_else(|| Failure::invalid("--alpha is required for --penalty exp"))?,
        )?,
        PenaltyArg::Step => PenaltySpec::step(
            beta.ok_or_else(|| Failure::invalid("--beta is required for --penalty step"))?,
        )?,
    };
    Ok(spec)
}

pub fn penalty_from_args(a: &PenaltyArgs) -> Result<PenaltySpec, Failure> {
    penalty_spec(a.penalty, a.alpha, a.beta)
}

/// `(kind, alpha, beta)` columns describing a penalty.
pub fn penalty_columns(spec: &PenaltySpec) -> (Value, Value, Value) {
    match spec.kind() {
        PenaltyKind::Linear => ("linear".into(), Value::Null, Value::Null),
        PenaltyKind::Exponential { alpha } => ("exp".into(), (*alpha).into(), Value::Null),
        PenaltyKind::Step { beta } => ("step".into(), Value::Null, (*beta).into()),
        PenaltyKind::Custom(_) => (spec.id().into(), Value::Null, Value::Null),
    }
}

pub fn resolve_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>, Failure> {
    let path = resolve_path(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(Failure::io)?;
    }
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Runs `f` against the requested output sink.
pub fn with_output<F>(args: &OutputArgs, stdout: &mut dyn Write, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Failure>,
{
    match &args.output {
        None => f(stdout),
        Some(path) => {
            let mut file = create_file(path)?;
            f(&mut file)?;
            file.flush().map_err(Failure::io)
        }
    }
}

/// Whether two routes agree to `1e-9` relative; values below `1e-12` are
/// compared absolutely.
pub fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12)
}
