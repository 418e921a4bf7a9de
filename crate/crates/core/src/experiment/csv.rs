//! CSV bodies. Callers prepend their own `#` metadata lines.

use std::io::{self, Write};

use super::run::{ErrorRateRow, MethodCcdf, ScalingRow};

pub const PAPR_HEADER: &str = "frame_idx,papr_db";
pub const CURVE_HEADER: &str = "threshold_db,ccdf";
pub const ERROR_RATE_HEADER: &str =
    "method,snr_db,nu_max_hz,frames,symbols,symbol_errors,bit_errors,ser,ber";
pub const SCALING_HEADER: &str = "M,N,method,papr_db_at_ccdf_0p1";

/// Writes each line prefixed with `# `.
pub fn write_metadata<W: Write>(w: &mut W, lines: &[String]) -> io::Result<()> {
    for line in lines.iter().flat_map(|l| l.lines()) {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

pub fn write_papr_samples<W: Write>(w: &mut W, run: &MethodCcdf) -> io::Result<()> {
    writeln!(w, "{PAPR_HEADER}")?;
    for (i, s) in run.samples_db.iter().enumerate() {
        writeln!(w, "{i},{s:.6}")?;
    }
    Ok(())
}

pub fn write_ccdf_curve<W: Write>(w: &mut W, run: &MethodCcdf) -> io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for (t, p) in run.curve.thresholds_db.iter().zip(&run.curve.probabilities) {
        writeln!(w, "{t:.2},{p:.6}")?;
    }
    Ok(())
}

pub fn write_error_rates<W: Write>(w: &mut W, rows: &[ErrorRateRow]) -> io::Result<()> {
    writeln!(w, "{ERROR_RATE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{:.6e},{:.6e}",
            r.method,
            r.snr_db,
            r.nu_max_hz,
            r.frames,
            r.counts.symbols,
            r.counts.symbol_errors,
            r.counts.bit_errors,
            r.counts.ser(),
            r.counts.ber()
        )?;
    }
    Ok(())
}

pub fn write_scaling<W: Write>(w: &mut W, rows: &[ScalingRow]) -> io::Result<()> {
    writeln!(w, "{SCALING_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{:.4}", r.m, r.n, r.method, r.papr_db_at_0p1)?;
    }
    Ok(())
}
