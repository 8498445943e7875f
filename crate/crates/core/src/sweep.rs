//! SNR sweeps of the layered rate against capacity, CSV output and the
//! crossover search.
//!
//! Every grid point uses unit input energy (`α² + β² = 1`) and noise power
//! `1/γ`, so the SNR `γ` is the only free axis.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mi::QuadratureConfig;
use crate::scheme::{adr_paper, CocktailParams};

pub const CSV_HEADER: &str =
    "snr,capacity,adr_paper_total,adr_layer1,adr_layer2,mi_exact_layer1,mi_exact_total,gap_paper,gap_exact";

/// Grid count tolerance, in steps, for an endpoint that is hit up to rounding.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// `β/α`, strictly between 0 and 1.
    pub ratio: f64,
    pub snr_min: f64,
    pub snr_max: f64,
    pub step: f64,
    pub quadrature: QuadratureConfig,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ratio must lie in (0, 1), got {}",
                self.ratio
            )));
        }
        if !(self.snr_min.is_finite() && self.snr_min >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "snr_min must be >= 0, got {}",
                self.snr_min
            )));
        }
        if !(self.snr_max.is_finite() && self.snr_max > self.snr_min) {
            return Err(Error::InvalidParameter(format!(
                "snr_max must exceed snr_min, got {}",
                self.snr_max
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParameter(format!("step must be > 0, got {}", self.step)));
        }
        if self.grid_len() < 2 {
            return Err(Error::InvalidParameter(
                "grid must contain at least 2 points; reduce step".into(),
            ));
        }
        self.quadrature.validate()
    }

    fn grid_len(&self) -> usize {
        ((self.snr_max - self.snr_min) / self.step + GRID_SLACK).floor() as usize + 1
    }

    /// `snr_min + k·step` for every `k` that stays within `snr_max`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.grid_len())
            .map(|k| self.snr_min + k as f64 * self.step)
            .collect()
    }
}

/// One CSV row. Field names match [`CSV_HEADER`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub snr: f64,
    pub capacity: f64,
    pub adr_paper_total: f64,
    pub adr_layer1: f64,
    pub adr_layer2: f64,
    pub mi_exact_layer1: f64,
    pub mi_exact_total: f64,
    pub gap_paper: f64,
    pub gap_exact: f64,
}

impl SweepRow {
    fn zero() -> Self {
        Self {
            snr: 0.0,
            capacity: 0.0,
            adr_paper_total: 0.0,
            adr_layer1: 0.0,
            adr_layer2: 0.0,
            mi_exact_layer1: 0.0,
            mi_exact_total: 0.0,
            gap_paper: 0.0,
            gap_exact: 0.0,
        }
    }

    fn fields(&self) -> [f64; 9] {
        [
            self.snr,
            self.capacity,
            self.adr_paper_total,
            self.adr_layer1,
            self.adr_layer2,
            self.mi_exact_layer1,
            self.mi_exact_total,
            self.gap_paper,
            self.gap_exact,
        ]
    }
}

/// Evaluates a single grid point.
pub fn evaluate_point(ratio: f64, snr: f64, q: &QuadratureConfig) -> Result<SweepRow> {
    if snr == 0.0 {
        return Ok(SweepRow::zero());
    }
    let params = CocktailParams::unit_energy(ratio)?;
    let adr = adr_paper(&params, params.noise_for_snr(snr)?, q)?;
    Ok(SweepRow {
        snr,
        capacity: adr.capacity_bits,
        adr_paper_total: adr.total_bits,
        adr_layer1: adr.layer1_bits,
        adr_layer2: adr.layer2_bits,
        mi_exact_layer1: adr.exact_layer1_bits,
        mi_exact_total: adr.exact_total_bits,
        gap_paper: adr.gap_paper(),
        gap_exact: adr.gap_exact(),
    })
}

/// Outcome of one grid point. A failed point keeps its SNR.
pub type RowResult = std::result::Result<SweepRow, (f64, Error)>;

/// Evaluates the whole grid, in parallel on the current rayon pool. Rows come
/// back in ascending SNR order regardless of scheduling.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<RowResult>> {
    spec.validate()?;
    Ok(spec
        .grid()
        .into_par_iter()
        .map(|snr| evaluate_point(spec.ratio, snr, &spec.quadrature).map_err(|e| (snr, e)))
        .collect())
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed,
/// exponent form outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_owned()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the header and one line per row, LF-terminated. Failed points are
/// written as their SNR followed by `nan` fields.
pub fn write_csv<W: Write>(mut out: W, rows: &[RowResult]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        let line = match row {
            Ok(r) => r.fields().map(format_sig9).join(","),
            Err((snr, _)) => {
                let mut fields = vec![format_sig9(*snr)];
                fields.extend(std::iter::repeat_n("nan".to_owned(), 8));
                fields.join(",")
            }
        };
        writeln!(out, "{line}")?;
    }
    out.flush()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverResult {
    pub snr_cross: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub iterations: u32,
}

/// Layered rate minus capacity at SNR `snr` with unit input energy.
pub fn rate_gap(params: &CocktailParams, snr: f64, q: &QuadratureConfig) -> Result<f64> {
    Ok(adr_paper(params, params.noise_for_snr(snr)?, q)?.gap_paper())
}

/// Halvings of `snr_hi` tried while looking for a positive gap.
const MAX_DOWNSCALES: u32 = 30;

/// Bisects the SNR at which the layered rate stops exceeding capacity.
///
/// The gap must be negative at `snr_hi`; the positive end of the bracket is
/// found by halving `snr_hi`.
pub fn find_crossover(
    ratio: f64,
    snr_hi: f64,
    tol: f64,
    q: &QuadratureConfig,
) -> Result<CrossoverResult> {
    if !(snr_hi.is_finite() && snr_hi > 0.0) {
        return Err(Error::InvalidParameter(format!("snr_hi must be > 0, got {snr_hi}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    let params = CocktailParams::unit_energy(ratio)?;
    let gap = |snr: f64| rate_gap(&params, snr, q);

    let mut hi = snr_hi;
    if gap(hi)? >= 0.0 {
        return Err(Error::Bracket {
            snr_hi,
            reason: "the layered rate still exceeds capacity at snr_hi; try a larger snr_hi".into(),
        });
    }
    let mut lo = snr_hi;
    let mut found = false;
    for _ in 0..MAX_DOWNSCALES {
        hi = lo;
        lo *= 0.5;
        if gap(lo)? > 0.0 {
            found = true;
            break;
        }
    }
    if !found {
        return Err(Error::Bracket {
            snr_hi,
            reason: "the layered rate never exceeds capacity below snr_hi".into(),
        });
    }

    let mut iterations = 0;
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(CrossoverResult {
        snr_cross: 0.5 * (lo + hi),
        bracket_lo: lo,
        bracket_hi: hi,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(min: f64, max: f64, step: f64) -> SweepSpec {
        SweepSpec {
            ratio: 0.7,
            snr_min: min,
            snr_max: max,
            step,
            quadrature: QuadratureConfig::default(),
            output_path: None,
        }
    }

    #[test]
    fn grid_includes_rounded_endpoint() {
        let g = spec(0.0, 1.0, 0.01).grid();
        assert_eq!(g.len(), 101);
        for (k, v) in g.iter().enumerate() {
            assert!((v - k as f64 * 0.01).abs() < 1e-12);
        }
        assert_eq!(spec(0.0, 1.0, 0.3).grid().len(), 4);
    }

    #[test]
    fn spec_validation() {
        assert!(spec(0.0, 1.0, 0.01).validate().is_ok());
        assert!(spec(0.0, 1.0, 2.0).validate().is_err());
        assert!(spec(1.0, 1.0, 0.1).validate().is_err());
        assert!(spec(-0.1, 1.0, 0.1).validate().is_err());
        assert!(spec(0.0, 1.0, 0.0).validate().is_err());
        let mut s = spec(0.0, 1.0, 0.1);
        s.ratio = 1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn zero_snr_row_is_exact_zero() {
        let row = evaluate_point(0.7, 0.0, &QuadratureConfig::default()).unwrap();
        assert_eq!(row, SweepRow::zero());
    }

    #[test]
    fn sig9_formatting() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (0.47, "0.47"),
            (0.01 * 3.0, "0.03"),
            (1.0 / 3.0, "0.333333333"),
            (-2.0 / 3.0, "-0.666666667"),
            (123456789.4, "123456789"),
            (1.5e9, "1.5e+09"),
            (1.234e-7, "1.234e-07"),
            (0.0001, "0.0001"),
            (-7.07224273e-5, "-7.07224273e-05"),
            (-3.3e-10, "-3.3e-10"),
            (f64::NAN, "nan"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "{x}");
        }
    }

    #[test]
    fn csv_layout() {
        let rows: Vec<RowResult> = vec![
            Ok(SweepRow::zero()),
            Err((0.5, Error::Domain("boom".into()))),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            format!("{CSV_HEADER}\n0,0,0,0,0,0,0,0,0\n0.5,nan,nan,nan,nan,nan,nan,nan,nan\n")
        );
    }

    #[test]
    fn crossover_needs_negative_gap_at_snr_hi() {
        let q = QuadratureConfig::default();
        assert!(matches!(
            find_crossover(0.7, 0.1, 1e-3, &q),
            Err(Error::Bracket { .. })
        ));
        assert!(find_crossover(0.7, 0.0, 1e-3, &q).is_err());
        assert!(find_crossover(0.7, 1.0, 0.0, &q).is_err());
    }

    #[test]
    fn crossover_bracket_contract() {
        let q = QuadratureConfig::default();
        let coarse = find_crossover(0.7, 1.0, 1e-3, &q).unwrap();
        assert!(coarse.bracket_hi - coarse.bracket_lo < 1e-3);
        assert!(coarse.bracket_lo < coarse.snr_cross && coarse.snr_cross < coarse.bracket_hi);
        let params = CocktailParams::unit_energy(0.7).unwrap();
        assert!(rate_gap(&params, coarse.bracket_lo, &q).unwrap() > 0.0);
        assert!(rate_gap(&params, coarse.bracket_hi, &q).unwrap() <= 0.0);

        let fine = find_crossover(0.7, 1.0, 5e-4, &q).unwrap();
        assert!((fine.snr_cross - coarse.snr_cross).abs() < 1e-3);
    }
}
