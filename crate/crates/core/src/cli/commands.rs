//! The four subcommands. Each returns its data payload and diagnostics as
//! strings; `run` decides where they go.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Mode, OutputFormat, PotentialSpec, RunConfig};
use super::format::{csv_row, fmt_num};
use crate::asymptotics::{
    c_p, c_p_alternative, constant_field, fit_order, inner_edge_first_order, order_check,
    outer_edge_first_order, strong_field, weak_field_edges, weak_field_f, OrderEstimate,
};
use crate::bands::{
    band_extrema, band_value, first_flat_violation, report_from_table, spectrum_report, unperturbed_spectrum,
    BandTable, SpectrumReport,
};
use crate::error::Error;
use crate::jacobi::{eigenvalues, unperturbed_eigenvalue, JacobiMatrix, FINE_TOL};
use crate::lattice::{verify_flat_eigen, Boundary, FlatBandVector, RibbonParams};
use crate::oracle::{bloch_union_spectrum_with, compare_multisets, periodic_ribbon_spectrum};
use crate::search::uniform_grid;

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CRITERION: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::SweepCap { .. } | Error::Asymmetric { .. } => EXIT_NUMERIC,
            Error::FlatCriterion { .. } => EXIT_CRITERION,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<super::config::ConfigError> for Failure {
    fn from(e: super::config::ConfigError) -> Self {
        Self::config(e.0)
    }
}

/// What a command produced. `code` is nonzero only for a failed verification.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub data: String,
    pub diagnostics: String,
    pub report_json: Option<String>,
    pub code: i32,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

pub fn human_report(params: &RibbonParams, grid_points: usize, report: &SpectrumReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "N = {}, p = {}, grid = {} points", params.width(), params.p(), grid_points);
    for b in &report.bands {
        let _ = write!(s, "band {:>3}: [{}, {}]", b.k, fmt_num(b.lo), fmt_num(b.hi));
        if let Some(v) = b.value {
            let _ = write!(s, "  flat: true, value: {}", fmt_num(v));
        }
        s.push('\n');
    }
    for (lo, hi) in &report.gaps {
        let _ = writeln!(s, "gap: ({}, {})", fmt_num(*lo), fmt_num(*hi));
    }
    let (lo, hi) = report.hull();
    let _ = writeln!(s, "hull: [{}, {}]", fmt_num(lo), fmt_num(hi));
    for w in &report.multiplicity_windows {
        let _ = writeln!(s, "window: [{}, {}] bands {}", fmt_num(w.lo), fmt_num(w.hi), w.count);
    }
    s
}

/// Band table as CSV plus the spectrum report.
pub fn cmd_bands(cfg: &RunConfig) -> Result<CommandOutput, Failure> {
    let params = cfg.params()?;
    let grid = uniform_grid(cfg.grid_points)?;
    let table = BandTable::compute(&params, &grid)?;
    let report = report_from_table(&table, None);
    let n = params.width() as i64;

    let mut csv = String::from("a");
    for k in -n..=n {
        let _ = write!(csv, ",lambda_{k}");
    }
    csv.push('\n');
    for (i, &a) in grid.iter().enumerate() {
        csv.push_str(&fmt_num(a));
        for row in &table.values {
            csv.push(',');
            csv.push_str(&fmt_num(row[i]));
        }
        csv.push('\n');
    }

    let json = to_json(&report);
    Ok(match cfg.format {
        OutputFormat::Csv => CommandOutput {
            data: csv,
            diagnostics: human_report(&params, grid.len(), &report),
            report_json: Some(json),
            code: 0,
        },
        OutputFormat::Json => CommandOutput {
            data: json.clone(),
            diagnostics: String::new(),
            report_json: Some(json),
            code: 0,
        },
    })
}

#[derive(Debug, Serialize)]
struct FlatDump {
    n: usize,
    m: i64,
    cells: usize,
    boundary: &'static str,
    /// Row `k` lists the coefficients at cells `m, m−1, …`; even rows are `[0]`.
    rows: Vec<Vec<i64>>,
    integer_residual: i64,
    residual: f64,
}

/// Flat-band eigenfunction `ψ^m` with its residual.
pub fn cmd_flatband(cfg: &RunConfig, boundary: Boundary) -> Result<CommandOutput, Failure> {
    let params = cfg.params()?;
    if let Some(row) = first_flat_violation(&params) {
        return Err(Error::FlatCriterion {
            index: row,
            value: params.v(row),
            first: params.v(1),
        }
        .into());
    }
    let n = params.width();
    let cells = cfg.cells.unwrap_or(n + 3);
    let psi = FlatBandVector::new(n, cfg.m);
    let integer_residual = psi.laplacian_residual(cells, boundary)?;
    let residual = verify_flat_eigen(&params, &psi, cells, boundary)?;

    let rows: Vec<Vec<i64>> = (1..=params.p())
        .map(|row| {
            if row % 2 == 0 {
                vec![0]
            } else {
                psi.row_entries((row - 1) / 2).into_iter().map(|(_, c)| c).collect()
            }
        })
        .collect();
    let boundary_name = match boundary {
        Boundary::Periodic => "periodic",
        Boundary::Open => "open",
    };
    let dump = FlatDump {
        n,
        m: cfg.m,
        cells,
        boundary: boundary_name,
        rows,
        integer_residual,
        residual,
    };

    let mut diagnostics = String::new();
    let _ = writeln!(
        diagnostics,
        "flat band at v1 = {}; psi^{} on {} {} cells: integer residual {}, residual {}",
        fmt_num(params.v(1)),
        cfg.m,
        cells,
        boundary_name,
        integer_residual,
        fmt_num(residual)
    );

    let data = match cfg.format {
        OutputFormat::Json => to_json(&dump),
        OutputFormat::Csv => {
            let (lo, hi) = psi.support();
            let mut s = String::from("row,cell,coefficient\n");
            for row in 1..=params.p() {
                for cell in lo..=hi {
                    let _ = writeln!(s, "{row},{cell},{}", psi.coefficient(cell, row));
                }
            }
            let _ = writeln!(s, "# integer_residual={integer_residual},residual={}", fmt_num(residual));
            s
        }
    };
    Ok(CommandOutput {
        data,
        diagnostics,
        report_json: Some(to_json(&dump)),
        code: 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionRow {
    pub band: String,
    pub edge: String,
    pub predicted: f64,
    pub measured: f64,
    pub abs_error: f64,
}

impl PredictionRow {
    fn new(band: impl ToString, edge: &str, predicted: f64, measured: f64) -> Self {
        Self {
            band: band.to_string(),
            edge: edge.to_string(),
            predicted,
            measured,
            abs_error: (predicted - measured).abs(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderRow {
    pub observable: String,
    pub expected: f64,
    pub estimate: OrderEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionTable {
    pub mode: &'static str,
    pub rows: Vec<PredictionRow>,
    pub orders: Vec<OrderRow>,
}

impl PredictionTable {
    fn to_csv(&self) -> String {
        let mut s = String::from("band,edge,predicted,measured,abs_error\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{}",
                r.band,
                r.edge,
                csv_row([r.predicted, r.measured, r.abs_error])
            );
        }
        for o in &self.orders {
            let (fitted, residual) = match &o.estimate {
                OrderEstimate::Exact => ("exact".to_string(), "0".to_string()),
                OrderEstimate::Fitted { slope, residual, .. } => (fmt_num(*slope), fmt_num(*residual)),
            };
            let _ = writeln!(s, "order,{},{},{fitted},{residual}", o.observable, fmt_num(o.expected));
        }
        s
    }
}

/// Largest `|λ₀(a) − F(a)|` over the grid.
fn weak_field_error(params: &RibbonParams, grid: &[f64]) -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for &a in grid {
        worst = worst.max((band_value(0, params, a)? - weak_field_f(a, params)).abs());
    }
    Ok(worst)
}

fn weak_table(params: &RibbonParams, grid: &[f64]) -> crate::Result<PredictionTable> {
    let pred = weak_field_edges(params, grid)?;
    let (lo, hi) = band_extrema(0, params, grid)?;
    let rows = vec![
        PredictionRow::new(0, "lo", pred.lo.value, lo.value),
        PredictionRow::new(0, "hi", pred.hi.value, hi.value),
        PredictionRow::new(0, "width", pred.width, hi.value - lo.value),
    ];
    let estimate = order_check(|s| weak_field_error(&params.scaled(s), grid), 1.0, 3)?;
    Ok(PredictionTable {
        mode: "weak",
        rows,
        orders: vec![OrderRow {
            observable: "middle-band".into(),
            expected: 2.0,
            estimate,
        }],
    })
}

/// First-order edge predictions with their measured counterparts.
fn edge_rows(params: &RibbonParams, grid: &[f64]) -> crate::Result<Vec<PredictionRow>> {
    let n = params.width() as i64;
    let mut rows = Vec::new();
    for k in (-n..=n).filter(|&k| k != 0) {
        let (lo, hi) = band_extrema(k, params, grid)?;
        let (inner, outer) = if k > 0 { (lo.value, hi.value) } else { (hi.value, lo.value) };
        if let Ok(pred) = inner_edge_first_order(k, params) {
            rows.push(PredictionRow::new(k, "inner", pred, inner));
        }
        rows.push(PredictionRow::new(k, "outer", outer_edge_first_order(k, params)?, outer));
    }
    Ok(rows)
}

fn edges_table(params: &RibbonParams, grid: &[f64]) -> crate::Result<PredictionTable> {
    let rows = edge_rows(params, grid)?;
    let estimate = order_check(
        |s| {
            let rows = edge_rows(&params.scaled(s), grid)?;
            Ok(rows.iter().map(|r| r.abs_error).fold(0.0, f64::max))
        },
        1.0,
        3,
    )?;
    Ok(PredictionTable {
        mode: "edges",
        rows,
        orders: vec![OrderRow {
            observable: "edges".into(),
            expected: 2.0,
            estimate,
        }],
    })
}

fn constant_field_table(width: usize, eps: f64, grid: &[f64]) -> crate::Result<PredictionTable> {
    let params = crate::asymptotics::constant_field_potential(width, eps)?;
    let pred = constant_field(width, eps);
    let (lo, hi) = band_extrema(0, &params, grid)?;
    Ok(PredictionTable {
        mode: "constant-field",
        rows: vec![
            PredictionRow::new(0, "lo", pred.lo, lo.value),
            PredictionRow::new(0, "hi", pred.hi, hi.value),
        ],
        orders: Vec::new(),
    })
}

/// Measured edges of `Δ + tV` next to the `1/t` predictions.
fn strong_rows(params: &RibbonParams, t: f64, grid: &[f64]) -> crate::Result<Vec<PredictionRow>> {
    let est = strong_field(params, t)?;
    let scaled = params.scaled(t);
    let mut rows = Vec::new();
    for b in &est.bands {
        let (lo, hi) = band_extrema(b.k, &scaled, grid)?;
        rows.push(PredictionRow::new(b.k, "lo", b.lo, lo.value));
        rows.push(PredictionRow::new(b.k, "hi", b.hi, hi.value));
        rows.push(PredictionRow::new(b.k, "width", b.width, hi.value - lo.value));
    }
    Ok(rows)
}

fn strong_table(params: &RibbonParams, t: f64, grid: &[f64]) -> crate::Result<PredictionTable> {
    let rows = strong_rows(params, t, grid)?;
    let top = params.width() as i64;
    let mut edge_errs = Vec::new();
    let mut top_widths = Vec::new();
    let mut tj = t;
    for _ in 0..4 {
        let r = strong_rows(params, tj, grid)?;
        let edge = r.iter().filter(|x| x.edge != "width").map(|x| x.abs_error).fold(0.0, f64::max);
        let width = r
            .iter()
            .find(|x| x.edge == "width" && x.band == top.to_string())
            .map_or(0.0, |x| x.measured);
        edge_errs.push((tj, edge));
        top_widths.push((tj, width));
        tj *= 2.0;
    }
    let edges = fit_order(&edge_errs)?;
    let widths = fit_order(&top_widths)?;
    Ok(PredictionTable {
        mode: "strong",
        rows,
        orders: vec![
            OrderRow {
                observable: "edges".into(),
                expected: -2.0,
                estimate: edges,
            },
            OrderRow {
                observable: "top-width".into(),
                expected: -2.0,
                estimate: widths,
            },
        ],
    })
}

pub fn cmd_asymptotics(cfg: &RunConfig) -> Result<CommandOutput, Failure> {
    let mode = cfg
        .mode
        .ok_or_else(|| Failure::config("missing mode (weak, strong, constant-field or edges)"))?;
    let grid = uniform_grid(cfg.grid_points)?;
    let mut diagnostics = String::new();
    let table = match mode {
        Mode::Weak => weak_table(&cfg.params()?, &grid)?,
        Mode::Edges => edges_table(&cfg.params()?, &grid)?,
        Mode::ConstantField => {
            let PotentialSpec::ConstantField(eps) = cfg.potential else {
                return Err(Failure::config(
                    "invalid potential: mode constant-field needs potential constant-field:<eps>",
                ));
            };
            let exact = c_p(cfg.width);
            let alt = c_p_alternative(cfg.width);
            let _ = writeln!(
                diagnostics,
                "C_p = {}/{}; alternative closed form gives {}/{}{}",
                exact.num,
                exact.den,
                alt.num,
                alt.den,
                if exact == alt { "" } else { " (differs)" }
            );
            constant_field_table(cfg.width, eps, &grid)?
        }
        Mode::Strong => {
            let t = cfg.t.ok_or_else(|| Failure::config("missing t: mode strong needs --t"))?;
            strong_table(&cfg.params()?, t, &grid)?
        }
    };
    let json = to_json(&table);
    let data = match cfg.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => json.clone(),
    };
    Ok(CommandOutput {
        data,
        diagnostics,
        report_json: Some(json),
        code: 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, outcome: crate::Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult {
            name: name.into(),
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name: name.into(),
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn random_params(width: usize, scale: f64, rng: &mut ChaCha8Rng) -> crate::Result<RibbonParams> {
    let v = (0..2 * width + 1).map(|_| scale * rng.gen_range(-1.0..=1.0)).collect();
    RibbonParams::new(width, v)
}

/// Off-diagonal pattern `(1, a, 1, a, …)`: the negative control for the
/// section-versus-Bloch comparison.
pub fn corrupted_jacobi(params: &RibbonParams, a: f64) -> crate::Result<JacobiMatrix> {
    let off = (0..params.p() - 1).map(|j| if j % 2 == 0 { 1.0 } else { a }).collect();
    JacobiMatrix::from_parts(params.potential().to_vec(), off)
}

fn bloch_check(width: usize, seed: u64, corrupt: bool) -> crate::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = vec![(1usize, 8usize), (2, 6), (3, 4)];
    cases.extend([3usize, 4, 5].map(|l| (width, l)));
    let mut worst: f64 = 0.0;
    let mut unmatched = 0;
    for (n, cells) in &cases {
        let raw = random_params(*n, 1.0, &mut rng)?;
        let params = raw.scaled(1.0 / raw.norm().max(1.0));
        let union = if corrupt {
            bloch_union_spectrum_with(&params, *cells, corrupted_jacobi)?
        } else {
            bloch_union_spectrum_with(&params, *cells, JacobiMatrix::new)?
        };
        let r = compare_multisets(&periodic_ribbon_spectrum(&params, *cells)?, &union, 1e-8);
        worst = worst.max(r.max_pairwise_deviation);
        unmatched += r.unmatched_count;
    }
    Ok((
        unmatched == 0,
        format!("{} cases, unmatched {unmatched}, max deviation {}", cases.len(), fmt_num(worst)),
    ))
}

fn closed_form_check(width: usize, grid_points: usize) -> crate::Result<(bool, String)> {
    let params = RibbonParams::zero(width)?;
    let grid = uniform_grid(grid_points)?;
    let n = width as i64;
    let mut worst: f64 = 0.0;
    for &a in &grid {
        let e = eigenvalues(&JacobiMatrix::new(&params, a)?, FINE_TOL)?;
        for k in -n..=n {
            worst = worst.max((e.band(k) - unperturbed_eigenvalue(k, a, width)).abs());
        }
    }
    let measured = spectrum_report(&params, &grid, None)?;
    let closed = unperturbed_spectrum(width)?;
    let mut band_dev: f64 = 0.0;
    for (x, y) in measured.bands.iter().zip(&closed.bands) {
        band_dev = band_dev.max((x.lo - y.lo).abs()).max((x.hi - y.hi).abs());
    }
    Ok((
        worst <= 1e-10 && band_dev <= 1e-9,
        format!("eigenvalue deviation {}, band deviation {}", fmt_num(worst), fmt_num(band_dev)),
    ))
}

fn flat_check(width: usize, seed: u64) -> crate::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut v: Vec<f64> = (0..2 * width + 1).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    for k in 1..=width {
        v[2 * k] = v[0];
    }
    let params = RibbonParams::new(width, v)?;
    let cells = 2 * width + 2;
    let psi = FlatBandVector::new(width, width as i64);
    let exact = psi.laplacian_residual(cells, Boundary::Open)?;
    let residual = verify_flat_eigen(&params, &psi, cells, Boundary::Open)?;
    let grid = uniform_grid(101)?;
    let (lo, hi) = band_extrema(0, &params, &grid)?;
    let width0 = hi.value - lo.value;
    Ok((
        exact == 0 && residual <= 1e-13 * (1.0 + params.norm()) && width0 <= 1e-10,
        format!(
            "integer residual {exact}, residual {}, middle band width {}",
            fmt_num(residual),
            fmt_num(width0)
        ),
    ))
}

fn weak_order_check(width: usize, seed: u64, grid_points: usize) -> crate::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11ce);
    let w = random_params(width, 1.0, &mut rng)?;
    let grid = uniform_grid(grid_points)?;
    let est = order_check(|eps| weak_field_error(&w.scaled(eps), &grid), 1e-2, 3)?;
    let slope = est.slope();
    Ok((
        slope.is_none_or(|s| s >= 1.9),
        format!("slope {}", slope.map_or("exact".into(), fmt_num)),
    ))
}

fn strong_order_check(width: usize, grid_points: usize) -> crate::Result<(bool, String)> {
    let n = width.min(3);
    let ramp = RibbonParams::new(n, (1..=2 * n + 1).map(|x| x as f64).collect())?;
    let grid = uniform_grid(grid_points)?;
    let table = strong_table(&ramp, 50.0, &grid)?;
    let slopes: Vec<Option<f64>> = table.orders.iter().map(|o| o.estimate.slope()).collect();
    let ok = slopes.iter().all(|s| s.is_none_or(|s| s <= -1.9));
    let shown: Vec<String> = slopes.iter().map(|s| s.map_or("exact".into(), fmt_num)).collect();
    Ok((ok, format!("edge slope {}, top width slope {}", shown[0], shown[1])))
}

pub fn cmd_verify(cfg: &RunConfig, corrupt_offdiag: bool) -> Result<CommandOutput, Failure> {
    let n = cfg.width;
    let checks = vec![
        check("bloch-oracle", bloch_check(n, cfg.seed, corrupt_offdiag)),
        check("closed-form", closed_form_check(n, cfg.grid_points)),
        check("flat-band", flat_check(n, cfg.seed)),
        check("weak-order", weak_order_check(n, cfg.seed, cfg.grid_points)),
        check("strong-order", strong_order_check(n, cfg.grid_points)),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let summary = VerifySummary { passed, checks };

    let mut diagnostics = String::new();
    for c in summary.checks.iter().filter(|c| !c.passed) {
        let _ = writeln!(diagnostics, "FAILED {}: {}", c.name, c.detail);
    }
    let json = to_json(&summary);
    let data = match cfg.format {
        OutputFormat::Json => json.clone(),
        OutputFormat::Csv => {
            let mut s = String::from("check,status,detail\n");
            for c in &summary.checks {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    c.name,
                    if c.passed { "pass" } else { "fail" },
                    c.detail.replace(',', ";")
                );
            }
            s
        }
    };
    Ok(CommandOutput {
        data,
        diagnostics,
        report_json: Some(json),
        code: if passed { 0 } else { EXIT_VERIFY },
    })
}
