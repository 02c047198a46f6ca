//! Presets, fidelity-versus-duration scans, the superposition protocol,
//! demultiplexing checks and CSV/gnuplot output.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::dynamics::{fidelity, propagate, superposition_fidelity, Wavefunction};
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::model::{bias_for_target, small_bias_check, DeformationPath, DEFAULT_RATIO_MAX};
use crate::schedule::{design_sweep, invert_profile, linear_schedule, reverse, AdiabaticityProfile, DesignOptions, Method, ProfileKind, Schedule};
use crate::spectral::cache::SweepCache;
use crate::spectral::{Discretization, EigenSet};
use crate::units::{UnitSystem, ATOMIC_MASS_UNIT, BE9_MASS_U};

/// Samples used to represent a linear ramp.
const LINEAR_SAMPLES: usize = 1025;

/// ⁹Be⁺ trap constants (SI).
pub mod be_trap {
    /// α₀, N/m.
    pub const ALPHA0: f64 = -4.7e-12;
    /// α_f, N/m.
    pub const ALPHA_F: f64 = 9.4e-12;
    /// β₀, N/m³.
    pub const BETA0: f64 = 0.052;
    /// κ, m/N.
    pub const KAPPA: f64 = -7.092e12;
    /// ε, N/m.
    pub const EPS: f64 = 1e-12;
    pub const TARGETS: [usize; 4] = [4, 20, 50, 100];
}

/// A complete, validated simulation setup.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    /// `None` for dimensionless presets.
    pub units: Option<UnitSystem>,
    pub path: DeformationPath,
    pub grid: SpatialGrid,
    pub n_target: usize,
    pub dt: f64,
    /// Eigenstates kept per spectral solve.
    pub k: usize,
}

/// Built-in preset names with one-line descriptions.
pub const PRESETS: [(&str, &str); 2] = [
    ("mini", "dimensionless desk-scale double well, D0 = 16, n = 2 (override with --n)"),
    ("paper", "9Be+ trap, alpha0 = -4.7 pN/m, beta0 = 0.052 N/m^3, n = 4 (override with --n: 4, 20, 50, 100)"),
];

impl Preset {
    /// Checks the small-bias condition at A₀ and confinement of the kept
    /// eigenstates at both ends of the path.
    pub fn new(name: impl Into<String>, units: Option<UnitSystem>, path: DeformationPath, grid: SpatialGrid, n_target: usize, dt: f64, k: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if k <= n_target {
            return Err(Error::InvalidParameter(format!("k = {k} must exceed n_target = {n_target}")));
        }
        let p0 = path.initial();
        if p0.is_double_well() {
            let sb = small_bias_check(&p0, DEFAULT_RATIO_MAX)?;
            if !sb.pass {
                return Err(Error::Regime(format!("bias too large: |C|/bound = {:.3} > {DEFAULT_RATIO_MAX}", sb.ratio)));
            }
        }
        let preset = Self { name: name.into(), units, path, grid, n_target, dt, k };
        preset.endpoint_states()?;
        Ok(preset)
    }

    /// Dimensionless desk-scale preset for target `n`.
    pub fn mini_n(n: usize) -> Result<Self> {
        let (a0, af, b0) = (-0.25, 0.5, 1.0 / 512.0);
        let c = bias_for_target(n, a0, b0)?;
        let path = DeformationPath::new(a0, af, b0, DeformationPath::reference_kappa(a0, af), 0.05, c, n)?;
        let grid = SpatialGrid::new(-20.0, 20.0, 512)?;
        Self::new("mini", None, path, grid, n, 0.005, n + 3)
    }

    pub fn mini() -> Result<Self> {
        Self::mini_n(2)
    }

    /// ⁹Be⁺ trap converted from SI; lengths in units of sqrt(ħ/(MΩ₀)).
    pub fn paper(n: usize) -> Result<Self> {
        use be_trap::*;
        let units = UnitSystem::new(BE9_MASS_U * ATOMIC_MASS_UNIT, ALPHA0)?;
        let q = units.quadratic_unit();
        let p0 = units.to_dimensionless(ALPHA0, BETA0, 0.0)?;
        let c = bias_for_target(n, p0.a, p0.b)?;
        // α_f = 2|α₀| exactly in SI; keep it exact after scaling.
        let af = if ALPHA_F == -2.0 * ALPHA0 { -2.0 * p0.a } else { ALPHA_F / q };
        let path = DeformationPath::new(p0.a, af, p0.b, KAPPA * q, EPS / q, c, n)?;
        let grid = SpatialGrid::new(-1100.0, 1100.0, 16384)?;
        Self::new("paper", Some(units), path, grid, n, 0.02, n + 3)
    }

    /// Looks up a built-in preset; `n` overrides the default target.
    pub fn by_name(name: &str, n: Option<usize>) -> Result<Self> {
        match name {
            "mini" => Self::mini_n(n.unwrap_or(2)),
            "paper" => Self::paper(n.unwrap_or(4)),
            other => Err(Error::InvalidParameter(format!("unknown preset '{other}'"))),
        }
    }

    /// Seconds per internal time unit (SI presets only).
    pub fn seconds_per_unit(&self) -> Option<f64> {
        self.units.map(|u| u.time_unit)
    }

    /// Eigenstates of H(A₀) and H(A_f).
    pub fn endpoint_states(&self) -> Result<(EigenSet, EigenSet)> {
        let disc = Discretization::new(self.grid);
        Ok((disc.eigensolve(&self.path.initial(), self.k)?, disc.eigensolve(&self.path.final_params(), self.k)?))
    }
}

/// One scan point. Fidelities are `None` when not requested or when the
/// run failed (`error` then holds the reason).
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub t_f: f64,
    pub f_n: Option<f64>,
    pub f_0: Option<f64>,
    pub f_avg: Option<f64>,
    pub c: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub method: Method,
    pub n_target: usize,
    /// Seconds per time unit for SI output; `None` keeps internal units.
    pub seconds_per_unit: Option<f64>,
    /// Ascending in t_f.
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    /// Row with the largest F_n.
    pub fn best(&self) -> Option<&ScanRow> {
        self.rows.iter().filter(|r| r.f_n.is_some()).max_by(|a, b| a.f_n.unwrap().total_cmp(&b.f_n.unwrap()))
    }

    /// Row with the largest (F_0 + F_n)/2.
    pub fn best_superposition(&self) -> Option<&ScanRow> {
        self.rows.iter().filter(|r| r.f_avg.is_some()).max_by(|a, b| a.f_avg.unwrap().total_cmp(&b.f_avg.unwrap()))
    }

    /// Smallest t_f with F_n ≥ `level`.
    pub fn threshold(&self, level: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.f_n.is_some_and(|f| f >= level)).map(|r| r.t_f)
    }
}

/// Everything needed to turn a duration into a schedule and score it; built
/// once per (preset, method) and shared read-only by all scan rows.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub preset: Preset,
    pub method: Method,
    /// FAQUAD/LA integrand; t_f-independent.
    pub profile: Option<AdiabaticityProfile>,
    pub initial: EigenSet,
    pub target: EigenSet,
}

impl Protocol {
    pub fn new(preset: &Preset, method: Method, design: &DesignOptions, cache: Option<&SweepCache>) -> Result<Self> {
        let profile = match method {
            Method::Faquad | Method::La => {
                let sweep = design_sweep(&preset.path, &preset.grid, design, cache)?;
                let kind = if method == Method::Faquad { ProfileKind::Faquad } else { ProfileKind::La };
                Some(AdiabaticityProfile::from_sweep(preset.path, kind, &sweep.nodes)?)
            }
            Method::Linear => None,
            Method::Reversed(_) => {
                return Err(Error::InvalidParameter("scan method must be faquad, la or linear".into()));
            }
        };
        Self::with_profile(preset, method, profile)
    }

    /// Uses a precomputed profile (e.g. shared between FAQUAD and LA).
    pub fn with_profile(preset: &Preset, method: Method, profile: Option<AdiabaticityProfile>) -> Result<Self> {
        let (initial, target) = preset.endpoint_states()?;
        Ok(Self { preset: preset.clone(), method, profile, initial, target })
    }

    pub fn schedule(&self, t_f: f64) -> Result<Schedule> {
        match &self.profile {
            Some(p) => invert_profile(p, t_f),
            None => linear_schedule(&self.preset.path, t_f, LINEAR_SAMPLES),
        }
    }

    /// Propagates eigenstate `from` of H(A₀) and returns |⟨target_to|ψ(t_f)⟩|.
    pub fn transfer(&self, s: &Schedule, from: usize, to: usize) -> Result<f64> {
        let psi0 = Wavefunction::from_eigenstate(&self.initial, from)?;
        let target = Wavefunction::from_eigenstate(&self.target, to)?;
        let out = propagate(&psi0, s, self.preset.dt)?;
        fidelity(&out.final_state, &target)
    }

    /// One scan row; failures are recorded, not returned.
    pub fn row(&self, t_f: f64, superposition: bool) -> ScanRow {
        let n = self.preset.n_target;
        let run = || -> Result<ScanRow> {
            let s = self.schedule(t_f)?;
            let f_n = self.transfer(&s, n, n)?;
            let (f_0, f_avg) = if superposition {
                let f_0 = self.transfer(&s, 0, 0)?;
                (Some(f_0), Some(superposition_fidelity(f_0, f_n)))
            } else {
                (None, None)
            };
            Ok(ScanRow { t_f, f_n: Some(f_n), f_0, f_avg, c: s.c_value, error: None })
        };
        run().unwrap_or_else(|e| ScanRow { t_f, f_n: None, f_0: None, f_avg: None, c: None, error: Some(e.to_string()) })
    }

    /// (F_forward, F_backward): multiplexing n → |n⟩ and the reversed
    /// protocol |n⟩ → n.
    pub fn demultiplexing(&self, t_f: f64) -> Result<(f64, f64)> {
        let n = self.preset.n_target;
        let s = self.schedule(t_f)?;
        let forward = self.transfer(&s, n, n)?;
        let back = reverse(&s);
        let psi0 = Wavefunction::from_eigenstate(&self.target, n)?;
        let target = Wavefunction::from_eigenstate(&self.initial, n)?;
        let out = propagate(&psi0, &back, self.preset.dt)?;
        Ok((forward, fidelity(&out.final_state, &target)?))
    }

    /// Runs all durations (sorted ascending) as a parallel map. `on_row`
    /// sees each row as soon as it completes, with its index in the output.
    pub fn scan_with(&self, t_f_list: &[f64], superposition: bool, on_row: impl Fn(usize, &ScanRow) + Sync) -> Result<ScanResult> {
        let t_fs = sorted_durations(t_f_list)?;
        let rows: Vec<ScanRow> = t_fs
            .par_iter()
            .enumerate()
            .map(|(i, &t_f)| {
                let row = self.row(t_f, superposition);
                on_row(i, &row);
                row
            })
            .collect();
        Ok(ScanResult { method: self.method.clone(), n_target: self.preset.n_target, seconds_per_unit: self.preset.seconds_per_unit(), rows })
    }

    pub fn scan(&self, t_f_list: &[f64], superposition: bool) -> Result<ScanResult> {
        self.scan_with(t_f_list, superposition, |_, _| {})
    }
}

fn sorted_durations(t_f_list: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = t_f_list.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("durations must be positive, got {bad}")));
    }
    let mut t = t_f_list.to_vec();
    t.sort_by(f64::total_cmp);
    t.dedup();
    Ok(t)
}

/// F_n versus t_f for one method.
pub fn run_scan(preset: &Preset, method: Method, t_f_list: &[f64], cache: Option<&SweepCache>) -> Result<ScanResult> {
    Protocol::new(preset, method, &DesignOptions::default(), cache)?.scan(t_f_list, false)
}

/// F_n, F_0(n) and their mean under the schedule designed for |n⟩.
pub fn run_superposition(preset: &Preset, method: Method, t_f_list: &[f64], cache: Option<&SweepCache>) -> Result<ScanResult> {
    Protocol::new(preset, method, &DesignOptions::default(), cache)?.scan(t_f_list, true)
}

pub fn run_demultiplexing(preset: &Preset, method: Method, t_f: f64, cache: Option<&SweepCache>) -> Result<(f64, f64)> {
    Protocol::new(preset, method, &DesignOptions::default(), cache)?.demultiplexing(t_f)
}

/// `n` log-spaced durations in [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::InvalidParameter(format!("bad log range {lo}..{hi} x {n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// `n` evenly spaced durations in [lo, hi].
pub fn lin_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::InvalidParameter(format!("bad range {lo}..{hi} x {n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

// ---------------------------------------------------------------------------
// CSV

pub const CSV_HEADER: &str = "t_f,F_n,F_0,F_avg,c";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.11e}")).unwrap_or_default()
}

/// Streams scan rows to CSV in t_f order even when they complete out of
/// order: finished rows are buffered until every earlier row is written.
pub struct CsvStream<W: Write> {
    inner: Mutex<StreamState<W>>,
}

struct StreamState<W> {
    out: W,
    next: usize,
    pending: BTreeMap<usize, ScanRow>,
    seconds_per_unit: Option<f64>,
    error: Option<std::io::Error>,
}

impl<W: Write> CsvStream<W> {
    /// Writes the comment and column header lines.
    pub fn new(mut out: W, method: &Method, n_target: usize, seconds_per_unit: Option<f64>) -> Result<Self> {
        match seconds_per_unit {
            Some(_) => writeln!(out, "# t_f unit: s")?,
            None => writeln!(out, "# t_f unit: 1/Omega0 (dimensionless)")?,
        }
        writeln!(out, "# method: {method}")?;
        writeln!(out, "# n_target: {n_target}")?;
        writeln!(out, "{CSV_HEADER}")?;
        out.flush()?;
        Ok(Self { inner: Mutex::new(StreamState { out, next: 0, pending: BTreeMap::new(), seconds_per_unit, error: None }) })
    }

    pub fn push(&self, index: usize, row: &ScanRow) {
        let mut guard = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        let st = &mut *guard;
        st.pending.insert(index, row.clone());
        while let Some(row) = st.pending.remove(&st.next) {
            if let Err(e) = write_row(&mut st.out, &row, st.seconds_per_unit).and_then(|_| st.out.flush()) {
                st.error.get_or_insert(e);
            }
            st.next += 1;
        }
    }

    /// Returns the writer, or the first I/O error met while streaming.
    pub fn finish(self) -> Result<W> {
        let st = self.inner.into_inner().unwrap_or_else(|e| e.into_inner());
        if let Some(e) = st.error {
            return Err(e.into());
        }
        if !st.pending.is_empty() {
            return Err(Error::InvalidParameter("scan stream finished with missing rows".into()));
        }
        Ok(st.out)
    }
}

fn write_row<W: Write>(out: &mut W, row: &ScanRow, seconds_per_unit: Option<f64>) -> std::io::Result<()> {
    let t = row.t_f * seconds_per_unit.unwrap_or(1.0);
    match &row.error {
        Some(e) => writeln!(out, "# failed t_f={t:.11e}: {}", e.replace('\n', " ")),
        None => writeln!(out, "{t:.11e},{},{},{},{}", fmt_opt(row.f_n), fmt_opt(row.f_0), fmt_opt(row.f_avg), fmt_opt(row.c)),
    }
}

/// Writes a complete result as CSV.
pub fn emit_csv<W: Write>(result: &ScanResult, out: W) -> Result<()> {
    let stream = CsvStream::new(out, &result.method, result.n_target, result.seconds_per_unit)?;
    for (i, row) in result.rows.iter().enumerate() {
        stream.push(i, row);
    }
    stream.finish().map(|_| ())
}

/// Parses the data rows of a scan CSV (comment lines skipped, failed rows
/// dropped). Times are returned as written.
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                return Err(Error::Parse(format!("unexpected CSV header '{line}'")));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Parse(format!("expected 5 columns, got {}", cols.len())));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Parse(format!("bad number '{s}'")))
            }
        };
        let t_f = num(cols[0])?.ok_or_else(|| Error::Parse("missing t_f".into()))?;
        rows.push(ScanRow { t_f, f_n: num(cols[1])?, f_0: num(cols[2])?, f_avg: num(cols[3])?, c: num(cols[4])?, error: None });
    }
    if !saw_header {
        return Err(Error::Parse("missing CSV header".into()));
    }
    Ok(rows)
}

/// gnuplot command file plotting F_n versus t_f, one curve per (label, csv).
pub fn emit_gnuplot<W: Write>(mut out: W, curves: &[(String, String)], si_time: bool, superposition: bool) -> Result<()> {
    writeln!(out, "# fidelity versus final time")?;
    writeln!(out, "set datafile separator ','")?;
    writeln!(out, "set datafile commentschars '#'")?;
    writeln!(out, "set key autotitle columnhead")?;
    writeln!(out, "set logscale x")?;
    writeln!(out, "set xlabel '{}'", if si_time { "t_f (s)" } else { "t_f (1/Omega_0)" })?;
    writeln!(out, "set ylabel 'fidelity'")?;
    writeln!(out, "set yrange [0:1.02]")?;
    let mut parts = Vec::new();
    for (label, csv) in curves {
        let file = csv.replace('\'', "''");
        let title = label.replace('\'', "''");
        parts.push(format!("'{file}' using 1:2 with linespoints title '{title} F_n'"));
        if superposition {
            parts.push(format!("'{file}' using 1:3 with linespoints title '{title} F_0'"));
            parts.push(format!("'{file}' using 1:4 with lines title '{title} (F_0+F_n)/2'"));
        }
    }
    writeln!(out, "plot {}", parts.join(", \\\n     "))?;
    Ok(())
}
