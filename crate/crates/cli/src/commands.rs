use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use fockramp::experiments::{emit_gnuplot, log_spaced, CsvStream, Preset, Protocol, ScanResult, PRESETS};
use fockramp::schedule::{design_sweep, reverse, write_schedule, AdiabaticityProfile, DesignOptions, Method, ProfileKind};
use fockramp::spectral::cache::SweepCache;
use fockramp::spectral::{localization, SpectralSweep};
use fockramp::{eigensolve, PotentialParams, SpatialGrid};

use crate::config::{parse_time, parse_time_list, parse_time_range, FileConfig, InlineParams};
use crate::{CliError, Source};

pub struct Context {
    pub file: FileConfig,
    pub cache_dir: Option<PathBuf>,
}

impl Context {
    fn cache(&self) -> Option<SweepCache> {
        self.cache_dir.as_ref().map(SweepCache::new)
    }
}

enum Resolved {
    Preset(Preset),
    Static { params: PotentialParams, grid: SpatialGrid, k: Option<usize> },
}

fn resolve(ctx: &Context, src: &Source) -> Result<Resolved, CliError> {
    let n = match src.n {
        Some(n) => Some(n),
        None => ctx.file.run_parsed("n")?,
    };
    let inline = match (&src.preset, &src.inline) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --preset or --inline, not both".into())),
        (Some(name), None) => return preset_by_name(name, n),
        (None, Some(text)) => InlineParams::parse(text)?,
        (None, None) => match (ctx.file.run_value("preset"), ctx.file.potential.is_empty()) {
            (Some(_), false) => return Err(CliError::Usage("config sets both a preset and a [potential] section".into())),
            (Some(name), true) => return preset_by_name(name, n),
            (None, false) => InlineParams::from_section(&ctx.file.potential)?,
            (None, true) => return Err(CliError::Usage("no potential: give --preset NAME or --inline KEY=VALUE,...".into())),
        },
    };
    if inline.is_static() {
        Ok(Resolved::Static { params: inline.static_params()?, grid: inline.grid()?, k: inline.k()? })
    } else {
        Ok(Resolved::Preset(inline.preset(n)?))
    }
}

fn preset_by_name(name: &str, n: Option<usize>) -> Result<Resolved, CliError> {
    if !PRESETS.iter().any(|(p, _)| *p == name) {
        let known: Vec<&str> = PRESETS.iter().map(|(p, _)| *p).collect();
        return Err(CliError::Usage(format!("unknown preset '{name}' (known: {})", known.join(", "))));
    }
    Ok(Resolved::Preset(Preset::by_name(name, n)?))
}

fn require_path(r: Resolved) -> Result<Preset, CliError> {
    match r {
        Resolved::Preset(p) => Ok(p),
        Resolved::Static { .. } => Err(CliError::Usage("this command needs a deformation path, not a static potential".into())),
    }
}

fn parse_method(text: &str) -> Result<Method, CliError> {
    text.parse().map_err(|e: fockramp::Error| CliError::Usage(e.to_string()))
}

fn fmt_time(t: f64, preset: &Preset) -> String {
    match preset.seconds_per_unit() {
        Some(s) => format!("{:.6e}s", t * s),
        None => format!("{t:.6e}"),
    }
}

pub fn presets_list() {
    for (name, description) in PRESETS {
        println!("{name:<8} {description}");
    }
}

pub fn eigen(ctx: &Context, src: &Source, k: Option<usize>, at: Option<f64>) -> Result<(), CliError> {
    let k_file: Option<usize> = ctx.file.run_parsed("k")?;
    let at_file: Option<f64> = ctx.file.run_parsed("at")?;
    let (params, grid, k) = match resolve(ctx, src)? {
        Resolved::Preset(p) => {
            let a = at.or(at_file).unwrap_or(p.path.a0);
            (p.path.params_at(a), p.grid, k.or(k_file).unwrap_or(p.k))
        }
        Resolved::Static { params, grid, k: k_inline } => {
            if at.is_some() {
                return Err(CliError::Usage("--at needs a deformation path".into()));
            }
            (params, grid, k.or(k_file).or(k_inline).unwrap_or(5))
        }
    };
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let eig = eigensolve(&params, &grid, k)?;
    let mut out = io::stdout().lock();
    let w = |e: io::Error| CliError::Io { context: "stdout".into(), source: e };
    writeln!(out, "# A = {:.10e}, B = {:.10e}, C = {:.10e}", params.a, params.b, params.c).map_err(w)?;
    writeln!(out, "# j E <x> P_right").map_err(w)?;
    for (j, e) in eig.energies.iter().enumerate() {
        let loc = localization(&eig, j);
        writeln!(out, "{j} {e:.12} {:.6} {:.6}", loc.mean_x, loc.prob_right).map_err(w)?;
    }
    Ok(())
}

pub fn design(ctx: &Context, src: &Source, method: Option<String>, tf: Option<String>, output: Option<PathBuf>) -> Result<(), CliError> {
    let preset = require_path(resolve(ctx, src)?)?;
    let method = parse_method(method.as_deref().or(ctx.file.run_value("method")).unwrap_or("faquad"))?;
    let tf = tf.as_deref().or(ctx.file.run_value("tf")).ok_or_else(|| CliError::Usage("design needs --tf".into()))?;
    let t_f = parse_time(tf, preset.units.as_ref())?;
    let (base, reversed) = match method {
        Method::Reversed(inner) => (*inner, true),
        m => (m, false),
    };
    if matches!(base, Method::Reversed(_)) {
        return Err(CliError::Usage("nested reversal".into()));
    }
    let cache = ctx.cache();
    let protocol = Protocol::new(&preset, base, &DesignOptions::default(), cache.as_ref())?;
    let mut schedule = protocol.schedule(t_f)?;
    if reversed {
        schedule = reverse(&schedule);
    }
    let c = match schedule.c_value {
        Some(c) => format!("c = {c:.10e}"),
        None => "c = none (linear)".to_string(),
    };
    match output {
        Some(path) => {
            let f = File::create(&path).map_err(CliError::io(path.display().to_string()))?;
            let mut w = BufWriter::new(f);
            write_schedule(&mut w, &schedule)?;
            w.flush().map_err(CliError::io(path.display().to_string()))?;
            println!("{c}");
        }
        None => {
            write_schedule(io::stdout().lock(), &schedule)?;
            eprintln!("{c}");
        }
    }
    Ok(())
}

pub struct ScanArgs {
    pub method: Option<String>,
    pub tf: Option<String>,
    pub tf_range: Option<String>,
    pub superposition: bool,
    pub demux: bool,
    pub output: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

fn scan_durations(ctx: &Context, args: &ScanArgs, preset: &Preset) -> Result<Vec<f64>, CliError> {
    let units = preset.units.as_ref();
    if let Some(list) = &args.tf {
        return parse_time_list(list, units);
    }
    if let Some(range) = &args.tf_range {
        return parse_time_range(range, units);
    }
    match (ctx.file.run_value("tf"), ctx.file.run_value("tf-range")) {
        (Some(_), Some(_)) => Err(CliError::Usage("config sets both tf and tf-range".into())),
        (Some(list), None) => parse_time_list(list, units),
        (None, Some(range)) => parse_time_range(range, units),
        (None, None) => Ok(match units {
            Some(u) => log_spaced(u.time_from_si(20e-6), u.time_from_si(200e-6), 16)?,
            None => log_spaced(10.0, 2000.0, 24)?,
        }),
    }
}

fn method_output(base: &Path, method: &Method, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scan".into());
    let ext = base.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    base.with_file_name(format!("{stem}-{method}.{ext}"))
}

pub fn scan(ctx: &Context, src: &Source, mut args: ScanArgs) -> Result<(), CliError> {
    let preset = require_path(resolve(ctx, src)?)?;
    args.superposition |= ctx.file.run_flag("superposition")?;
    args.demux |= ctx.file.run_flag("demux")?;
    if args.superposition && args.demux {
        return Err(CliError::Usage("--superposition and --demux are exclusive".into()));
    }
    let output = args.output.clone().or_else(|| ctx.file.run_value("output").map(PathBuf::from));
    let plot = args.plot.clone().or_else(|| ctx.file.run_value("plot").map(PathBuf::from));
    let methods: Vec<Method> = args
        .method
        .as_deref()
        .or(ctx.file.run_value("method"))
        .unwrap_or("faquad")
        .split(',')
        .map(parse_method)
        .collect::<Result<_, _>>()?;
    if methods.is_empty() || methods.iter().any(|m| matches!(m, Method::Reversed(_))) {
        return Err(CliError::Usage("scan methods must be faquad, la or linear".into()));
    }
    if methods.len() > 1 && output.is_none() && !args.demux {
        return Err(CliError::Usage("several methods need -o/--output".into()));
    }
    if plot.is_some() && (output.is_none() || args.demux) {
        return Err(CliError::Usage("--plot needs CSV output (-o) and no --demux".into()));
    }
    let t_fs = scan_durations(ctx, &args, &preset)?;

    // FAQUAD and LA share one spectral sweep.
    let cache = ctx.cache();
    let mut sweep: Option<SpectralSweep> = None;
    let mut succeeded = 0usize;
    let mut curves = Vec::new();
    for method in &methods {
        let profile = match method {
            Method::Faquad | Method::La => {
                if sweep.is_none() {
                    eprintln!("designing {} profile ...", method);
                    sweep = Some(design_sweep(&preset.path, &preset.grid, &DesignOptions::default(), cache.as_ref())?);
                }
                let kind = if *method == Method::Faquad { ProfileKind::Faquad } else { ProfileKind::La };
                Some(AdiabaticityProfile::from_sweep(preset.path, kind, &sweep.as_ref().expect("sweep computed").nodes)?)
            }
            _ => None,
        };
        let protocol = Protocol::with_profile(&preset, method.clone(), profile)?;
        if args.demux {
            succeeded += demux(&protocol, &t_fs)?;
            continue;
        }
        let target = output.as_ref().map(|o| method_output(o, method, methods.len() > 1));
        let result = match &target {
            Some(path) => {
                let f = File::create(path).map_err(CliError::io(path.display().to_string()))?;
                let r = stream_scan(&protocol, &t_fs, args.superposition, BufWriter::new(f))?;
                curves.push((method.to_string(), path.display().to_string()));
                r
            }
            None => stream_scan(&protocol, &t_fs, args.superposition, io::stdout())?,
        };
        succeeded += result.rows.iter().filter(|r| r.error.is_none()).count();
        let line = summary(&result, &preset, args.superposition);
        if target.is_some() {
            println!("{line}");
        } else {
            println!("# {line}");
        }
    }
    if let Some(path) = plot {
        let f = File::create(&path).map_err(CliError::io(path.display().to_string()))?;
        emit_gnuplot(BufWriter::new(f), &curves, preset.units.is_some(), args.superposition)?;
    }
    if succeeded == 0 {
        return Err(CliError::Model(fockramp::Error::InvalidParameter("no scan row succeeded".into())));
    }
    Ok(())
}

fn stream_scan<W: Write + Send>(protocol: &Protocol, t_fs: &[f64], superposition: bool, out: W) -> Result<ScanResult, CliError> {
    let preset = &protocol.preset;
    let stream = CsvStream::new(out, &protocol.method, preset.n_target, preset.seconds_per_unit())?;
    let done = AtomicUsize::new(0);
    let total = {
        let mut t = t_fs.to_vec();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t.len()
    };
    let result = protocol.scan_with(t_fs, superposition, |i, row| {
        stream.push(i, row);
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        match (&row.error, row.f_n) {
            (Some(e), _) => eprintln!("[{k}/{total}] {} t_f={} failed: {e}", protocol.method, fmt_time(row.t_f, preset)),
            (None, Some(f)) => eprintln!("[{k}/{total}] {} t_f={} F_n={f:.6}", protocol.method, fmt_time(row.t_f, preset)),
            (None, None) => {}
        }
    })?;
    stream.finish()?;
    Ok(result)
}

fn summary(result: &ScanResult, preset: &Preset, superposition: bool) -> String {
    let mut line = format!("summary method={} n={}", result.method, result.n_target);
    match result.best() {
        Some(r) => line += &format!(" best_t_f={} best_F={:.6}", fmt_time(r.t_f, preset), r.f_n.unwrap_or(f64::NAN)),
        None => line += " best_t_f=none best_F=none",
    }
    if superposition {
        if let Some(r) = result.best_superposition() {
            line += &format!(" best_avg_t_f={} best_F_avg={:.6}", fmt_time(r.t_f, preset), r.f_avg.unwrap_or(f64::NAN));
        }
    }
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    line + &format!(" rows={} failed={failed}", result.rows.len())
}

/// Prints F_forward and F_backward per duration; returns the success count.
fn demux(protocol: &Protocol, t_fs: &[f64]) -> Result<usize, CliError> {
    let preset = &protocol.preset;
    let mut t = t_fs.to_vec();
    t.sort_by(f64::total_cmp);
    t.dedup();
    let rows: Vec<_> = t.par_iter().map(|&t_f| (t_f, protocol.demultiplexing(t_f))).collect();
    let mut ok = 0;
    for (t_f, r) in rows {
        match r {
            Ok((fwd, bwd)) => {
                ok += 1;
                println!("demux method={} t_f={} F_fwd={fwd:.10} F_bwd={bwd:.10} diff={:.3e}", protocol.method, fmt_time(t_f, preset), (fwd - bwd).abs());
            }
            Err(e) => eprintln!("demux method={} t_f={} failed: {e}", protocol.method, fmt_time(t_f, preset)),
        }
    }
    Ok(ok)
}
