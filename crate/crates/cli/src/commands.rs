use std::fmt::Write as _;
use std::path::Path;

use log::{error, info, warn};
use twdp::inference::{analyze, analyze_batch, partition_stride, AnalysisConfig, EnvelopeSet, FitReport};
use twdp::linksim::{capacity_loss, simulate_ber};
use twdp::measurement::{average_corr, power_map, tap_envelopes, Direction, DirectionalScan};
use twdp::synth::{sample_envelopes, sample_scan, synth_field, PlaneWave, PlaneWaveScene, ScanDirectionSpec};
use twdp::{FadingParams, TwdpDistribution};

use crate::args::*;
use crate::documents::*;
use crate::error::{CliError, CliResult, Context};
use crate::formats::*;

/// Most rows written to a CDF overlay table.
pub const OVERLAY_ROWS: usize = 1000;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a).map(|_| ()),
        Command::Scan(a) => cmd_scan(&a).map(|_| ()),
        Command::Spatial(a) => cmd_spatial(&a).map(|_| ()),
        Command::Ber(a) => cmd_ber(&a).map(|_| ()),
        Command::Synth(SynthCommand::Envelopes(a)) => cmd_synth_envelopes(&a),
        Command::Synth(SynthCommand::Grid(a)) => cmd_synth_grid(&a),
        Command::Synth(SynthCommand::Scan(a)) => cmd_synth_scan(&a),
    }
}

fn validated(args: &AnalysisArgs) -> CliResult<AnalysisConfig> {
    let config = args.config();
    config.grid.validate().context("grid settings")?;
    if !(config.gtest.alpha > 0.0 && config.gtest.alpha < 1.0) || config.gtest.per_cell == 0 {
        return Err(CliError::Input("alpha must lie in (0, 1) and per-cell be positive".into()));
    }
    Ok(config)
}

pub fn k_db(k: f64) -> String {
    if k > 0.0 {
        format!("{:.2} dB", 10.0 * k.log10())
    } else {
        "-inf dB".into()
    }
}

pub fn summary(source: &str, r: &FitReport) -> String {
    let mut s = String::new();
    let flag = |b: bool| if b { "  [at grid boundary]" } else { "" };
    let _ = writeln!(s, "{source}");
    let _ = writeln!(s, "  samples    {} fit, {} moment", r.n_fit, r.n_moment);
    let _ = writeln!(s, "  omega_hat  {:.6}", r.omega_hat);
    let _ = writeln!(
        s,
        "  rice       K = {:.3} ({})  loglik = {:.3}  AICc = {:.3}{}",
        r.rice.k_hat,
        k_db(r.rice.k_hat),
        r.rice.loglik,
        r.rice.aicc,
        flag(r.rice.at_boundary)
    );
    let _ = writeln!(
        s,
        "  twdp       K = {:.3} ({})  delta = {:.2}  loglik = {:.3}  AICc = {:.3}{}",
        r.twdp.k_hat,
        k_db(r.twdp.k_hat),
        r.twdp.delta_hat,
        r.twdp.loglik,
        r.twdp.aicc,
        flag(r.twdp.at_boundary)
    );
    let _ = writeln!(s, "  chosen     {}", r.chosen);
    let _ = writeln!(
        s,
        "  g-test     G = {:.3}, threshold {:.3} ({} dof, {} cells): {:?}",
        r.gtest.g, r.gtest.threshold, r.gtest.dof, r.gtest.cells, r.gtest.verdict
    );
    s
}

/// Empirical CDF of the fit samples next to the fitted Rice, fitted TWDP and
/// a Rayleigh reference of the same Ω̂.
pub fn cdf_overlay(set: &EnvelopeSet, report: &FitReport) -> twdp::Result<String> {
    let mut fit = set.fit_values();
    fit.sort_by(f64::total_cmp);
    let rice = TwdpDistribution::new(report.rice_params()?)?;
    let twdp = TwdpDistribution::new(report.twdp_params()?)?;
    let rayleigh = TwdpDistribution::new(FadingParams::rayleigh(report.omega_hat)?)?;
    let n = fit.len();
    let rows = n.min(OVERLAY_ROWS);
    let mut out = String::from("r,empirical,rice,twdp,rayleigh\n");
    for j in 0..rows {
        let i = if rows == n { j } else { (j * (n - 1)) / (rows - 1).max(1) };
        let r = fit[i];
        let _ = writeln!(
            out,
            "{r},{},{},{},{}",
            (i + 1) as f64 / n as f64,
            rice.cdf(r)?,
            twdp.cdf(r)?,
            rayleigh.cdf(r)?
        );
    }
    Ok(out)
}

fn fail(e: CliError, first: &mut Option<CliError>) {
    error!("{e}");
    first.get_or_insert(e);
}

fn stride_settings(config: &AnalysisConfig, stride: usize) -> FitSettings {
    FitSettings {
        analysis: config.clone(),
        partition: format!("stride {stride}"),
    }
}

/// Fits every input file in one pass over the parameter grid. Files that
/// fail are reported and skipped; the first failure sets the exit status.
pub fn cmd_fit(args: &FitArgs) -> CliResult<Vec<FitDocument>> {
    let config = validated(&args.analysis)?;
    let mut sets = Vec::with_capacity(args.inputs.len());
    let mut first_err: Option<CliError> = None;
    for path in &args.inputs {
        let set = read_envelopes(path).and_then(|v| partition_stride(v, args.stride).context(path.display()));
        match set {
            Ok(s) => sets.push((path.clone(), s)),
            Err(e) if matches!(e, CliError::Core { .. }) => fail(e, &mut first_err),
            Err(e) => return Err(e),
        }
    }
    let only: Vec<EnvelopeSet> = sets.iter().map(|(_, s)| s.clone()).collect();
    info!("fitting {} file(s)", only.len());
    let results = analyze_batch(&only, &config).context("fit")?;

    let mut docs = Vec::new();
    for ((path, set), result) in sets.iter().zip(results) {
        let report = match result.context(path.display()) {
            Ok(r) => r,
            Err(e) => {
                fail(e, &mut first_err);
                continue;
            }
        };
        let overlay = match cdf_overlay(set, &report).context(path.display()) {
            Ok(o) => o,
            Err(e) => {
                fail(e, &mut first_err);
                continue;
            }
        };
        let source = path.display().to_string();
        let doc = FitDocument::new(source.clone(), stride_settings(&config, args.stride), report);
        write_json(&output_path(path, args.out_dir.as_deref(), ".report.json"), &doc)?;
        write_atomic(&output_path(path, args.out_dir.as_deref(), ".cdf.csv"), overlay.as_bytes())?;
        if !args.quiet {
            print!("{}", summary(&source, &doc.report));
        }
        docs.push(doc);
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(docs),
    }
}

pub fn cmd_scan(args: &ScanArgs) -> CliResult<ScanDocument> {
    let config = validated(&args.analysis)?;
    let scan: DirectionalScan = read_scan(&args.input)?;
    let name = args.input.display().to_string();
    let map = power_map(&scan, args.margin_db).context(&name)?;

    let evaluated: Vec<usize> = (0..map.len()).filter(|&i| map[i].evaluated).collect();
    let prepared: Vec<twdp::Result<EnvelopeSet>> = evaluated
        .iter()
        .map(|&i| partition_stride(scan.records[i].samples.clone(), args.stride))
        .collect();
    let ok: Vec<EnvelopeSet> = prepared.iter().filter_map(|p| p.as_ref().ok().cloned()).collect();
    let mut fitted = analyze_batch(&ok, &config).context(&name)?.into_iter();

    let mut fits = Vec::with_capacity(evaluated.len());
    for (&i, prep) in evaluated.iter().zip(&prepared) {
        let outcome = match prep {
            Err(e) => Err(e.clone()),
            Ok(_) => fitted.next().expect("one result per prepared set"),
        };
        let direction = map[i].direction;
        fits.push(match outcome {
            Ok(report) => DirectionFit {
                direction,
                marker: Marker::of(&report),
                report: Some(report),
                error: None,
            },
            Err(e) => {
                warn!("{name}: direction ({}, {}): {e}", direction.azimuth, direction.elevation);
                DirectionFit {
                    direction,
                    marker: Marker::Failed,
                    report: None,
                    error: Some(e.to_string()),
                }
            }
        });
    }

    let mut markers = fits.iter().map(|f| f.marker);
    let power: Vec<PowerPoint> = map
        .iter()
        .map(|e| PowerPoint {
            direction: e.direction,
            omega_hat: e.omega_hat,
            power_norm: e.power_norm,
            evaluated: e.evaluated,
            marker: if e.evaluated {
                markers.next().expect("one marker per evaluated direction")
            } else {
                Marker::NotEvaluated
            },
        })
        .collect();

    let doc = ScanDocument {
        schema_version: SCHEMA_VERSION.into(),
        kind: Kind::Scan,
        source: name.clone(),
        margin_db: args.margin_db,
        settings: stride_settings(&config, args.stride),
        power_map: power,
        fits,
    };
    let out_dir = args.out_dir.as_deref();
    write_json(&output_path(&args.input, out_dir, ".scan.json"), &doc)?;
    let mut csv = String::from("azimuth,elevation,omega_hat,power_norm,evaluated,marker\n");
    for p in &doc.power_map {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            p.direction.azimuth,
            p.direction.elevation,
            p.omega_hat,
            p.power_norm,
            p.evaluated,
            p.marker.label()
        );
    }
    write_atomic(&output_path(&args.input, out_dir, ".power.csv"), csv.as_bytes())?;
    if !args.quiet {
        println!("{name}: {} directions, {} evaluated", doc.power_map.len(), doc.fits.len());
        for p in &doc.power_map {
            println!(
                "  az {:>7.2}  el {:>7.2}  power {:>8.2} dB  {}",
                p.direction.azimuth,
                p.direction.elevation,
                10.0 * p.power_norm.log10(),
                p.marker.label()
            );
        }
    }
    Ok(doc)
}

pub struct SpatialOutput {
    pub correlation: CorrelationDocument,
    pub tap: Option<FitDocument>,
}

pub fn cmd_spatial(args: &SpatialArgs) -> CliResult<SpatialOutput> {
    let header = args.header.clone().unwrap_or_else(|| default_header_path(&args.input));
    let grid = read_grid(&args.input, &header)?;
    let name = args.input.display().to_string();
    let map = average_corr(&grid, args.interp).context(&name)?;

    let out_dir = args.out_dir.as_deref();
    let matrix_path = output_path(&args.input, out_dir, ".corr.csv");
    let mut csv = String::new();
    for iy in 0..map.lags_y {
        let row: Vec<String> = (0..map.lags_x).map(|ix| map.get(ix, iy).to_string()).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_atomic(&matrix_path, csv.as_bytes())?;
    let correlation = CorrelationDocument {
        schema_version: SCHEMA_VERSION.into(),
        kind: Kind::Correlation,
        source: name.clone(),
        matrix_file: file_name(&matrix_path),
        step: map.step,
        interp_factor: map.interp_factor,
        lag_axis_x: map.lag_axis_x(),
        lag_axis_y: map.lag_axis_y(),
        cut_x: map.cut_x.clone(),
        cut_y: map.cut_y.clone(),
    };
    write_json(&output_path(&args.input, out_dir, ".corr.json"), &correlation)?;

    let tap = match args.tap {
        None => None,
        Some(t) => {
            let config = validated(&args.analysis)?;
            let source = format!("{name}#tap{t}");
            let set = tap_envelopes(&grid, t).context(&source)?;
            let report = analyze(&set, &config).context(&source)?;
            let doc = FitDocument::new(
                source.clone(),
                FitSettings {
                    analysis: config,
                    partition: "chequerboard".into(),
                },
                report,
            );
            write_json(&output_path(&args.input, out_dir, &format!(".tap{t}.report.json")), &doc)?;
            if !args.quiet {
                print!("{}", summary(&source, &doc.report));
            }
            Some(doc)
        }
    };
    if !args.quiet {
        println!("{name}: correlation map {}x{} written to {}", map.lags_x, map.lags_y, matrix_path.display());
    }
    Ok(SpatialOutput { correlation, tap })
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn channel(args: &ChannelArgs) -> CliResult<FadingParams> {
    FadingParams::new(args.k_linear(), args.delta, args.omega).context("channel parameters")
}

pub fn cmd_ber(args: &BerArgs) -> CliResult<BerDocument> {
    let params = channel(&args.channel)?;
    let curve = simulate_ber(&params, &args.snr_db, args.symbols, args.seed).context("ber")?;
    let mut csv = String::from("snr_db,ber,std_err\n");
    for i in 0..curve.snr_db.len() {
        let _ = writeln!(csv, "{},{},{}", curve.snr_db[i], curve.ber[i], curve.std_err[i]);
    }
    write_atomic(&args.out, csv.as_bytes())?;
    let doc = BerDocument {
        schema_version: SCHEMA_VERSION.into(),
        kind: Kind::Ber,
        table_file: file_name(&args.out),
        params,
        n_symbols: curve.n_symbols,
        seed: curve.seed,
        capacity_loss: capacity_loss(params.delta()).context("capacity loss")?,
    };
    write_json(&args.out.with_extension("json"), &doc)?;
    if !args.quiet {
        println!(
            "K = {:.3} ({}), delta = {:.2}, {} symbols per point, capacity loss {:.4}",
            params.k(),
            k_db(params.k()),
            params.delta(),
            curve.n_symbols,
            doc.capacity_loss
        );
        for i in 0..curve.snr_db.len() {
            println!("  {:>6.1} dB  BER {:.4e} ± {:.1e}", curve.snr_db[i], curve.ber[i], curve.std_err[i]);
        }
    }
    Ok(doc)
}

pub fn cmd_synth_envelopes(args: &SynthEnvelopesArgs) -> CliResult<()> {
    let params = channel(&args.channel)?;
    let env = sample_envelopes(&params, args.n, args.seed).context("synth")?;
    info!("{} envelopes with {params:?}, seed {}", env.len(), args.seed);
    write_envelopes(&args.out, &env)
}

fn parse_numbers(text: &str, what: &str, min: usize, max: usize) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("{what}: cannot parse {text:?}")))?;
    if v.len() < min || v.len() > max {
        return Err(CliError::Input(format!("{what}: expected {min} to {max} values, got {}", v.len())));
    }
    Ok(v)
}

fn scene_from_args(args: &SynthGridArgs) -> CliResult<PlaneWaveScene> {
    if let Some(path) = &args.scene {
        return read_json(path);
    }
    if args.waves.is_empty() && args.diffuse == 0.0 {
        return Err(CliError::Input("give --scene, at least one --wave, or --diffuse".into()));
    }
    let waves = args
        .waves
        .iter()
        .map(|w| {
            let v = parse_numbers(w, "--wave", 4, 5)?;
            let wave = PlaneWave::new(v[0], PlaneWave::direction_from_angles(v[1], v[2]), v[3]);
            Ok(if v.len() == 5 { wave.with_delay(v[4]) } else { wave })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut scene = PlaneWaveScene::new(waves, args.wavelength);
    scene.shape = twdp::measurement::GridShape::new(args.points, args.points, args.points);
    scene.spacing = args.spacing;
    scene.diffuse_power = args.diffuse;
    scene.seed = args.seed;
    if let Some(f) = &args.freqs {
        let v = parse_numbers(f, "--freqs", 3, 3)?;
        if !(v[2] >= 1.0 && v[2].fract() == 0.0) {
            return Err(CliError::Input("--freqs count must be a positive integer".into()));
        }
        scene.freq_axis = (0..v[2] as usize).map(|i| v[0] + v[1] * i as f64).collect();
    }
    Ok(scene)
}

pub fn cmd_synth_grid(args: &SynthGridArgs) -> CliResult<()> {
    let scene = scene_from_args(args)?;
    let grid = synth_field(&scene).context("synth grid")?;
    write_grid(&args.out, &default_header_path(&args.out), &grid)
}

pub fn cmd_synth_scan(args: &SynthScanArgs) -> CliResult<()> {
    let specs = args
        .directions
        .iter()
        .map(|d| {
            let v = parse_numbers(d, "--direction", 5, 5)?;
            Ok(ScanDirectionSpec {
                direction: Direction::new(v[0], v[1]).context("--direction")?,
                params: FadingParams::new(v[2], v[3], v[4]).context("--direction")?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let scan = sample_scan(&specs, args.samples, args.noise, args.seed).context("synth scan")?;
    write_json(&args.out, &scan)
}
