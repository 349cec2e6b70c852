use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use serde_json::{json, Value};

use birank::io::{self, heatmap, Pgm, SCHEMA};
use birank::latin::{haar_family, latin_square_family, HaarFamily};
use birank::meyer::{
    self, build_profile, filter_quotient, synthesize_wavelet, verify_bmra, BmraTolerances, CornerSpec, Direction,
    MeyerConfig,
};
use birank::separability::fuzz_intertwining;
use birank::transform::{analyze, synthesize};

/// Biscaled wavelet families, transforms and rank-2 Meyer profiles.
///
/// Exit codes: 0 success, 1 verification failure, 2 usage or input error.
/// BIRANK_THREADS caps the number of worker threads.
#[derive(Parser)]
#[command(name = "birank", version)]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the triadic Latin-square family as CSV grids and a manifest.
    BuildLatin {
        #[arg(long)]
        out: PathBuf,
        /// Also write family.tex and print it.
        #[arg(long)]
        latex: bool,
    },
    /// Build a generic Haar family for (alpha, beta) by unitary completion.
    BuildHaar {
        #[arg(long)]
        alpha: i64,
        #[arg(long)]
        beta: i64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        latex: bool,
    },
    /// Check a family directory (default: the built-in triadic family).
    VerifyLatin {
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Build a Meyer profile and report the residuals of every identity.
    VerifyMeyer {
        #[command(flatten)]
        meyer: MeyerArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol_corner: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Analyze a PGM image into a subband directory.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        alpha: i64,
        #[arg(long, default_value_t = 3)]
        beta: i64,
    },
    /// Reconstruct a PGM image from a subband directory.
    Inverse {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Zero detail coefficients with |c| <= t before reconstructing.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Render a CSV array as a PGM heatmap (linear min-max scaling).
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Bits::Sixteen)]
        bits: Bits,
    },
    /// Write a Meyer profile, its region map and its filters.
    BuildMeyer {
        #[command(flatten)]
        meyer: MeyerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Complete the filter matrix pointwise and sample the wavelet.
    SynthesizeWavelet {
        #[command(flatten)]
        meyer: MeyerArgs,
        #[arg(long)]
        out: PathBuf,
        /// Half width of the real-space box.
        #[arg(long = "box", default_value_t = 4.0)]
        half_width: f64,
        /// Real-space samples per axis.
        #[arg(long, default_value_t = 33)]
        samples: usize,
    },
    /// Search for pairs satisfying the intertwining identity without being univariate.
    FuzzIntertwining {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Directory for counterexample dumps.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Bits {
    #[value(name = "8")]
    Eight,
    #[value(name = "16")]
    Sixteen,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    PiecewiseConstant,
    Triangular,
    Tensor,
}

#[derive(Args)]
struct MeyerArgs {
    /// JSON file {"mode": ..., "a": ..., "d": ..., "grid_n": ...}; overrides the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::PiecewiseConstant)]
    mode: Mode,
    /// Squared value on the left half of the south-west corner [default: 1/(64π²)].
    #[arg(long)]
    a: Option<f64>,
    /// Squared value on the left half of the north-east corner [default: 1/(64π²)].
    #[arg(long)]
    d: Option<f64>,
    /// North-east share for triangular mode.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = 0.5)]
    pa: f64,
    #[arg(long, default_value_t = 0.5)]
    pb: f64,
    /// Grid points per axis over [−4π/3, 4π/3]; a multiple of 4.
    #[arg(long, default_value_t = meyer::DEFAULT_GRID)]
    grid: usize,
}

impl MeyerArgs {
    fn config(&self) -> Result<MeyerConfig, Failure> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            return serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())));
        }
        let default = 1.0 / (64.0 * PI * PI);
        let spec = match self.mode {
            Mode::PiecewiseConstant => CornerSpec::PiecewiseConstant {
                a: self.a.unwrap_or(default),
                d: self.d.unwrap_or(default),
            },
            Mode::Triangular => CornerSpec::Triangular { t: self.t },
            Mode::Tensor => CornerSpec::Tensor { pa: self.pa, pb: self.pb },
        };
        Ok(MeyerConfig {
            spec,
            grid_n: self.grid,
        })
    }
}

enum Failure {
    /// bad flags or unusable input
    Usage(String),
    /// a check did not pass
    Verify(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Verify(m) => f.write_str(m),
        }
    }
}

impl From<birank::Error> for Failure {
    fn from(e: birank::Error) -> Self {
        use birank::Error as E;
        match e {
            E::TrivialDilation
            | E::InvalidDilation { .. }
            | E::Indivisible { .. }
            | E::ShapeMismatch(_)
            | E::InvalidCornerSpec(_)
            | E::InvalidGrid(_)
            | E::Parse(_)
            | E::Io(_)
            | E::Json(_) => Failure::Usage(e.to_string()),
            other => Failure::Verify(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<Value, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("BIRANK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // an already-initialised pool keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let json = cli.json;
    let result = run(cli.command, json);
    let (code, report) = match result {
        Ok(v) => (0, v),
        Err(f) => {
            let code = match f {
                Failure::Usage(_) => 2,
                Failure::Verify(_) => 1,
            };
            eprintln!("error: {f}");
            (code, json!({ "error": f.to_string() }))
        }
    };
    if json {
        let mut report = report;
        if let Value::Object(map) = &mut report {
            map.insert("schema".into(), json!(SCHEMA));
            map.insert("ok".into(), json!(code == 0));
        }
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    }
    ExitCode::from(code)
}

fn run(command: Command, json: bool) -> Outcome {
    let say = |msg: String| {
        if !json {
            println!("{msg}");
        }
    };
    match command {
        Command::BuildLatin { out, latex } => {
            let fam = latin_square_family();
            let report = write_family(&out, &fam, latex, &say)?;
            say(format!("wrote {} grids to {}", fam.grids().count(), out.display()));
            Ok(report)
        }
        Command::BuildHaar { alpha, beta, out, latex } => {
            let (alpha, beta) = dilation_args(alpha, beta)?;
            let fam = haar_family(alpha, beta)?;
            let report = write_family(&out, &fam, latex, &say)?;
            say(format!(
                "wrote {} wavelets; unitarity deviation {:.3e}",
                fam.wavelets.len(),
                fam.orthogonality_deviation()
            ));
            Ok(report)
        }
        Command::VerifyLatin { family, tol } => {
            let fam = match &family {
                Some(dir) => read_family(dir)?,
                None => latin_square_family(),
            };
            let check = fam.check();
            let failures = check.failures(tol);
            let report = json!({ "family": check, "tolerance": tol, "failures": failures });
            say(format!(
                "orthogonality {:.3e}, partial isometry {:.3e}, wavelet pairs {:.3e}, scaling {:.3e}",
                check.orthogonality_deviation,
                check.partial_isometry_deviation,
                check.wavelet_pairwise_max,
                check.scaling_deviation
            ));
            finish(report, &failures, &say)
        }
        Command::VerifyMeyer { meyer, tol_corner, tol } => {
            let cfg = meyer.config()?;
            let p = build_profile(&cfg.spec, cfg.grid_n)?;
            let r = verify_bmra(&p)?;
            let tols = BmraTolerances {
                corner: tol_corner,
                identity: tol,
                reality: tol_corner,
            };
            let failures = r.failures(&tols);
            say(serde_json::to_string_pretty(&r).expect("report serializes"));
            finish(json!({ "config": cfg, "report": r, "failures": failures }), &failures, &say)
        }
        Command::Transform {
            input,
            out,
            depth,
            alpha,
            beta,
        } => {
            let (alpha, beta) = dilation_args(alpha, beta)?;
            let fam = family_for(alpha, beta)?;
            let img = Pgm::read(&input)?;
            let tree = analyze(img.to_f64().view(), &fam, depth)?;
            let manifest = io::write_subbands(&out, &tree, Some(img.maxval))?;
            say(format!(
                "{} bands over {} levels written to {}",
                manifest.shapes.len(),
                depth,
                out.display()
            ));
            Ok(json!({ "manifest": manifest }))
        }
        Command::Inverse { input, out, threshold } => {
            let manifest = io::read_manifest(&input)?;
            let mut tree = io::read_subbands(&input)?;
            let fam = family_for(tree.alpha as u32, tree.beta as u32)?;
            let stats = threshold.map(|t| tree.threshold(t));
            let x = synthesize(&tree, &fam)?;
            let maxval = manifest.maxval.unwrap_or(if x.iter().any(|&v| v > 255.5) { 65535 } else { 255 });
            Pgm::from_f64(x.view(), maxval).write(&out)?;
            let mut report = json!({ "output": out, "maxval": maxval });
            if let (Some(t), Some(s)) = (threshold, stats) {
                let fraction = s.retained as f64 / s.detail_total.max(1) as f64;
                say(format!(
                    "threshold {t}: kept {} of {} detail coefficients ({:.2}%)",
                    s.retained,
                    s.detail_total,
                    100.0 * fraction
                ));
                report["threshold"] = json!({
                    "t": t,
                    "retained": s.retained,
                    "detail_total": s.detail_total,
                    "retained_fraction": fraction,
                    "removed_energy": s.removed_energy,
                });
            }
            say(format!("wrote {}", out.display()));
            Ok(report)
        }
        Command::Plot { input, out, bits } => {
            let a = io::read_csv(&input)?;
            let maxval = match bits {
                Bits::Eight => 255,
                Bits::Sixteen => 65535,
            };
            heatmap(a.view(), maxval).write(&out)?;
            say(format!("wrote {}x{} heatmap to {}", a.nrows(), a.ncols(), out.display()));
            Ok(json!({ "output": out, "rows": a.nrows(), "cols": a.ncols(), "maxval": maxval }))
        }
        Command::BuildMeyer { meyer, out } => {
            let cfg = meyer.config()?;
            build_meyer(&cfg, &out, &say)
        }
        Command::SynthesizeWavelet {
            meyer,
            out,
            half_width,
            samples,
        } => {
            let cfg = meyer.config()?;
            synthesize_cmd(&cfg, &out, half_width, samples, &say)
        }
        Command::FuzzIntertwining { seed, trials, out } => {
            let r = fuzz_intertwining(seed, trials);
            say(format!(
                "{} random trials ({} zero residual), {} exhaustive pairs ({} zero residual), {} counterexamples",
                r.trials,
                r.zero_residual,
                r.exhaustive_pairs,
                r.exhaustive_zero_residual,
                r.counterexamples.len()
            ));
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
                for (k, c) in r.counterexamples.iter().enumerate() {
                    io::write_trigpoly(&dir.join(format!("counterexample_{k}_a.txt")), &c.a)?;
                    io::write_trigpoly(&dir.join(format!("counterexample_{k}_b.txt")), &c.b)?;
                }
            }
            let report = json!({ "seed": seed, "fuzz": r });
            if r.passed() {
                Ok(report)
            } else {
                for c in &r.counterexamples {
                    eprintln!(
                        "COUNTEREXAMPLE (alpha = {}, beta = {}):\na:\n{}b:\n{}",
                        c.alpha,
                        c.beta,
                        c.a.to_text(),
                        c.b.to_text()
                    );
                }
                Err(Failure::Verify(format!("{} counterexamples found", r.counterexamples.len())))
            }
        }
    }
}

fn finish(report: Value, failures: &[&str], say: &dyn Fn(String)) -> Outcome {
    if failures.is_empty() {
        say("all checks passed".into());
        Ok(report)
    } else {
        Err(Failure::Verify(format!("failed checks: {}", failures.join(", "))))
    }
}

fn dilation_args(alpha: i64, beta: i64) -> Result<(u32, u32), Failure> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if v < 2 {
            return Err(Failure::Usage(format!("{name} must be ≥ 2")));
        }
        if v > 64 {
            return Err(Failure::Usage(format!("{name} must be ≤ 64")));
        }
    }
    Ok((alpha as u32, beta as u32))
}

fn family_for(alpha: u32, beta: u32) -> Result<HaarFamily, Failure> {
    if (alpha, beta) == (3, 3) {
        Ok(latin_square_family())
    } else {
        Ok(haar_family(alpha, beta)?)
    }
}

fn write_family(dir: &Path, fam: &HaarFamily, latex: bool, say: &dyn Fn(String)) -> Outcome {
    fs::create_dir_all(dir)?;
    let names = fam.grid_names();
    for (name, grid) in names.iter().zip(fam.grids()) {
        io::write_csv(&dir.join(format!("{name}.csv")), grid.view())?;
    }
    let check = fam.check();
    let manifest = json!({
        "schema": SCHEMA,
        "alpha": fam.alpha,
        "beta": fam.beta,
        "grids": names,
    });
    fs::write(dir.join("family.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    if latex {
        let tex = fam.latex();
        fs::write(dir.join("family.tex"), &tex)?;
        say(tex);
    }
    Ok(json!({ "manifest": manifest, "family": check }))
}

fn read_family(dir: &Path) -> Result<HaarFamily, Failure> {
    let text = fs::read_to_string(dir.join("family.json"))?;
    let m: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("family.json: {e}")))?;
    let field = |k: &str| {
        m[k].as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| Failure::Usage(format!("family.json: missing {k}")))
    };
    let (alpha, beta) = (field("alpha")?, field("beta")?);
    let names = m["grids"]
        .as_array()
        .ok_or_else(|| Failure::Usage("family.json: missing grids".into()))?;
    let grids = names
        .iter()
        .map(|n| {
            let name = n.as_str().ok_or_else(|| Failure::Usage("family.json: bad grid name".into()))?;
            Ok(io::read_csv(&dir.join(format!("{name}.csv")))?)
        })
        .collect::<Result<Vec<Array2<f64>>, Failure>>()?;
    Ok(HaarFamily::from_grids(alpha, beta, &grids)?)
}

fn build_meyer(cfg: &MeyerConfig, out: &Path, say: &dyn Fn(String)) -> Outcome {
    let p = build_profile(&cfg.spec, cfg.grid_n)?;
    fs::create_dir_all(out)?;
    io::write_csv(&out.join("profile.csv"), p.values.view())?;
    heatmap(p.values.view(), 65535).write(&out.join("profile.pgm"))?;
    let codes = p.regions.mapv(|r| f64::from(r.code()));
    io::write_csv(&out.join("regions.csv"), codes.view())?;
    heatmap(codes.view(), 255).write(&out.join("regions.pgm"))?;
    for (dir, name) in [(Direction::A, "quotient_a"), (Direction::B, "quotient_b")] {
        let q = filter_quotient(&p, dir)?;
        io::write_csv(&out.join(format!("{name}.csv")), q.values.view())?;
        heatmap(q.values.mapv(|v| if v.is_nan() { 0.0 } else { v }).view(), 65535)
            .write(&out.join(format!("{name}.pgm")))?;
    }
    fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg).expect("config serializes"))?;
    let manifest = json!({
        "schema": SCHEMA,
        "config": cfg,
        "grid": { "half_extent": p.grid.half_extent, "n": p.n() },
        "unresolved_nodes": p.unresolved_count(),
        "nonseparability_score": meyer::nonseparability_score(&p),
        "region_codes": { "outside": 0, "central": 1, "corner": 2, "border_i": 3, "border_j": 4, "unresolved": 5 },
        "heatmap_scaling": "linear min-max; constant arrays are mid-gray, all-zero arrays black",
        "files": ["profile.csv", "profile.pgm", "regions.csv", "regions.pgm", "quotient_a.csv", "quotient_a.pgm", "quotient_b.csv", "quotient_b.pgm", "config.json"],
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    say(format!(
        "{}x{} profile written to {} ({} unresolved nodes)",
        p.n(),
        p.n(),
        out.display(),
        p.unresolved_count()
    ));
    Ok(manifest)
}

/// Residual bound required before synthesis.
const SYNTHESIS_GATE: f64 = 1e-6;

fn synthesize_cmd(cfg: &MeyerConfig, out: &Path, half_width: f64, samples: usize, say: &dyn Fn(String)) -> Outcome {
    let p = build_profile(&cfg.spec, cfg.grid_n)?;
    let r = verify_bmra(&p)?;
    let gate = BmraTolerances {
        corner: SYNTHESIS_GATE,
        identity: SYNTHESIS_GATE,
        reality: f64::INFINITY,
    };
    let failures = r.failures(&gate);
    if !failures.is_empty() {
        return Err(Failure::Verify(format!(
            "profile does not satisfy the identities to {SYNTHESIS_GATE:e}: {}",
            failures.join(", ")
        )));
    }
    let w = synthesize_wavelet(&p)?;
    fs::create_dir_all(out)?;
    let parts = [
        ("psi_hat_re", w.psi_hat.mapv(|v| v.re)),
        ("psi_hat_im", w.psi_hat.mapv(|v| v.im)),
        ("psi_hat_abs", w.psi_hat.mapv(|v| v.norm())),
    ];
    for (name, a) in &parts {
        io::write_csv(&out.join(format!("{name}.csv")), a.view())?;
    }
    heatmap(parts[2].1.view(), 65535).write(&out.join("psi_hat_abs.pgm"))?;
    let psi = w.real_space(half_width, samples);
    let (re, im) = (psi.mapv(|v| v.re), psi.mapv(|v| v.im));
    io::write_csv(&out.join("psi_re.csv"), re.view())?;
    io::write_csv(&out.join("psi_im.csv"), im.view())?;
    heatmap(re.view(), 65535).write(&out.join("psi_re.pgm"))?;
    let inner = w
        .phi_inner_products(2)
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.norm()));
    let report = json!({
        "config": cfg,
        "unitarity_deviation": w.unitarity_deviation,
        "determinant_deviation": w.determinant_deviation,
        "unresolved_nodes": w.unresolved_nodes,
        "norm": w.norm_sq().sqrt(),
        "max_phi_inner_product": inner,
        "inner_square_max": w.inner_square_max,
        "outside_max": w.outside_max,
        "real_space": { "half_width": half_width, "samples": samples,
                        "max_imag": im.iter().fold(0.0f64, |m, v| m.max(v.abs())) },
        "eta_grid": { "half_extent": p.grid.half_extent, "n": p.n(),
                      "note": "psi_hat arrays are sampled at 2*eta" },
    });
    fs::write(out.join("report.json"), serde_json::to_string_pretty(&report).expect("report serializes"))?;
    say(format!(
        "wavelet written to {}: |psi| = {:.6}, max |<psi, phi_k>| = {inner:.2e}, unitarity {:.2e}",
        out.display(),
        w.norm_sq().sqrt(),
        w.unitarity_deviation
    ));
    Ok(report)
}
