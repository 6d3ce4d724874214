// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lportho_core::bench::{build_preconditioner, circulant_spectrum_csv, real_spectrum_csv, run_bench, BenchConfig};
use lportho_core::geometry::{is_orthogonal, GeometryResult, DEFAULT_ORTHO_TOL};
use lportho_core::io::{
    energy_profile_csv, energy_table, fmt_f64, parse_signal_csv, parse_vector_csv, DecompositionFile,
};
use lportho_core::manifest::RunManifest;
use lportho_core::signal::{
    check_energy_conservation, dft, fif_decompose, l1_fourier_energy, pairwise_l1_angles, Domain, FifOptions,
    SpectralProfile,
};
use lportho_core::toeplitz::{
    build_toeplitz, circulant_spectrum, preconditioned_spectrum_diagnostic, select_p_tilde, PTildeMode,
    DEFAULT_EPSILON, DENSE_LIMIT,
};
use lportho_core::{Decomposition, DiscreteFunction, ModelSymbol, PExponent};

#[derive(Parser)]
#[command(
    name = "lportho",
    version,
    about = "L^p angles, L1 Fourier energy audits and l^p circulant preconditioners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Directory for output files and the run manifest; stdout only when absent.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Weak inner product, Pythagorean defect and angle of two vectors.
    Angle {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_ORTHO_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Orthogonality test; exit code 0 either way.
    Ortho {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_ORTHO_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// L1 Fourier energy of a signal.
    Energy {
        signal: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Iterative-filtering decomposition with its energy report.
    Decompose {
        signal: PathBuf,
        /// Increasing filter halfwidths, one per extracted component.
        #[arg(long, value_delimiter = ',', required = true)]
        halfwidths: Vec<usize>,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        max_inner: usize,
        /// Relative tolerance of the conservation check.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Energy report of an existing decomposition JSON.
    Audit {
        decomposition: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Exit with status 1 when energy is not conserved.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// PCG iteration tables for l^p circulant preconditioners.
    PrecondBench {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's spectral correction switch.
        #[arg(long)]
        correction: Option<OnOff>,
        /// Overrides the config's PCG tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the cells; 0 picks the core count.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Circulant and preconditioned spectra of one model problem.
    Spectrum {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "off")]
        correction: OnOff,
        /// Exponent grid for the p-tilde search.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Collects output files and writes the manifest last.
struct Outputs {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Outputs {
    fn new(args: &OutArgs) -> Result<Self> {
        if let Some(dir) = &args.out_dir {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(Self {
            dir: args.out_dir.clone(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(self, manifest: RunManifest) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let mut m = manifest;
        m.outputs = self.written;
        fs::write(dir.join("manifest.json"), m.to_json() + "\n")?;
        Ok(())
    }

    fn manifest(&self, command: &str, parameters: serde_json::Value) -> RunManifest {
        RunManifest::new(command, parameters, self.dir.as_deref().unwrap_or(Path::new("")))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_pair(f: &Path, g: &Path) -> Result<(DiscreteFunction, DiscreteFunction)> {
    let f = DiscreteFunction::new(parse_vector_csv(&read(f)?)?)?;
    let g = DiscreteFunction::new(parse_vector_csv(&read(g)?)?)?;
    if f.len() != g.len() {
        bail!("vectors differ in length: {} vs {}", f.len(), g.len());
    }
    Ok((f, g))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn cmd_angle(f: &Path, g: &Path, p: f64, tol: f64, out: &OutArgs) -> Result<()> {
    if !(tol > 0.0) {
        bail!("tol must be positive, got {tol}");
    }
    let (fv, gv) = read_pair(f, g)?;
    let r = GeometryResult::compute(&fv, &gv, PExponent::new(p)?)?;
    let body = json!({
        "p": p,
        "wip": r.weak_inner_product,
        "defect": r.defect,
        "cot_angle": r.cot_angle,
        "angle": r.angle,
        "orthogonal": r.is_orthogonal(tol),
    });
    let text = pretty(&body);
    print!("{text}");
    let mut o = Outputs::new(out)?;
    o.write("angle.json", &text)?;
    let m = o
        .manifest("angle", json!({"p": p, "tol": tol}))
        .with_inputs([path_str(f), path_str(g)]);
    o.finish(m)
}

fn cmd_ortho(f: &Path, g: &Path, p: f64, tol: f64, out: &OutArgs) -> Result<()> {
    let (fv, gv) = read_pair(f, g)?;
    let orthogonal = is_orthogonal(&fv, &gv, PExponent::new(p)?, tol)?;
    let r = GeometryResult::compute(&fv, &gv, PExponent::new(p)?)?;
    let body = json!({"p": p, "tol": tol, "wip": r.weak_inner_product, "scale": r.scale, "orthogonal": orthogonal});
    let text = pretty(&body);
    print!("{text}");
    let mut o = Outputs::new(out)?;
    o.write("ortho.json", &text)?;
    let m = o
        .manifest("ortho", json!({"p": p, "tol": tol}))
        .with_inputs([path_str(f), path_str(g)]);
    o.finish(m)
}

fn cmd_energy(signal: &Path, out: &OutArgs) -> Result<()> {
    let s = parse_signal_csv(&read(signal)?)?;
    let e = l1_fourier_energy(&s);
    let body = json!({"n": s.len(), "bandwidth": s.bandwidth(), "l1_fourier_energy": e});
    let text = pretty(&body);
    print!("{text}");
    let mut o = Outputs::new(out)?;
    o.write("energy.json", &text)?;
    let mut csv = String::from("k,abs\n");
    for (k, m) in dft(&s).magnitudes().iter().enumerate() {
        csv.push_str(&format!("{k},{}\n", fmt_f64(*m)));
    }
    o.write("spectrum.csv", &csv)?;
    let m = o.manifest("energy", json!({})).with_inputs([path_str(signal)]);
    o.finish(m)
}

fn components_csv(d: &Decomposition) -> String {
    let mut out = String::from("t,signal");
    let m = d.components().len();
    for i in 0..m {
        out.push_str(&format!(",imf{}", i + 1));
    }
    out.push_str(",trend\n");
    let times = d.source().times();
    for (j, t) in times.iter().enumerate() {
        out.push_str(&format!("{},{}", fmt_f64(*t), fmt_f64(d.source().samples()[j])));
        for part in d.parts() {
            out.push_str(&format!(",{}", fmt_f64(part.samples()[j])));
        }
        out.push('\n');
    }
    out
}

fn report_outputs(o: &mut Outputs, d: &Decomposition, tol: f64) -> Result<bool> {
    let r = check_energy_conservation(d, tol)?;
    let table = energy_table(&r);
    print!("{table}");
    o.write("energy_report.json", &(serde_json::to_string_pretty(&r)? + "\n"))?;
    o.write("energy_report.txt", &table)?;
    o.write("spectrum_profile.csv", &energy_profile_csv(&SpectralProfile::of(d)))?;
    if d.components().len() >= 2 {
        let angles = json!({
            "time": pairwise_l1_angles(d, Domain::Time)?,
            "frequency": pairwise_l1_angles(d, Domain::Frequency)?,
        });
        o.write("pairwise_l1_angles.json", &pretty(&angles))?;
    }
    Ok(r.conserved)
}

fn cmd_decompose(signal: &Path, opts: FifOptions, tol: f64, out: &OutArgs) -> Result<()> {
    let s = parse_signal_csv(&read(signal)?)?;
    let d = fif_decompose(&s, &opts)?;
    let mut o = Outputs::new(out)?;
    o.write(
        "decomposition.json",
        &(DecompositionFile::from_decomposition(&d).to_json() + "\n"),
    )?;
    o.write("components.csv", &components_csv(&d))?;
    report_outputs(&mut o, &d, tol)?;
    let params = json!({"halfwidths": opts.halfwidths, "delta": opts.delta, "max_inner": opts.max_inner, "tol": tol});
    let m = o.manifest("decompose", params).with_inputs([path_str(signal)]);
    o.finish(m)
}

fn cmd_audit(file: &Path, tol: f64, strict: bool, out: &OutArgs) -> Result<bool> {
    let d = DecompositionFile::from_json(&read(file)?)?.into_decomposition()?;
    let mut o = Outputs::new(out)?;
    let conserved = report_outputs(&mut o, &d, tol)?;
    let m = o
        .manifest("audit", json!({"tol": tol, "strict": strict}))
        .with_inputs([path_str(file)]);
    o.finish(m)?;
    Ok(conserved || !strict)
}

fn p_file_label(p: f64) -> String {
    format!("{p}").replace('.', "_")
}

fn cmd_bench(config: &Path, cfg: BenchConfig, workers: usize, out: &OutArgs) -> Result<()> {
    let res = run_bench(&cfg, workers)?;
    let md = res.to_markdown();
    print!("{md}");
    let mut o = Outputs::new(out)?;
    o.write("table.csv", &res.to_csv())?;
    o.write("table.md", &md)?;
    o.write("cells.csv", &res.to_long_csv())?;
    o.write("results.json", &(serde_json::to_string_pretty(&res)? + "\n"))?;
    if o.dir.is_some() {
        let symbol = cfg.symbol()?;
        for &n in &cfg.n_list {
            let t = build_toeplitz(&symbol.into(), n)?;
            for &p in &cfg.p_list {
                let (c, _) = build_preconditioner(&t, p, cfg.correction)?;
                o.write(
                    &format!("spectra/n{n}_p{}.csv", p_file_label(p)),
                    &circulant_spectrum_csv(&c),
                )?;
            }
        }
    }
    let params = serde_json::to_value(&cfg)?;
    let m = o
        .manifest("precond-bench", params)
        .with_inputs([path_str(config)])
        .with_seed(cfg.seed);
    o.finish(m)
}

struct SpectrumArgs {
    symbol: ModelSymbol,
    n: usize,
    p: f64,
    correction: bool,
    grid: Vec<f64>,
    epsilon: f64,
}

fn cmd_spectrum(a: SpectrumArgs, out: &OutArgs) -> Result<()> {
    let t = build_toeplitz(&a.symbol.into(), a.n)?;
    let (c, corrected) = build_preconditioner(&t, a.p, a.correction)?;
    let spec = circulant_spectrum(&c);
    let mut o = Outputs::new(out)?;
    o.write("circulant_spectrum.csv", &circulant_spectrum_csv(&c))?;
    let mut summary = json!({
        "n": a.n,
        "p": a.p,
        "corrected": corrected,
        "singular": c.is_singular(),
        "positive_definite": c.is_positive_definite(),
        "negative_count": spec.negative_count,
        "min_real": spec.min_real,
        "max_abs": spec.max_abs,
    });
    if a.n <= DENSE_LIMIT && c.is_positive_definite() {
        let r = preconditioned_spectrum_diagnostic(&t, &c)?;
        o.write("preconditioned_spectrum.csv", &real_spectrum_csv(&r.eigenvalues))?;
        summary["within_10pct"] = json!(r.within_10pct);
        summary["within_1pct"] = json!(r.within_1pct);
    }
    if !a.grid.is_empty() {
        summary["p_tilde"] = match select_p_tilde(&t, &a.grid, a.epsilon, PTildeMode::Spectral) {
            Ok(p) => json!(p),
            Err(e) => {
                log::warn!("p-tilde search: {e}");
                serde_json::Value::Null
            }
        };
    }
    let text = pretty(&summary);
    print!("{text}");
    o.write("summary.json", &text)?;
    let params = json!({
        "alpha": a.symbol.alpha, "beta": a.symbol.beta, "gamma": a.symbol.gamma,
        "n": a.n, "p": a.p, "correction": a.correction, "grid": a.grid, "epsilon": a.epsilon,
    });
    let m = o.manifest("spectrum", params);
    o.finish(m)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Angle { f, g, p, tol, out } => cmd_angle(&f, &g, p, tol, &out)?,
        Command::Ortho { f, g, p, tol, out } => cmd_ortho(&f, &g, p, tol, &out)?,
        Command::Energy { signal, out } => cmd_energy(&signal, &out)?,
        Command::Decompose {
            signal,
            halfwidths,
            delta,
            max_inner,
            tol,
            out,
        } => {
            let opts = FifOptions {
                halfwidths,
                delta,
                max_inner,
            };
            cmd_decompose(&signal, opts, tol, &out)?
        }
        Command::Audit {
            decomposition,
            tol,
            strict,
            out,
        } => return cmd_audit(&decomposition, tol, strict, &out),
        Command::PrecondBench {
            config,
            correction,
            tol,
            seed,
            workers,
            out,
        } => {
            let mut cfg = BenchConfig::from_json(&read(&config)?)?;
            if let Some(c) = correction {
                cfg.correction = matches!(c, OnOff::On);
            }
            if let Some(t) = tol {
                cfg.tol = t;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            cfg.validate()?;
            cmd_bench(&config, cfg, workers, &out)?
        }
        Command::Spectrum {
            alpha,
            beta,
            gamma,
            n,
            p,
            correction,
            grid,
            epsilon,
            out,
        } => cmd_spectrum(
            SpectrumArgs {
                symbol: ModelSymbol::new(alpha, beta, gamma)?,
                n,
                p,
                correction: matches!(correction, OnOff::On),
                grid,
                epsilon,
            },
            &out,
        )?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LPORTHO_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
