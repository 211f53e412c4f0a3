mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use tricert::certify::*;
use tricert::dist::{correlators, parity_fail, token_interval, w_delta_min_seeded, CorrelatorVariant, TokenModel};
use tricert::lp::{to_lp_format, LinearProgram};
use tricert::qmodel::*;

use config::{Command, RunConfig};
use output::Row;

/// Environment variable read for the thread count when --threads is absent.
const THREADS_ENV: &str = "TRICERT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "tricert", version, about = "Certify nonlocality of triangle-network distributions")]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (CSV, or JSON for `dist`). Standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG heatmap next to the output (sweeps only).
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory to export the LPs of the run in LP format.
    #[arg(long)]
    lp_dump: Option<PathBuf>,
}

/// Failure classes, mapped to exit codes 1 and 2.
enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<tricert::Error> for Failure {
    fn from(e: tricert::Error) -> Self {
        match e {
            tricert::Error::NumericalFailure(_) | tricert::Error::InvalidLp(_) => Failure::Numerical(e.into()),
            _ => Failure::Config(e.into()),
        }
    }
}

struct Outcome {
    rows: Vec<Row>,
    summary: String,
    /// Replaces the CSV for commands with another artifact format.
    artifact: Option<String>,
    svg: Option<String>,
    aborted: bool,
}

impl Outcome {
    fn single(row: Row, summary: String) -> Self {
        let aborted = row.verdict.as_deref() == Some("Aborted");
        Outcome { rows: vec![row], summary, artifact: None, svg: None, aborted }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(args: &Args) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.config.display()))?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count(args: &Args) -> anyhow::Result<Option<usize>> {
    if let Some(n) = args.threads {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?)),
        Err(_) => Ok(None),
    }
}

fn run(args: &Args) -> Result<ExitCode, Failure> {
    let cfg = load(args).map_err(Failure::Config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(args).map_err(Failure::Config)? {
        if n == 0 {
            return Err(Failure::Config(anyhow::anyhow!("--threads must be at least 1")));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Config(e.into()))?;

    if let Some(dir) = &args.lp_dump {
        dump_lps(&cfg, dir)?;
    }
    let out = pool.install(|| execute(&cfg))?;

    match &args.out {
        Some(path) => {
            let bytes = match &out.artifact {
                Some(a) => a.clone().into_bytes(),
                None => output::write_csv(&out.rows, cfg.timing).map_err(Failure::Config)?,
            };
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())).map_err(Failure::Config)?;
            println!("{}", out.summary);
        }
        None => {
            match &out.artifact {
                Some(a) => print!("{a}"),
                None => print!(
                    "{}",
                    String::from_utf8_lossy(&output::write_csv(&out.rows, cfg.timing).map_err(Failure::Config)?)
                ),
            }
            eprintln!("{}", out.summary);
        }
    }
    if args.svg {
        match &out.svg {
            Some(svg) => {
                let path = svg_path(args.out.as_deref());
                std::fs::write(&path, svg)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(Failure::Config)?;
                eprintln!("heatmap written to {}", path.display());
            }
            None => eprintln!("--svg: {} produces no heatmap", cfg.command.name()),
        }
    }
    Ok(if out.aborted { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn svg_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.with_extension("svg"),
        None => PathBuf::from("heatmap.svg"),
    }
}

fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let g = cfg.grid();
    let cmd = cfg.command.name();
    let model = &cfg.model;
    match cfg.command {
        Command::Dist => {
            let p = tbsm_distribution(model, &cfg.noise)?;
            let mut o = Outcome::single(Row::new(cmd, Some(model), &cfg.noise), format!("dist: parity failure {:e}", parity_fail(&p)));
            o.artifact = Some(output::dist_json(&p));
            Ok(o)
        }
        Command::CertifyNoiseless => {
            let p = tbsm_distribution(model, &cfg.noise)?;
            let rep = certify_noiseless(&p, &g);
            let summary = format!("{} (lp_count {})", verdict_text(&rep.verdict), rep.lp_count);
            Ok(Outcome::single(Row::new(cmd, Some(model), &cfg.noise).with_report(&rep), summary))
        }
        Command::CertifyDephasing => {
            let r = tbsm_dephasing(model, &g)?;
            let mut row = Row::new(cmd, Some(model), &[]);
            row.noise_kind = Some(NoiseKind::Dephasing.name().into());
            row.verdict = Some(if r.certified_below.is_some() { "CertifiedNonlocal" } else { "NotCertified" }.into());
            row.threshold = Some(r.d_star);
            row.lp_count = Some(r.lp_count);
            row.certs_verified = Some(r.certified_below.is_some() || r.d_star == 0.0);
            let summary = format!("{} d* = {:.6} (e* = {:.6})", row.verdict.as_deref().unwrap_or(""), r.d_star, r.e_star);
            Ok(Outcome::single(row, summary))
        }
        Command::CertifyNoisy => match cfg.scan {
            Some(kind) => {
                eprintln!("searching the {} threshold", kind.name());
                let rep = noise_threshold(model, kind, &g)?;
                let mut row = Row::new(cmd, Some(model), &[]).with_threshold(&rep, g.m);
                row.noise_kind = Some(kind.name().into());
                let summary = format!("{} threshold {:.6} ({} probes)", kind.name(), rep.threshold, rep.probes.len());
                Ok(Outcome::single(row, summary))
            }
            None => {
                let p = tbsm_distribution(model, &cfg.noise)?;
                let eps = parity_fail(&p);
                let honest = TokenModel::new([model.lambda0_sq; 3])?;
                let rep = grid_certify_with_honest(&p, eps, &g, Some(&honest));
                let summary = format!("{} (epsilon {eps:.6e}, lp_count {})", verdict_text(&rep.verdict), rep.lp_count);
                Ok(Outcome::single(Row::new(cmd, Some(model), &cfg.noise).with_report(&rep), summary))
            }
        },
        Command::CertifyTvd => {
            let p = tbsm_distribution(model, &cfg.noise)?;
            match cfg.epsilon {
                Some(eps) => {
                    let rep = tvd_grid_certify(&p, eps, &g);
                    let summary = format!("{} (radius {eps}, lp_count {})", verdict_text(&rep.verdict), rep.lp_count);
                    Ok(Outcome::single(Row::new(cmd, Some(model), &cfg.noise).with_report(&rep), summary))
                }
                None => {
                    eprintln!("searching the certified TVD radius");
                    let rep = tvd_radius(&p, &g)?;
                    let summary = format!("certified TVD radius {:.6}", rep.threshold);
                    Ok(Outcome::single(Row::new(cmd, Some(model), &cfg.noise).with_threshold(&rep, g.m), summary))
                }
            }
        }
        Command::Wdist => {
            let w = cfg.w.expect("validated");
            let m = w_delta_min_seeded(&w, cfg.seed.expect("validated"));
            let mut row = Row::new(cmd, None, &[]);
            row.epsilon = Some(w.eps);
            row.noise_param = Some(w.delta.to_string());
            row.noise_kind = Some("w_delta".into());
            row.threshold = Some(m.value);
            let verdict = if m.value > 0.0 { "CertifiedNonlocal" } else { "NotCertified" };
            row.verdict = Some(verdict.into());
            let summary = format!(
                "{verdict} Delta_min = {:.6e} at q = {:?} (heuristic minimum: positive only shows nonlocality if the \
                 global minimum was found)",
                m.value, m.q
            );
            Ok(Outcome::single(row, summary))
        }
        Command::Volume => {
            let est = tricert::dist::ptc_local_volume(cfg.samples, cfg.seed.expect("validated"))?;
            let mut row = Row::new(cmd, None, &[]);
            row.threshold = Some(est.fraction);
            let summary = format!(
                "local PTC fraction {:.5} +- {:.5} ({} of {} samples)",
                est.fraction, est.std_error, est.members, est.samples
            );
            Ok(Outcome::single(row, summary))
        }
        Command::Sweep => sweep_command(cfg, &g),
    }
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Aborted(why) => format!("Aborted: {why}"),
        v => v.label().to_string(),
    }
}

fn sweep_command(cfg: &RunConfig, g: &GridConfig) -> Result<Outcome, Failure> {
    let axes = cfg.sweep_axes.expect("validated");
    let spec = SweepSpec { base: cfg.model, noise: cfg.noise.clone(), axes, task: cfg.sweep_task.clone().expect("validated") };
    let total = axes[0].steps * axes[1].steps;
    let mut done = 0;
    let rows = sweep(&spec, g, &mut |r| {
        done += 1;
        let verdict = r.report.as_ref().map(|rep| rep.verdict.label()).unwrap_or("error");
        eprintln!("[{done}/{total}] ({:.4}, {:.4}) {verdict}", r.x, r.y);
    })?;
    let mut out_rows = Vec::with_capacity(rows.len());
    let mut aborted = false;
    let mut certified = 0;
    let mut grid = vec![vec![None; axes[1].steps]; axes[0].steps];
    let maxv = rows
        .iter()
        .filter_map(|r| r.report.as_ref().ok().and_then(|rep| rep.threshold))
        .fold(0.0f64, f64::max);
    for r in &rows {
        let mut row = Row::new("sweep", Some(&r.params), &r.noise);
        match &r.report {
            Ok(rep) => {
                row = row.with_report(rep);
                aborted |= matches!(rep.verdict, Verdict::Aborted(_));
                certified += usize::from(rep.verdict.is_certified());
                grid[r.i][r.j] = Some(match rep.threshold {
                    Some(t) if maxv > 0.0 => t / maxv,
                    _ => f64::from(u8::from(rep.verdict.is_certified())),
                });
            }
            Err(e) => {
                eprintln!("point ({}, {}): {e}", r.x, r.y);
                row.verdict = Some("Aborted".into());
                aborted = true;
            }
        }
        out_rows.push(row);
    }
    let svg = output::heatmap_svg(
        &grid,
        &format!("{:?}", axes[0].param),
        &format!("{:?}", axes[1].param),
        &format!("sweep: {certified}/{total} certified"),
    );
    Ok(Outcome {
        rows: out_rows,
        summary: format!("sweep: {certified} of {total} points CertifiedNonlocal"),
        artifact: None,
        svg: Some(svg),
        aborted,
    })
}

/// Exports the LPs a command solves: the single LP where there is one, the
/// full-interval box otherwise.
fn dump_lps(cfg: &RunConfig, dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(Failure::Config)?;
    let model = &cfg.model;
    let mut lps: Vec<(&str, LinearProgram)> = Vec::new();
    match cfg.command {
        Command::CertifyNoiseless => {
            let p = tbsm_distribution(model, &cfg.noise)?;
            lps.push(("noiseless", noiseless_lp(&p, &ptc_token_model(&p)?)?));
        }
        Command::CertifyDephasing => {
            let pq = tbsm_distribution(model, &[])?;
            let pc = tbsm_distribution(model, &[NoiseSpec { kind: NoiseKind::Dephasing, param: 1.0 }])?;
            lps.push(("dephasing", dephasing_lp(&pq, &pc, &ptc_token_model(&pq)?)?));
        }
        Command::CertifyNoisy if !cfg.noise.is_empty() => {
            let p = tbsm_distribution(model, &cfg.noise)?;
            let eps = parity_fail(&p);
            let bx = token_interval(&correlators(&p, CorrelatorVariant::Lambda), eps, 3.0)?;
            lps.push(("noisy_full_box", noisy_lp(&p, eps, &bx)?));
        }
        Command::CertifyTvd => {
            if let Some(eps) = cfg.epsilon {
                let p = tbsm_distribution(model, &cfg.noise)?;
                let bx = token_interval(&correlators(&p, CorrelatorVariant::Plain), eps, 6.0)?;
                lps.push(("tvd_full_box", tvd_lp(&p, eps, &bx)?));
            }
        }
        _ => {}
    }
    if lps.is_empty() {
        eprintln!("--lp-dump: nothing to export for {}", cfg.command.name());
    }
    for (name, lp) in lps {
        let path = dir.join(format!("{name}.lp"));
        std::fs::write(&path, to_lp_format(&lp)).with_context(|| format!("writing {}", path.display())).map_err(Failure::Config)?;
        eprintln!("LP written to {}", path.display());
    }
    Ok(())
}
