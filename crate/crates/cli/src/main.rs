//! Pipeline front end: ingest → rca → proximity → graph / density /
//! transitions / diffuse / converge → report. Each stage reads the previous
//! stage's artifacts from the run directory instead of recomputing, and every
//! stage re-writes the resolved configuration next to its outputs so a run
//! directory is self-describing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use product_space::diffusion::{convergence_sweep, diffuse, prody, DiffusionConfig};
use product_space::dynamics::{
    classify_transitions, density_all, density_distributions, discovery_ratio,
    transition_prob_by_proximity, transition_prob_by_rank, write_rank_csv, TransitionTable,
};
use product_space::graph::{
    component_curve, export_dot, export_edge_csv, export_graphml, export_json,
    hierarchical_order, max_spanning_forest, overlay,
};
use product_space::ingest::{
    aggregate_region, load_income, load_meta, load_regions, load_trade, ExportMatrix,
};
use product_space::proximity::{phi_stats, proximity, ProximityMatrix};
use product_space::specialization::{binarize, rca, RcaMatrix, SpecializationMatrix};
use product_space::stats::Histogram;

const OUT_ENV: &str = "PRODUCT_SPACE_OUT";

/// Resolved run configuration, persisted as config.json in the run
/// directory. The output directory itself is deliberately not stored so two
/// runs into different directories produce byte-identical artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    trade: Option<String>,
    income: Option<String>,
    meta: Option<String>,
    regions: Option<String>,
    window: (i32, i32),
    compare: Option<(i32, i32)>,
    rca_high: f64,
    rca_low: f64,
    overlay_phi: f64,
    phi0: f64,
    phi_grid: Vec<f64>,
    iterations: u32,
    top_n: usize,
    inclusive_threshold: bool,
    min_export: f64,
    seed: u64,
    formats: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trade: None,
            income: None,
            meta: None,
            regions: None,
            window: (1998, 2000),
            compare: None,
            rca_high: 1.0,
            rca_low: 0.5,
            overlay_phi: 0.55,
            phi0: 0.55,
            phi_grid: parse_grid("0.4:0.05:0.8").unwrap(),
            iterations: 20,
            top_n: 50,
            inclusive_threshold: true,
            min_export: 0.0,
            seed: 0,
            formats: vec!["graphml".into(), "dot".into(), "json".into(), "csv".into()],
        }
    }
}

impl RunConfig {
    fn load_or_default(dir: &Path) -> Result<RunConfig> {
        let path = dir.join("config.json");
        if path.exists() {
            let file = File::open(&path).with_context(|| format!("open {}", path.display()))?;
            Ok(serde_json::from_reader(BufReader::new(file))
                .with_context(|| format!("parse {}", path.display()))?)
        } else {
            Ok(RunConfig::default())
        }
    }

    fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join("config.json");
        let mut file = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file)?;
        Ok(())
    }
}

fn parse_window(s: &str) -> Result<(i32, i32), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let err = || format!("expected START:END, got {s:?}");
    if parts.len() != 2 {
        return Err(err());
    }
    let a: i32 = parts[0].parse().map_err(|_| err())?;
    let b: i32 = parts[1].parse().map_err(|_| err())?;
    if a > b {
        return Err(format!("window start {a} after end {b}"));
    }
    Ok((a, b))
}

fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let err = || format!("expected START:STEP:END, got {s:?}");
    if parts.len() != 3 {
        return Err(err());
    }
    let start: f64 = parts[0].parse().map_err(|_| err())?;
    let step: f64 = parts[1].parse().map_err(|_| err())?;
    let end: f64 = parts[2].parse().map_err(|_| err())?;
    if !(step > 0.0) || start > end {
        return Err(format!("degenerate grid {s:?}"));
    }
    let mut grid = Vec::new();
    let mut k = 0;
    loop {
        let v = start + step * k as f64;
        if v > end + 1e-9 {
            break;
        }
        // Round to the grid's printed precision so 0.4 + 3*0.05 is 0.55, not
        // 0.5500000000000001.
        grid.push((v * 1e9).round() / 1e9);
        k += 1;
    }
    Ok(grid)
}

#[derive(Debug, Args)]
struct Common {
    /// Run directory for artifacts (default: $PRODUCT_SPACE_OUT, else ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Common {
    fn dir(&self) -> Result<PathBuf> {
        let dir = match &self.out {
            Some(d) => d.clone(),
            None => std::env::var_os(OUT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out")),
        };
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("create run directory {}", dir.display()))?;
        Ok(dir)
    }
}

#[derive(Debug, Parser)]
#[command(name = "product-space", version, about = "Product-space pipeline: relatedness networks, specialization dynamics, and threshold diffusion from trade data")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Pool trade data into export matrices for the base (and optional
    /// comparison) windows
    Ingest {
        /// Trade CSV with header year,exporter,sitc4,value
        #[arg(long)]
        trade: PathBuf,
        /// Pooling window as START:END (inclusive years)
        #[arg(long, value_parser = parse_window)]
        window: Option<(i32, i32)>,
        /// Comparison snapshot years as T0:T1
        #[arg(long, value_parser = parse_window)]
        compare: Option<(i32, i32)>,
        /// Region file (region,country) to aggregate member countries
        #[arg(long)]
        regions: Option<PathBuf>,
        /// Drop countries whose pooled total export falls below this value
        #[arg(long)]
        min_export: Option<f64>,
    },
    /// Compute Balassa RCA and the binarized specialization matrix
    Rca {
        /// Specialization threshold (RCA strictly above it)
        #[arg(long)]
        rca_high: Option<f64>,
    },
    /// Compute the proximity matrix and its summary statistics
    Proximity,
    /// Build the product-space graph: spanning forest plus overlay edges,
    /// component curve, and hierarchical ordering
    Graph {
        /// Overlay threshold: keep every edge with phi strictly above it
        #[arg(long)]
        overlay_phi: Option<f64>,
        /// Product metadata CSV (sitc4,name,leamer_class)
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Export formats (graphml, dot, json, csv)
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<String>>,
    },
    /// Compute density around every product for every country
    Density,
    /// Classify transitions between the comparison snapshots and derive the
    /// discovery statistics and probability curves
    Transitions {
        /// Undevelopment threshold (RCA strictly below it at t0)
        #[arg(long)]
        rca_low: Option<f64>,
    },
    /// Simulate threshold diffusion for every country at one phi0
    Diffuse {
        #[arg(long)]
        phi0: Option<f64>,
        /// Number of diffusion rounds
        #[arg(long)]
        iterations: Option<u32>,
        /// Traverse edges with phi equal to phi0 (false: strictly greater)
        #[arg(long, action = ArgAction::Set)]
        inclusive_threshold: Option<bool>,
    },
    /// Sweep phi0 over a grid and report IQR convergence of reach PRODY
    Converge {
        /// Income CSV with header country,year,gdp_pc
        #[arg(long)]
        income: Option<PathBuf>,
        /// Grid as START:STEP:END
        #[arg(long, value_parser = parse_grid)]
        phi_grid: Option<Vec<f64>>,
        /// Reach PRODY averages the top N products of the acquired set
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        iterations: Option<u32>,
        #[arg(long, action = ArgAction::Set)]
        inclusive_threshold: Option<bool>,
    },
    /// Collect the headline statistics of a run into one summary JSON
    Report {
        /// Seed recorded for synthetic-data harnesses (not used by the
        /// pipeline itself)
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn artifact(dir: &Path, name: &str, producer: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    if !path.exists() {
        bail!("missing artifact {name}: run `product-space {producer}` first");
    }
    Ok(path)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("open {}", path.display()))?,
    ))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("create {}", path.display()))?,
    ))
}

fn read_export_matrix(dir: &Path, name: &str, window: (i32, i32)) -> Result<ExportMatrix> {
    let path = artifact(dir, name, "ingest")?;
    Ok(ExportMatrix::read_long_csv(open(&path)?, window)?)
}

fn read_rca(dir: &Path, name: &str) -> Result<RcaMatrix> {
    let path = artifact(dir, name, "rca")?;
    Ok(RcaMatrix::read_csv(open(&path)?)?)
}

fn read_proximity(dir: &Path) -> Result<ProximityMatrix> {
    let path = artifact(dir, "proximity.csv", "proximity")?;
    Ok(ProximityMatrix::read_csv(open(&path)?)?)
}

fn read_specialization(dir: &Path, cfg: &RunConfig) -> Result<SpecializationMatrix> {
    let r = read_rca(dir, "rca.csv")?;
    Ok(binarize(&r, cfg.rca_high)?)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let dir = cli.common.dir()?;
    let mut cfg = RunConfig::load_or_default(&dir)?;
    match cli.cmd {
        Cmd::Ingest { trade, window, compare, regions, min_export } => {
            if let Some(w) = window {
                cfg.window = w;
            }
            if let Some(c) = compare {
                cfg.compare = Some(c);
            }
            if let Some(m) = min_export {
                cfg.min_export = m;
            }
            cfg.trade = Some(trade.display().to_string());
            cfg.regions = regions.as_ref().map(|p| p.display().to_string());
            cmd_ingest(&dir, &cfg, &trade, regions.as_deref()).context("stage ingest")?;
        }
        Cmd::Rca { rca_high } => {
            if let Some(h) = rca_high {
                cfg.rca_high = h;
            }
            cmd_rca(&dir, &cfg).context("stage rca")?;
        }
        Cmd::Proximity => cmd_proximity(&dir, &cfg).context("stage proximity")?,
        Cmd::Graph { overlay_phi, meta, format } => {
            if let Some(t) = overlay_phi {
                cfg.overlay_phi = t;
            }
            if let Some(f) = format {
                cfg.formats = f;
            }
            cfg.meta = meta.as_ref().map(|p| p.display().to_string());
            cmd_graph(&dir, &cfg, meta.as_deref()).context("stage graph")?;
        }
        Cmd::Density => cmd_density(&dir, &cfg).context("stage density")?,
        Cmd::Transitions { rca_low } => {
            if let Some(l) = rca_low {
                cfg.rca_low = l;
            }
            cmd_transitions(&dir, &cfg).context("stage transitions")?;
        }
        Cmd::Diffuse { phi0, iterations, inclusive_threshold } => {
            if let Some(p) = phi0 {
                cfg.phi0 = p;
            }
            if let Some(m) = iterations {
                cfg.iterations = m;
            }
            if let Some(i) = inclusive_threshold {
                cfg.inclusive_threshold = i;
            }
            cmd_diffuse(&dir, &cfg).context("stage diffuse")?;
        }
        Cmd::Converge { income, phi_grid, top_n, iterations, inclusive_threshold } => {
            if let Some(g) = phi_grid {
                cfg.phi_grid = g;
            }
            if let Some(n) = top_n {
                cfg.top_n = n;
            }
            if let Some(m) = iterations {
                cfg.iterations = m;
            }
            if let Some(i) = inclusive_threshold {
                cfg.inclusive_threshold = i;
            }
            if let Some(p) = &income {
                cfg.income = Some(p.display().to_string());
            }
            cmd_converge(&dir, &cfg).context("stage converge")?;
        }
        Cmd::Report { seed } => {
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cmd_report(&dir, &cfg).context("stage report")?;
        }
    }
    cfg.save(&dir)?;
    Ok(())
}

fn prepare_matrix(
    m: ExportMatrix,
    cfg: &RunConfig,
    regions: Option<&Path>,
) -> Result<ExportMatrix> {
    let m = if cfg.min_export > 0.0 {
        m.filter_countries(cfg.min_export)?
    } else {
        m
    };
    Ok(match regions {
        Some(path) => {
            let groups = load_regions(path)?;
            aggregate_region(&m, &groups)?
        }
        None => m,
    })
}

fn cmd_ingest(dir: &Path, cfg: &RunConfig, trade: &Path, regions: Option<&Path>) -> Result<()> {
    let m = prepare_matrix(load_trade(trade, cfg.window)?, cfg, regions)?;
    m.write_long_csv(create(dir, "export_matrix.csv")?)?;
    println!(
        "ingest: {} countries x {} products pooled over {}-{}",
        m.countries().len(),
        m.products().len(),
        cfg.window.0,
        cfg.window.1
    );
    if let Some((t0, t1)) = cfg.compare {
        let m0 = prepare_matrix(load_trade(trade, (t0, t0))?, cfg, regions)?;
        let m1 = prepare_matrix(load_trade(trade, (t1, t1))?, cfg, regions)?;
        m0.write_long_csv(create(dir, "export_matrix_t0.csv")?)?;
        m1.write_long_csv(create(dir, "export_matrix_t1.csv")?)?;
        println!("ingest: comparison snapshots {t0} and {t1} written");
    }
    Ok(())
}

fn cmd_rca(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let m = read_export_matrix(dir, "export_matrix.csv", cfg.window)?;
    let r = rca(&m)?;
    r.write_csv(create(dir, "rca.csv")?)?;
    let s = binarize(&r, cfg.rca_high)?;
    s.write_csv(create(dir, "specialization.csv")?)?;
    println!("rca: {} countries x {} products, threshold {}", r.countries().len(), r.products().len(), cfg.rca_high);
    if let Some((t0, t1)) = cfg.compare {
        let r0 = rca(&read_export_matrix(dir, "export_matrix_t0.csv", (t0, t0))?)?;
        let r1 = rca(&read_export_matrix(dir, "export_matrix_t1.csv", (t1, t1))?)?;
        r0.write_csv(create(dir, "rca_t0.csv")?)?;
        r1.write_csv(create(dir, "rca_t1.csv")?)?;
        println!("rca: comparison snapshots written");
    }
    Ok(())
}

fn cmd_proximity(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let s = read_specialization(dir, cfg)?;
    let p = proximity(&s)?;
    p.write_csv(create(dir, "proximity.csv")?)?;
    let stats = phi_stats(&p, &[0.1, 0.2])?;
    let mut w = create(dir, "phi_stats.json")?;
    serde_json::to_writer_pretty(&mut w, &stats)?;
    writeln!(w)?;
    println!(
        "proximity: {} products, {} pairs, frac_zero {:.4}",
        p.n(),
        stats.pairs,
        stats.frac_zero
    );
    Ok(())
}

fn cmd_graph(dir: &Path, cfg: &RunConfig, meta: Option<&Path>) -> Result<()> {
    let p = read_proximity(dir)?;
    let forest = max_spanning_forest(&p)?;
    let mut g = overlay(&forest, &p, cfg.overlay_phi)?;
    if let Some(path) = meta {
        g.apply_metadata(&load_meta(path)?);
    }
    for format in &cfg.formats {
        match format.as_str() {
            "graphml" => export_graphml(&g, create(dir, "product_space.graphml")?)?,
            "dot" => export_dot(&g, create(dir, "product_space.dot")?)?,
            "json" => export_json(&g, create(dir, "product_space.json")?)?,
            "csv" => export_edge_csv(&g, create(dir, "edges.csv")?)?,
            other => bail!("unknown graph format {other:?} (expected graphml, dot, json, or csv)"),
        }
    }
    let thresholds: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let curve = component_curve(&p, &thresholds)?;
    curve.write_csv(create(dir, "component_curve.csv")?)?;
    let order = hierarchical_order(&p)?;
    let mut w = create(dir, "hierarchical_order.csv")?;
    writeln!(w, "position,sitc4")?;
    for (k, code) in order.iter().enumerate() {
        writeln!(w, "{k},{code}")?;
    }
    println!(
        "graph: {} nodes, {} edges (overlay phi > {})",
        g.nodes.len(),
        g.edges.len(),
        cfg.overlay_phi
    );
    Ok(())
}

fn cmd_density(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let s = read_specialization(dir, cfg)?;
    let p = read_proximity(dir)?;
    let table = density_all(&s, &p)?;
    table.write_csv(create(dir, "density.csv")?)?;
    println!("density: {} countries x {} products", table.rows.len(), table.products.len());
    Ok(())
}

/// Restricts the snapshot universe to products present in the proximity
/// matrix, so snapshot-derived tables line up with the base-window space.
fn restrict_to_proximity(
    s: &SpecializationMatrix,
    p: &ProximityMatrix,
) -> Result<(SpecializationMatrix, ProximityMatrix)> {
    let shared: Vec<String> = s
        .products()
        .iter()
        .filter(|c| p.product_index(c).is_some())
        .cloned()
        .collect();
    if shared.is_empty() {
        bail!("snapshot and base-window product universes do not overlap");
    }
    if shared.len() < s.products().len() || shared.len() < p.products().len() {
        log::warn!(
            "restricting to {} products shared between the snapshot ({}) and the proximity matrix ({})",
            shared.len(),
            s.products().len(),
            p.products().len()
        );
    }
    let mut bits = Vec::with_capacity(s.countries().len() * shared.len());
    for c in 0..s.countries().len() {
        for code in &shared {
            let j = s.products().iter().position(|x| x == code).unwrap();
            bits.push(s.bit(c, j));
        }
    }
    let sr = SpecializationMatrix::new(s.countries().to_vec(), shared.clone(), bits, s.threshold())?;
    let n = shared.len();
    let mut phi = vec![0.0; n * n];
    for (a, ca) in shared.iter().enumerate() {
        for (b, cb) in shared.iter().enumerate() {
            let (i, j) = (p.product_index(ca).unwrap(), p.product_index(cb).unwrap());
            phi[a * n + b] = p.get(i, j);
        }
    }
    let pr = ProximityMatrix::from_dense(shared, phi)?;
    Ok((sr, pr))
}

/// Drops table entries whose product is outside the restricted universe and
/// remaps the indices.
fn restrict_table(t: &TransitionTable, products: &[String]) -> TransitionTable {
    let entries = t
        .entries
        .iter()
        .filter_map(|(c, p, label)| {
            let j = products.iter().position(|x| x == &t.products[*p])?;
            Some((*c, j, *label))
        })
        .collect();
    TransitionTable {
        countries: t.countries.clone(),
        products: products.to_vec(),
        entries,
        low: t.low,
        high: t.high,
    }
}

fn cmd_transitions(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let Some(_) = cfg.compare else {
        bail!("no comparison snapshots configured: run `product-space ingest --compare T0:T1` first");
    };
    let r0 = read_rca(dir, "rca_t0.csv")?;
    let r1 = read_rca(dir, "rca_t1.csv")?;
    let p = read_proximity(dir)?;
    let table = classify_transitions(&r0, &r1, cfg.rca_low, cfg.rca_high)?;
    table.write_csv(create(dir, "transitions.csv")?)?;

    let s0 = binarize(&r0, cfg.rca_high)?;
    let (s0r, pr) = restrict_to_proximity(&s0, &p)?;
    let tr = restrict_table(&table, s0r.products());

    let densities = density_all(&s0r, &pr)?;
    let (hist_t, hist_u) = density_distributions(&tr, &densities, 0.02)?;
    write_density_hist(&hist_t, &hist_u, create(dir, "density_hist.csv")?)?;

    let stats = discovery_ratio(&tr, &densities)?;
    stats.write_csv(create(dir, "h_ratio.csv")?)?;

    let curve = transition_prob_by_proximity(&tr, &s0r, &pr, 0.1, true)?;
    curve.write_csv(create(dir, "prob_by_phi.csv")?)?;
    let ranks = transition_prob_by_rank(&tr, &s0r, &pr)?;
    write_rank_csv(&ranks, create(dir, "prob_by_rank.csv")?)?;

    println!(
        "transitions: {} classified pairs, frac H > 1 = {}",
        tr.entries.len(),
        stats
            .frac_above_one
            .map(|f| format!("{f:.4}"))
            .unwrap_or_else(|| "undefined".into())
    );
    Ok(())
}

fn write_density_hist(
    t: &Histogram,
    u: &Histogram,
    mut w: impl std::io::Write,
) -> Result<()> {
    writeln!(w, "bin_low,bin_high,transition_count,undeveloped_count")?;
    for bin in 0..t.counts.len().max(u.counts.len()) {
        let (lo, hi) = t.bin_bounds(bin);
        let ct = t.counts.get(bin).copied().unwrap_or(0);
        let cu = u.counts.get(bin).copied().unwrap_or(0);
        writeln!(w, "{lo},{hi},{ct},{cu}")?;
    }
    Ok(())
}

fn cmd_diffuse(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let s = read_specialization(dir, cfg)?;
    let p = read_proximity(dir)?;
    let mut dc = DiffusionConfig::new(cfg.phi0)?;
    dc.iterations = cfg.iterations;
    dc.inclusive = cfg.inclusive_threshold;
    let mut w = create(dir, "diffusion.csv")?;
    writeln!(w, "country,sitc4,step")?;
    for country in s.countries() {
        let trace = diffuse(&s, &p, &dc, country)?;
        product_space::diffusion::write_trace_rows(&trace, &mut w)?;
    }
    println!("diffuse: {} countries at phi0 {}", s.countries().len(), cfg.phi0);
    Ok(())
}

fn cmd_converge(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let Some(income) = &cfg.income else {
        bail!("no income file configured: pass --income to `product-space converge`");
    };
    let r = read_rca(dir, "rca.csv")?;
    let s = binarize(&r, cfg.rca_high)?;
    let p = read_proximity(dir)?;
    let incomes = load_income(Path::new(income), cfg.window.1)?;
    let prodys = prody(&r, &incomes)?;
    let mut dc = DiffusionConfig::new(cfg.phi_grid.first().copied().unwrap_or(cfg.phi0))?;
    dc.iterations = cfg.iterations;
    dc.top_n = cfg.top_n;
    dc.inclusive = cfg.inclusive_threshold;
    let report = convergence_sweep(&s, &p, &prodys, &cfg.phi_grid, &dc)?;
    report.write_sweep_csv(create(dir, "sweep.csv")?)?;
    let mut w = create(dir, "convergence.json")?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    println!(
        "converge: {} grid points, original IQR {}",
        report.rows.len(),
        report.original_iqr
    );
    Ok(())
}

fn cmd_report(dir: &Path, _cfg: &RunConfig) -> Result<()> {
    let mut missing = Vec::new();

    let phi_section: Option<serde_json::Value> = match File::open(dir.join("phi_stats.json")) {
        Ok(f) => Some(serde_json::from_reader(BufReader::new(f))?),
        Err(_) => {
            missing.push("phi_stats.json (proximity)");
            None
        }
    };

    let curve_section = match File::open(dir.join("component_curve.csv")) {
        Ok(f) => {
            let mut samples = Vec::new();
            for record in csv::Reader::from_reader(BufReader::new(f)).records() {
                let record = record?;
                samples.push(serde_json::json!({
                    "phi_threshold": record[0].parse::<f64>()?,
                    "giant_size": record[1].parse::<u64>()?,
                    "ratio": record[3].parse::<f64>()?,
                }));
            }
            Some(serde_json::Value::Array(samples))
        }
        Err(_) => {
            missing.push("component_curve.csv (graph)");
            None
        }
    };

    let transition_section = match File::open(dir.join("h_ratio.csv")) {
        Ok(f) => {
            let mut defined = 0u64;
            let mut above = 0u64;
            for record in csv::Reader::from_reader(BufReader::new(f)).records() {
                let record = record?;
                if record[3].is_empty() {
                    continue;
                }
                defined += 1;
                if record[3].parse::<f64>()? > 1.0 {
                    above += 1;
                }
            }
            Some(serde_json::json!({
                "products_with_defined_h": defined,
                "frac_h_above_one": (defined > 0).then(|| above as f64 / defined as f64),
            }))
        }
        Err(_) => {
            missing.push("h_ratio.csv (transitions)");
            None
        }
    };

    let convergence_section: Option<serde_json::Value> =
        match File::open(dir.join("convergence.json")) {
            Ok(f) => Some(serde_json::from_reader(BufReader::new(f))?),
            Err(_) => {
                missing.push("convergence.json (converge)");
                None
            }
        };

    if phi_section.is_none()
        && curve_section.is_none()
        && transition_section.is_none()
        && convergence_section.is_none()
    {
        bail!(
            "no reportable artifacts in {}; missing: {}",
            dir.display(),
            missing.join(", ")
        );
    }
    for m in &missing {
        log::warn!("section unavailable, reported as null: {m}");
    }

    let summary = serde_json::json!({
        "phi_stats": phi_section,
        "component_curve": curve_section,
        "transitions": transition_section,
        "convergence": convergence_section,
    });
    let mut w = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    println!("report: summary.json written ({} sections missing)", missing.len());
    Ok(())
}
