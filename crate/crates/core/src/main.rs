use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use graph_power::analytic::{
    check_iter_log_diff, check_iter_log_ratio, d_star, iter_log, joint_profile_pmf, log_u,
    power_degree_pmf, union_bound_tail, LayerComposition, LogProb,
};
use graph_power::experiment::{run_experiment, ExperimentConfig};
use graph_power::graph::{sample_gnp, GraphParams, SparseGraph};
use graph_power::minimizer::{
    brute_force_min, lower_bound_gap, minimize, GapMethod, MinimizeOutcome, DEFAULT_TOL,
};
use graph_power::power::{layer_profile, max_power_degree, profile_census, write_census_csv};
use graph_power::{Error, Result};

#[derive(Parser)]
#[command(
    name = "graph-power",
    version,
    about = "Maximum degree of powers of sparse random graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, c/n) and write it to a file.
    Sample {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Binary)]
        format: Format,
    },
    /// Maximum degree of G^r over all vertices.
    Maxdeg {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        r: usize,
        /// Also write the degree histogram of G^r to this CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Layer profile of one vertex, or the census over all vertices.
    Profile {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        r: usize,
        #[arg(long, conflicts_with = "census")]
        vertex: Option<u32>,
        /// Write the profile census of every vertex to this CSV.
        #[arg(long)]
        census: Option<PathBuf>,
    },
    /// Closed-form quantities.
    Analytic {
        #[command(subcommand)]
        quantity: Quantity,
    },
    /// Minimize Σ ℓ_i log(ℓ_i / ℓ_{i-1}) subject to Σ ℓ_i = d.
    Minimize {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: u64,
        /// Exhaustive search over integer compositions.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Run a Monte Carlo campaign from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Binary,
    Edges,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, required_unless_present = "input")]
    n: Option<u64>,
    #[arg(long, required_unless_present = "input")]
    c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read a graph written by `sample` instead of sampling one.
    #[arg(long, conflicts_with_all = ["n", "c"])]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Binary, requires = "input")]
    format: Format,
}

#[derive(Subcommand)]
enum Quantity {
    /// log_(k) x
    IterLog {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        x: f64,
    },
    /// log n / log_(r+1) n
    DStar {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        r: usize,
    },
    /// Product-form probability of a layer profile.
    LogU {
        #[arg(long)]
        c: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        layers: Vec<u64>,
    },
    /// Joint pmf of a layer profile.
    JointPmf {
        #[arg(long)]
        c: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        layers: Vec<u64>,
    },
    /// P[degree of a vertex in G^r = d].
    DegreePmf {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: u64,
    },
    /// Union-bound estimate of P[Δ(G^r) >= d].
    Tail {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: u64,
    },
    /// Gap of the iterated-log bound for a - b.
    LemmaDiff {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// Gap of the iterated-log bound for a / b.
    LemmaRatio {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn joined<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn prob_row(head: &str, p: LogProb) -> String {
    format!("{head},{},{}", sci(p.ln()), sci(p.value()))
}

/// Non-probability values: the log column is empty unless the value is positive.
fn value_row(head: &str, v: f64) -> String {
    let log = if v > 0.0 { sci(v.ln()) } else { String::new() };
    format!("{head},{log},{}", sci(v))
}

fn composition(layers: &[u64]) -> Result<LayerComposition> {
    LayerComposition::new(layers.to_vec())
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "c must be positive, got {c}"
        )))
    }
}

fn analytic(q: &Quantity) -> Result<Vec<String>> {
    Ok(match q {
        Quantity::IterLog { k, x } => vec![
            "quantity,k,x,log_value,value".into(),
            value_row(&format!("iter_log,{k},{x}"), iter_log(*k, *x)?),
        ],
        Quantity::DStar { n, r } => vec![
            "quantity,n,r,log_value,value".into(),
            value_row(&format!("d_star,{n},{r}"), d_star(*n, *r)?),
        ],
        Quantity::LogU { c, layers } => {
            check_c(*c)?;
            vec![
                "quantity,c,layers,log_value,value".into(),
                prob_row(
                    &format!("log_u,{c},{}", joined(layers)),
                    log_u(*c, &composition(layers)?),
                ),
            ]
        }
        Quantity::JointPmf { c, layers } => {
            check_c(*c)?;
            vec![
                "quantity,c,layers,log_value,value".into(),
                prob_row(
                    &format!("joint_pmf,{c},{}", joined(layers)),
                    joint_profile_pmf(*c, &composition(layers)?),
                ),
            ]
        }
        Quantity::DegreePmf { c, r, d } => {
            check_c(*c)?;
            vec![
                "quantity,c,r,d,log_value,value".into(),
                prob_row(
                    &format!("degree_pmf,{c},{r},{d}"),
                    power_degree_pmf(*c, *r, *d)?,
                ),
            ]
        }
        Quantity::Tail { n, c, r, d } => {
            check_c(*c)?;
            let t = union_bound_tail(*n, *c, *r, *d)?;
            vec![
                "quantity,n,c,r,d,horizon,log_value,value".into(),
                format!(
                    "per_vertex_tail,{n},{c},{r},{d},{},{},{}",
                    t.horizon,
                    sci(t.per_vertex_ln),
                    sci(t.per_vertex_ln.exp())
                ),
                format!(
                    "union_tail,{n},{c},{r},{d},{},{},{}",
                    t.horizon,
                    sci(t.union_ln),
                    sci(t.union_probability())
                ),
            ]
        }
        Quantity::LemmaDiff { s, a, b } => {
            let g = check_iter_log_diff(*s, *a, *b)?;
            vec![
                "quantity,s,a,b,lhs,rhs,gap".into(),
                format!(
                    "lemma_diff,{s},{a},{b},{},{},{}",
                    sci(g.lhs),
                    sci(g.rhs),
                    sci(g.gap)
                ),
            ]
        }
        Quantity::LemmaRatio { s, a, b } => {
            let g = check_iter_log_ratio(*s, *a, *b)?;
            vec![
                "quantity,s,a,b,lhs,rhs,gap".into(),
                format!(
                    "lemma_ratio,{s},{a},{b},{},{},{}",
                    sci(g.lhs),
                    sci(g.rhs),
                    sci(g.gap)
                ),
            ]
        }
    })
}

fn minimize_rows(r: usize, d: u64, brute: bool, tol: f64) -> Result<Vec<String>> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let header = "r,d,regime,lambda,p,ell,objective,gap".to_string();
    let outcome = if brute {
        MinimizeOutcome::SmallD(brute_force_min(r, d)?)
    } else {
        minimize(r, d, tol)?
    };
    let row = match &outcome {
        MinimizeOutcome::Continuous(s) => format!(
            "{r},{d},continuous,{},{},{},{},{}",
            sci(s.lambda),
            s.p.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(";"),
            s.ell.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(";"),
            sci(s.objective),
            gap_field(r, d, GapMethod::Continuous)
        ),
        MinimizeOutcome::SmallD(res) => {
            let ell = res.composition.values();
            let ratios: Vec<String> = (1..=ell.len())
                .map(|i| sci(ell[i - 1] as f64 / res.composition.parent(i) as f64))
                .collect();
            let regime = if brute {
                "brute-force"
            } else {
                outcome.regime()
            };
            format!(
                "{r},{d},{regime},,{},{},{},{}",
                ratios.join(";"),
                joined(ell),
                sci(res.value),
                gap_field(r, d, GapMethod::BruteForce)
            )
        }
    };
    Ok(vec![header, row])
}

fn gap_field(r: usize, d: u64, method: GapMethod) -> String {
    lower_bound_gap(r, d, method)
        .map(|g| sci(g.gap))
        .unwrap_or_default()
}

fn load_graph(path: &Path, format: Format) -> Result<SparseGraph> {
    match format {
        Format::Binary => SparseGraph::load_binary(path),
        Format::Edges => {
            let f = File::open(path).map_err(|e| Error::Io {
                path: path.into(),
                source: e,
            })?;
            SparseGraph::read_edge_list(BufReader::new(f), None)
        }
    }
}

fn source_graph(s: &SourceArgs) -> Result<SparseGraph> {
    match &s.input {
        Some(path) => load_graph(path, s.format),
        None => sample_gnp(&GraphParams::new(
            s.n.expect("required by clap"),
            s.c.expect("required by clap"),
            s.seed,
        )?),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<Vec<String>> {
    match cli.command {
        Command::Sample { graph, out, format } => {
            let g = sample_gnp(&GraphParams::new(graph.n, graph.c, graph.seed)?)?;
            match format {
                Format::Binary => g.save_binary(&out)?,
                Format::Edges => write_with(&out, |w| g.write_edge_list(w))?,
            }
            Ok(vec![
                "n,c,seed,edges".into(),
                format!("{},{},{},{}", graph.n, graph.c, graph.seed, g.edge_count()),
            ])
        }
        Command::Maxdeg {
            source,
            r,
            histogram,
        } => {
            let g = source_graph(&source)?;
            let res = max_power_degree(&g, r)?;
            if let Some(path) = histogram {
                write_with(&path, |w| res.write_histogram_csv(w))?;
            }
            let ds = d_star(g.n() as f64, r).ok();
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            Ok(vec![
                "n,r,max_degree,argmax_vertex,d_star,ratio".into(),
                format!(
                    "{},{r},{},{},{},{}",
                    g.n(),
                    res.max_degree,
                    res.argmax_vertex,
                    fmt(ds),
                    fmt(ds.map(|d| res.max_degree as f64 / d))
                ),
            ])
        }
        Command::Profile {
            source,
            r,
            vertex,
            census,
        } => {
            let g = source_graph(&source)?;
            let mut rows = Vec::new();
            if let Some(path) = census {
                let counts = profile_census(&g, r)?;
                write_with(&path, |w| write_census_csv(&counts, r, w))?;
                rows.push("profiles,roots".into());
                rows.push(format!("{},{}", counts.len(), counts.values().sum::<u64>()));
            } else {
                let v = vertex.unwrap_or(0);
                let p = layer_profile(&g, v, r)?;
                rows.push("vertex,r,layers,degree".into());
                rows.push(format!(
                    "{v},{r},{},{}",
                    joined(&p.layers),
                    p.power_degree()
                ));
            }
            Ok(rows)
        }
        Command::Analytic { quantity } => analytic(&quantity),
        Command::Minimize {
            r,
            d,
            brute_force,
            tol,
        } => minimize_rows(r, d, brute_force, tol),
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            run_experiment(&cfg)?;
            Ok(Vec::new())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(lines) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for l in lines {
                if writeln!(out, "{l}").is_err() {
                    return ExitCode::from(4);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
