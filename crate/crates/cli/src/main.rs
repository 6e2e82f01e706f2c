//! Command-line front end: solve, evaluate, simulate and write CSV.

mod out;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use pvnash::boundary::{solve_m, BoundaryConfig, BoundaryCurve, FillRule, SlopeRule};
use pvnash::montecarlo::{nash_test, simulate, Arm, Deviation, SimConfig};
use pvnash::static_game::{
    a_inverse, static_equilibrium, static_region, static_value, StaticState,
};
use pvnash::valuefn::{ProbeBox, ValueConfig, ValueField};
use pvnash::{Error, ModelParams, Player, PsiEvaluator, SimplexPoint};

use out::{fmt_num, CsvOut};

/// Discretization constant of the equilibrium payoff allowance `C sqrt(dt)`.
const DEFAULT_C_DISC: f64 = 0.1;

#[derive(Parser)]
#[command(name = "pvnash", version, about = "Two-player singular investment game solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate psi or one of its derivatives.
    Psi(PsiArgs),
    /// One-shot game at a state, or a CSV grid of states.
    StaticGame(StaticArgs),
    /// Free boundary and option-value tables.
    #[command(subcommand)]
    Boundary(BoundaryCmd),
    /// Value functions and residual diagnostics.
    #[command(subcommand)]
    Value(ValueCmd),
    /// Monte Carlo estimate of the equilibrium payoffs.
    Simulate(SimArgs),
    /// Paired-difference test of unilateral deviations.
    NashCheck(NashArgs),
}

#[derive(Args, Clone)]
struct ConfigArg {
    /// JSON file with k, mu, sigma, beta, rho, c, theta.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Clone)]
struct BoundaryOpts {
    /// Steps on [0, theta/2] for the boundary anchors.
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u32).range(2..))]
    n: u32,
    /// Diagonal slope formula.
    #[arg(long, value_enum, default_value_t = SlopeArg::ChainRule)]
    slope_rule: SlopeArg,
    /// Fill rule between diagonal and face.
    #[arg(long, value_enum, default_value_t = FillArg::Blended)]
    fill: FillArg,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SlopeArg {
    ChainRule,
    Compact,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FillArg {
    Blended,
    OwnLevelLines,
}

impl BoundaryOpts {
    fn config(&self) -> BoundaryConfig {
        BoundaryConfig {
            n: self.n as usize,
            slope_rule: match self.slope_rule {
                SlopeArg::ChainRule => SlopeRule::ChainRule,
                SlopeArg::Compact => SlopeRule::Compact,
            },
            fill: match self.fill {
                FillArg::Blended => FillRule::Blended,
                FillArg::OwnLevelLines => FillRule::OwnLevelLines,
            },
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["config", "k"])))]
struct PsiArgs {
    #[arg(long)]
    x: f64,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=3))]
    order: u8,
    /// Parameter file; alternatively pass --k --mu --sigma --rho.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, requires_all = ["mu", "sigma", "rho"])]
    k: Option<f64>,
    #[arg(long, requires = "k")]
    mu: Option<f64>,
    #[arg(long, requires = "k")]
    sigma: Option<f64>,
    #[arg(long, requires = "k")]
    rho: Option<f64>,
    /// Relative tolerance of the quadrature refinement.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["x", "grid"])))]
struct StaticArgs {
    #[command(flatten)]
    cfg: ConfigArg,
    #[arg(long, requires_all = ["y1", "y2"])]
    x: Option<f64>,
    #[arg(long)]
    y1: Option<f64>,
    #[arg(long)]
    y2: Option<f64>,
    /// Points per axis of the CSV grid.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    grid: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum BoundaryCmd {
    /// Diagonal table and face anchors.
    Solve {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        opts: BoundaryOpts,
        #[arg(long, default_value = "boundary.csv")]
        out: PathBuf,
        /// Face anchors; defaults to `<out stem>_side.csv`.
        #[arg(long)]
        side_out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Option-value coefficient on the triangular grid.
    M {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        opts: BoundaryOpts,
        /// Steps on [0, theta/2] for the m1 grid.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..))]
        m_n: u32,
        #[arg(long, default_value = "m.csv")]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct FieldOpts {
    #[command(flatten)]
    boundary: BoundaryOpts,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..))]
    m_n: u32,
}

impl FieldOpts {
    fn config(&self) -> ValueConfig {
        ValueConfig {
            boundary: self.boundary.config(),
            m_n: self.m_n as usize,
        }
    }
}

#[derive(Subcommand)]
enum ValueCmd {
    /// Value, gradient and PDE residual on a probe grid.
    Grid {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        field: FieldOpts,
        #[arg(long, default_value_t = 40)]
        nx: usize,
        #[arg(long, default_value_t = 20)]
        ny: usize,
        #[arg(long, default_value = "v.csv")]
        out: PathBuf,
    },
    /// Residual summary per region.
    Check {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        field: FieldOpts,
        #[arg(long, default_value_t = 40)]
        nx: usize,
        #[arg(long, default_value_t = 60)]
        ny: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SimCommon {
    #[command(flatten)]
    cfg: ConfigArg,
    #[command(flatten)]
    field: FieldOpts,
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    #[arg(long)]
    y1: f64,
    #[arg(long)]
    y2: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Truncation time; defaults to the tail-bound rule.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    antithetic: bool,
    #[arg(long)]
    json: bool,
}

impl SimCommon {
    fn sim_config(&self, p: &ModelParams) -> Result<SimConfig, Error> {
        let mut c = SimConfig {
            dt: self.dt,
            horizon: self.horizon.unwrap_or_else(|| SimConfig::horizon_for(p)),
            n_paths: self.paths,
            seed: self.seed,
            antithetic: self.antithetic,
        };
        c.validate(p)?;
        c.horizon = c.horizon.max(c.dt);
        Ok(c)
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: SimCommon,
    /// Per-path summary CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NashArgs {
    #[command(flatten)]
    common: SimCommon,
    /// `shift:<v>`, `lump:<v>` or `never`; repeatable. Defaults to the standard family.
    #[arg(long = "deviation", allow_hyphen_values = true)]
    deviations: Vec<String>,
    /// Deviating player.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    player: u8,
    /// Constant C of the discretization allowance C sqrt(dt).
    #[arg(long, default_value_t = DEFAULT_C_DISC)]
    c_disc: f64,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Numeric(format!("csv error: {e}"))
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn load(path: &Path) -> Res<ModelParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    Ok(ModelParams::from_json(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Res<()> {
    match cli.cmd {
        Command::Psi(a) => cmd_psi(a),
        Command::StaticGame(a) => cmd_static(a),
        Command::Boundary(BoundaryCmd::Solve {
            cfg,
            opts,
            out,
            side_out,
            json,
        }) => cmd_boundary_solve(&cfg, &opts, &out, side_out, json),
        Command::Boundary(BoundaryCmd::M {
            cfg,
            opts,
            m_n,
            out,
            json,
        }) => cmd_boundary_m(&cfg, &opts, m_n as usize, &out, json),
        Command::Value(ValueCmd::Grid {
            cfg,
            field,
            nx,
            ny,
            out,
        }) => cmd_value_grid(&cfg, &field, nx, ny, &out),
        Command::Value(ValueCmd::Check {
            cfg,
            field,
            nx,
            ny,
            json,
        }) => cmd_value_check(&cfg, &field, nx, ny, json),
        Command::Simulate(a) => cmd_simulate(a),
        Command::NashCheck(a) => cmd_nash(a),
    }
}

fn cmd_psi(a: PsiArgs) -> Res<()> {
    let p = match (&a.config, a.k) {
        (Some(path), _) => load(path)?,
        (None, Some(k)) => {
            // psi depends on k, mu, sigma, rho only.
            let r = ModelParams::reference();
            ModelParams::new(
                k,
                a.mu.unwrap_or(r.mu),
                a.sigma.unwrap_or(r.sigma),
                r.beta,
                a.rho.unwrap_or(r.rho),
                r.c,
                r.theta,
            )?
        }
        (None, None) => unreachable!("clap enforces a parameter source"),
    };
    if !(a.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let ev = PsiEvaluator::with_tolerance(p, a.tol);
    let v = ev.eval(a.x)?;
    let value = v.deriv(a.order as usize);
    if a.json {
        println!(
            "{}",
            json!({"x": a.x, "order": a.order, "value": value, "quadrature_error": v.rel_err})
        );
    } else {
        println!("x = {}", fmt_num(a.x));
        println!("psi^({}) = {}", a.order, fmt_num(value));
        println!("estimated relative quadrature error = {:.3e}", v.rel_err);
    }
    Ok(())
}

fn cmd_static(a: StaticArgs) -> Res<()> {
    let p = load(&a.cfg.config)?;
    if let Some(n) = a.grid {
        let n = n as usize;
        let out = a.out.unwrap_or_else(|| PathBuf::from("static.csv"));
        let mut w = CsvOut::create(&out, &p, &["x", "y1", "y2", "region", "i1", "i2", "v1", "v2"])?;
        // Prices spanning all four cases: A from -theta/4 to 5 theta/4.
        let (xa, xb) = (a_inverse(&p, -0.25 * p.theta), a_inverse(&p, 1.25 * p.theta));
        for ix in 0..n {
            let x = xa + (xb - xa) * ix as f64 / (n - 1) as f64;
            for i in 0..n {
                for j in 0..n - i {
                    let h = p.theta / (n - 1) as f64;
                    let s = StaticState::new(x, i as f64 * h, j as f64 * h);
                    let inst = static_equilibrium(&p, &s);
                    let r = static_region(&p, &s);
                    w.row(&[
                        fmt_num(x),
                        fmt_num(s.y.y1),
                        fmt_num(s.y.y2),
                        r.label.to_string(),
                        fmt_num(inst.i1),
                        fmt_num(inst.i2),
                        fmt_num(static_value(&p, &s, Player::One)),
                        fmt_num(static_value(&p, &s, Player::Two)),
                    ])?;
                }
            }
        }
        w.finish()?;
        eprintln!("wrote {}", out.display());
        return Ok(());
    }
    let (x, y1, y2) = (a.x.unwrap(), a.y1.unwrap(), a.y2.unwrap());
    let y = SimplexPoint::checked(y1, y2, p.theta)?;
    let s = StaticState { x, y };
    let r = static_region(&p, &s);
    let inst = static_equilibrium(&p, &s);
    let (v1, v2) = (static_value(&p, &s, Player::One), static_value(&p, &s, Player::Two));
    if a.json {
        println!(
            "{}",
            json!({
                "x": x, "y1": y1, "y2": y2,
                "region": r.label.to_string(),
                "player1": r.player1.as_str(), "player2": r.player2.as_str(),
                "i1": inst.i1, "i2": inst.i2, "v1": v1, "v2": v2,
            })
        );
    } else {
        println!(
            "region {} (player 1 {}, player 2 {})",
            r.label,
            r.player1.as_str(),
            r.player2.as_str()
        );
        println!("equilibrium installation i1 = {}, i2 = {}", fmt_num(inst.i1), fmt_num(inst.i2));
        println!("values v1 = {}, v2 = {}", fmt_num(v1), fmt_num(v2));
    }
    Ok(())
}

fn side_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("boundary");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_side.{ext}"))
}

fn cmd_boundary_solve(
    cfg: &ConfigArg,
    opts: &BoundaryOpts,
    out: &Path,
    side_out: Option<PathBuf>,
    json: bool,
) -> Res<()> {
    let p = load(&cfg.config)?;
    let psi = PsiEvaluator::new(p);
    let curve = BoundaryCurve::solve(&psi, &opts.config())?;
    let d = curve.diagonal_table();
    let mut w = CsvOut::create(out, &p, &["s", "F", "Ftilde"])?;
    for k in 0..d.s.len() {
        w.row(&[fmt_num(d.s[k]), fmt_num(d.f[k]), fmt_num(d.ftilde[k])])?;
    }
    w.finish()?;
    let side = side_out.unwrap_or_else(|| side_path(out));
    let mut w = CsvOut::create(&side, &p, &["y1", "y2", "F", "Ftilde", "slope", "residual"])?;
    for r in curve.side_table() {
        w.row(&[
            fmt_num(r.y.y1),
            fmt_num(r.y.y2),
            fmt_num(r.f),
            fmt_num(r.ftilde),
            fmt_num(r.slope),
            fmt_num(r.residual),
        ])?;
    }
    w.finish()?;
    let rep = curve.admissibility(100);
    let half = 0.5 * p.theta;
    if json {
        println!(
            "{}",
            json!({
                "f_origin": curve.diag(0.0),
                "f_c": curve.diag(half),
                "face_at_c": curve.face(half),
                "gap_at_c": rep.gap_at_c,
                "admissible": rep.admissible(),
                "admissibility": rep,
                "out": out, "side_out": side,
            })
        );
    } else {
        println!("F(0,0) = {}", fmt_num(curve.diag(0.0)));
        println!("F(C) = {}", fmt_num(curve.diag(half)));
        println!("face value at C = {} (gap {})", fmt_num(curve.face(half)), fmt_num(rep.gap_at_c));
        println!(
            "admissibility probe: {} points, {} own / {} other violations",
            rep.probe_points, rep.own_violations, rep.other_violations
        );
        eprintln!("wrote {} and {}", out.display(), side.display());
    }
    Ok(())
}

fn cmd_boundary_m(cfg: &ConfigArg, opts: &BoundaryOpts, m_n: usize, out: &Path, json: bool) -> Res<()> {
    let p = load(&cfg.config)?;
    let psi = PsiEvaluator::new(p);
    let curve = BoundaryCurve::solve(&psi, &opts.config())?;
    let g = solve_m(&psi, &curve, m_n)?;
    let mut w = CsvOut::create(out, &p, &["y1", "y2", "m1", "dm1dy1", "dm1dy2"])?;
    let h = g.h();
    for i in 0..=2 * m_n {
        for j in 0..=2 * m_n - i {
            let (d1, d2) = g.node_gradient(i, j, j >= i);
            w.row(&[
                fmt_num(i as f64 * h),
                fmt_num(j as f64 * h),
                fmt_num(g.get(i, j)),
                fmt_num(d1),
                fmt_num(d2),
            ])?;
        }
    }
    w.finish()?;
    if json {
        println!("{}", json!({"m_origin": g.get(0, 0), "diagnostics": g.diagnostics, "out": out}));
    } else {
        println!("m1(0,0) = {}", fmt_num(g.get(0, 0)));
        println!("diagonal consistency jump = {:.3e}", g.diagnostics.diagonal_jump);
        println!("min m1 for y2 >= theta/2 = {}", fmt_num(g.diagnostics.min_m_upper_band));
        eprintln!("wrote {}", out.display());
    }
    Ok(())
}

fn field(cfg: &ConfigArg, opts: &FieldOpts) -> Res<(ModelParams, ValueField)> {
    let p = load(&cfg.config)?;
    let f = ValueField::solve(p, &opts.config())?;
    Ok((p, f))
}

fn check_probe(nx: usize, ny: usize) -> Res<()> {
    if nx < 1 || ny < 1 {
        return Err(Failure::Usage("--nx and --ny must be at least 1".into()));
    }
    Ok(())
}

fn cmd_value_grid(cfg: &ConfigArg, opts: &FieldOpts, nx: usize, ny: usize, out: &Path) -> Res<()> {
    check_probe(nx, ny)?;
    let (p, f) = field(cfg, opts)?;
    let rows = f.grid(&f.default_probe_box(nx, ny))?;
    let mut w = CsvOut::create(
        out,
        &p,
        &["x", "y1", "y2", "region", "V1", "V2", "dV1dy1", "dV1dy2", "pde_residual"],
    )?;
    for r in rows {
        w.row(&[
            fmt_num(r.x),
            fmt_num(r.y1),
            fmt_num(r.y2),
            r.region.to_string(),
            fmt_num(r.v1),
            fmt_num(r.v2),
            fmt_num(r.dv1dy1),
            fmt_num(r.dv1dy2),
            fmt_num(r.pde_residual),
        ])?;
    }
    w.finish()?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_value_check(cfg: &ConfigArg, opts: &FieldOpts, nx: usize, ny: usize, json: bool) -> Res<()> {
    check_probe(nx, ny)?;
    let (_, f) = field(cfg, opts)?;
    let probe: ProbeBox = f.default_probe_box(nx, ny);
    let rep = f.probe(&probe)?;
    let fits = f.node_smooth_fit_residuals()?;
    let diag = f.diagonal_condition_residual()?;
    if json {
        println!(
            "{}",
            json!({
                "probe": probe, "report": rep,
                "node_smooth_fit_own": fits.0, "node_smooth_fit_other": fits.1,
                "diagonal_condition": diag,
            })
        );
        return Ok(());
    }
    println!("{:<6} {:>7} {:>12} {:>12} {:>14} {:>12}", "region", "states", "pde_max", "pde_mean", "dV1dy1-c max", "|dV1dy2| max");
    for r in &rep.regions {
        let opt = |v: f64| if v.is_finite() { format!("{v:.3e}") } else { "-".into() };
        println!(
            "{:<6} {:>7} {:>12} {:>12} {:>14} {:>12}",
            r.label.to_string(),
            r.states,
            if r.pde_count > 0 { format!("{:.3e}", r.pde_max) } else { "-".into() },
            opt(r.pde_mean()),
            opt(r.dy1_excess_max),
            format!("{:.3e}", r.dy2_abs_max),
        );
    }
    println!();
    println!("smooth fit at nodes: own {:.3e}, other {:.3e}", fits.0, fits.1);
    println!("diagonal condition at C: {:.3e}", diag);
    println!("growth constant K = {:.4}", rep.growth_k);
    println!("Lipschitz constant of dV1/dx: L = {:.4}", rep.lipschitz_l);
    println!("states with m1 < 0: {} (first at {:?})", rep.negative_m_states, rep.first_negative_m);
    println!("states with m1 >= 0 and V1 < R1: {}", rep.option_violations);
    println!(
        "joint waiting states with dV1/dy1 > c: {} (first at {:?})",
        rep.inequality_violations, rep.first_inequality_violation
    );
    let j = rep.interface;
    println!(
        "interface jumps, own boundary: V {:.3e}, dV/dx {:.3e}, d2V/dx2 {:.3e}",
        j.own.value, j.own.dx, j.own.dxx
    );
    println!(
        "interface jumps, other boundary: V {:.3e}, dV/dx {:.3e}, d2V/dx2 {:.3e}",
        j.other.value, j.other.dx, j.other.dxx
    );
    Ok(())
}

fn sim_setup(c: &SimCommon) -> Res<(ModelParams, ValueField, SimConfig, SimplexPoint)> {
    let p = load(&c.cfg.config)?;
    let cfg = c.sim_config(&p)?;
    let y = SimplexPoint::checked(c.y1, c.y2, p.theta)?;
    let f = ValueField::solve(p, &c.field.config())?;
    Ok((p, f, cfg, y))
}

fn cmd_simulate(a: SimArgs) -> Res<()> {
    let c = &a.common;
    let (p, f, cfg, y) = sim_setup(c)?;
    let batch = simulate(f.curve(), c.x0, y, &[Arm::EQUILIBRIUM], &cfg)?;
    let e = [batch.estimate(0, 0), batch.estimate(0, 1)];
    let v = [f.value(c.x0, y, Player::One)?, f.value(c.x0, y, Player::Two)?];
    let (excess, simplex, monotone, max_inc) = batch.invariants(0);
    if let Some(out) = &a.out {
        let mut w = CsvOut::create(
            out,
            &p,
            &["path", "payoff1", "payoff2", "y1_0", "y2_0", "y1_T", "y2_T", "max_increment"],
        )?;
        for (k, s) in batch.paths[0].iter().enumerate() {
            w.row(&[
                k.to_string(),
                fmt_num(s.payoff[0]),
                fmt_num(s.payoff[1]),
                fmt_num(s.initial[0]),
                fmt_num(s.initial[1]),
                fmt_num(s.terminal[0]),
                fmt_num(s.terminal[1]),
                fmt_num(s.max_increment),
            ])?;
        }
        w.finish()?;
        eprintln!("wrote {}", out.display());
    }
    if c.json {
        println!(
            "{}",
            json!({
                "config": cfg, "x0": c.x0, "y0": y,
                "payoff": e, "value": v,
                "max_boundary_excess": excess, "max_simplex_excess": simplex,
                "monotone": monotone, "max_post_zero_increment": max_inc,
            })
        );
    } else {
        println!(
            "dt = {}, horizon = {:.4}, paths = {}, seed = {}",
            cfg.dt, cfg.horizon, cfg.n_paths, cfg.seed
        );
        for i in 0..2 {
            println!(
                "player {}: MC {} +- {} (value {}, truncation bound {:.2e})",
                i + 1,
                fmt_num(e[i].mean),
                fmt_num(e[i].std_error),
                fmt_num(v[i]),
                e[i].truncation_bias_bound
            );
        }
        println!(
            "invariants: monotone {monotone}, max Y1+Y2-theta {simplex:.3e}, max X-F {excess:.3e}, max post-zero increment {max_inc:.3e}"
        );
    }
    Ok(())
}

fn cmd_nash(a: NashArgs) -> Res<()> {
    let devs: Vec<Deviation> = if a.deviations.is_empty() {
        Deviation::standard_family()
    } else {
        a.deviations
            .iter()
            .map(|s| s.parse::<Deviation>())
            .collect::<Result<_, _>>()?
    };
    let c = &a.common;
    let (_, f, cfg, y) = sim_setup(c)?;
    let player = Player::from_index(a.player).expect("clap range");
    let rep = nash_test(&f, c.x0, y, player, &devs, &cfg, a.c_disc)?;
    if c.json {
        println!("{}", json!({"config": cfg, "report": rep, "passed": rep.passed()}));
        return Ok(());
    }
    println!(
        "player {} at x0 = {}, y0 = ({}, {}), dt = {}, paths = {}",
        rep.player, c.x0, y.y1, y.y2, cfg.dt, cfg.n_paths
    );
    println!(
        "equilibrium MC {} +- {}, value {}, allowance {:.3e}: {}",
        fmt_num(rep.equilibrium.mean),
        fmt_num(rep.equilibrium.std_error),
        fmt_num(rep.value),
        rep.allowance,
        if rep.value_matches { "match" } else { "MISMATCH" }
    );
    println!("{:<12} {:>14} {:>14} {:>12} {:>8}", "deviation", "payoff", "difference", "std_error", "no_gain");
    for r in &rep.arms {
        println!(
            "{:<12} {:>14.6e} {:>14.6e} {:>12.3e} {:>8}",
            r.deviation.to_string(),
            r.payoff.mean,
            r.difference.mean,
            r.difference.std_error,
            r.no_gain
        );
    }
    Ok(())
}
