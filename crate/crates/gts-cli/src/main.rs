//! `gts`: command-line access to generating-cycle search, averaging data
//! and direct simulation.

use std::error::Error;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gts_core::avg2::{siegel_check, Harmonics, KMode};
use gts_core::generate::{analyse_root, assess_root, default_mode, find_roots, RootOptions};
use gts_core::model::{extremals, CycleClass, Seed, SystemSpec};
use gts_core::monotone::class1_region;
use gts_core::orbit::{parametrize, period_quadrature, period_return_map};
use gts_core::presets;
use gts_core::spectral::TwoPeriodicField;
use gts_core::verify::{
    bracket_cycle, crossing_table, equilibria, integrate, portrait, repro_cycles, repro_roots, Direction, Launch, Section, Window,
};

type CliResult<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "gts", version, about = "Generating cycles and limit-cycle verification for perturbed quartic Hamiltonian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SystemArg {
    /// System as a JSON file, or a preset name: coeff0, coeff1, sa, cubic:<λ>.
    #[arg(long, default_value = "sa")]
    config: String,
}

#[derive(Args, Clone)]
struct SeedArg {
    /// Seed `k,l,b` of an unperturbed cycle.
    #[arg(long, allow_hyphen_values = true)]
    seed: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Nu {
    #[value(name = "0")]
    Slow,
    #[value(name = "1")]
    Fast,
    #[value(name = "auto")]
    Autonomous,
}

impl From<Nu> for KMode {
    fn from(n: Nu) -> Self {
        match n {
            Nu::Slow => KMode::Slow,
            Nu::Fast => KMode::Fast,
            Nu::Autonomous => KMode::Autonomous,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    R0,
    Phi0,
    Rr,
    Reps,
    GTilde,
    HTilde,
    FTilde,
    DeltaTilde,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Forward,
    Backward,
}

#[derive(Subcommand)]
enum Command {
    /// Period (quadrature and return map) and turning values of a cycle, as CSV.
    Periods {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        seed: SeedArg,
        /// Samples of the parametrized cycle used for the level-drift check.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
    },
    /// Class-1 monotonicity region for one γ, as CSV.
    Region {
        /// Coefficient γ of the unperturbed system, in (0, 1).
        #[arg(long)]
        gamma: f64,
    },
    /// Nondegeneracy constant and Siegel scan at a seed, as JSON.
    Kconst {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        seed: SeedArg,
        /// How K is formed: 0 slow time, 1 fast time, auto time-independent; defaults to the system.
        #[arg(long)]
        nu: Option<Nu>,
    },
    /// Roots of the generating equation, as JSON.
    Roots {
        #[command(flatten)]
        system: SystemArg,
        /// Restrict to one class: 0i, 0e, 1, 2.
        #[arg(long)]
        class: Option<String>,
        /// How K is formed: 0 slow time, 1 fast time, auto time-independent; defaults to the system.
        #[arg(long)]
        nu: Option<Nu>,
        /// Scan step in b before bisection.
        #[arg(long, default_value_t = 1e-3)]
        grid: f64,
    },
    /// Roots with the full admissibility battery, as CSV.
    Admissible {
        #[command(flatten)]
        system: SystemArg,
        /// How K is formed: 0 slow time, 1 fast time, auto time-independent; defaults to the system.
        #[arg(long)]
        nu: Option<Nu>,
    },
    /// One averaging field on the (t, φ) grid, as CSV with t rows and φ columns.
    DumpFields {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        seed: SeedArg,
        /// Field to write.
        #[arg(long, value_enum)]
        field: Field,
        /// How K is formed: 0 slow time, 1 fast time, auto time-independent; defaults to the system.
        #[arg(long)]
        nu: Option<Nu>,
        /// Samples per period of the generating cycle.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Trajectory of the perturbed system, as CSV.
    Simulate {
        #[command(flatten)]
        system: SystemArg,
        /// Perturbation size ε.
        #[arg(long)]
        eps: f64,
        /// Starting abscissa.
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Starting ordinate.
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        /// Starting time.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// Final time; may precede the starting time.
        #[arg(long, allow_hyphen_values = true)]
        t_end: f64,
    },
    /// Section crossing table, as CSV.
    Tables {
        #[command(flatten)]
        system: SystemArg,
        /// Perturbation size ε.
        #[arg(long)]
        eps: f64,
        /// Starting abscissa.
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Section ordinate: 0, 1 or -1.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        section: i8,
        /// Rows of the monotone run to report.
        #[arg(long, default_value_t = 8)]
        rows: usize,
        /// Time direction of the integration.
        #[arg(long, value_enum, default_value_t = Dir::Forward)]
        direction: Dir,
    },
    /// Limit-cycle bracket around a generating cycle, as JSON.
    Bracket {
        #[command(flatten)]
        system: SystemArg,
        #[command(flatten)]
        seed: SeedArg,
        /// Perturbation size ε.
        #[arg(long)]
        eps: f64,
    },
    /// Perturbed equilibria from the nine unperturbed ones, as CSV.
    Equilibria {
        #[command(flatten)]
        system: SystemArg,
        /// Perturbation size ε.
        #[arg(long)]
        eps: f64,
    },
    /// Phase portrait: writes `<out>.svg` and `<out>.csv`.
    Portrait {
        #[command(flatten)]
        system: SystemArg,
        /// Perturbation size ε.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Output path without extension.
        #[arg(long)]
        out: PathBuf,
        /// Trajectory launch `x,y,duration`; repeatable. Negative durations run backward.
        #[arg(long, allow_hyphen_values = true)]
        launch: Vec<String>,
        /// Overlay the generating cycles found by root search.
        #[arg(long)]
        cycles: bool,
        /// Window `xmin,xmax,ymin,ymax`.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
    /// Reproduction reports of the eleven-root example.
    Repro {
        #[command(subcommand)]
        which: Repro,
    },
}

#[derive(Subcommand)]
enum Repro {
    /// Roots, periods and K for the slow, fast and autonomous variants.
    Roots {
        /// Variants to run; all three by default.
        #[arg(long, value_delimiter = ',')]
        nu: Vec<Nu>,
        /// Print the table as CSV instead of the JSON report.
        #[arg(long)]
        csv: bool,
    },
    /// Limit-cycle brackets of the autonomous example at one ε.
    Cycles {
        /// Perturbation size ε.
        #[arg(long)]
        eps: f64,
        /// Print the table as CSV instead of the JSON report.
        #[arg(long)]
        csv: bool,
    },
}

fn load_system(arg: &SystemArg) -> CliResult<SystemSpec> {
    let p = Path::new(&arg.config);
    if p.is_file() {
        return Ok(SystemSpec::from_json(&std::fs::read_to_string(p)?)?);
    }
    presets::by_name(&arg.config).ok_or_else(|| format!("no file or preset named '{}'", arg.config).into())
}

fn parse_floats(s: &str, n: usize, what: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("{what} needs {n} comma-separated numbers, got '{s}'").into());
    }
    Ok(v)
}

fn parse_seed(arg: &SeedArg) -> CliResult<Seed> {
    let v = parse_floats(&arg.seed, 3, "--seed")?;
    Ok(Seed::new(v[0] as i8, v[1] as i8, v[2]))
}

fn mode_for(spec: &SystemSpec, nu: Option<Nu>) -> KMode {
    nu.map_or_else(|| default_mode(spec), KMode::from)
}

fn field_csv(f: &TwoPeriodicField) -> String {
    let mut out = String::from("t");
    for ip in 0..f.nphi {
        let _ = write!(out, ",{:.8}", f.phi_of(ip));
    }
    out.push('\n');
    for it in 0..f.nt {
        let _ = write!(out, "{:.8}", f.t_of(it));
        for v in f.row(it) {
            let _ = write!(out, ",{v:.12e}");
        }
        out.push('\n');
    }
    out
}

fn flatten_csv(value: &serde_json::Value) -> (String, String) {
    let mut head = Vec::new();
    let mut row = Vec::new();
    if let serde_json::Value::Object(map) = value {
        for (k, v) in map {
            head.push(k.clone());
            row.push(match v {
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            });
        }
    }
    (head.join(","), row.join(","))
}

fn run(cli: Cli, out: &mut impl std::io::Write) -> CliResult<()> {
    match cli.command {
        Command::Periods { system, seed, samples } => {
            let spec = load_system(&system)?;
            let seed = parse_seed(&seed)?;
            let cyc = parametrize(&seed, spec.gamma, samples)?;
            let ex = serde_json::to_value(extremals(&seed, spec.gamma)?)?;
            let (eh, er) = flatten_csv(&ex);
            writeln!(out, "k,l,b,class,omega_quadrature,omega_return_map,level_drift,{eh}")?;
            writeln!(out, 
                "{},{},{},{},{:.12},{:.12},{:.3e},{er}",
                seed.k,
                seed.l,
                seed.b,
                cyc.class.label(),
                period_quadrature(&seed, spec.gamma)?,
                period_return_map(&seed, spec.gamma)?,
                cyc.level_drift()
            )?;
        }
        Command::Region { gamma } => {
            let r = class1_region(gamma, 1e-3)?;
            let (h, row) = flatten_csv(&serde_json::to_value(r)?);
            writeln!(out, "{h}\n{row}")?;
        }
        Command::Kconst { system, seed, nu } => {
            let spec = load_system(&system)?;
            let seed = parse_seed(&seed)?;
            let mode = mode_for(&spec, nu);
            let an = analyse_root(&seed, &spec, mode, 1024, Harmonics::default())?;
            let nd = gts_core::avg2::k_from_secondary(&an.secondary, an.cycle.omega)?;
            let siegel = (mode == KMode::Slow).then(|| siegel_check(an.cycle.omega, spec.period, 200, 1.0));
            let report = serde_json::json!({
                "seed": seed,
                "omega": an.cycle.omega,
                "nondegeneracy": nd,
                "transport_residual": an.secondary.transport_residual,
                "siegel": siegel,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Roots { system, class, nu, grid } => {
            let spec = load_system(&system)?;
            let class_filter = match class.as_deref() {
                Some(c) => Some(CycleClass::parse(c).ok_or_else(|| format!("unknown class '{c}'"))?),
                None => None,
            };
            let opts = RootOptions { class_filter, grid, mode: nu.map(KMode::from), roots_only: true, ..Default::default() };
            writeln!(out, "{}", serde_json::to_string_pretty(&find_roots(&spec, &opts)?)?)?;
        }
        Command::Admissible { system, nu } => {
            let spec = load_system(&system)?;
            let opts = RootOptions { mode: nu.map(KMode::from), ..Default::default() };
            writeln!(out, "k,l,b,class,omega,rbar,K,stability,siegel_margin,admissible,reasons")?;
            for r in find_roots(&spec, &opts)? {
                writeln!(out, 
                    "{},{},{:.10},{},{:.8},{:.3e},{},{},{},{},\"{}\"",
                    r.seed.k,
                    r.seed.l,
                    r.seed.b,
                    r.class.label(),
                    r.omega_star,
                    r.rbar_at_root,
                    r.k_value.map_or(String::new(), |k| format!("{k:.6}")),
                    r.k.map_or(String::new(), |k| format!("{:?}", k.stability)),
                    r.siegel.map_or(String::new(), |s| format!("{:.3e}", s.worst_margin)),
                    r.admissible,
                    r.reasons.join("; ")
                )?;
            }
        }
        Command::DumpFields { system, seed, field, nu, samples } => {
            let spec = load_system(&system)?;
            let seed = parse_seed(&seed)?;
            let an = analyse_root(&seed, &spec, mode_for(&spec, nu), samples, Harmonics::default())?;
            let (pb, sec) = (&an.pullbacks, &an.secondary);
            let f = match field {
                Field::R0 => &pb.r0,
                Field::Phi0 => &pb.phi0,
                Field::Rr => &pb.rr,
                Field::Reps => &pb.reps,
                Field::GTilde => &sec.g_tilde,
                Field::HTilde => &sec.h_tilde,
                Field::FTilde => &sec.f_tilde,
                Field::DeltaTilde => &sec.delta_tilde,
            };
            write!(out, "{}", field_csv(f))?;
        }
        Command::Simulate { system, eps, x, y, t0, t_end } => {
            let spec = load_system(&system)?;
            let tr = integrate(&spec, eps, t0, x, y, t_end)?;
            writeln!(out, "t,x,y")?;
            for i in 0..tr.t.len() {
                writeln!(out, "{:.10},{:.12},{:.12}", tr.t[i], tr.x[i], tr.y[i])?;
            }
        }
        Command::Tables { system, eps, x, section, rows, direction } => {
            let spec = load_system(&system)?;
            let section = Section::from_l(section);
            let direction = match direction {
                Dir::Forward => Direction::Forward,
                Dir::Backward => Direction::Backward,
            };
            let t = crossing_table(&spec, eps, [x, section.y()], section, rows, direction)?;
            write!(out, "{}", t.to_csv())?;
        }
        Command::Bracket { system, seed, eps } => {
            let spec = load_system(&system)?;
            let seed = parse_seed(&seed)?;
            let root = assess_root(seed, &spec, &RootOptions::default(), (seed.b, seed.b))?;
            writeln!(out, "{}", serde_json::to_string_pretty(&bracket_cycle(&root, &spec, eps)?)?)?;
        }
        Command::Equilibria { system, eps } => {
            let spec = load_system(&system)?;
            writeln!(out, "seed_x,seed_y,x,y,error")?;
            for e in equilibria(&spec, eps)? {
                let (x, y) = e.point.map_or((String::new(), String::new()), |p| (format!("{:.12}", p[0]), format!("{:.12}", p[1])));
                writeln!(out, "{},{},{x},{y},{}", e.seed[0], e.seed[1], e.error.unwrap_or_default())?;
            }
        }
        Command::Portrait { system, eps, out, launch, cycles, window } => {
            let spec = load_system(&system)?;
            let launches = launch
                .iter()
                .map(|s| parse_floats(s, 3, "--launch").map(|v| Launch { x: v[0], y: v[1], duration: v[2] }))
                .collect::<CliResult<Vec<_>>>()?;
            let window = match window {
                Some(w) => {
                    let v = parse_floats(&w, 4, "--window")?;
                    Window { x_min: v[0], x_max: v[1], y_min: v[2], y_max: v[3] }
                }
                None => Window::default(),
            };
            let roots = if cycles {
                find_roots(&spec, &RootOptions { roots_only: true, ..Default::default() })?
            } else {
                Vec::new()
            };
            let p = portrait(&spec, eps, window, &launches, &roots)?;
            std::fs::write(out.with_extension("svg"), p.svg)?;
            std::fs::write(out.with_extension("csv"), p.csv)?;
        }
        Command::Repro { which: Repro::Roots { nu, csv } } => {
            let modes: Vec<KMode> = if nu.is_empty() {
                vec![KMode::Slow, KMode::Fast, KMode::Autonomous]
            } else {
                nu.into_iter().map(KMode::from).collect()
            };
            let report = repro_roots(&modes)?;
            if csv {
                write!(out, "{}", report.to_csv())?;
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            }
        }
        Command::Repro { which: Repro::Cycles { eps, csv } } => {
            let report = repro_cycles(eps)?;
            if csv {
                write!(out, "{}", report.to_csv())?;
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            }
        }
    }
    Ok(())
}

fn main() {
    let stdout = std::io::stdout();
    if let Err(e) = run(Cli::parse(), &mut stdout.lock()) {
        if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) {
            return;
        }
        eprintln!("gts: {e}");
        std::process::exit(1);
    }
}
