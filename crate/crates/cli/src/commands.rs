//! One function per subcommand. Each reads the keys it needs, falling back to
//! the defaults documented in the README, and returns an [`Outcome`].

use crate::config::{ConfigSource, ConstructionName, ExperimentConfig, MethodName, PathSpec, PotentialSpec};
use crate::error::CliError;
use crate::output::{Cell, Outcome, Summary, Table};
use fraclat::fractional::{
    assemble_nd, frac_power, k_definitional, k_series, measure_collar, outside_collar, symbol_grid, thresholds,
    torus_grid, walk_deficit, BoundaryCorrection, Construction, FracOrder, PowerMethod, RingKernel, SectionWindow,
    WalkMethod, COLLAR_TOL,
};
use fraclat::heat::{
    dirichlet_kernel, full_kernel, geometric_ratio, images_bound_check, KernelTable,
};
use fraclat::lattice::linalg::{hs_norm, numerical_rank, op_norm, singular_values};
use fraclat::lattice::{laplacian, BoxKind, EigenSystem, LatticeBox, OperatorMatrix, PowerFloor, WeightVector};
use fraclat::mourre::{
    build_conjugate, check_potential, circulant_commutator, dyadic_c01_diagnostic, dyadic_ladder_converges,
    form_commutator, mourre_report, mourre_rung, multiplier_check, Flavor, MultiplierTable, PotentialFamily,
    PotentialGrid, SpectralWindow,
};
use fraclat::spectral::{
    ballistic_diagnostic, eig_window_count, eta_decade, exponent_path, lap_probe, propagation_integral, r_scan,
    weyl_compare,
};
use num_complex::Complex64;

/// Largest tail increment accepted by `propagate`.
pub const PROPAGATION_TAIL_TOL: f64 = 1e-6;
/// Singular-value tolerance used for ranks.
pub const RANK_TOL: f64 = 1e-10;
/// Default size of leading blocks written out in matrix tables.
const DEFAULT_BLOCK: usize = 32;

/// Every subcommand except `suite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    BoxInfo,
    Thresholds,
    Symbol,
    FracPower,
    Kcorr,
    DhCheck,
    Heat,
    ImagesCheck,
    Conjugate,
    Commutator,
    MultiplierCheck,
    Mourre,
    PotentialCheck,
    Lap,
    Propagate,
    Eigcount,
    Weyl,
    Ballistic,
    RScan,
}

impl Operation {
    pub const ALL: [Operation; 19] = [
        Operation::BoxInfo,
        Operation::Thresholds,
        Operation::Symbol,
        Operation::FracPower,
        Operation::Kcorr,
        Operation::DhCheck,
        Operation::Heat,
        Operation::ImagesCheck,
        Operation::Conjugate,
        Operation::Commutator,
        Operation::MultiplierCheck,
        Operation::Mourre,
        Operation::PotentialCheck,
        Operation::Lap,
        Operation::Propagate,
        Operation::Eigcount,
        Operation::Weyl,
        Operation::Ballistic,
        Operation::RScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::BoxInfo => "box-info",
            Operation::Thresholds => "thresholds",
            Operation::Symbol => "symbol",
            Operation::FracPower => "frac-power",
            Operation::Kcorr => "kcorr",
            Operation::DhCheck => "dh-check",
            Operation::Heat => "heat",
            Operation::ImagesCheck => "images-check",
            Operation::Conjugate => "conjugate",
            Operation::Commutator => "commutator",
            Operation::MultiplierCheck => "multiplier-check",
            Operation::Mourre => "mourre",
            Operation::PotentialCheck => "potential-check",
            Operation::Lap => "lap",
            Operation::Propagate => "propagate",
            Operation::Eigcount => "eigcount",
            Operation::Weyl => "weyl",
            Operation::Ballistic => "ballistic",
            Operation::RScan => "r-scan",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }
}

/// Typed access to the configuration with per-command defaults.
struct Params<'a> {
    cfg: &'a ExperimentConfig,
    src: &'a ConfigSource,
}

impl Params<'_> {
    fn kind(&self, default: BoxKind) -> BoxKind {
        self.cfg.kind.map_or(default, BoxKind::from)
    }

    fn method(&self) -> PowerMethod {
        self.cfg.method.unwrap_or(MethodName::Spectral).into()
    }

    fn lattice(&self, default_extents: &[usize], default_kind: BoxKind) -> Result<LatticeBox, CliError> {
        let extents = self.cfg.extents.clone().unwrap_or_else(|| default_extents.to_vec());
        Ok(LatticeBox::new(&extents, self.kind(default_kind))?)
    }

    /// Order with one component per axis; a single component is broadcast.
    fn order(&self, default: &[f64], dims: usize) -> Result<FracOrder, CliError> {
        let r = self.cfg.r.clone().unwrap_or_else(|| default.to_vec());
        let r = if r.len() == 1 { vec![r[0]; dims] } else { r };
        if r.len() != dims {
            return Err(self.src.error("r", format!("{} components for a {dims}-dimensional box", r.len())));
        }
        Ok(FracOrder::new(&r)?)
    }

    fn free_order(&self, default: &[f64]) -> Result<FracOrder, CliError> {
        let r = self.cfg.r.clone().unwrap_or_else(|| default.to_vec());
        Ok(FracOrder::new(&r)?)
    }

    fn scalar_r(&self, default: f64) -> Result<f64, CliError> {
        match self.cfg.r.as_deref() {
            None => Ok(default),
            Some([r]) => Ok(*r),
            Some(v) => Err(self.src.error("r", format!("this command takes a single exponent, got {}", v.len()))),
        }
    }

    fn one_dimensional(&self, default_len: usize) -> Result<usize, CliError> {
        match self.cfg.extents.as_deref() {
            None => Ok(default_len),
            Some([l]) => Ok(*l),
            Some(v) => Err(self.src.error("extents", format!("this command runs in one dimension, got {}", v.len()))),
        }
    }

    fn window(&self, default: [f64; 2], order: &FracOrder) -> Result<SpectralWindow, CliError> {
        let w = self.cfg.window.clone().unwrap_or_else(|| default.to_vec());
        Ok(SpectralWindow::new(w[0], w[1], &thresholds(order))?)
    }

    fn ladder(&self, default: &[usize]) -> Vec<usize> {
        self.cfg.ladder.clone().unwrap_or_else(|| default.to_vec())
    }

    fn list(&self, value: &Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
        value.clone().unwrap_or_else(|| default.to_vec())
    }

    fn potential(&self, default: Option<PotentialSpec>) -> Option<PotentialFamily> {
        self.cfg.potential.or(default).map(PotentialFamily::from)
    }

    fn block(&self, size: usize) -> usize {
        self.cfg.block.unwrap_or(DEFAULT_BLOCK).min(size)
    }
}

/// `Delta^r (+ W)` on a box; the plain Laplacian is used exactly when `r = 1`.
pub fn hamiltonian(
    order: &FracOrder,
    lattice: &LatticeBox,
    method: PowerMethod,
    potential: Option<PotentialFamily>,
) -> fraclat::Result<OperatorMatrix> {
    let h = if order.exponents().iter().all(|&r| r == 1.0) {
        laplacian(lattice)
    } else {
        assemble_nd(order, lattice, method)?
    };
    match potential {
        Some(family) => h.try_add(&PotentialGrid::new(lattice, family).operator()),
        None => Ok(h),
    }
}

/// `[H, iA]`: the circulant formula on periodic boxes, the form commutator on half boxes.
pub fn commutator_of(
    order: &FracOrder,
    lattice: &LatticeBox,
    h: &OperatorMatrix,
    potential: Option<PotentialFamily>,
) -> fraclat::Result<OperatorMatrix> {
    let signs = order.signs();
    match lattice.kind() {
        BoxKind::Half => {
            let a = build_conjugate(lattice, &signs, Flavor::HalfLattice)?;
            form_commutator(h, a.op(), 1)
        }
        BoxKind::Periodic => {
            let kernels = order
                .exponents()
                .iter()
                .zip(lattice.extents())
                .map(|(&r, &len)| RingKernel::power(len, r))
                .collect::<fraclat::Result<Vec<_>>>()?;
            let free = circulant_commutator(lattice, &kernels, &signs)?;
            match potential {
                Some(family) => {
                    let a = build_conjugate(lattice, &signs, Flavor::Bilateral)?;
                    free.try_add(&form_commutator(&PotentialGrid::new(lattice, family).operator(), a.op(), 1)?)
                }
                None => Ok(free),
            }
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn coords(lattice: &LatticeBox, site: usize) -> String {
    (0..lattice.dims()).map(|a| lattice.coordinate(site, a).to_string()).collect::<Vec<_>>().join(";")
}

fn matrix_table(name: &str, op: &OperatorMatrix, block: usize) -> Table {
    let complex = !op.is_real();
    let mut t = if complex {
        Table::new(name, &[("row", "site"), ("col", "site"), ("re", "1"), ("im", "1")])
    } else {
        Table::new(name, &[("row", "site"), ("col", "site"), ("value", "1")])
    };
    for i in 0..block {
        for j in 0..block {
            let z = op.get(i, j);
            if complex {
                t.push(vec![i.into(), j.into(), z.re.into(), z.im.into()]);
            } else {
                t.push(vec![i.into(), j.into(), z.re.into()]);
            }
        }
    }
    t
}

pub fn run_operation(op: Operation, cfg: &ExperimentConfig, src: &ConfigSource) -> Result<Outcome, CliError> {
    let p = Params { cfg, src };
    let out = match op {
        Operation::BoxInfo => box_info(&p),
        Operation::Thresholds => thresholds_cmd(&p),
        Operation::Symbol => symbol_cmd(&p),
        Operation::FracPower => frac_power_cmd(&p),
        Operation::Kcorr => kcorr(&p),
        Operation::DhCheck => dh_check(&p),
        Operation::Heat => heat(&p),
        Operation::ImagesCheck => images_check(&p),
        Operation::Conjugate => conjugate(&p),
        Operation::Commutator => commutator(&p),
        Operation::MultiplierCheck => multiplier(&p),
        Operation::Mourre => mourre(&p),
        Operation::PotentialCheck => potential_check(&p),
        Operation::Lap => lap(&p),
        Operation::Propagate => propagate(&p),
        Operation::Eigcount => eigcount(&p),
        Operation::Weyl => weyl(&p),
        Operation::Ballistic => ballistic(&p),
        Operation::RScan => rscan(&p),
    };
    out.map_err(|e| e.named(op.name()))
}

fn box_info(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[16], BoxKind::Half)?;
    let mut sites = Table::new("sites", &[("site", "index"), ("coords", "lattice"), ("boundary_distance", "sites")]);
    let mut boundary = 0;
    for s in 0..lat.size() {
        let d = lat.boundary_distance(s);
        if d == 0 {
            boundary += 1;
        }
        sites.push(vec![s.into(), coords(&lat, s).into(), d.into()]);
    }
    let eig = EigenSystem::new(&laplacian(&lat))?;
    let mut summary = Summary::default();
    summary
        .int("dims", lat.dims())
        .ints("extents", lat.extents())
        .text("kind", lat.kind().name())
        .int("size", lat.size())
        .ints("strides", &(0..lat.dims()).map(|a| lat.stride(a)).collect::<Vec<_>>())
        .int("boundary_sites", boundary)
        .num("laplacian_min", eig.values()[0])
        .num("laplacian_max", eig.values()[eig.len() - 1]);
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![sites],
        files: vec![],
    })
}

fn thresholds_cmd(p: &Params) -> Result<Outcome, CliError> {
    let order = p.free_order(&[1.0])?;
    let set = thresholds(&order);
    let mut t = Table::new("thresholds", &[("index", "1"), ("threshold", "energy")]);
    for (i, &v) in set.values.iter().enumerate() {
        t.push(vec![i.into(), v.into()]);
    }
    let mut summary = Summary::default();
    summary
        .text("r", join(order.exponents()))
        .text("thresholds", join(&set.values))
        .int("count", set.values.len())
        .num("lambda_max", set.lambda_max)
        .num("lambda_min", order.lambda_min());
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![t],
        files: vec![],
    })
}

fn symbol_cmd(p: &Params) -> Result<Outcome, CliError> {
    let order = p.free_order(&[1.0])?;
    let d = order.dims();
    let n = match p.cfg.extents.as_deref() {
        None => vec![64; d],
        Some([l]) => vec![*l; d],
        Some(v) if v.len() == d => v.to_vec(),
        Some(v) => return Err(p.src.error("extents", format!("{} grid sizes for {d} momenta", v.len()))),
    };
    let axes: Vec<Vec<f64>> = n.iter().map(|&l| torus_grid(l)).collect();
    let grid = symbol_grid(&order, &axes, true)?;
    let mut cols: Vec<(String, &str)> = (0..d).map(|j| (format!("k{j}"), "rad")).collect();
    cols.push(("h".into(), "energy"));
    let cols: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), *b)).collect();
    let mut t = Table::new("symbol", &cols);
    for (flat, &v) in grid.values.iter().enumerate() {
        let mut rest = flat;
        let mut k = vec![0.0; d];
        for j in (0..d).rev() {
            k[j] = axes[j][rest % n[j]];
            rest /= n[j];
        }
        let mut row: Vec<Cell> = k.into_iter().map(Cell::from).collect();
        row.push(v.into());
        t.push(row);
    }
    let mut summary = Summary::default();
    summary
        .text("r", join(order.exponents()))
        .num("grid_max", grid.grid_max)
        .num("lambda_max", grid.lambda_max)
        .ints("grid", &n);
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![t],
        files: vec![],
    })
}

fn frac_power_cmd(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[64], BoxKind::Half)?;
    let order = p.order(&[0.5], lat.dims())?;
    let method = p.method();
    let (op, regularized) = if lat.dims() == 1 {
        let fp = frac_power(&lat, order.exponents()[0], method, PowerFloor::default())?;
        (fp.op, fp.regularized)
    } else {
        (assemble_nd(&order, &lat, method)?, 0)
    };
    let eig = EigenSystem::new(&op)?;
    let mut summary = Summary::default();
    summary
        .text("r", join(order.exponents()))
        .text("method", format!("{method:?}").to_lowercase())
        .int("size", op.dim())
        .int("regularized", regularized)
        .num("max_abs", op.max_abs())
        .num("hermitian_residual", op.entries().hermitian_residual())
        .num("min_eigenvalue", eig.values()[0])
        .num("max_eigenvalue", eig.values()[eig.len() - 1])
        .num("lambda_max", order.lambda_max());
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![matrix_table("matrix", &op, p.block(op.dim()))],
        files: vec![],
    })
}

fn kcorr(p: &Params) -> Result<Outcome, CliError> {
    let r = p.scalar_r(0.5)?;
    let len = p.one_dimensional(64)?;
    let construction = p.cfg.construction.unwrap_or(ConstructionName::Series);
    let k: BoundaryCorrection = match construction {
        ConstructionName::Series => {
            let h_max = p.cfg.h_max.unwrap_or((len / 4).min(60));
            k_series(&LatticeBox::line(len, BoxKind::Half)?, r, h_max)?
        }
        ConstructionName::Definitional => {
            let ring = p.cfg.ring.unwrap_or(16 * len);
            k_definitional(r, SectionWindow::new(len, ring)?)?
        }
    };
    let sv = singular_values(k.matrix.entries());
    let mut summary = Summary::default();
    summary
        .num("r", r)
        .int("size", k.matrix.dim())
        .int("rank", numerical_rank(&sv, RANK_TOL))
        .num("norm", sv.first().copied().unwrap_or(0.0))
        .num("hs_norm", hs_norm(k.matrix.entries()))
        .int("collar", measure_collar(&k.matrix, COLLAR_TOL))
        .num("outside_collar", outside_collar(&k.matrix, k.collar_width))
        .nums("leading_singular_values", &sv.iter().copied().take(8).collect::<Vec<_>>());
    match &k.construction {
        Construction::Series { h_max, tail_bound, .. } => {
            summary.text("construction", "series").int("h_max", *h_max).num("tail_bound", *tail_bound);
        }
        Construction::Section { window, regularized } => {
            summary
                .text("construction", "definitional")
                .int("half_len", window.half_len)
                .int("ring_len", window.ring_len)
                .int("regularized", *regularized);
        }
    }
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![matrix_table("kcorr", &k.matrix, k.matrix.dim().min(p.cfg.block.unwrap_or(64)))],
        files: vec![],
    })
}

fn dh_check(p: &Params) -> Result<Outcome, CliError> {
    let len = p.one_dimensional(64)?;
    let h_max = p.cfg.h_max.unwrap_or(10);
    let mut t = Table::new(
        "dh",
        &[("h", "1"), ("residual", "count"), ("nonzeros", "entries"), ("max_entry", "count"), ("hankel", "bool")],
    );
    let mut worst = 0u128;
    for h in 2..=h_max {
        let fac = walk_deficit(len, h, WalkMethod::Factorized)?;
        let brute = walk_deficit(len, h, WalkMethod::BruteForce)?;
        let mut residual = 0u128;
        let mut nonzeros = 0usize;
        let mut max_entry = 0i128;
        for i in 0..len {
            for j in 0..len {
                residual = residual.max(fac.get(i, j).abs_diff(brute.get(i, j)));
                if brute.get(i, j) != 0 {
                    nonzeros += 1;
                }
                max_entry = max_entry.max(brute.get(i, j));
            }
        }
        worst = worst.max(residual);
        t.push(vec![
            h.into(),
            Cell::Text(residual.to_string()),
            nonzeros.into(),
            Cell::Text(max_entry.to_string()),
            brute.is_hankel().into(),
        ]);
    }
    let mut summary = Summary::default();
    summary.int("len", len).int("h_max", h_max).text("max_residual", worst.to_string());
    Ok(Outcome {
        verdict: Some(worst == 0),
        summary,
        tables: vec![t],
        files: vec![],
    })
}

/// Sites whose every coordinate lies in `[extent/4, extent/2)`, far from the far faces.
fn interior_block(lat: &LatticeBox) -> Vec<usize> {
    (0..lat.size())
        .filter(|&s| {
            (0..lat.dims()).all(|a| {
                let c = lat.coordinate(s, a) as usize;
                let l = lat.extent(a);
                c >= l / 4 && c < l / 2
            })
        })
        .collect()
}

fn heat(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[200], BoxKind::Half)?;
    let times = p.list(&p.cfg.times, &[0.5, 1.0, 2.0]);
    let range = p.cfg.block.unwrap_or(60);
    let h = laplacian(&lat);
    let eig = EigenSystem::new(&h)?;
    let mut kernel = Table::new("kernel", &[("t", "time"), ("k", "sites"), ("p", "1")]);
    let mut checks =
        Table::new("checks", &[("t", "time"), ("mass", "1"), ("tail_bound", "1"), ("spectral_residual", "1")]);
    let mut worst: f64 = 0.0;
    let block = interior_block(&lat);
    for &t in &times {
        let table = KernelTable::new(t, range)?;
        for k in 0..=range as i64 {
            kernel.push(vec![t.into(), k.into(), table.at(k).into()]);
        }
        let model = match lat.kind() {
            BoxKind::Half => dirichlet_kernel(&lat, t)?,
            BoxKind::Periodic => full_kernel(&lat, t)?,
        };
        let exact = fraclat::lattice::function_of(&eig, |x| (-t * x).exp())?;
        let sites: Vec<usize> = match lat.kind() {
            BoxKind::Half => block.clone(),
            BoxKind::Periodic => (0..lat.size()).collect(),
        };
        let mut residual: f64 = 0.0;
        for &i in &sites {
            for &j in &sites {
                residual = residual.max((model.get(i, j).re - exact.get(i, j).re).abs());
            }
        }
        worst = worst.max(residual);
        checks.push(vec![t.into(), table.mass().into(), table.tail_bound().into(), residual.into()]);
    }
    let mut summary = Summary::default();
    summary
        .text("lattice", lat.to_string())
        .nums("times", &times)
        .int("compared_sites", if lat.kind() == BoxKind::Half { block.len() } else { lat.size() })
        .num("max_spectral_residual", worst);
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![kernel, checks],
        files: vec![],
    })
}

fn images_check(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[20, 20], BoxKind::Half)?;
    let times = p.list(&p.cfg.times, &[0.25, 0.5, 1.0, 2.0, 4.0]);
    let report = images_bound_check(&lat, &times)?;
    let sites: Vec<Vec<usize>> = lat.sites().collect();
    let mut min_ratio = f64::INFINITY;
    for n in &sites {
        for m in &sites {
            min_ratio = min_ratio.min(geometric_ratio(n, m));
        }
    }
    let mut v = Table::new("violations", &[("t", "time"), ("n", "lattice"), ("m", "lattice"), ("value", "1"), ("exponent", "sites^2")]);
    let fmt = |s: &[usize]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    for e in &report.violations {
        v.push(vec![e.t.into(), fmt(&e.n).into(), fmt(&e.m).into(), e.value.into(), e.exponent.into()]);
    }
    let mut summary = Summary::default();
    summary.text("lattice", lat.to_string()).nums("times", &times).flag("holds", report.holds);
    summary.num("geometric_min_ratio", min_ratio);
    if let Some(fit) = report.fit {
        summary.num("rate", fit.rate).num("prefactor", fit.prefactor).int("samples", fit.samples);
    }
    Ok(Outcome {
        verdict: Some(report.holds),
        summary,
        tables: vec![v],
        files: vec![],
    })
}

fn conjugate(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[16], BoxKind::Half)?;
    let order = p.order(&[1.0], lat.dims())?;
    let flavor = Flavor::for_kind(lat.kind());
    let a = build_conjugate(&lat, &order.signs(), flavor)?;
    let op = a.op();
    let mut t = Table::new("entries", &[("row", "site"), ("col", "site"), ("im", "1")]);
    let mut nonzeros = 0;
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            let z = op.get(i, j);
            if z.norm() > 0.0 {
                nonzeros += 1;
                t.push(vec![i.into(), j.into(), z.im.into()]);
            }
        }
    }
    let mut summary = Summary::default();
    summary
        .text("lattice", lat.to_string())
        .text("flavor", format!("{flavor:?}"))
        .nums("signs", &order.signs())
        .int("nonzeros", nonzeros)
        .num("hermitian_residual", op.entries().hermitian_residual())
        .num("norm", op_norm(op.entries()));
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![t],
        files: vec![],
    })
}

fn commutator(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[64], BoxKind::Half)?;
    let order = p.order(&[1.0], lat.dims())?;
    let potential = p.potential(None);
    let h = hamiltonian(&order, &lat, p.method(), potential)?;
    let c = commutator_of(&order, &lat, &h, potential)?;
    let mut t = Table::new("diagonal", &[("site", "index"), ("coords", "lattice"), ("value", "1")]);
    for s in 0..c.dim() {
        t.push(vec![s.into(), coords(&lat, s).into(), c.get(s, s).re.into()]);
    }
    let mut summary = Summary::default();
    summary
        .text("lattice", lat.to_string())
        .text("r", join(order.exponents()))
        .num("norm", op_norm(c.entries()))
        .num("hermitian_residual", c.entries().hermitian_residual())
        .flag("real", c.is_real());
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![t, matrix_table("matrix", &c, p.block(c.dim()))],
        files: vec![],
    })
}

fn multiplier(p: &Params) -> Result<Outcome, CliError> {
    let r = p.scalar_r(1.0)?;
    let order = FracOrder::scalar(r)?;
    let ladder = p.ladder(&[64, 128]);
    let window = p.window([1.0, 3.0], &order)?;
    let (table, files) = match &p.cfg.table {
        Some(path) => (MultiplierTable::load(path)?, vec![]),
        None => {
            let t = MultiplierTable::measure(p.cfg.ring.unwrap_or(256))?;
            let text = t.to_text();
            (t, vec![("multiplier_table.txt".to_string(), text)])
        }
    };
    let report = multiplier_check(r, &ladder, &table, &window)?;
    let mut t = Table::new(
        "rungs",
        &[
            ("len", "sites"),
            ("periodic_residual", "1"),
            ("collar", "sites"),
            ("outside_collar", "1"),
            ("top_singular_value", "1"),
            ("window_first", "1"),
            ("window_first_near_face", "1"),
            ("window_double_displayed", "1"),
            ("window_double_first", "1"),
        ],
    );
    for rung in &report.rungs {
        t.push(vec![
            rung.len.into(),
            rung.periodic_residual.into(),
            rung.collar.into(),
            rung.outside_collar.into(),
            rung.singular_values.first().copied().unwrap_or(0.0).into(),
            rung.window_first.into(),
            rung.window_first_near_face.into(),
            rung.window_double_displayed.into(),
            rung.window_double_first.into(),
        ]);
    }
    let mut summary = Summary::default();
    summary
        .num("r", r)
        .text("table_source", report.source.clone())
        .num("diagonal_residual", report.diagonal_residual)
        .nums("polynomial", &report.polynomial.coeffs)
        .num("polynomial_residual", report.polynomial.residual)
        .num("conjecture_full_residual", report.conjecture_full)
        .num("conjecture_half_residual", report.conjecture_half);
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![t],
        files,
    })
}

fn mourre(p: &Params) -> Result<Outcome, CliError> {
    let kind = p.kind(BoxKind::Half);
    let dims = p.cfg.extents.as_ref().map_or(1, Vec::len);
    let order = p.order(&[1.0], dims)?;
    let window = p.window([1.0, 3.0], &order)?;
    let ladder = p.ladder(&[100, 200, 400]);
    let potential = p.potential(None);
    let rungs = ladder
        .iter()
        .map(|&len| {
            let lat = LatticeBox::new(&vec![len; dims], kind)?;
            let h = hamiltonian(&order, &lat, p.method(), potential)?;
            let c = commutator_of(&order, &lat, &h, potential)?;
            mourre_rung(&h, &c, &window)
        })
        .collect::<fraclat::Result<Vec<_>>>()?;
    let report = mourre_report(&window, rungs);
    let mut t = Table::new(
        "rungs",
        &[("size", "sites/axis"), ("window_dim", "states"), ("lowest", "1"), ("defects", "states"), ("commutator_norm", "1")],
    );
    for (rung, &defects) in report.rungs.iter().zip(&report.defect_counts) {
        t.push(vec![
            ladder[t.len()].into(),
            rung.window_dim().into(),
            rung.spectrum.first().copied().unwrap_or(f64::NAN).into(),
            defects.into(),
            rung.commutator_norm.into(),
        ]);
    }
    let mut summary = Summary::default();
    summary
        .text("kind", kind.name())
        .text("r", join(order.exponents()))
        .nums("window", &[window.a(), window.b()])
        .num("clearance", window.clearance())
        .num("c_estimate", report.c_estimate)
        .int("skipped", report.skipped)
        .ints("defect_counts", &report.defect_counts)
        .flag("empty", report.empty)
        .flag("verdict", report.verdict);
    Ok(Outcome {
        verdict: Some(report.verdict),
        summary,
        tables: vec![t],
        files: vec![],
    })
}

fn potential_check(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[64], BoxKind::Half)?;
    let family = p.potential(Some(PotentialSpec::InverseBracket {
        amplitude: 1.0,
        power: 1.5,
    }))
    .expect("a default family is supplied");
    let eps = p.cfg.epsilon.unwrap_or(0.5);
    let grid = PotentialGrid::new(&lat, family);
    let check = check_potential(&grid, eps);
    let mut tail = Table::new("sup_tail", &[("radius", "sites"), ("sup", "1")]);
    for &(r, v) in &check.sup_tail {
        tail.push(vec![r.into(), v.into()]);
    }
    let order = p.order(&[1.0], lat.dims())?;
    let ladder = p.ladder(&[16, 32, 64]);
    let mut dyadic = Table::new("dyadic", &[("size", "sites/axis"), ("total", "1")]);
    let mut totals = Vec::new();
    for &len in &ladder {
        let rung = LatticeBox::new(&vec![len; lat.dims()], lat.kind())?;
        let a = build_conjugate(&rung, &order.signs(), Flavor::for_kind(rung.kind()))?;
        let w = PotentialGrid::new(&rung, family).operator();
        let c = form_commutator(&w, a.op(), 1)?;
        let report = dyadic_c01_diagnostic(&c, &WeightVector::lambda(&rung));
        dyadic.push(vec![len.into(), report.total.into()]);
        totals.push(report.total);
    }
    let converges = dyadic_ladder_converges(&totals);
    let mut summary = Summary::default();
    summary
        .text("family", family.name())
        .num("epsilon", eps)
        .flag("h0", check.h0)
        .flag("h1", check.h1)
        .num("h1_constant", check.constant)
        .num("h1_constant_half", check.constant_half)
        .nums("dyadic_totals", &totals)
        .flag("dyadic_converges", converges);
    Ok(Outcome {
        verdict: Some(check.h0 && check.h1 && converges),
        summary,
        tables: vec![tail, dyadic],
        files: vec![],
    })
}

fn lap(p: &Params) -> Result<Outcome, CliError> {
    let kind = p.kind(BoxKind::Half);
    let dims = p.cfg.extents.as_ref().map_or(1, Vec::len);
    let order = p.order(&[1.0], dims)?;
    let ladder = p.ladder(&[200, 400]);
    let s = p.cfg.s.unwrap_or(1.0);
    let lambdas = p.list(&p.cfg.lambdas, &[2.0]);
    let etas = p.cfg.etas.clone().unwrap_or_else(|| eta_decade(5));
    let potential = p.potential(None);
    let ops = ladder
        .iter()
        .map(|&len| hamiltonian(&order, &LatticeBox::new(&vec![len; dims], kind)?, p.method(), potential))
        .collect::<fraclat::Result<Vec<_>>>()?;
    let res = lap_probe(&ops, s, &lambdas, &etas)?;
    let mut norms = Table::new("norms", &[("size", "sites/axis"), ("lambda", "energy"), ("eta", "energy"), ("norm", "1")]);
    let mut spacing = Table::new("spacing", &[("size", "sites/axis"), ("lambda", "energy"), ("spacing", "energy")]);
    for (rung, &len) in res.rungs.iter().zip(&ladder) {
        for (li, &l) in res.lambdas.iter().enumerate() {
            for (ei, &e) in res.etas.iter().enumerate() {
                norms.push(vec![len.into(), l.into(), e.into(), rung.norms[li][ei].into()]);
            }
            spacing.push(vec![len.into(), l.into(), rung.spacing[li].into()]);
        }
    }
    let growth: Vec<f64> = (0..lambdas.len()).map(|i| res.eta_growth(i)).collect();
    let mut summary = Summary::default();
    summary
        .num("s", s)
        .nums("lambdas", &lambdas)
        .nums("etas", &etas)
        .num("drift", res.drift)
        .flag("plateau", res.plateau)
        .nums("eta_growth", &growth)
        .flag("resolution_warning", res.rungs.iter().any(|r| r.resolution_warning));
    Ok(Outcome {
        verdict: Some(res.plateau),
        summary,
        tables: vec![norms, spacing],
        files: vec![],
    })
}

fn propagate(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[400], BoxKind::Half)?;
    let order = p.order(&[1.0], lat.dims())?;
    let window = p.window([1.0, 3.0], &order)?;
    let s = p.cfg.s.unwrap_or(1.0);
    let t_max = p.cfg.t_max.unwrap_or(200.0);
    let h = hamiltonian(&order, &lat, p.method(), p.potential(None))?;
    let eig = EigenSystem::new(&h)?;
    let weight = WeightVector::lambda_bracket_pow(&lat, -s);
    let mut f = vec![0.0; lat.size()];
    f[0] = 1.0;
    let bump = window.bump();
    let res = propagation_integral(&eig, |x| bump.eval(x), weight.values(), &f, t_max)?;
    let mut t = Table::new("integral", &[("t", "time"), ("integrand", "1"), ("cumulative", "time")]);
    for i in 0..res.times.len() {
        t.push(vec![res.times[i].into(), res.integrand[i].into(), res.cumulative[i].into()]);
    }
    let pass = res.tail_increment < PROPAGATION_TAIL_TOL;
    let mut summary = Summary::default();
    summary
        .num("t_max", t_max)
        .num("s", s)
        .nums("window", &[window.a(), window.b()])
        .num("total", res.cumulative.last().copied().unwrap_or(0.0))
        .num("tail_increment", res.tail_increment)
        .num("c_estimate", res.c_estimate);
    Ok(Outcome {
        verdict: Some(pass),
        summary,
        tables: vec![t],
        files: vec![],
    })
}

fn eigcount(p: &Params) -> Result<Outcome, CliError> {
    let kind = p.kind(BoxKind::Half);
    let dims = p.cfg.extents.as_ref().map_or(1, Vec::len);
    let order = p.order(&[1.0], dims)?;
    let ladder = p.ladder(&[100, 200, 400]);
    let w = p.cfg.window.clone().unwrap_or_else(|| vec![-1.0, -0.1]);
    let potential = p.potential(Some(PotentialSpec::CornerWell { strength: -2.0 }));
    let spectra = ladder
        .iter()
        .map(|&len| {
            let h = hamiltonian(&order, &LatticeBox::new(&vec![len; dims], kind)?, p.method(), potential)?;
            Ok((len, EigenSystem::new(&h)?.values().to_vec()))
        })
        .collect::<fraclat::Result<Vec<_>>>()?;
    let report = eig_window_count(&spectra, w[0], w[1]);
    let mut rungs = Table::new(
        "rungs",
        &[("size", "sites/axis"), ("in_window", "states"), ("outliers", "states"), ("unconfirmed", "states"), ("mean_spacing", "energy")],
    );
    let mut values = Table::new("outliers", &[("size", "sites/axis"), ("eigenvalue", "energy"), ("status", "label")]);
    for rung in &report.rungs {
        rungs.push(vec![
            rung.size.into(),
            rung.in_window.len().into(),
            rung.outliers.len().into(),
            rung.unconfirmed.len().into(),
            rung.mean_spacing.into(),
        ]);
        for &x in &rung.outliers {
            values.push(vec![rung.size.into(), x.into(), "persistent".into()]);
        }
        for &x in &rung.unconfirmed {
            values.push(vec![rung.size.into(), x.into(), "unconfirmed".into()]);
        }
    }
    let mut summary = Summary::default();
    summary
        .nums("window", &w)
        .ints("counts", &report.counts())
        .flag("stable", report.stable())
        .flag("ambiguous", report.ambiguous());
    Ok(Outcome {
        verdict: Some(report.stable()),
        summary,
        tables: vec![rungs, values],
        files: vec![],
    })
}

fn weyl(p: &Params) -> Result<Outcome, CliError> {
    let r = p.scalar_r(0.5)?;
    let ladder = p.ladder(&[64, 128, 256]);
    let w = p.cfg.window.clone().unwrap_or_else(|| vec![0.5, 1.3]);
    let report = weyl_compare(r, &ladder, w[0], w[1])?;
    let mut t = Table::new(
        "rungs",
        &[("size", "sites"), ("ks_distance", "1"), ("resolvent_difference", "1"), ("rank", "1"), ("half_min", "energy"), ("half_max", "energy")],
    );
    for rung in &report.rungs {
        t.push(vec![
            rung.size.into(),
            rung.ks_distance.into(),
            rung.resolvent_difference.into(),
            rung.rank.into(),
            rung.half_range.0.into(),
            rung.half_range.1.into(),
        ]);
    }
    let mut summary = Summary::default();
    summary.num("r", r).nums("window", &w).flag("ks_decreasing", report.ks_decreasing());
    Ok(Outcome {
        verdict: Some(report.ks_decreasing()),
        summary,
        tables: vec![t],
        files: vec![],
    })
}

fn ballistic(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[300], BoxKind::Half)?;
    let order = p.order(&[1.0], lat.dims())?;
    let window = p.window([1.0, 3.0], &order)?;
    let velocities = p.list(&p.cfg.velocities, &[0.0, 0.5, 1.0, 2.0]);
    let horizons = p.list(&p.cfg.horizons, &[50.0, 100.0, 200.0]);
    let h = hamiltonian(&order, &lat, p.method(), p.potential(None))?;
    let a = build_conjugate(&lat, &order.signs(), Flavor::for_kind(lat.kind()))?;
    let eig_h = EigenSystem::new(&h)?;
    let eig_a = EigenSystem::new(a.op())?;
    let bump = window.bump();
    let cut = |v: &[Complex64]| -> Vec<Complex64> {
        let c: Vec<Complex64> = eig_h.analyze(v).iter().zip(eig_h.values()).map(|(z, &l)| z * bump.eval(l)).collect();
        eig_h.expand(&c)
    };
    let mut delta = vec![Complex64::new(0.0, 0.0); lat.size()];
    delta[0] = Complex64::new(1.0, 0.0);
    let mut u = cut(&delta);
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(fraclat::LabError::InvalidArgument("the energy cutoff annihilates the corner state".into()).into());
    }
    u.iter_mut().for_each(|z| *z /= norm);
    let psi = cut(&u);
    let report = ballistic_diagnostic(&eig_h, &eig_a, &psi, &velocities, &horizons)?;
    let mut cells = Table::new("cells", &[("v", "sites/time"), ("T", "time"), ("average", "1")]);
    for c in &report.cells {
        cells.push(vec![c.v.into(), c.t.into(), c.average.into()]);
    }
    let mut fits = Table::new("fits", &[("v", "sites/time"), ("constant", "1"), ("spread", "1"), ("non_increasing", "bool")]);
    for f in &report.fits {
        fits.push(vec![f.v.into(), f.constant.into(), f.spread.into(), f.non_increasing.into()]);
    }
    let mut summary = Summary::default();
    summary
        .num("state_norm_sq", report.state_norm_sq)
        .nums("velocities", &velocities)
        .nums("horizons", &horizons);
    Ok(Outcome {
        verdict: None,
        summary,
        tables: vec![cells, fits],
        files: vec![],
    })
}

fn rscan(p: &Params) -> Result<Outcome, CliError> {
    let lat = p.lattice(&[256], BoxKind::Periodic)?;
    let path = p.cfg.path.unwrap_or(PathSpec {
        start: 0.4,
        end: 0.6,
        step: 0.05,
    });
    let report = r_scan(&lat, &exponent_path(path.start, path.end, path.step))?;
    let mut t = Table::new("path", &[("r", "1"), ("r_next", "1"), ("difference", "1"), ("symbol_bound", "1")]);
    for row in &report.rows {
        t.push(vec![row.r.into(), row.r_next.into(), row.difference.into(), row.symbol_bound.into()]);
    }
    let factor = if lat.kind() == BoxKind::Periodic { 1.0 } else { 2.0 };
    let pass = report.within_symbol_bound(factor);
    let mut summary = Summary::default();
    summary
        .text("lattice", lat.to_string())
        .num("step", path.step)
        .num("max_difference", report.max_difference())
        .num("modulus", report.modulus)
        .num("bound_factor", factor)
        .flag("within_bound", pass);
    Ok(Outcome {
        verdict: Some(pass),
        summary,
        tables: vec![t],
        files: vec![],
    })
}
