//! Command-line front end for `klein-systole`.
//!
//! Exit codes: 0 success or valid certificate, 1 invalid certificate or
//! violated bound, 2 input error, 3 numeric non-convergence.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use klein_systole::flat_systoles::{
    bound_check, displacement, klein_systole, parlier_constant, reduce, systolic_ratio, torus_systole, Bound,
    BoundVerdict, ClassDescriptor, FlatError, FlatKleinBottle, Lattice2, NamedConstants, Sidedness, SystoleReport,
    SystoleSource,
};
use klein_systole::interval::Interval;
use klein_systole::mesh_oracle::{mesh_check, Identification, MeshCheck, MeshError};
use klein_systole::periods::{
    classify_real_involutions, klein_quotient, period_lattice, real_form, PeriodError, QuarticCurve, RealLatticeForm,
    CLASSIFY_TOL, PERIOD_TOL,
};
use klein_systole::proof_chain::{
    optimal_alpha, verify_theorem, CertificateVerdict, ChainError, ChainParams, ProofCertificate, DEFAULT_ALPHA,
};
use klein_systole::real_curves::{
    companions, crosses_equator, fat_graph_boundary, genus_by_riemann_hurwitz, lift_closes, loop_partition,
    ComplexPoint, CurveError, PlanarLoop, RealGenus2Curve,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Numeric(_) => "numeric",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    /// `error: kind=<kind> reason=<single line>`
    pub fn line(&self) -> String {
        let reason: String = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error: kind={} reason={}", self.kind(), reason)
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FlatError> for CliError {
    fn from(e: FlatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PeriodError> for CliError {
    fn from(e: PeriodError) -> Self {
        match e {
            PeriodError::Convergence { .. } | PeriodError::Monodromy | PeriodError::NotReal { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::Bracketing { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshKind {
    Torus,
    Klein,
}

#[derive(Debug, Parser)]
#[command(name = "systole", version, about = "Systoles of flat surfaces, companion tori and the 3RP^2 certificate")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Companion tori of a real genus-2 curve, plus loop predicates if the
    /// file has a loop.
    CurveCompanions { input: PathBuf },
    /// Period lattices, real forms and free glides of the companion tori.
    Periods {
        input: PathBuf,
        #[arg(long, default_value_t = PERIOD_TOL)]
        tol: f64,
        #[arg(long, default_value_t = CLASSIFY_TOL)]
        classify_tol: f64,
    },
    /// Systole of the flat torus with basis "x1 y1 x2 y2".
    FlatSystole {
        #[arg(long)]
        lattice: String,
    },
    /// Systole of the flat Klein bottle with glide (x + w, -y) and period h.
    KleinSystole {
        #[arg(long)]
        w: f64,
        #[arg(long)]
        h: f64,
    },
    /// Interval certificate for sys^2 / area < alpha on 3RP^2.
    Verify {
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Mobius-strip area threshold, or "best" for the largest the belt
        /// bound certifies.
        #[arg(long, default_value = "0.324")]
        split: String,
    },
    /// Bisect for the least alpha the certificate accepts.
    OptimizeAlpha {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Compare mesh systoles against closed forms.
    MeshCheck {
        #[arg(long, value_enum, default_value = "torus")]
        kind: MeshKind,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Torus basis "x1 y1 x2 y2"; defaults to the unit square.
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Check this many random surfaces instead.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Named systolic constants.
    Constants,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub roots: RootsSpec,
    #[serde(default, rename = "loop")]
    pub loop_vertices: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
}

impl CurveFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_yaml::from_str(text).map_err(|e| CliError::Input(format!("curve file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn curve(&self) -> Result<RealGenus2Curve, CliError> {
        let p = |v: [f64; 2]| ComplexPoint::new(v[0], v[1]);
        Ok(RealGenus2Curve::new(p(self.roots.a)?, p(self.roots.b)?, p(self.roots.c)?)?)
    }

    pub fn planar_loop(&self) -> Result<Option<PlanarLoop>, CliError> {
        match &self.loop_vertices {
            None => Ok(None),
            Some(v) => {
                let coords: Vec<(f64, f64)> = v.iter().map(|p| (p[0], p[1])).collect();
                Ok(Some(PlanarLoop::from_coords(&coords)?))
            }
        }
    }
}

/// Anything the CLI prints.
pub trait Report: Serialize {
    fn text(&self, style: &Style) -> String;
}

/// ANSI styling, disabled by `NO_COLOR` or a non-terminal stdout.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub color: bool,
}

impl Style {
    pub fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Style {
            color: !no_color && std::io::stdout().is_terminal(),
        }
    }

    pub fn plain() -> Self {
        Style { color: false }
    }

    fn paint(&self, s: &str, good: bool) -> String {
        if self.color {
            let code = if good { 32 } else { 31 };
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

pub fn emit_report<R: Report>(report: &R, format: Format, style: &Style) -> String {
    match format {
        Format::Text => report.text(style),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
    }
}

fn point(p: &ComplexPoint) -> [f64; 2] {
    [p.re(), p.im()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompanionEntry {
    pub chosen: [String; 2],
    pub roots: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopReport {
    pub vertices: usize,
    pub simple: bool,
    pub winding: BTreeMap<String, i64>,
    pub lift_closes: bool,
    pub crosses_equator: bool,
    pub partition: Option<[Vec<String>; 2]>,
    pub fat_graph_boundary: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompanionsReport {
    pub genus: u64,
    pub companions: Vec<CompanionEntry>,
    #[serde(rename = "loop")]
    pub loop_report: Option<LoopReport>,
}

impl Report for CompanionsReport {
    fn text(&self, _: &Style) -> String {
        let mut s = format!("genus {}\n", self.genus);
        for c in &self.companions {
            let _ = write!(s, "companion {}{}:", c.chosen[0], c.chosen[1]);
            for (k, v) in &c.roots {
                let _ = write!(s, " {k}=({}, {})", v[0], v[1]);
            }
            s.push('\n');
        }
        if let Some(l) = &self.loop_report {
            let _ = writeln!(s, "loop vertices {} simple {}", l.vertices, l.simple);
            for (k, w) in &l.winding {
                let _ = writeln!(s, "  winding {k} {w}");
            }
            let _ = writeln!(s, "  lift_closes {}", l.lift_closes);
            let _ = writeln!(s, "  crosses_equator {}", l.crosses_equator);
            if let Some([a, b]) = &l.partition {
                let _ = writeln!(s, "  partition {{{}}} {{{}}}", a.join(","), b.join(","));
            }
            let _ = writeln!(s, "  fat_graph_boundary {} vertices", l.fat_graph_boundary.len());
        }
        s
    }
}

fn curve_companions(path: &Path) -> Result<CompanionsReport, CliError> {
    let file = CurveFile::load(path)?;
    let curve = file.curve()?;
    let roots = curve.roots();
    let companions = companions(&curve)
        .iter()
        .map(|sel| {
            let (p, q) = sel.selected_pairs();
            let keep = [p.label(), q.label()];
            CompanionEntry {
                chosen: [sel.chosen.0.to_string(), sel.chosen.1.to_string()],
                roots: roots
                    .iter()
                    .filter(|(id, _)| keep.contains(&id.label))
                    .map(|(id, z)| (id.to_string(), point(z)))
                    .collect(),
            }
        })
        .collect();
    let loop_report = match file.planar_loop()? {
        None => None,
        Some(lp) => {
            let mut winding = BTreeMap::new();
            for (id, z) in &roots {
                winding.insert(id.to_string(), lp.winding_number(z)?);
            }
            let branch: Vec<ComplexPoint> = roots.iter().map(|(_, z)| *z).collect();
            let simple = lp.is_simple();
            let partition = if simple {
                let p = loop_partition(&lp, &curve)?;
                Some([
                    p.side_in.iter().map(|r| r.to_string()).collect(),
                    p.side_out.iter().map(|r| r.to_string()).collect(),
                ])
            } else {
                None
            };
            Some(LoopReport {
                vertices: lp.len(),
                simple,
                winding,
                lift_closes: lift_closes(&lp, &branch)?,
                crosses_equator: crosses_equator(&lp)?,
                partition,
                fat_graph_boundary: fat_graph_boundary(&lp)?.vertices().iter().map(point).collect(),
            })
        }
    };
    Ok(CompanionsReport {
        genus: genus_by_riemann_hurwitz(6)?,
        companions,
        loop_report,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlideEntry {
    pub c: [f64; 2],
    /// `(w, h)` of the quotient bottle, when the lattice is rectangular.
    pub klein: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodEntry {
    pub companion: String,
    pub omega1: [f64; 2],
    pub omega2: [f64; 2],
    pub residual: f64,
    pub form: RealLatticeForm,
    pub involutions: Vec<GlideEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodsReport {
    pub companions: Vec<PeriodEntry>,
}

impl Report for PeriodsReport {
    fn text(&self, _: &Style) -> String {
        let mut s = String::new();
        for e in &self.companions {
            let _ = writeln!(s, "companion {}", e.companion);
            let _ = writeln!(s, "  omega1 ({:?}, {:?})", e.omega1[0], e.omega1[1]);
            let _ = writeln!(s, "  omega2 ({:?}, {:?})", e.omega2[0], e.omega2[1]);
            let _ = writeln!(s, "  residual {:e}", e.residual);
            match e.form {
                RealLatticeForm::Rectangular { width, height } => {
                    let _ = writeln!(s, "  form rectangular width {width} height {height}");
                }
                RealLatticeForm::Rhombic { modulus, angle } => {
                    let _ = writeln!(s, "  form rhombic modulus {modulus} angle {angle}");
                }
            }
            for g in &e.involutions {
                let _ = write!(s, "  glide c=({:?}, {:?})", g.c[0], g.c[1]);
                if let Some([w, h]) = g.klein {
                    let _ = write!(s, " klein w={w} h={h}");
                }
                s.push('\n');
            }
        }
        s
    }
}

fn periods(path: &Path, tol: f64, classify_tol: f64) -> Result<PeriodsReport, CliError> {
    let curve = CurveFile::load(path)?.curve()?;
    let mut out = Vec::new();
    for sel in companions(&curve) {
        let lattice = period_lattice(&QuarticCurve::from_companion(&sel)?, tol)?;
        let form = real_form(&lattice, classify_tol)?;
        let mut involutions = Vec::new();
        for c in classify_real_involutions(&lattice, classify_tol)? {
            let klein = match form {
                RealLatticeForm::Rectangular { .. } => {
                    let b = klein_quotient(&lattice, &c, classify_tol)?;
                    Some([b.w(), b.h()])
                }
                RealLatticeForm::Rhombic { .. } => None,
            };
            involutions.push(GlideEntry { c: point(&c), klein });
        }
        out.push(PeriodEntry {
            companion: format!("{}{}", sel.chosen.0, sel.chosen.1),
            omega1: point(&lattice.omega1),
            omega2: point(&lattice.omega2),
            residual: lattice.residual,
            form,
            involutions,
        });
    }
    Ok(PeriodsReport { companions: out })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystoleOutput {
    pub sys: f64,
    pub area: f64,
    pub ratio: f64,
    pub realizer: ClassDescriptor,
    pub sided: Sidedness,
    pub source: SystoleSource,
    pub bounds: BTreeMap<String, BoundVerdict>,
    /// Glide displacement, Klein bottles only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub displacement: Option<f64>,
    /// Bound whose violation sets exit code 1.
    pub governing_bound: String,
}

impl SystoleOutput {
    fn new(report: SystoleReport, area: f64, bounds: &[Bound], displacement: Option<f64>) -> Result<Self, CliError> {
        let ratio = systolic_ratio(report.value, area)?;
        Ok(Self {
            sys: report.value,
            area,
            ratio,
            realizer: report.realizer,
            sided: report.sided,
            source: report.source,
            bounds: bounds.iter().map(|b| (b.name().to_string(), bound_check(ratio, *b))).collect(),
            displacement,
            governing_bound: bounds[0].name().to_string(),
        })
    }

    fn violated(&self) -> bool {
        self.bounds.get(&self.governing_bound).is_some_and(|v| !v.holds())
    }
}

impl Report for SystoleOutput {
    fn text(&self, style: &Style) -> String {
        let r = &self.realizer;
        let mut s = format!(
            "sys {}\narea {}\nratio {}\nrealizer m={} n={} glide={}\nsided {:?}\nsource {:?}\n",
            self.sys, self.area, self.ratio, r.m, r.n, r.glide, self.sided, self.source
        );
        if let Some(d) = self.displacement {
            let _ = writeln!(s, "displacement {d}");
        }
        for (name, v) in &self.bounds {
            let _ = writeln!(s, "bound {name} {}", style.paint(&format!("{v:?}"), v.holds()));
        }
        s
    }
}

pub fn parse_lattice(text: &str) -> Result<Lattice2, CliError> {
    let v: Vec<f64> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| CliError::Input(format!("lattice entry {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err(CliError::Input(format!("lattice needs 4 numbers, got {}", v.len())));
    }
    Ok(Lattice2::new([v[0], v[1]], [v[2], v[3]])?)
}

fn flat_systole(lattice: &str) -> Result<SystoleOutput, CliError> {
    let l = parse_lattice(lattice)?;
    SystoleOutput::new(torus_systole(&l)?, l.area(), &[Bound::Loewner, Bound::Gromov], None)
}

fn klein(w: f64, h: f64) -> Result<SystoleOutput, CliError> {
    let b = FlatKleinBottle::new(w, h)?;
    SystoleOutput::new(
        klein_systole(&b),
        b.area(),
        &[Bound::Bavard, Bound::Loewner, Bound::Gromov],
        Some(displacement(&b)),
    )
}

impl Report for ProofCertificate {
    fn text(&self, style: &Style) -> String {
        let p = &self.params;
        let q = &self.quantities;
        let mut s = String::new();
        let _ = writeln!(s, "alpha {}", p.alpha);
        let _ = writeln!(s, "area_mob {}", p.area_mob);
        let _ = writeln!(s, "area_torus {}", p.area_torus);
        for (k, v) in [
            ("beta", q.beta),
            ("delta0", q.delta0),
            ("h_star", q.h_star),
            ("gamma", q.gamma),
            ("sin_gamma", q.sin_gamma),
            ("r_belt", q.r_belt),
            ("r_hemi", q.r_hemi),
        ] {
            let _ = writeln!(s, "{k} {v}");
        }
        for st in &self.steps {
            let tag = if st.required { "required" } else { "info" };
            let verdict = format!("{:?}", st.verdict).to_lowercase();
            let good = st.verdict == klein_systole::proof_chain::StepVerdict::Proved;
            let _ = writeln!(
                s,
                "step {} [{tag}] {}: lhs {} rhs {} {}",
                st.name,
                st.inequality,
                st.lhs,
                st.rhs,
                style.paint(&verdict, good || !st.required)
            );
        }
        for a in &self.assumptions {
            let _ = writeln!(s, "assume {a}");
        }
        let v = match self.verdict {
            CertificateVerdict::Valid => "VALID",
            CertificateVerdict::Invalid => "INVALID",
            CertificateVerdict::Inconclusive => "INCONCLUSIVE",
        };
        let _ = writeln!(s, "verdict {}", style.paint(v, self.is_valid()));
        s
    }
}

pub fn verify(alpha: f64, split: &str) -> Result<ProofCertificate, CliError> {
    if !alpha.is_finite() {
        return Err(CliError::Input(format!("alpha must be finite, got {alpha}")));
    }
    let params = if split == "best" {
        ChainParams::best_split(Interval::around(alpha))?
    } else {
        let mob: f64 = split
            .parse()
            .map_err(|e| CliError::Input(format!("split {split:?}: {e}")))?;
        if !(0.0..=1.0).contains(&mob) {
            return Err(CliError::Input(format!("split must lie in [0, 1], got {mob}")));
        }
        ChainParams::with_split(alpha, mob)?
    };
    Ok(verify_theorem(&params)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaReport {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub tol: f64,
    pub below_four_thirds: bool,
}

impl Report for AlphaReport {
    fn text(&self, _: &Style) -> String {
        format!(
            "alpha in [{}, {}]\nwidth {:e}\nbelow 4/3 {}\n",
            self.lo, self.hi, self.width, self.below_four_thirds
        )
    }
}

fn optimize(tol: f64) -> Result<AlphaReport, CliError> {
    let r = optimal_alpha(tol)?;
    Ok(AlphaReport {
        lo: r.lo(),
        hi: r.hi(),
        width: r.width(),
        tol,
        below_four_thirds: r.hi() < 4.0 / 3.0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshReport {
    pub checks: Vec<MeshCheck>,
}

impl Report for MeshReport {
    fn text(&self, style: &Style) -> String {
        let mut s = format!("checks {}\n", self.checks.len());
        for c in &self.checks {
            let _ = writeln!(
                s,
                "n {} continuum {} mesh {} ratio {} {}",
                c.n,
                c.continuum,
                c.mesh_value,
                c.ratio,
                style.paint(if c.bound_ok { "ok" } else { "out of bounds" }, c.bound_ok)
            );
        }
        s
    }
}

/// Random reduced torus basis with `|v1| = 1`.
pub fn random_torus(rng: &mut impl Rng) -> Lattice2 {
    loop {
        let x = rng.gen_range(-0.5..=0.5);
        let y = rng.gen_range(0.5..2.0);
        if x * x + y * y < 1.0 {
            continue;
        }
        let l = Lattice2::new([1.0, 0.0], [x, y]).expect("nondegenerate");
        return reduce(&l).expect("nondegenerate");
    }
}

pub fn random_bottle(rng: &mut impl Rng) -> FlatKleinBottle {
    FlatKleinBottle::new(rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0)).expect("positive")
}

#[allow(clippy::too_many_arguments)]
fn mesh(
    kind: MeshKind,
    n: usize,
    lattice: Option<&str>,
    w: f64,
    h: f64,
    random: Option<usize>,
    seed: u64,
) -> Result<MeshReport, CliError> {
    let ids: Vec<Identification> = match random {
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..k)
                .map(|_| match kind {
                    MeshKind::Torus => Identification::torus(random_torus(&mut rng)),
                    MeshKind::Klein => Identification::klein(random_bottle(&mut rng)),
                })
                .collect()
        }
        None => vec![match kind {
            MeshKind::Torus => Identification::torus(match lattice {
                Some(t) => parse_lattice(t)?,
                None => Lattice2::new([1.0, 0.0], [0.0, 1.0])?,
            }),
            MeshKind::Klein => Identification::klein(FlatKleinBottle::new(w, h)?),
        }],
    };
    let checks = ids
        .into_iter()
        .map(|id| mesh_check(id, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MeshReport { checks })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub loewner: f64,
    pub bavard: f64,
    pub gromov: f64,
    pub parlier_sys: f64,
    pub parlier_ratio: f64,
}

impl Report for ConstantsReport {
    fn text(&self, _: &Style) -> String {
        format!(
            "loewner {:.12}\nbavard {:.12}\ngromov {:.12}\nparlier_sys {:.12}\nparlier_ratio {:.12}\n",
            self.loewner, self.bavard, self.gromov, self.parlier_sys, self.parlier_ratio
        )
    }
}

fn constants() -> ConstantsReport {
    let k = NamedConstants::get();
    let (sys, ratio) = parlier_constant();
    ConstantsReport {
        loewner: k.loewner,
        bavard: k.bavard,
        gromov: k.gromov_ratio.sqrt(),
        parlier_sys: sys,
        parlier_ratio: ratio,
    }
}

/// Result of a command: rendered output and the exit code.
fn execute(cli: &Cli, style: &Style) -> Result<(String, i32), CliError> {
    let f = cli.format;
    Ok(match &cli.command {
        Command::CurveCompanions { input } => (emit_report(&curve_companions(input)?, f, style), EXIT_OK),
        Command::Periods {
            input,
            tol,
            classify_tol,
        } => (emit_report(&periods(input, *tol, *classify_tol)?, f, style), EXIT_OK),
        Command::FlatSystole { lattice } => {
            let r = flat_systole(lattice)?;
            let code = if r.violated() { EXIT_INVALID } else { EXIT_OK };
            (emit_report(&r, f, style), code)
        }
        Command::KleinSystole { w, h } => {
            let r = klein(*w, *h)?;
            let code = if r.violated() { EXIT_INVALID } else { EXIT_OK };
            (emit_report(&r, f, style), code)
        }
        Command::Verify { alpha, split } => {
            let c = verify(*alpha, split)?;
            let code = if c.is_valid() { EXIT_OK } else { EXIT_INVALID };
            (emit_report(&c, f, style), code)
        }
        Command::OptimizeAlpha { tol } => (emit_report(&optimize(*tol)?, f, style), EXIT_OK),
        Command::MeshCheck {
            kind,
            n,
            lattice,
            w,
            h,
            random,
            seed,
        } => {
            let r = mesh(*kind, *n, lattice.as_deref(), *w, *h, *random, *seed)?;
            let code = if r.checks.iter().all(|c| c.bound_ok) {
                EXIT_OK
            } else {
                EXIT_INVALID
            };
            (emit_report(&r, f, style), code)
        }
        Command::Constants => (emit_report(&constants(), f, style), EXIT_OK),
    })
}

/// Parse `args` (including the program name), run, and write to the given
/// streams. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write, style: &Style) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let _ = writeln!(err, "{}", CliError::Usage(first).line());
            return EXIT_INPUT;
        }
    };
    match execute(&cli, style) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.exit_code()
        }
    }
}
