//! Experiment orchestration: key=value configuration with provenance
//! tracking, figure reproduction as CSV artifacts, and a validation suite
//! that re-runs the cross-checks at desk scale.
//!
//! Output files are plain CSV with a '#'-prefixed comment block carrying the
//! fully resolved configuration, so every artifact is self-describing and
//! byte-identical across reruns with the same seed.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analytic::{
    coverage_closed_form_m1, coverage_value, jt_column, levy_cdf, levy_pdf, moment_match,
    ops_term_column, pv_dyn3_se_comparison, rps_column, spectral_efficiency, sum_pdf, AffineColumn,
    SeMethod, SumPdfMode,
};
use crate::error::{Error, Result};
use crate::geometry::{NetworkRealization, Point2D, Window};
use crate::montecarlo::{
    coverage_points, db_to_linear, effective_coefficient_gain_samples, excess_kurtosis, histogram,
    keyed_uniform, ks_two_sample, ks_vs_cdf, paired_dyn3_se_diff, quantile, quantity_samples,
    se_from_sirs, sir_samples, typical_distance_samples, Histogram, PdfQuantity, SimConfig,
    StreamTag,
};
use crate::params::{InterferenceMode, ModelParams, SchemeId, UeType};
use crate::specfun::{ltt_exp, regularized_p, ToeplitzFirstColumn};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "TRICOMP_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    HeadlineSe,
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::Fig10 => "fig10",
            FigureId::Fig11 => "fig11",
            FigureId::HeadlineSe => "headline-se",
        };
        f.write_str(s)
    }
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(FigureId::Fig4),
            "fig5" => Ok(FigureId::Fig5),
            "fig6" => Ok(FigureId::Fig6),
            "fig7" => Ok(FigureId::Fig7),
            "fig8" => Ok(FigureId::Fig8),
            "fig9" => Ok(FigureId::Fig9),
            "fig10" => Ok(FigureId::Fig10),
            "fig11" => Ok(FigureId::Fig11),
            "headline-se" => Ok(FigureId::HeadlineSe),
            _ => Err(Error::Config(format!(
                "unknown figure '{s}' (expected fig4..fig11 or headline-se)"
            ))),
        }
    }
}

/// Where a resolved configuration value came from, in increasing priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Default,
    FigureDefault,
    Env,
    File,
    Flag,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Default => "default",
            Provenance::FigureDefault => "figure-default",
            Provenance::Env => "env",
            Provenance::File => "file",
            Provenance::Flag => "flag",
        };
        f.write_str(s)
    }
}

/// Echo order; also the exhaustive list of recognized configuration keys.
const KNOWN_KEYS: [&str; 19] = [
    "figure",
    "lambda",
    "alpha",
    "antennas",
    "mu",
    "lambda_prime",
    "omega",
    "window",
    "guard",
    "r_cut",
    "drops",
    "realizations",
    "seed",
    "interference",
    "ue_type",
    "gamma_db_min",
    "gamma_db_max",
    "gamma_points",
    "out_dir",
];

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub figure: FigureId,
    /// Base simulation configuration; figure runners override scheme,
    /// interference mode, UE type and antenna count per data series.
    pub sim: SimConfig,
    pub out_dir: PathBuf,
    pub quick: bool,
    /// Forced interference mode when the user set one explicitly; None means
    /// each scheme uses the mode its analytic counterpart assumes.
    pub interference_forced: Option<InterferenceMode>,
    echo: Vec<(String, String, Provenance)>,
}

impl ExperimentSpec {
    /// Resolved key/value/provenance triples in stable order.
    pub fn echo(&self) -> &[(String, String, Provenance)] {
        &self.echo
    }

    pub fn provenance(&self, key: &str) -> Option<Provenance> {
        self.echo.iter().find(|(k, _, _)| k == key).map(|&(_, _, p)| p)
    }

    fn explicit(&self, key: &str) -> bool {
        matches!(
            self.provenance(key),
            Some(Provenance::File) | Some(Provenance::Flag)
        )
    }

    /// Interference mode a series should use: the forced mode if the user
    /// set one, otherwise the mode whose analytic model matches the scheme
    /// (grouped marks for coherent service, per-station marks for the rest).
    pub fn mode_for(&self, scheme: SchemeId) -> InterferenceMode {
        if let Some(m) = self.interference_forced {
            return m;
        }
        match scheme {
            SchemeId::Jt => InterferenceMode::Grouped19,
            _ => InterferenceMode::PerBs,
        }
    }
}

fn figure_defaults(figure: FigureId) -> Vec<(&'static str, String)> {
    let mut d: Vec<(&'static str, String)> = vec![
        ("window", "700".into()),
        ("realizations", "200".into()),
    ];
    let drops: u64 = match figure {
        FigureId::Fig4 => 200_000,
        FigureId::Fig5 => 30_000,
        FigureId::Fig6 => 30_000,
        FigureId::Fig7 => 30_000,
        FigureId::Fig8 => 30_000,
        FigureId::Fig9 => 20_000,
        FigureId::Fig10 => 30_000,
        FigureId::Fig11 => 20_000,
        FigureId::HeadlineSe => 50_000,
    };
    d.push(("drops", drops.to_string()));
    if matches!(figure, FigureId::Fig4 | FigureId::Fig5) {
        d.push(("antennas", "2".into()));
    }
    d
}

struct Resolver {
    entries: BTreeMap<&'static str, (String, Provenance)>,
}

impl Resolver {
    fn with_defaults() -> Self {
        let lambda: f64 = 0.02;
        let mut entries = BTreeMap::new();
        let mut put = |k: &'static str, v: String| {
            entries.insert(k, (v, Provenance::Default));
        };
        put("figure", "headline-se".into());
        put("lambda", format!("{lambda}"));
        put("alpha", "4".into());
        put("antennas", "1".into());
        put("mu", "3".into());
        put("lambda_prime", format!("{}", lambda / 3.0));
        put("omega", "matched".into());
        put("window", "10000".into());
        put("guard", format!("{}", 5.0 / lambda.sqrt()));
        put("r_cut", format!("{}", 24.0 / lambda.sqrt()));
        put("drops", "10000".into());
        put("realizations", "100".into());
        put("seed", "42".into());
        put("interference", "auto".into());
        put("ue_type", "TypeI".into());
        put("gamma_db_min", "-10".into());
        put("gamma_db_max", "20".into());
        put("gamma_points", "31".into());
        put("out_dir", "tricomp_out".into());
        Resolver { entries }
    }

    fn known(key: &str) -> Result<&'static str> {
        KNOWN_KEYS
            .iter()
            .find(|&&k| k == key)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown configuration key '{key}'")))
    }

    fn set(&mut self, key: &str, value: &str, prov: Provenance) -> Result<()> {
        let k = Self::known(key)?;
        self.entries.insert(k, (value.trim().to_string(), prov));
        Ok(())
    }

    fn get(&self, key: &str) -> &str {
        &self.entries[key].0
    }

    fn prov(&self, key: &str) -> Provenance {
        self.entries[key].1
    }

    fn f64_key(&self, key: &str) -> Result<f64> {
        self.get(key)
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("key '{key}': expected a number, got '{}'", self.get(key))))
    }

    fn u64_key(&self, key: &str) -> Result<u64> {
        self.get(key)
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("key '{key}': expected a nonnegative integer, got '{}'", self.get(key))))
    }

    fn u32_key(&self, key: &str) -> Result<u32> {
        self.get(key)
            .parse::<u32>()
            .map_err(|_| Error::Config(format!("key '{key}': expected a nonnegative integer, got '{}'", self.get(key))))
    }

    fn echo(&self) -> Vec<(String, String, Provenance)> {
        KNOWN_KEYS
            .iter()
            .map(|&k| {
                let (v, p) = &self.entries[k];
                (k.to_string(), v.clone(), *p)
            })
            .collect()
    }
}

fn parse_kv_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "config line {}: expected key=value, got '{line}'",
                lineno + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Resolve an experiment from CLI inputs. `overrides` are `--set key=value`
/// pairs and take priority over the config file, which takes priority over
/// figure defaults and global defaults. The output directory can also come
/// from the `TRICOMP_OUT_DIR` environment variable.
pub fn parse_config(
    figure: Option<&str>,
    config_path: Option<&Path>,
    overrides: &[(String, String)],
    out_dir_flag: Option<&Path>,
    quick: bool,
) -> Result<ExperimentSpec> {
    let file_text = match config_path {
        Some(p) => Some(fs::read_to_string(p)?),
        None => None,
    };
    resolve(
        figure,
        file_text.as_deref(),
        overrides,
        out_dir_flag,
        std::env::var(OUT_DIR_ENV).ok(),
        quick,
    )
}

fn resolve(
    figure_arg: Option<&str>,
    file_text: Option<&str>,
    overrides: &[(String, String)],
    out_dir_flag: Option<&Path>,
    env_out: Option<String>,
    quick: bool,
) -> Result<ExperimentSpec> {
    let file_kv = match file_text {
        Some(t) => parse_kv_text(t)?,
        None => Vec::new(),
    };
    for (k, _) in file_kv.iter().chain(overrides.iter()) {
        Resolver::known(k)?;
    }

    // the figure must be known before its defaults can be layered in
    let figure_str = overrides
        .iter()
        .rev()
        .find(|(k, _)| k == "figure")
        .map(|(_, v)| (v.clone(), Provenance::Flag))
        .or_else(|| figure_arg.map(|f| (f.to_string(), Provenance::Flag)))
        .or_else(|| {
            file_kv
                .iter()
                .rev()
                .find(|(k, _)| k == "figure")
                .map(|(_, v)| (v.clone(), Provenance::File))
        });
    let (figure, figure_prov) = match &figure_str {
        Some((v, p)) => (FigureId::from_str(v)?, *p),
        None => (FigureId::HeadlineSe, Provenance::Default),
    };

    let mut r = Resolver::with_defaults();
    r.set("figure", &figure.to_string(), figure_prov)?;
    for (k, v) in figure_defaults(figure) {
        if r.prov(k) == Provenance::Default {
            r.set(k, &v, Provenance::FigureDefault)?;
        }
    }
    if let Some(env_dir) = &env_out {
        r.set("out_dir", env_dir, Provenance::Env)?;
    }
    for (k, v) in &file_kv {
        r.set(k, v, Provenance::File)?;
    }
    for (k, v) in overrides {
        r.set(k, v, Provenance::Flag)?;
    }
    if let Some(dir) = out_dir_flag {
        r.set("out_dir", &dir.display().to_string(), Provenance::Flag)?;
    }

    // intensity-derived lengths follow lambda unless pinned explicitly
    let lambda = r.f64_key("lambda")?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Config(format!("key 'lambda': must be positive, got {lambda}")));
    }
    if matches!(r.prov("lambda"), Provenance::File | Provenance::Flag) {
        let derived = [
            ("guard", 5.0 / lambda.sqrt()),
            ("r_cut", 24.0 / lambda.sqrt()),
            ("lambda_prime", lambda / 3.0),
        ];
        for (k, v) in derived {
            if matches!(r.prov(k), Provenance::Default | Provenance::FigureDefault) {
                r.set(k, &format!("{v}"), Provenance::Default)?;
            }
        }
    }

    let mut params = ModelParams::new(lambda, r.f64_key("alpha")?, r.u32_key("antennas")?)?;
    params.mu = r.f64_key("mu")?;
    params.lambda_prime = r.f64_key("lambda_prime")?;
    params.omega_override = match r.get("omega") {
        "matched" => None,
        v => Some(v.parse::<f64>().map_err(|_| {
            Error::Config(format!("key 'omega': expected a number or 'matched', got '{v}'"))
        })?),
    };
    params.validate()?;

    let n_points = r.u32_key("gamma_points")?;
    let (db_min, db_max) = (r.f64_key("gamma_db_min")?, r.f64_key("gamma_db_max")?);
    if n_points == 0 || n_points > 20_001 {
        return Err(Error::Config(format!(
            "key 'gamma_points': need 1..=20001 grid points, got {n_points}"
        )));
    }
    if !(db_min <= db_max) {
        return Err(Error::Config(format!(
            "key 'gamma_db_min': lower bound {db_min} exceeds gamma_db_max {db_max}"
        )));
    }
    let gamma_grid: Vec<f64> = (0..n_points)
        .map(|i| {
            let t = if n_points == 1 {
                0.0
            } else {
                i as f64 / (n_points - 1) as f64
            };
            db_to_linear(db_min + t * (db_max - db_min))
        })
        .collect();

    let interference = r.get("interference").to_string();
    let interference_forced = match interference.as_str() {
        "auto" => None,
        v => Some(InterferenceMode::from_str(v)?),
    };

    let sim = SimConfig {
        params,
        window_side: r.f64_key("window")?,
        guard: r.f64_key("guard")?,
        r_cut: r.f64_key("r_cut")?,
        drops: r.u64_key("drops")?,
        realizations: r.u32_key("realizations")?,
        scheme: SchemeId::Jt,
        interference_mode: interference_forced.unwrap_or(InterferenceMode::Grouped19),
        ue_type: UeType::from_str(r.get("ue_type"))?,
        gamma_grid,
        master_seed: r.u64_key("seed")?,
    };
    sim.validate()?;

    Ok(ExperimentSpec {
        figure,
        sim,
        out_dir: PathBuf::from(r.get("out_dir")),
        quick,
        interference_forced,
        echo: r.echo(),
    })
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn fnum(v: f64) -> String {
    format!("{v}")
}

fn write_csv(
    spec: &ExperimentSpec,
    name: &str,
    notes: &[String],
    gamma_note: bool,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf> {
    let path = spec.out_dir.join(name);
    let mut buf = Vec::new();
    for n in notes {
        writeln!(buf, "# {n}")?;
    }
    if gamma_note {
        writeln!(buf, "# linear SIR = 10^(gamma_db / 10)")?;
    }
    writeln!(buf, "# resolved configuration:")?;
    for (k, v, p) in spec.echo() {
        writeln!(buf, "#   {k} = {v} [{p}]")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let buf = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer flush failed: {e}")))?;
    fs::write(&path, buf)?;
    Ok(path)
}

fn density_rows(h: &Histogram, analytic: Option<&dyn Fn(f64) -> f64>) -> Vec<Vec<String>> {
    (0..h.bins())
        .map(|i| {
            let c = h.center(i);
            let mut row = vec![fnum(c), fnum(h.density[i])];
            if let Some(f) = analytic {
                row.push(fnum(f(c)));
            }
            row
        })
        .collect()
}

fn clipped_kurtosis_pair(origin: &[f64], typical: &[f64]) -> Result<(f64, f64)> {
    let mut pool: Vec<f64> = origin.to_vec();
    pool.extend_from_slice(typical);
    let cap = quantile(&pool, 0.999)?;
    let clip = |xs: &[f64]| xs.iter().map(|&x| x.min(cap)).collect::<Vec<f64>>();
    Ok((
        excess_kurtosis(&clip(origin))?,
        excess_kurtosis(&clip(typical))?,
    ))
}

struct CoverageSeries {
    points: Vec<crate::montecarlo::GammaPoint>,
}

fn coverage_series(cfg: &SimConfig) -> Result<CoverageSeries> {
    let sirs = sir_samples(cfg)?;
    let points = coverage_points(&sirs, &cfg.gamma_grid)?;
    Ok(CoverageSeries { points })
}

fn db_grid(spec: &ExperimentSpec) -> Vec<f64> {
    spec.sim
        .gamma_grid
        .iter()
        .map(|&g| 10.0 * g.log10())
        .collect()
}

fn coverage_rows(
    dbs: &[f64],
    series: &CoverageSeries,
    analytic: Option<&[f64]>,
) -> Vec<Vec<String>> {
    dbs.iter()
        .enumerate()
        .map(|(i, &db)| {
            let p = &series.points[i];
            let mut row = vec![fnum(db)];
            if let Some(a) = analytic {
                row.push(fnum(a[i]));
            }
            row.extend([fnum(p.coverage), fnum(p.ci_lo), fnum(p.ci_hi)]);
            row
        })
        .collect()
}

/// Largest |mc - analytic| over the grid and the signed gap (mc - analytic)
/// at that point.
fn max_gap(series: &CoverageSeries, analytic: &[f64]) -> (f64, f64, f64) {
    let mut best = (0.0f64, 0.0f64, 0.0f64);
    for (p, &a) in series.points.iter().zip(analytic) {
        let gap = (p.coverage - a).abs();
        if gap > best.0 {
            best = (gap, p.coverage - a, p.gamma);
        }
    }
    best
}

fn run_headline(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let p = &spec.sim.params;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let targets = [
        (SchemeId::Jt, 2.24, 0.03),
        (SchemeId::Ops, 1.03, 0.03),
        (SchemeId::Rps, 0.27, 0.02),
    ];
    for &(scheme, target, tol) in &targets {
        let exact = spectral_efficiency(scheme, SeMethod::Exact, p)?;
        let approx = spectral_efficiency(scheme, SeMethod::Approx, p)?;
        let mut cfg = spec.sim.clone();
        cfg.scheme = scheme;
        cfg.interference_mode = spec.mode_for(scheme);
        let sirs = sir_samples(&cfg)?;
        let mc = se_from_sirs(&sirs)?;
        rows.push(vec![
            scheme.to_string(),
            fnum(exact),
            fnum(approx),
            fnum(mc.mean),
            fnum(mc.lo()),
            fnum(mc.hi()),
        ]);
        if p.antennas == 1 {
            let hit = (exact - target).abs() <= tol;
            lines.push(format!(
                "{scheme}: exact {exact:.4}, approx {approx:.4}, mc {:.4} [{:.4}, {:.4}]; reference {target} +/- {tol} -> {}",
                mc.mean,
                mc.lo(),
                mc.hi(),
                if hit { "within" } else { "OUTSIDE" },
            ));
        } else {
            lines.push(format!(
                "{scheme}: exact {exact:.4}, approx {approx:.4}, mc {:.4} [{:.4}, {:.4}] (reference targets apply at one antenna)",
                mc.mean,
                mc.lo(),
                mc.hi(),
            ));
        }
    }
    if p.antennas == 1 && p.omega_override.is_none() {
        let mut alt = p.clone();
        alt.omega_override = Some(3.0);
        let tau_alt = spectral_efficiency(SchemeId::Jt, SeMethod::Exact, &alt)?;
        lines.push(format!(
            "alternate coherent scale omega=3: JT exact {tau_alt:.4} (matched scale {:.6} reproduces the 2.24 target; omega=3 does not)",
            moment_match(1).omega
        ));
    }
    let file = write_csv(
        spec,
        "headline_se.csv",
        &["mean rate in nats per channel use for each scheme".into()],
        false,
        &["scheme", "exact", "approx", "mc_mean", "mc_ci_lo", "mc_ci_hi"],
        &rows,
    )?;
    Ok((vec![file], lines))
}

fn run_fig4(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let cfg = spec.sim.clone();
    let m = cfg.params.antennas;
    let samples = quantity_samples(PdfQuantity::SumT, &cfg)?;
    let h = histogram(&samples, None)?;
    let mm = moment_match(m);
    let mut files = Vec::new();
    for (mode, tag) in [(SumPdfMode::Exact, "exact"), (SumPdfMode::Approx, "approx")] {
        let f = |t: f64| sum_pdf(t, m, mode).unwrap_or(f64::NAN);
        let rows = density_rows(&h, Some(&f));
        files.push(write_csv(
            spec,
            &format!("fig4_sum_pdf_{tag}.csv"),
            &[format!(
                "squared-amplitude-sum density at {m} antennas; analytic column: {tag} form"
            )],
            false,
            &["bin_center", "density_mc", "density_analytic"],
            &rows,
        )?);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let second = samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64;
    let cdf = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            regularized_p(mm.m as f64, mm.m as f64 * t * t / mm.omega).unwrap_or(f64::NAN)
        }
    };
    let amps: Vec<f64> = samples.iter().map(|&x| x.sqrt()).collect();
    let ks = ks_vs_cdf(&amps, &cdf)?;
    let mut gap: f64 = 0.0;
    for i in 0..h.bins() {
        let c = h.center(i);
        let e = sum_pdf(c, m, SumPdfMode::Exact)?;
        let a = sum_pdf(c, m, SumPdfMode::Approx)?;
        gap = gap.max((e - a).abs());
    }
    let lines = vec![
        format!(
            "sum power: n={}, mean {mean:.4} (matched scale {:.6}), second moment {second:.2}",
            samples.len(),
            mm.omega
        ),
        format!("amplitude KS vs matched density {ks:.4}; max |exact - approx| density gap {gap:.5}"),
    ];
    Ok((files, lines))
}

fn run_fig5(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let panels: Vec<u32> = if spec.explicit("antennas") {
        vec![spec.sim.params.antennas]
    } else {
        vec![2, 4]
    };
    let mut files = Vec::new();
    let mut lines = Vec::new();
    for m in panels {
        let mut cfg = spec.sim.clone();
        cfg.params = cfg.params.with_antennas(m);
        let exact = quantity_samples(PdfQuantity::IExact18, &cfg)?;
        let grouped = quantity_samples(PdfQuantity::IGrouped19, &cfg)?;
        for (tag, xs) in [("exact18", &exact), ("grouped19", &grouped)] {
            let h = histogram(xs, None)?;
            files.push(write_csv(
                spec,
                &format!("fig5_m{m}_{tag}.csv"),
                &[format!("aggregate interference density, {m} antennas, {tag} accounting")],
                false,
                &["bin_center", "density_mc"],
                &density_rows(&h, None),
            )?);
        }
        let ks = ks_two_sample(&exact, &grouped)?;
        let me = exact.iter().sum::<f64>() / exact.len() as f64;
        let mg = grouped.iter().sum::<f64>() / grouped.len() as f64;
        lines.push(format!(
            "M={m}: exact-vs-grouped KS {ks:.4}, mean ratio grouped/exact {:.4}",
            mg / me
        ));
    }
    lines.push(
        "cross-beam gains do not depend on the transmitter antenna count, so the panels coincide under a shared seed"
            .into(),
    );
    Ok((files, lines))
}

fn run_fig6(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let dbs = db_grid(spec);
    let mut files = Vec::new();
    let mut lines = Vec::new();
    for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
        let mut cfg = spec.sim.clone();
        cfg.scheme = scheme;
        cfg.interference_mode = spec.mode_for(scheme);
        let series = coverage_series(&cfg)?;
        let analytic: Option<Vec<f64>> = if cfg.ue_type == UeType::TypeI {
            Some(
                cfg.gamma_grid
                    .iter()
                    .map(|&g| coverage_value(scheme, g, &cfg.params))
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        };
        let rows = coverage_rows(&dbs, &series, analytic.as_deref());
        let header: &[&str] = if analytic.is_some() {
            &["gamma_db", "analytic", "mc_mean", "mc_ci_lo", "mc_ci_hi"]
        } else {
            &["gamma_db", "mc_mean", "mc_ci_lo", "mc_ci_hi"]
        };
        let name = format!("fig6_{}.csv", scheme.to_string().to_lowercase());
        files.push(write_csv(
            spec,
            &name,
            &[format!(
                "coverage probability vs threshold, scheme {scheme}, interference {}",
                cfg.interference_mode
            )],
            true,
            header,
            &rows,
        )?);
        if let Some(a) = &analytic {
            let (gap, signed, at) = max_gap(&series, a);
            lines.push(format!(
                "{scheme}: max |mc - analytic| {gap:.4} at gamma {:.3} ({} there)",
                at,
                if signed >= 0.0 {
                    "analytic below mc"
                } else {
                    "analytic above mc"
                }
            ));
        } else {
            lines.push(format!("{scheme}: mc curve only (no closed form off the equidistant class)"));
        }
    }
    Ok((files, lines))
}

fn run_fig7(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let cfg = spec.sim.clone();
    let lambda = cfg.params.lambda;
    let origin = quantity_samples(PdfQuantity::S1Origin, &cfg)?;
    let typical = quantity_samples(PdfQuantity::S1Typical, &cfg)?;
    let f = |x: f64| levy_pdf(x, lambda);
    let mut files = Vec::new();
    for (tag, xs) in [("origin", &origin), ("typical", &typical)] {
        let h = histogram(xs, None)?;
        files.push(write_csv(
            spec,
            &format!("fig7_s1_{tag}.csv"),
            &[
                format!("aggregate received power including the serving set, {tag} evaluation point"),
                "analytic column: stable-law density for the stationary point".to_string(),
            ],
            false,
            &["bin_center", "density_mc", "density_analytic"],
            &density_rows(&h, Some(&f)),
        )?);
    }
    let ks = ks_vs_cdf(&origin, &|x| levy_cdf(x, lambda).unwrap_or(f64::NAN))?;
    let (k_o, k_t) = clipped_kurtosis_pair(&origin, &typical)?;
    let lines = vec![
        format!("origin sample vs stable law: KS {ks:.4} (n={})", origin.len()),
        format!(
            "clipped excess kurtosis: origin {k_o:.2}, typical {k_t:.2} ({})",
            if k_t > k_o {
                "typical point shows the heavier peak, as expected"
            } else {
                "UNEXPECTED ordering"
            }
        ),
    ];
    Ok((files, lines))
}

fn run_fig8(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let cfg = spec.sim.clone();
    let origin = quantity_samples(PdfQuantity::S2Origin, &cfg)?;
    let typical = quantity_samples(PdfQuantity::S2Typical, &cfg)?;
    let mut files = Vec::new();
    for (tag, xs) in [("origin", &origin), ("typical", &typical)] {
        let h = histogram(xs, None)?;
        files.push(write_csv(
            spec,
            &format!("fig8_s2_{tag}.csv"),
            &[format!("interference power outside the serving set, {tag} evaluation point")],
            false,
            &["bin_center", "density_mc"],
            &density_rows(&h, None),
        )?);
    }
    let ks = ks_two_sample(&origin, &typical)?;
    let (k_o, k_t) = clipped_kurtosis_pair(&origin, &typical)?;
    let lines = vec![format!(
        "origin vs typical: KS {ks:.4}; clipped excess kurtosis origin {k_o:.2}, typical {k_t:.2}"
    )];
    Ok((files, lines))
}

fn run_fig9(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut by_scheme: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut worst_rel: f64 = 0.0;
    for m in 1..=4u32 {
        for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
            let p = spec.sim.params.with_antennas(m);
            let exact = spectral_efficiency(scheme, SeMethod::Exact, &p)?;
            let approx = spectral_efficiency(scheme, SeMethod::Approx, &p)?;
            let mut cfg = spec.sim.clone();
            cfg.params = p;
            cfg.scheme = scheme;
            cfg.interference_mode = spec.mode_for(scheme);
            let mc = se_from_sirs(&sir_samples(&cfg)?)?;
            rows.push(vec![
                m.to_string(),
                scheme.to_string(),
                fnum(exact),
                fnum(approx),
                fnum(mc.mean),
                fnum(mc.lo()),
                fnum(mc.hi()),
            ]);
            by_scheme.entry(scheme.to_string()).or_default().push(exact);
            worst_rel = worst_rel.max((approx - exact).abs() / exact);
        }
    }
    for (scheme, vals) in &by_scheme {
        let monotone = vals.windows(2).all(|w| w[1] > w[0]);
        lines.push(format!(
            "{scheme}: exact rate {} in antenna count ({})",
            if monotone { "increases" } else { "is NOT monotone" },
            vals.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" -> ")
        ));
    }
    lines.push(format!(
        "largest approx-vs-exact relative gap across all cells: {:.2}%",
        100.0 * worst_rel
    ));
    let file = write_csv(
        spec,
        "fig9_se.csv",
        &["mean rate vs antenna count for each scheme".into()],
        false,
        &["M", "scheme", "exact", "approx", "mc_mean", "mc_ci_lo", "mc_ci_hi"],
        &rows,
    )?;
    Ok((vec![file], lines))
}

fn nearest_grid_index(dbs: &[f64], want: f64) -> usize {
    let mut best = 0usize;
    for (i, &d) in dbs.iter().enumerate() {
        if (d - want).abs() < (dbs[best] - want).abs() {
            best = i;
        }
    }
    best
}

fn run_fig10(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let dbs = db_grid(spec);
    let types = [UeType::TypeI, UeType::TypeII, UeType::TypeIII];
    let mut files = Vec::new();
    let mut lines = Vec::new();
    let mut curves: BTreeMap<(String, String), CoverageSeries> = BTreeMap::new();
    for scheme in [SchemeId::Jt, SchemeId::PvNoComp] {
        for ue in types {
            let mut cfg = spec.sim.clone();
            cfg.scheme = scheme;
            cfg.ue_type = ue;
            cfg.interference_mode = spec.mode_for(scheme);
            let series = coverage_series(&cfg)?;
            let analytic: Option<Vec<f64>> = if scheme == SchemeId::Jt && ue == UeType::TypeI {
                Some(
                    cfg.gamma_grid
                        .iter()
                        .map(|&g| coverage_value(scheme, g, &cfg.params))
                        .collect::<Result<_>>()?,
                )
            } else {
                None
            };
            let rows = coverage_rows(&dbs, &series, analytic.as_deref());
            let header: &[&str] = if analytic.is_some() {
                &["gamma_db", "analytic", "mc_mean", "mc_ci_lo", "mc_ci_hi"]
            } else {
                &["gamma_db", "mc_mean", "mc_ci_lo", "mc_ci_hi"]
            };
            let name = format!(
                "fig10_{}_{}.csv",
                scheme.to_string().to_lowercase(),
                ue.to_string().to_lowercase()
            );
            files.push(write_csv(
                spec,
                &name,
                &[format!("coverage vs threshold, {scheme} service, {ue} placement")],
                true,
                header,
                &rows,
            )?);
            curves.insert((scheme.to_string(), ue.to_string()), series);
        }
    }
    let at = nearest_grid_index(&dbs, -5.0);
    let c = |s: &str, u: &str| curves[&(s.to_string(), u.to_string())].points[at].coverage;
    lines.push(format!(
        "nearest-station service at {:.1} dB: TypeI {:.3} < TypeII {:.3} < TypeIII {:.3} ({})",
        dbs[at],
        c("PV_NoCoMP", "TypeI"),
        c("PV_NoCoMP", "TypeII"),
        c("PV_NoCoMP", "TypeIII"),
        if c("PV_NoCoMP", "TypeI") < c("PV_NoCoMP", "TypeII")
            && c("PV_NoCoMP", "TypeII") < c("PV_NoCoMP", "TypeIII")
        {
            "ordering holds"
        } else {
            "ordering VIOLATED"
        }
    ));
    for ue in types {
        let jt = &curves[&("JT".to_string(), ue.to_string())];
        let pv = &curves[&("PV_NoCoMP".to_string(), ue.to_string())];
        let min_margin = jt
            .points
            .iter()
            .zip(&pv.points)
            .map(|(a, b)| a.coverage - b.coverage)
            .fold(f64::INFINITY, f64::min);
        lines.push(format!(
            "{ue}: coherent service minus nearest-station, minimum margin over the grid {min_margin:+.3}"
        ));
    }
    Ok((files, lines))
}

fn run_fig11(spec: &ExperimentSpec) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let types = [UeType::TypeI, UeType::TypeII, UeType::TypeIII];
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let tau1 = spectral_efficiency(SchemeId::Jt, SeMethod::Exact, &spec.sim.params)?;
    for ue in types {
        for scheme in [SchemeId::Jt, SchemeId::PvDyn3] {
            let mut cfg = spec.sim.clone();
            cfg.scheme = scheme;
            cfg.ue_type = ue;
            cfg.interference_mode = spec.mode_for(scheme);
            let mc = se_from_sirs(&sir_samples(&cfg)?)?;
            let exact = if scheme == SchemeId::Jt && ue == UeType::TypeI {
                fnum(tau1)
            } else {
                String::new()
            };
            rows.push(vec![
                format!("{scheme} {ue}"),
                exact,
                fnum(mc.mean),
                fnum(mc.lo()),
                fnum(mc.hi()),
            ]);
        }
        let mut cfg = spec.sim.clone();
        cfg.ue_type = ue;
        let diff = paired_dyn3_se_diff(&cfg)?;
        lines.push(format!(
            "{ue}: paired rate difference (nearest-three minus structural) {:+.4} [{:+.4}, {:+.4}]{}",
            diff.mean,
            diff.lo(),
            diff.hi(),
            if ue == UeType::TypeI {
                " (identical serving sets; difference is rounding)"
            } else {
                ""
            }
        ));
    }
    let cmp = pv_dyn3_se_comparison(&spec.sim.params)?;
    lines.push(format!(
        "analytic equidistant comparison: structural {:.4} vs per-station field {:.4}, margin {:+.4}",
        cmp.se_delaunay, cmp.se_pv, cmp.margin
    ));
    let file = write_csv(
        spec,
        "fig11_se.csv",
        &["mean rate per placement class: structural cooperation vs nearest-three selection".into()],
        false,
        &["scheme", "exact", "mc_mean", "mc_ci_lo", "mc_ci_hi"],
        &rows,
    )?;
    Ok((vec![file], lines))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    fs::create_dir_all(&spec.out_dir)?;
    let (files, lines) = match spec.figure {
        FigureId::Fig4 => run_fig4(spec)?,
        FigureId::Fig5 => run_fig5(spec)?,
        FigureId::Fig6 => run_fig6(spec)?,
        FigureId::Fig7 => run_fig7(spec)?,
        FigureId::Fig8 => run_fig8(spec)?,
        FigureId::Fig9 => run_fig9(spec)?,
        FigureId::Fig10 => run_fig10(spec)?,
        FigureId::Fig11 => run_fig11(spec)?,
        FigureId::HeadlineSe => run_headline(spec)?,
    };
    let mut summary = format!("{}:\n", spec.figure);
    for l in &lines {
        summary.push_str("  ");
        summary.push_str(l);
        summary.push('\n');
    }
    Ok(ExperimentReport { files, summary })
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{}: {} - {}\n",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.detail
            ));
        }
        let pass = self.checks.iter().filter(|c| c.pass).count();
        out.push_str(&format!("{pass}/{} checks passed\n", self.checks.len()));
        out
    }
}

fn check(name: &str, pass: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        pass,
        detail,
    }
}

/// Dense lower-triangular-Toeplitz matrix exponential by scaling and
/// squaring; independent oracle for the column recursion.
fn dense_ltt_exp(col: &[f64]) -> Vec<f64> {
    let n = col.len();
    let mat = |c: &[f64]| -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                m[i][j] = c[i - j];
            }
        }
        m
    };
    let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..=i {
                let aik = a[i][k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..=k {
                    c[i][j] += aik * b[k][j];
                }
            }
        }
        c
    };
    let norm = col.iter().map(|x| x.abs()).sum::<f64>();
    let scalings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = (0.5f64).powi(scalings as i32);
    let t = mat(&col.iter().map(|&x| x * scale).collect::<Vec<_>>());
    // Taylor on the scaled matrix
    let mut term = {
        let mut id = vec![vec![0.0; n]; n];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        id
    };
    let mut acc = term.clone();
    for k in 1..=24 {
        term = mul(&term, &t);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                acc[i][j] += term[i][j];
            }
        }
    }
    let mut e = acc;
    for _ in 0..scalings {
        e = mul(&e, &e);
    }
    (0..n).map(|i| e[i][0]).collect()
}

fn check_moment_windows() -> CheckResult {
    let m1 = moment_match(1);
    let m2 = moment_match(2);
    let pass = (7.65..=7.75).contains(&m1.omega)
        && m1.m == 3
        && (5.7..=5.9).contains(&m2.m_raw)
        && m2.m == 6
        && (16.5..=16.7).contains(&m2.omega);
    check(
        "moment_windows",
        pass,
        format!(
            "one antenna: scale {:.6}, shape {}; two antennas: raw shape {:.3} -> {}, scale {:.6}",
            m1.omega, m1.m, m2.m_raw, m2.m, m2.omega
        ),
    )
}

fn check_rate_window(scheme: SchemeId, target: f64, tol: f64, p: &ModelParams) -> CheckResult {
    let name = format!("rate_{}_window", scheme.to_string().to_lowercase());
    match spectral_efficiency(scheme, SeMethod::Exact, p) {
        Ok(v) => check(
            &name,
            (v - target).abs() <= tol,
            format!("exact {v:.6} vs reference {target} +/- {tol}"),
        ),
        Err(e) => check(&name, false, format!("evaluation failed: {e}")),
    }
}

fn check_alternate_scale(p: &ModelParams) -> CheckResult {
    let mut alt = p.clone();
    alt.omega_override = Some(3.0);
    match spectral_efficiency(SchemeId::Jt, SeMethod::Exact, &alt) {
        Ok(v) => check(
            "rate_alternate_scale",
            (v - 2.24).abs() > 0.03,
            format!("omega=3 gives {v:.4}; the matched scale, not omega=3, reproduces the 2.24 target"),
        ),
        Err(e) => check("rate_alternate_scale", false, format!("evaluation failed: {e}")),
    }
}

fn check_intensity_invariance() -> CheckResult {
    let grid: Vec<f64> = (0..31).map(|i| db_to_linear(-10.0 + i as f64)).collect();
    let mut worst: f64 = 0.0;
    for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
        let mut curves = Vec::new();
        for lambda in [0.005, 0.02, 0.08] {
            let p = match ModelParams::new(lambda, 4.0, 1) {
                Ok(p) => p,
                Err(e) => return check("intensity_invariance", false, format!("{e}")),
            };
            let c: Result<Vec<f64>> = grid.iter().map(|&g| coverage_value(scheme, g, &p)).collect();
            match c {
                Ok(c) => curves.push(c),
                Err(e) => return check("intensity_invariance", false, format!("{e}")),
            }
        }
        for other in &curves[1..] {
            for (a, b) in curves[0].iter().zip(other) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    check(
        "intensity_invariance",
        worst <= 1e-6,
        format!("max curve gap across intensities {worst:.2e} (tolerance 1e-6)"),
    )
}

fn check_closed_form(points: usize) -> CheckResult {
    let p = ModelParams::default_network();
    let mut worst: f64 = 0.0;
    for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
        for i in 0..points {
            let db = -10.0 + 30.0 * i as f64 / (points - 1) as f64;
            let g = db_to_linear(db);
            let a = match coverage_closed_form_m1(scheme, g, &p) {
                Ok(v) => v,
                Err(e) => return check("closed_form_agreement", false, format!("{e}")),
            };
            let b = match coverage_value(scheme, g, &p) {
                Ok(v) => v,
                Err(e) => return check("closed_form_agreement", false, format!("{e}")),
            };
            worst = worst.max((a - b).abs());
        }
    }
    check(
        "closed_form_agreement",
        worst <= 1e-6,
        format!("max |closed form - general path| {worst:.2e} over {points} points x 3 schemes"),
    )
}

fn check_toeplitz_oracle() -> CheckResult {
    let mut worst: f64 = 0.0;
    for trial in 0..20u64 {
        let col: Vec<f64> = (0..6u64)
            .map(|j| {
                let u = keyed_uniform(1234, StreamTag::Mark, &[trial, j]);
                if j == 0 {
                    6.0 * u - 3.0
                } else {
                    4.0 * u - 2.0
                }
            })
            .collect();
        let dense = dense_ltt_exp(&col);
        let fast = match ToeplitzFirstColumn::new(col).and_then(|c| ltt_exp(&c)) {
            Ok(q) => q.entries,
            Err(e) => return check("toeplitz_dense_oracle", false, format!("{e}")),
        };
        for (a, b) in fast.iter().zip(&dense) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    check(
        "toeplitz_dense_oracle",
        worst <= 1e-10,
        format!("max relative gap vs dense exponential {worst:.2e} over 20 random 6x6 columns"),
    )
}

fn check_transform_derivatives() -> CheckResult {
    let p = ModelParams::default_network();
    let u = 1.3;
    let gamma = 0.8;
    let (p1, p2) = (p.clone(), p.clone());
    let columns: Vec<(&str, Box<dyn Fn(f64) -> Result<AffineColumn>>)> = vec![
        ("coherent", Box::new(move |g: f64| jt_column(g, &p))),
        ("selection", Box::new(move |g: f64| ops_term_column(1, g, &p1))),
        ("random", Box::new(move |g: f64| rps_column(g, &p2))),
    ];
    let mut worst: f64 = 0.0;
    for (tag, col_at) in &columns {
        let f = |g: f64| -> Result<f64> {
            let c = col_at(g)?;
            Ok(c.at_u(u)[0].exp())
        };
        let q = match col_at(gamma)
            .and_then(|c| ToeplitzFirstColumn::new(c.at_u(u)))
            .and_then(|c| ltt_exp(&c))
        {
            Ok(q) => q.entries,
            Err(e) => return check("transform_derivatives", false, format!("{tag}: {e}")),
        };
        let evals = |offsets: &[f64], h: f64| -> Result<Vec<f64>> {
            offsets.iter().map(|&o| f(gamma + o * h)).collect()
        };
        // central stencils for the first three derivatives
        let d = |k: usize| -> Result<f64> {
            match k {
                1 => {
                    let h = 1e-5;
                    let v = evals(&[-1.0, 1.0], h)?;
                    Ok((v[1] - v[0]) / (2.0 * h))
                }
                2 => {
                    let h = 1e-4;
                    let v = evals(&[-1.0, 0.0, 1.0], h)?;
                    Ok((v[2] - 2.0 * v[1] + v[0]) / (h * h))
                }
                _ => {
                    let h = 1e-3;
                    let v = evals(&[-2.0, -1.0, 1.0, 2.0], h)?;
                    Ok((v[3] - 2.0 * v[2] + 2.0 * v[1] - v[0]) / (2.0 * h * h * h))
                }
            }
        };
        for k in 1..=3usize {
            if k >= q.len() {
                break;
            }
            // the recursion stores (-g)^k/k! F^(k)
            let mut fact = 1.0;
            for j in 1..=k {
                fact *= j as f64;
            }
            let machine = q[k] * fact / (-gamma).powi(k as i32);
            let fd = match d(k) {
                Ok(v) => v,
                Err(e) => return check("transform_derivatives", false, format!("{tag}: {e}")),
            };
            worst = worst.max((machine - fd).abs() / fd.abs().max(1e-12));
        }
    }
    check(
        "transform_derivatives",
        worst <= 1e-4,
        format!("max relative gap recursion-vs-finite-difference {worst:.2e}, orders 1..3"),
    )
}

fn check_delaunay_brute_force(sets: usize) -> CheckResult {
    let side = 300.0;
    let window = match Window::new(side) {
        Ok(w) => w,
        Err(e) => return check("delaunay_brute_force", false, format!("{e}")),
    };
    for set in 0..sets as u64 {
        let pts: Vec<Point2D> = (0..100u64)
            .map(|i| {
                Point2D::new(
                    side * keyed_uniform(77, StreamTag::Ppp, &[set, i, 0]),
                    side * keyed_uniform(77, StreamTag::Ppp, &[set, i, 1]),
                )
            })
            .collect();
        let net = match NetworkRealization::build(pts.clone(), window, 10.0) {
            Ok(n) => n,
            Err(e) => return check("delaunay_brute_force", false, format!("set {set}: {e}")),
        };
        for (t, tri) in net.tris.iter().enumerate() {
            let c = net.circumcenters[t];
            let r = net.circumradii[t];
            for (i, p) in pts.iter().enumerate() {
                if tri.contains(&(i as u32)) {
                    continue;
                }
                if p.dist(c) < r * (1.0 - 1e-9) {
                    return check(
                        "delaunay_brute_force",
                        false,
                        format!("set {set}: station {i} inside circumcircle of triangle {t}"),
                    );
                }
            }
            let mut near: Vec<u32> = net.k_nearest_bs(c, 3).into_iter().map(|(i, _)| i).collect();
            near.sort_unstable();
            let mut v = *tri;
            v.sort_unstable();
            if near != v {
                return check(
                    "delaunay_brute_force",
                    false,
                    format!("set {set}: dual vertex of triangle {t} not matched by nearest-3"),
                );
            }
        }
    }
    check(
        "delaunay_brute_force",
        true,
        format!("{sets} random 100-station sets: empty circumcircles and dual-vertex nearest-3 verified"),
    )
}

fn desk_cfg(seed: u64) -> SimConfig {
    let mut cfg = SimConfig::desk_scale(ModelParams::default_network());
    cfg.window_side = 500.0;
    cfg.drops = 10_000;
    cfg.realizations = 100;
    cfg.master_seed = seed;
    cfg
}

fn check_typei_distance_law(seed: u64) -> CheckResult {
    let mut cfg = desk_cfg(seed);
    cfg.window_side = 360.0;
    cfg.drops = 20_000;
    let lambda = cfg.params.lambda;
    let ds = match typical_distance_samples(&cfg) {
        Ok(d) => d,
        Err(e) => return check("typei_distance_law", false, format!("{e}")),
    };
    let cdf = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            let u = lambda * std::f64::consts::PI * x * x;
            1.0 - (1.0 + u) * (-u).exp()
        }
    };
    match ks_vs_cdf(&ds, &cdf) {
        Ok(ks) => check(
            "typei_distance_law",
            ks < 0.02,
            format!("KS vs equidistant-distance law {ks:.4} at n={} (tolerance 0.02)", ds.len()),
        ),
        Err(e) => check("typei_distance_law", false, format!("{e}")),
    }
}

fn check_interference_gap(seed: u64) -> CheckResult {
    let mut details = Vec::new();
    let mut pass = true;
    for m in [2u32, 4] {
        let mut cfg = desk_cfg(seed);
        cfg.drops = 20_000;
        cfg.params = cfg.params.with_antennas(m);
        let a = match quantity_samples(PdfQuantity::IExact18, &cfg) {
            Ok(v) => v,
            Err(e) => return check("interference_model_gap", false, format!("{e}")),
        };
        let b = match quantity_samples(PdfQuantity::IGrouped19, &cfg) {
            Ok(v) => v,
            Err(e) => return check("interference_model_gap", false, format!("{e}")),
        };
        let ks = match ks_two_sample(&a, &b) {
            Ok(v) => v,
            Err(e) => return check("interference_model_gap", false, format!("{e}")),
        };
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        pass &= ks < 0.03;
        details.push(format!("M={m}: KS {ks:.4} (tolerance 0.03), mean ratio {:.4}", mb / ma));
    }
    check("interference_model_gap", pass, details.join("; "))
}

fn check_coefficient_independence(seed: u64) -> CheckResult {
    let n = 20_000u64;
    let a = effective_coefficient_gain_samples(n, 1, seed);
    let b = effective_coefficient_gain_samples(n, 4, seed ^ 0x55aa);
    let exp_cdf = |x: f64| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() };
    let (Ok(k1), Ok(k4), Ok(kab)) = (
        ks_vs_cdf(&a, &exp_cdf),
        ks_vs_cdf(&b, &exp_cdf),
        ks_two_sample(&a, &b),
    ) else {
        return check("coefficient_antenna_independence", false, "KS evaluation failed".into());
    };
    check(
        "coefficient_antenna_independence",
        k1 < 0.02 && k4 < 0.02 && kab < 0.02,
        format!("beamformed cross-gain: KS vs unit exponential {k1:.4} (1 antenna), {k4:.4} (4 antennas); two-sample {kab:.4}"),
    )
}

fn check_aggregate_power(seed: u64) -> (CheckResult, CheckResult) {
    let mut cfg = desk_cfg(seed);
    cfg.drops = 20_000;
    let lambda = cfg.params.lambda;
    let origin = quantity_samples(PdfQuantity::S1Origin, &cfg);
    let typical = quantity_samples(PdfQuantity::S1Typical, &cfg);
    let (origin, typical) = match (origin, typical) {
        (Ok(o), Ok(t)) => (o, t),
        (Err(e), _) | (_, Err(e)) => {
            let msg = format!("{e}");
            return (
                check("aggregate_power_law", false, msg.clone()),
                check("aggregate_kurtosis_order", false, msg),
            );
        }
    };
    let law = match ks_vs_cdf(&origin, &|x| levy_cdf(x, lambda).unwrap_or(f64::NAN)) {
        Ok(ks) => check(
            "aggregate_power_law",
            ks < 0.03,
            format!("stationary-point power vs stable law: KS {ks:.4} (tolerance 0.03)"),
        ),
        Err(e) => check("aggregate_power_law", false, format!("{e}")),
    };
    let kurt = match clipped_kurtosis_pair(&origin, &typical) {
        Ok((k_o, k_t)) => check(
            "aggregate_kurtosis_order",
            k_t > k_o,
            format!("clipped excess kurtosis origin {k_o:.2} vs typical {k_t:.2}"),
        ),
        Err(e) => check("aggregate_kurtosis_order", false, format!("{e}")),
    };
    (law, kurt)
}

struct CoverageCell {
    scheme: SchemeId,
    m: u32,
    sirs: Vec<f64>,
    points: Vec<crate::montecarlo::GammaPoint>,
}

fn coverage_cells(seed: u64) -> Result<Vec<CoverageCell>> {
    let grid: Vec<f64> = (0..13).map(|i| db_to_linear(-10.0 + 2.5 * i as f64)).collect();
    let mut cells = Vec::new();
    for m in [1u32, 2] {
        for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
            let mut cfg = desk_cfg(seed);
            cfg.params = cfg.params.with_antennas(m);
            cfg.scheme = scheme;
            cfg.interference_mode = match scheme {
                SchemeId::Jt => InterferenceMode::Grouped19,
                _ => InterferenceMode::PerBs,
            };
            cfg.gamma_grid = grid.clone();
            let sirs = sir_samples(&cfg)?;
            let points = coverage_points(&sirs, &grid)?;
            cells.push(CoverageCell { scheme, m, sirs, points });
        }
    }
    Ok(cells)
}

fn check_coverage_cells(cells: &[CoverageCell]) -> Vec<CheckResult> {
    // per-cell cap plus one direction check at the overall widest gap; the
    // sign at near-noise-floor cells is sampling noise, not model error
    let mut out = Vec::new();
    let mut global = (0.0f64, 0.0f64);
    let mut global_name = String::new();
    for cell in cells {
        let name = format!(
            "coverage_gap_{}_m{}",
            cell.scheme.to_string().to_lowercase(),
            cell.m
        );
        let p = ModelParams::default_network().with_antennas(cell.m);
        let mut worst = (0.0f64, 0.0f64);
        let mut failed: Option<String> = None;
        for gp in &cell.points {
            match coverage_value(cell.scheme, gp.gamma, &p) {
                Ok(a) => {
                    let gap = (gp.coverage - a).abs();
                    if gap > worst.0 {
                        worst = (gap, gp.coverage - a);
                    }
                }
                Err(e) => {
                    failed = Some(format!("{e}"));
                    break;
                }
            }
        }
        if worst.0 > global.0 {
            global = worst;
            global_name = name.clone();
        }
        out.push(match failed {
            Some(msg) => check(&name, false, msg),
            None => check(
                &name,
                worst.0 <= 0.05,
                format!(
                    "max |mc - analytic| {:.4} (tolerance 0.05), signed {:+.4} at the widest point",
                    worst.0, worst.1
                ),
            ),
        });
    }
    if !cells.is_empty() {
        out.push(check(
            "coverage_underestimation_direction",
            global.1 >= 0.0,
            format!("widest gap {:+.4} ({global_name}); analytic must not exceed mc there", global.1),
        ));
    }
    out
}

fn check_scheme_ordering(cells: &[CoverageCell]) -> CheckResult {
    let se_of = |s: SchemeId| -> Option<crate::montecarlo::MeanCi> {
        cells
            .iter()
            .find(|c| c.scheme == s && c.m == 1)
            .and_then(|c| se_from_sirs(&c.sirs).ok())
    };
    let (Some(jt), Some(ops), Some(rps)) = (se_of(SchemeId::Jt), se_of(SchemeId::Ops), se_of(SchemeId::Rps))
    else {
        return check("scheme_ordering", false, "missing rate estimates".into());
    };
    let stderr = |c: &crate::montecarlo::MeanCi| c.half_width / 1.959963984540054;
    let gap1 = jt.mean - ops.mean;
    let gap2 = ops.mean - rps.mean;
    let need1 = 3.0 * (stderr(&jt).powi(2) + stderr(&ops).powi(2)).sqrt();
    let need2 = 3.0 * (stderr(&ops).powi(2) + stderr(&rps).powi(2)).sqrt();
    check(
        "scheme_ordering",
        gap1 > need1 && gap2 > need2,
        format!(
            "rates {:.3} > {:.3} > {:.3}; margins {gap1:.3}/{gap2:.3} vs 3-stderr {need1:.3}/{need2:.3}",
            jt.mean, ops.mean, rps.mean
        ),
    )
}

fn check_baselines(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let grid: Vec<f64> = (0..13).map(|i| db_to_linear(-10.0 + 2.5 * i as f64)).collect();
    let at = nearest_grid_index(
        &grid.iter().map(|&g| 10.0 * g.log10()).collect::<Vec<_>>(),
        -5.0,
    );
    let mut curves: BTreeMap<(String, String), Vec<crate::montecarlo::GammaPoint>> = BTreeMap::new();
    for scheme in [SchemeId::Jt, SchemeId::PvNoComp] {
        for ue in [UeType::TypeI, UeType::TypeII, UeType::TypeIII] {
            let mut cfg = desk_cfg(seed ^ 0xbead);
            cfg.scheme = scheme;
            cfg.ue_type = ue;
            cfg.interference_mode = match scheme {
                SchemeId::Jt => InterferenceMode::Grouped19,
                _ => InterferenceMode::PerBs,
            };
            cfg.gamma_grid = grid.clone();
            match sir_samples(&cfg).and_then(|s| coverage_points(&s, &grid)) {
                Ok(pts) => {
                    curves.insert((scheme.to_string(), ue.to_string()), pts);
                }
                Err(e) => {
                    out.push(check("baseline_type_ordering", false, format!("{e}")));
                    return out;
                }
            }
        }
    }
    let c = |s: &str, u: &str| &curves[&(s.to_string(), u.to_string())];
    let (p1, p2, p3) = (
        c("PV_NoCoMP", "TypeI")[at].coverage,
        c("PV_NoCoMP", "TypeII")[at].coverage,
        c("PV_NoCoMP", "TypeIII")[at].coverage,
    );
    out.push(check(
        "baseline_type_ordering",
        p1 < p2 && p2 < p3,
        format!("nearest-station coverage at -5 dB: {p1:.3} < {p2:.3} < {p3:.3}"),
    ));
    let mut min_margin = f64::INFINITY;
    let mut ok = true;
    for ue in ["TypeI", "TypeII", "TypeIII"] {
        for (a, b) in c("JT", ue).iter().zip(c("PV_NoCoMP", ue)) {
            let noise = 3.0 * (a.ci_hi - a.ci_lo + b.ci_hi - b.ci_lo) / 2.0 / 1.959963984540054;
            let margin = a.coverage - b.coverage;
            min_margin = min_margin.min(margin);
            if margin < -noise {
                ok = false;
            }
        }
    }
    out.push(check(
        "delaunay_dominates_baseline",
        ok,
        format!("coherent-minus-nearest margin never below noise; minimum {min_margin:+.3}"),
    ));
    out
}

fn check_pv_rate_comparison() -> CheckResult {
    match pv_dyn3_se_comparison(&ModelParams::default_network()) {
        Ok(c) => check(
            "pv_rate_comparison",
            c.margin > 0.0,
            format!(
                "structural {:.4} vs per-station field {:.4}, margin {:+.4}",
                c.se_delaunay, c.se_pv, c.margin
            ),
        ),
        Err(e) => check("pv_rate_comparison", false, format!("{e}")),
    }
}

fn check_dynamic_selection(seed: u64) -> CheckResult {
    let mut details = Vec::new();
    let mut pass = true;
    for ue in [UeType::TypeI, UeType::TypeII, UeType::TypeIII] {
        let mut cfg = desk_cfg(seed ^ 0xd13);
        cfg.ue_type = ue;
        match paired_dyn3_se_diff(&cfg) {
            Ok(d) => {
                match ue {
                    UeType::TypeI => {
                        pass &= d.mean.abs() < 1e-9;
                        details.push(format!("{ue} diff {:+.2e} (tie)", d.mean));
                    }
                    _ => {
                        pass &= d.mean > -d.half_width;
                        details.push(format!("{ue} diff {:+.4} [{:+.4}, {:+.4}]", d.mean, d.lo(), d.hi()));
                    }
                }
            }
            Err(e) => return check("dynamic_selection_types", false, format!("{e}")),
        }
    }
    check("dynamic_selection_types", pass, details.join("; "))
}

fn check_perturbed_scale(p: &ModelParams) -> CheckResult {
    let mut alt = p.clone();
    alt.omega_override = Some(moment_match(1).omega * 1.1);
    match spectral_efficiency(SchemeId::Jt, SeMethod::Exact, &alt) {
        Ok(v) => check(
            "perturbed_scale_detected",
            (v - 2.24).abs() > 0.03,
            format!("10% scale perturbation moves the coherent rate to {v:.4}, outside the window"),
        ),
        Err(e) => check("perturbed_scale_detected", false, format!("{e}")),
    }
}

/// Desk-scale validation suite. `spec.quick` restricts to the analytic and
/// small-geometry checks (finishes in well under a minute); the full run
/// re-runs every cross-check with simulation-backed statistics.
pub fn validate(spec: &ExperimentSpec) -> Result<ValidationReport> {
    let p = ModelParams::default_network();
    let seed = spec.sim.master_seed;
    let mut checks = Vec::new();
    checks.push(check_moment_windows());
    checks.push(check_rate_window(SchemeId::Jt, 2.24, 0.03, &p));
    checks.push(check_rate_window(SchemeId::Ops, 1.03, 0.03, &p));
    checks.push(check_rate_window(SchemeId::Rps, 0.27, 0.02, &p));
    checks.push(check_alternate_scale(&p));
    checks.push(check_intensity_invariance());
    checks.push(check_closed_form(if spec.quick { 11 } else { 31 }));
    checks.push(check_toeplitz_oracle());
    checks.push(check_transform_derivatives());
    checks.push(check_delaunay_brute_force(if spec.quick { 3 } else { 20 }));
    checks.push(check_coefficient_independence(seed));
    checks.push(check_pv_rate_comparison());
    checks.push(check_perturbed_scale(&p));
    if !spec.quick {
        checks.push(check_typei_distance_law(seed));
        checks.push(check_interference_gap(seed));
        let (law, kurt) = check_aggregate_power(seed);
        checks.push(law);
        checks.push(kurt);
        let cells = coverage_cells(seed)?;
        checks.extend(check_coverage_cells(&cells));
        checks.push(check_scheme_ordering(&cells));
        checks.extend(check_baselines(seed));
        checks.push(check_dynamic_selection(seed));
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_simple(
        figure: Option<&str>,
        file_text: Option<&str>,
        overrides: &[(&str, &str)],
    ) -> Result<ExperimentSpec> {
        let sets: Vec<(String, String)> = overrides
            .iter()
            .map(|&(k, v)| (k.to_string(), v.to_string()))
            .collect();
        resolve(figure, file_text, &sets, None, None, false)
    }

    #[test]
    fn empty_config_resolves_to_defaults() {
        let spec = resolve_simple(None, None, &[]).unwrap();
        assert_eq!(spec.figure, FigureId::HeadlineSe);
        assert_eq!(spec.sim.params.lambda, 0.02);
        assert_eq!(spec.sim.params.alpha, 4.0);
        assert_eq!(spec.sim.master_seed, 42);
        assert_eq!(spec.out_dir, PathBuf::from("tricomp_out"));
        assert_eq!(spec.echo().len(), KNOWN_KEYS.len());
        // every value except the figure-scale ones is a plain default
        for (k, _, p) in spec.echo() {
            match k.as_str() {
                "window" | "realizations" | "drops" => assert_eq!(*p, Provenance::FigureDefault),
                _ => assert_eq!(*p, Provenance::Default, "key {k}"),
            }
        }
        assert_eq!(spec.sim.window_side, 700.0);
        assert_eq!(spec.sim.gamma_grid.len(), 31);
    }

    #[test]
    fn flag_override_wins_and_is_echoed() {
        let spec = resolve_simple(None, Some("alpha = 3.8\n"), &[("alpha", "3.5")]).unwrap();
        assert_eq!(spec.sim.params.alpha, 3.5);
        assert_eq!(spec.provenance("alpha"), Some(Provenance::Flag));
    }

    #[test]
    fn shallow_exponent_is_rejected_with_the_constraint() {
        let err = resolve_simple(None, None, &[("alpha", "2.0")]).unwrap_err();
        assert!(err.to_string().contains("path-loss exponent must exceed 2"), "{err}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = resolve_simple(None, Some("lambada = 0.01\n"), &[]).unwrap_err();
        assert!(err.to_string().contains("lambada"), "{err}");
    }

    #[test]
    fn intensity_override_rederives_lengths() {
        let spec = resolve_simple(None, None, &[("lambda", "0.08")]).unwrap();
        let root = 0.08f64.sqrt();
        assert!((spec.sim.guard - 5.0 / root).abs() < 1e-12);
        assert!((spec.sim.r_cut - 24.0 / root).abs() < 1e-12);
        assert!((spec.sim.params.lambda_prime - 0.08 / 3.0).abs() < 1e-15);
        // but an explicit guard survives an intensity change
        let spec2 = resolve_simple(None, None, &[("lambda", "0.08"), ("guard", "11")]).unwrap();
        assert_eq!(spec2.sim.guard, 11.0);
    }

    #[test]
    fn figure_defaults_yield_to_explicit_values() {
        let spec = resolve_simple(Some("fig4"), None, &[]).unwrap();
        assert_eq!(spec.sim.params.antennas, 2);
        assert_eq!(spec.sim.drops, 200_000);
        let spec2 = resolve_simple(Some("fig4"), Some("antennas = 3\n"), &[]).unwrap();
        assert_eq!(spec2.sim.params.antennas, 3);
        assert_eq!(spec2.provenance("antennas"), Some(Provenance::File));
    }

    #[test]
    fn figure_can_come_from_the_file() {
        let spec = resolve_simple(None, Some("figure = fig9\n"), &[]).unwrap();
        assert_eq!(spec.figure, FigureId::Fig9);
        assert_eq!(spec.provenance("figure"), Some(Provenance::File));
    }

    #[test]
    fn out_dir_priority_is_flag_file_env_default() {
        let sets = vec![];
        let env = Some("env_dir".to_string());
        let s1 = resolve(None, None, &sets, None, env.clone(), false).unwrap();
        assert_eq!(s1.out_dir, PathBuf::from("env_dir"));
        assert_eq!(s1.provenance("out_dir"), Some(Provenance::Env));
        let s2 = resolve(None, Some("out_dir = file_dir\n"), &sets, None, env.clone(), false).unwrap();
        assert_eq!(s2.out_dir, PathBuf::from("file_dir"));
        let s3 = resolve(
            None,
            Some("out_dir = file_dir\n"),
            &sets,
            Some(Path::new("flag_dir")),
            env,
            false,
        )
        .unwrap();
        assert_eq!(s3.out_dir, PathBuf::from("flag_dir"));
    }

    #[test]
    fn forced_interference_mode_applies_to_every_scheme() {
        let spec = resolve_simple(None, None, &[("interference", "Exact18")]).unwrap();
        assert_eq!(spec.mode_for(SchemeId::Jt), InterferenceMode::Exact18);
        assert_eq!(spec.mode_for(SchemeId::Rps), InterferenceMode::Exact18);
        let auto = resolve_simple(None, None, &[]).unwrap();
        assert_eq!(auto.mode_for(SchemeId::Jt), InterferenceMode::Grouped19);
        assert_eq!(auto.mode_for(SchemeId::Ops), InterferenceMode::PerBs);
    }

    #[test]
    fn gamma_grid_follows_the_db_keys() {
        let spec = resolve_simple(
            None,
            None,
            &[("gamma_db_min", "0"), ("gamma_db_max", "10"), ("gamma_points", "3")],
        )
        .unwrap();
        let g = &spec.sim.gamma_grid;
        assert_eq!(g.len(), 3);
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[1] - 10f64.powf(0.5)).abs() < 1e-12);
        assert!((g[2] - 10.0).abs() < 1e-12);
        assert!(resolve_simple(None, None, &[("gamma_points", "0")]).is_err());
        assert!(
            resolve_simple(None, None, &[("gamma_db_min", "5"), ("gamma_db_max", "-5")]).is_err()
        );
    }

    #[test]
    fn csv_artifacts_are_byte_identical_across_reruns() {
        let dir = std::env::temp_dir().join("tricomp_csv_test");
        fs::create_dir_all(&dir).unwrap();
        let mut spec = resolve_simple(None, None, &[]).unwrap();
        spec.out_dir = dir.clone();
        let rows = vec![
            vec!["-10".to_string(), fnum(0.125), fnum(1.0 / 3.0)],
            vec!["20".to_string(), fnum(0.5), fnum(2e-7)],
        ];
        let p1 = write_csv(&spec, "t.csv", &["note".into()], true, &["a", "b", "c"], &rows).unwrap();
        let first = fs::read(&p1).unwrap();
        let p2 = write_csv(&spec, "t.csv", &["note".into()], true, &["a", "b", "c"], &rows).unwrap();
        let second = fs::read(&p2).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.contains("# linear SIR = 10^(gamma_db / 10)"));
        assert!(text.contains("#   seed = 42 [default]"));
        assert!(text.lines().any(|l| l == "a,b,c"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn dense_toeplitz_oracle_agrees_on_a_known_case() {
        // exp of the scalar case embedded in 3x3
        let dense = dense_ltt_exp(&[0.7, 0.0, 0.0]);
        for v in &dense {
            assert!((v - dense[0]).abs() < 1e-14 || *v < 1.0);
        }
        assert!((dense[0] - 0.7f64.exp()).abs() < 1e-12);
        let r = check_toeplitz_oracle();
        assert!(r.pass, "{}", r.detail);
    }

    #[test]
    fn quick_validation_is_green_except_the_documented_rate_window() {
        let mut spec = resolve_simple(None, None, &[]).unwrap();
        spec.quick = true;
        let report = validate(&spec).unwrap();
        for c in &report.checks {
            if c.name == "rate_ops_window" {
                // documented standing gap: the selection-rate reference sits
                // just outside what the model family reproduces
                assert!(!c.pass, "expected the selection rate window to miss: {}", c.detail);
            } else {
                assert!(c.pass, "{}: {}", c.name, c.detail);
            }
        }
        assert!(!report.passed());
        assert!(report.render().contains("rate_ops_window: FAIL"));
    }
}
