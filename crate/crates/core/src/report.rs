//! Grid runs behind `sepekr report`: exact optima against the star formula,
//! class census, counting checks, the randomized lemma sweep, weighted
//! optima and graph invariants. Output is canonical: rows follow the grid
//! order and timings or node counts appear only when diagnostics are on.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::circ::{count_star_formula, enumerate_separated, Group};
use crate::compression::{lemma_sweep, LemmaSweep};
use crate::error::Result;
use crate::family::{are_isomorphic, b_family, star_family};
use crate::graph::{
    build_kneser, build_schrijver, chromatic_number, independence_number, ColoringConfig,
};
use crate::par::Parallelism;
use crate::search::{extremal_classes, max_intersecting, SearchConfig};
use crate::weighted::{gamma, verify_weighted_ekr, weight, WeightedReport};

/// Seed for the randomized lemma sweep in the default grid.
pub const DEFAULT_LEMMA_SEED: u64 = 20_240_901;
pub const DEFAULT_LEMMA_SAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    pub n: u32,
    pub r: u32,
    pub k: u32,
}

impl Point {
    pub fn new(n: u32, r: u32, k: u32) -> Self {
        Point { n, r, k }
    }
}

/// What a grid run covers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Grid {
    /// Exact optimum, star count and universe size.
    pub ekr: Vec<Point>,
    /// Points whose extremal classes are enumerated and checked.
    pub classes: Vec<Point>,
    pub lemmas: Vec<Point>,
    pub lemma_samples: usize,
    pub lemma_seed: u64,
    pub weighted: Vec<Point>,
    /// Graph invariants are checked when set.
    pub graphs: bool,
}

impl Grid {
    /// The acceptance grids.
    pub fn default_grid() -> Self {
        let mut ekr = Vec::new();
        for r in 2..=4 {
            for n in 2 * r..=14 {
                ekr.push(Point::new(n, r, 1));
            }
        }
        for r in 2..=3 {
            for n in 3 * r..=15 {
                ekr.push(Point::new(n, r, 2));
            }
        }
        for n in 8..=16 {
            ekr.push(Point::new(n, 2, 3));
        }

        let mut classes = Vec::new();
        for r in 2..=4 {
            for n in 2 * r..=12 {
                classes.push(Point::new(n, r, 1));
            }
        }
        for r in 2..=3 {
            for n in 3 * r..=14 {
                classes.push(Point::new(n, r, 2));
            }
        }

        let mut lemmas = Vec::new();
        for k in 1..=2 {
            for r in 2..=3 {
                for n in (k + 1) * r + 1..=12 {
                    lemmas.push(Point::new(n, r, k));
                }
            }
        }

        let mut weighted: Vec<Point> = (8..=12).map(|n| Point::new(n, 2, 1)).collect();
        weighted.extend([12, 13].map(|n| Point::new(n, 3, 1)));
        weighted.extend([12, 13].map(|n| Point::new(n, 2, 2)));

        Grid {
            ekr,
            classes,
            lemmas,
            lemma_samples: DEFAULT_LEMMA_SAMPLES,
            lemma_seed: DEFAULT_LEMMA_SEED,
            weighted,
            graphs: true,
        }
    }

    /// A few points of each kind, for smoke tests.
    pub fn quick_grid() -> Self {
        Grid {
            ekr: vec![
                Point::new(6, 2, 1),
                Point::new(7, 2, 1),
                Point::new(9, 2, 2),
            ],
            classes: vec![Point::new(6, 2, 1), Point::new(7, 2, 1)],
            lemmas: vec![Point::new(7, 2, 1), Point::new(8, 2, 2)],
            lemma_samples: 10,
            lemma_seed: DEFAULT_LEMMA_SEED,
            weighted: vec![Point::new(8, 2, 1)],
            graphs: true,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default_grid()),
            "quick" => Some(Self::quick_grid()),
            "empty" => Some(Self::default()),
            _ => None,
        }
    }
}

/// One row of the main table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EkrRow {
    pub n: u32,
    pub r: u32,
    pub k: u32,
    pub optimum: u64,
    pub formula: u128,
    #[serde(rename = "match")]
    pub matches: bool,
    /// Size of the star at 1, by enumeration.
    pub star_size: usize,
    /// `|[n]^(r)_k|`.
    pub universe: usize,
    /// `universe == k + 1` exactly when `n == (k+1)r`.
    pub base_case_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
}

impl EkrRow {
    pub fn passed(&self) -> bool {
        self.matches
            && self.star_size as u128 == self.formula
            && self.base_case_ok
            && self.classes_ok.unwrap_or(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedRow {
    #[serde(flatten)]
    pub report: WeightedReport,
    /// `|Γ(A)| = w(A)` for every member of the universe.
    pub gamma_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphRow {
    pub graph: String,
    pub quantity: String,
    pub value: u64,
    pub expected: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub ekr: Vec<EkrRow>,
    pub lemmas: Vec<LemmaSweep>,
    pub weighted: Vec<WeightedRow>,
    pub graphs: Vec<GraphRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.ekr.iter().all(EkrRow::passed)
            && self.lemmas.iter().all(LemmaSweep::all_passed)
            && self.weighted.iter().all(|w| w.report.pass && w.gamma_ok)
            && self.graphs.iter().all(|g| g.pass)
    }
}

/// For `k = 1` and `n = 2r + 2` several classes are expected and every
/// exceptional family must appear; otherwise exactly one class.
fn classes_as_expected(
    p: Point,
    classes: &[crate::family::SetFamily],
    group: Group,
) -> Result<bool> {
    if p.k == 1 && p.n == 2 * p.r + 2 {
        if classes.len() < 2 {
            return Ok(false);
        }
        for i in 1..=p.r / 2 {
            let b = b_family(p.r, i)?;
            let mut found = false;
            for c in classes {
                if are_isomorphic(&b, c, group)? {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    } else {
        Ok(classes.len() == 1)
    }
}

pub fn ekr_row(
    p: Point,
    with_classes: bool,
    cfg: &SearchConfig,
    diagnostics: bool,
) -> Result<EkrRow> {
    let start = Instant::now();
    let formula = count_star_formula(p.n, p.r, p.k)?;
    let universe = enumerate_separated(p.n, p.r, p.k)?.len();
    let star_size = star_family(p.n, p.r, p.k, 1)?.len();
    let (res, classes, classes_ok) = if with_classes {
        let res = extremal_classes(p.n, p.r, p.k, cfg)?;
        let cls = res.classes.clone().unwrap_or_default();
        let ok = classes_as_expected(p, &cls, cfg.group)?;
        (res, Some(cls.len()), Some(ok))
    } else {
        (max_intersecting(p.n, p.r, p.k, cfg)?, None, None)
    };
    let base = p.n == (p.k + 1) * p.r;
    Ok(EkrRow {
        n: p.n,
        r: p.r,
        k: p.k,
        optimum: res.optimum,
        formula,
        matches: res.optimum as u128 == formula,
        star_size,
        universe,
        base_case_ok: (universe as u64 == p.k as u64 + 1) == base,
        classes,
        classes_ok,
        runtime_ms: diagnostics.then(|| start.elapsed().as_secs_f64() * 1e3),
        nodes: diagnostics.then_some(res.nodes_explored),
    })
}

fn weighted_row(p: Point, cfg: &SearchConfig) -> Result<WeightedRow> {
    let report = verify_weighted_ekr(p.n, p.r, p.k, cfg)?;
    let mut gamma_ok = true;
    for a in enumerate_separated(p.n, p.r, p.k)?.iter() {
        gamma_ok &= gamma(a, p.k)?.len() as u128 == weight(a, p.k)?.0;
    }
    Ok(WeightedRow { report, gamma_ok })
}

fn graph_row(graph: String, quantity: &str, value: u64, expected: u64) -> GraphRow {
    GraphRow {
        graph,
        quantity: quantity.to_string(),
        value,
        expected,
        pass: value == expected,
    }
}

/// Kneser(5,2) independence and chromatic numbers, χ of the Schrijver
/// graphs SG(n,2) for odd n up to 9, and α of SG(n,r) against the star
/// formula on the k = 1 points of `ekr`.
pub fn graph_rows(ekr: &[Point], cfg: &SearchConfig) -> Result<Vec<GraphRow>> {
    let colouring = ColoringConfig::default();
    let mut rows = Vec::new();
    let petersen = build_kneser(5, 2)?;
    rows.push(graph_row(
        "kneser(5,2)".into(),
        "alpha",
        independence_number(&petersen, cfg)?,
        4,
    ));
    rows.push(graph_row(
        "kneser(5,2)".into(),
        "chi",
        chromatic_number(&petersen, &colouring)? as u64,
        3,
    ));
    for n in [5, 7, 9] {
        let g = build_schrijver(n, 2, 1)?;
        rows.push(graph_row(
            format!("schrijver({n},2,1)"),
            "chi",
            chromatic_number(&g, &colouring)? as u64,
            n as u64 - 2,
        ));
    }
    for p in ekr.iter().filter(|p| p.k == 1) {
        let g = build_schrijver(p.n, p.r, 1)?;
        let formula = count_star_formula(p.n, p.r, 1)?;
        rows.push(graph_row(
            format!("schrijver({},{},1)", p.n, p.r),
            "alpha",
            independence_number(&g, cfg)?,
            formula as u64,
        ));
    }
    Ok(rows)
}

/// Runs every part of `grid`. Parameter points are processed in grid order;
/// parallelism lives inside the solvers and the lemma sweep.
pub fn run_grid(grid: &Grid, cfg: &SearchConfig, diagnostics: bool) -> Result<Report> {
    let par: Parallelism = cfg.parallelism;
    let mut ekr = Vec::with_capacity(grid.ekr.len());
    for &p in &grid.ekr {
        ekr.push(ekr_row(p, grid.classes.contains(&p), cfg, diagnostics)?);
    }
    // Class points outside the main grid still get a row.
    for &p in grid.classes.iter().filter(|p| !grid.ekr.contains(p)) {
        ekr.push(ekr_row(p, true, cfg, diagnostics)?);
    }
    let mut lemmas = Vec::with_capacity(grid.lemmas.len());
    for p in &grid.lemmas {
        lemmas.push(lemma_sweep(
            p.n,
            p.r,
            p.k,
            grid.lemma_samples,
            grid.lemma_seed,
            par,
        )?);
    }
    let mut weighted = Vec::with_capacity(grid.weighted.len());
    for &p in &grid.weighted {
        weighted.push(weighted_row(p, cfg)?);
    }
    let graphs = if grid.graphs {
        graph_rows(&grid.ekr, cfg)?
    } else {
        Vec::new()
    };
    Ok(Report {
        ekr,
        lemmas,
        weighted,
        graphs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

const BASE_COLUMNS: [&str; 11] = [
    "n",
    "r",
    "k",
    "optimum",
    "formula",
    "match",
    "star_size",
    "universe",
    "base_case_ok",
    "classes",
    "classes_ok",
];

/// Writes the main table, one row per (n, r, k). The diagnostic columns
/// are added only when some row carries them.
pub fn emit_table<W: Write>(rows: &[EkrRow], format: Format, out: W) -> Result<()> {
    let diagnostics = rows.iter().any(|r| r.runtime_ms.is_some());
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
            if diagnostics {
                header.extend(["runtime_ms", "nodes"]);
            }
            w.write_record(&header)?;
            for row in rows {
                let mut rec = vec![
                    row.n.to_string(),
                    row.r.to_string(),
                    row.k.to_string(),
                    row.optimum.to_string(),
                    row.formula.to_string(),
                    row.matches.to_string(),
                    row.star_size.to_string(),
                    row.universe.to_string(),
                    row.base_case_ok.to_string(),
                    row.classes.map(|c| c.to_string()).unwrap_or_default(),
                    row.classes_ok.map(|c| c.to_string()).unwrap_or_default(),
                ];
                if diagnostics {
                    rec.push(
                        row.runtime_ms
                            .map(|t| format!("{t:.3}"))
                            .unwrap_or_default(),
                    );
                    rec.push(row.nodes.map(|c| c.to_string()).unwrap_or_default());
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        Format::Text => {
            let mut out = out;
            writeln!(
                out,
                "{:>3} {:>2} {:>2} {:>8} {:>8} {:>5} {:>7} {:>5}",
                "n", "r", "k", "optimum", "formula", "match", "classes", "ok"
            )?;
            for row in rows {
                writeln!(
                    out,
                    "{:>3} {:>2} {:>2} {:>8} {:>8} {:>5} {:>7} {:>5}",
                    row.n,
                    row.r,
                    row.k,
                    row.optimum,
                    row.formula,
                    row.matches,
                    row.classes
                        .map(|c| c.to_string())
                        .unwrap_or_else(|| "-".into()),
                    row.passed()
                )?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Writes the whole report. CSV carries only the main table.
pub fn emit_report<W: Write>(report: &Report, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
            out.flush()?;
        }
        Format::Csv => emit_table(&report.ekr, Format::Csv, out)?,
        Format::Text => {
            emit_table(&report.ekr, Format::Text, &mut out)?;
            writeln!(out)?;
            for s in &report.lemmas {
                writeln!(
                    out,
                    "lemmas ({},{},{}): {}/{} families passed",
                    s.n, s.r, s.k, s.passed, s.samples
                )?;
            }
            for w in &report.weighted {
                let rep = &w.report;
                writeln!(
                    out,
                    "weighted ({},{},{}): optimum {} star {} binomial {} gamma {} pass {}",
                    rep.n,
                    rep.r,
                    rep.k,
                    rep.optimum,
                    rep.star_weight,
                    rep.binomial,
                    w.gamma_ok,
                    rep.pass
                )?;
            }
            for g in &report.graphs {
                writeln!(
                    out,
                    "{} {} = {} (expected {}) pass {}",
                    g.graph, g.quantity, g.value, g.expected, g.pass
                )?;
            }
            writeln!(
                out,
                "overall: {}",
                if report.passed() { "pass" } else { "FAIL" }
            )?;
            out.flush()?;
        }
    }
    Ok(())
}
