//! Reference values for the closed curves of the figures and their
//! recomputation.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::closure::{solve_closure, ClosureIndex};
use crate::energy::energy_closed;
use crate::error::Result;
use crate::export::fmt_num;
use crate::qpotential::ElasticaParams;
use crate::stability::upsilon_report;

pub const A_TOL: f64 = 0.02;
pub const ENERGY_TOL: f64 = 0.05;
pub const DELTA2_REL_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PublishedRow {
    pub figure: &'static str,
    pub p: f64,
    pub n: u32,
    pub m: u32,
    pub a: f64,
    pub energy: f64,
    pub delta2: f64,
}

const fn row(figure: &'static str, p: f64, n: u32, m: u32, a: f64, energy: f64, delta2: f64) -> PublishedRow {
    PublishedRow { figure, p, n, m, a, energy, delta2 }
}

/// Published values, two decimals.
pub const PUBLISHED_TABLE: [PublishedRow; 11] = [
    row("F1-left", 0.3, 2, 3, 0.79, 9.2, -24.88),
    row("F1-center", 0.3, 3, 5, 1.68, 13.1, -85.05),
    row("F1-right", 0.3, 4, 7, 2.66, 16.53, -137.51),
    row("F2-left", 0.3, 5, 8, 1.23, 22.87, -92.17),
    row("F2-center", 0.3, 5, 9, 3.74, 19.65, -451.26),
    row("F2-right", 0.3, 6, 11, 4.9, 22.57, -841.27),
    row("motion-left", 0.01, 2, 3, 0.96, 12.22, -33.34),
    row("motion-center-left", 0.2, 2, 3, 0.79, 9.74, -26.37),
    row("motion-center", 0.5, 2, 3, 0.8, 8.82, -23.88),
    row("motion-center-right", 0.8, 2, 3, 0.79, 9.74, -26.37),
    row("motion-right", 0.99, 2, 3, 0.96, 12.22, -33.34),
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComputedRow {
    pub a: f64,
    pub energy: f64,
    pub delta2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Column {
    A,
    Energy,
    Delta2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CellCheck {
    pub column: Column,
    pub published: f64,
    pub computed: f64,
    /// Absolute for `a` and `Θ`, relative for `δ²`.
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RowReport {
    pub published: PublishedRow,
    pub computed: ComputedRow,
    pub cells: [CellCheck; 3],
}

impl RowReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }
}

fn cell(column: Column, published: f64, computed: f64) -> CellCheck {
    let (deviation, tolerance) = match column {
        Column::A => ((computed - published).abs(), A_TOL),
        Column::Energy => ((computed - published).abs(), ENERGY_TOL),
        Column::Delta2 => (((computed - published) / published).abs(), DELTA2_REL_TOL),
    };
    CellCheck { column, published, computed, deviation, tolerance, pass: deviation <= tolerance }
}

/// Solves the closure condition for the row and evaluates `Θ_p` and
/// `δ²Θ_p[1] = 2mΥ_p(a)`.
pub fn compute_row(row: &PublishedRow, closure_tol: f64) -> Result<ComputedRow> {
    let idx = solve_closure(row.p, &ClosureIndex::new(row.n, row.m)?, closure_tol)?;
    let a = idx.a_solved.expect("solved index carries a");
    let params = ElasticaParams::new(row.p, a)?;
    let energy = energy_closed(&params, row.m)?.value;
    let delta2 = upsilon_report(&params, row.m)?.delta_squared;
    Ok(ComputedRow { a, energy, delta2 })
}

pub fn check_row(published: &PublishedRow, computed: ComputedRow) -> RowReport {
    RowReport {
        published: *published,
        computed,
        cells: [
            cell(Column::A, published.a, computed.a),
            cell(Column::Energy, published.energy, computed.energy),
            cell(Column::Delta2, published.delta2, computed.delta2),
        ],
    }
}

/// All eleven rows, evaluated concurrently, in table order.
pub fn reproduce_table(closure_tol: f64) -> Result<Vec<RowReport>> {
    PUBLISHED_TABLE
        .par_iter()
        .map(|r| compute_row(r, closure_tol).map(|c| check_row(r, c)))
        .collect()
}

/// `figure,p,n,m,a,energy,delta2` with the computed values.
pub fn write_table_csv(reports: &[RowReport], w: &mut dyn Write) -> Result<()> {
    writeln!(w, "figure,p,n,m,a,energy,delta2")?;
    for r in reports {
        let c = &r.computed;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.published.figure,
            fmt_num(r.published.p),
            r.published.n,
            r.published.m,
            fmt_num(c.a),
            fmt_num(c.energy),
            fmt_num(c.delta2)
        )?;
    }
    Ok(())
}

/// Human-readable comparison at two decimals, one line per row.
pub fn diff_report(reports: &[RowReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:>5} {:>6} {:>16} {:>18} {:>22}",
        "figure", "p", "curve", "a (published)", "energy (published)", "delta2 (published)"
    );
    for r in reports {
        let mark = |c: &CellCheck| if c.pass { "ok" } else { "FAIL" };
        let [ca, ce, cd] = &r.cells;
        let _ = writeln!(
            out,
            "{:<20} {:>5} {:>6} {:>7.2} ({:>5.2}) {:<4} {:>7.2} ({:>6.2}) {:<4} {:>8.2} ({:>8.2}) {:<4}",
            r.published.figure,
            r.published.p,
            format!("{},{}", r.published.n, r.published.m),
            ca.computed,
            ca.published,
            mark(ca),
            ce.computed,
            ce.published,
            mark(ce),
            cd.computed,
            cd.published,
            mark(cd),
        );
    }
    let failed: usize = reports.iter().map(|r| r.cells.iter().filter(|c| !c.pass).count()).sum();
    let _ = writeln!(out, "{} of {} cells within tolerance", 3 * reports.len() - failed, 3 * reports.len());
    out
}
