//! The published table values, bundled as CSV and parsed once per call.
//!
//! These are transcriptions of printed digits: short rows carry fewer
//! decimals than the solver produces, so comparisons must use the acceptance
//! tolerances, not exact equality.

use crate::strategy::Model;

pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");
pub const TABLE3_CSV: &str = include_str!("../data/table3.csv");
pub const TABLE4_CSV: &str = include_str!("../data/table4.csv");

/// One (θ, s) cell of the optimal-strategy table: the newly added threshold
/// (`b_s` for θ < 1, `a_s` for θ > 1) and the win probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub theta: f64,
    pub s: usize,
    pub threshold: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table2Row {
    pub theta: f64,
    pub unconditional: f64,
    pub conditional: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table3Row {
    pub s: usize,
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table4Row {
    pub model: Model,
    pub conditional: bool,
    pub s: usize,
    pub esr: f64,
    pub whole_list: f64,
}

fn rows(csv: &str) -> impl Iterator<Item = Vec<&str>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::trim).collect())
}

pub fn table1() -> Vec<Table1Row> {
    rows(TABLE1_CSV)
        .map(|f| Table1Row {
            theta: f[0].parse().unwrap(),
            s: f[1].parse().unwrap(),
            threshold: f[2].parse().unwrap(),
            p: f[3].parse().unwrap(),
        })
        .collect()
}

pub fn table2() -> Vec<Table2Row> {
    rows(TABLE2_CSV)
        .map(|f| Table2Row {
            theta: f[0].parse().unwrap(),
            unconditional: f[1].parse().unwrap(),
            conditional: f[2].parse().unwrap(),
        })
        .collect()
}

pub fn table3() -> Vec<Table3Row> {
    rows(TABLE3_CSV)
        .map(|f| Table3Row {
            s: f[0].parse().unwrap(),
            x: f[1].parse().unwrap(),
            p: f[2].parse().unwrap(),
        })
        .collect()
}

pub fn table4() -> Vec<Table4Row> {
    rows(TABLE4_CSV)
        .map(|f| Table4Row {
            model: if f[0] == "genie" {
                Model::Genie
            } else {
                Model::Dowry
            },
            conditional: f[1] == "true",
            s: f[2].parse().unwrap(),
            esr: f[3].parse().unwrap(),
            whole_list: f[4].parse().unwrap(),
        })
        .collect()
}

/// The θ grid of the published tables.
pub fn theta_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = Vec::new();
    for row in table1() {
        if grid.last() != Some(&row.theta) {
            grid.push(row.theta);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(table1().len(), 41 * 5);
        assert_eq!(table2().len(), 42);
        assert_eq!(table3().len(), 5);
        assert_eq!(table4().len(), 20);
        assert_eq!(theta_grid().len(), 41);
    }

    #[test]
    fn spot_values() {
        let t1 = table1();
        let row = t1.iter().find(|r| r.theta == 1.1 && r.s == 2).unwrap();
        assert_eq!(row.threshold, 2);
        assert_eq!(row.p, 0.61811891);
        let t4 = table4();
        let row = t4
            .iter()
            .find(|r| r.model == Model::Dowry && r.conditional && r.s == 2)
            .unwrap();
        assert_eq!(row.esr, 0.8600);
        assert_eq!(row.whole_list, 0.5663);
    }
}
