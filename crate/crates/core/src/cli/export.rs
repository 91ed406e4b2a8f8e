use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::landscape::{ExpansionRow, FoliationLeaf, HawkingSample};
use crate::Result;

pub const LEAVES_HEADER: [&str; 14] = [
    "eps",
    "Px",
    "Py",
    "Pz",
    "Phi",
    "beta0",
    "beta1",
    "beta2",
    "beta3",
    "grad_norm",
    "index",
    "hawking",
    "center_drift",
    "phi_sup",
];

pub const EXPAND_HEADER: [&str; 7] = [
    "eps",
    "W",
    "res_WE",
    "res_WEdiff",
    "res_H",
    "res_area_element",
    "res_Eq41",
];

pub const HAWKING_HEADER: [&str; 4] = ["r", "area", "W", "m_H"];

/// Seventeen significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated table with a header line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().copied().map(float).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            debug_assert_eq!(r.len(), self.header.len());
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

pub fn leaves_table(leaves: &[FoliationLeaf]) -> Table {
    let mut t = Table::new(&LEAVES_HEADER);
    for l in leaves {
        let p = l.p_eps.0;
        let mut row: Vec<String> = [l.eps, p.x, p.y, p.z, l.value]
            .into_iter()
            .chain(l.betas)
            .chain([l.grad_norm])
            .map(float)
            .collect();
        // pinned leaves have no Hessian
        row.push(l.index().map_or_else(String::new, |k| k.to_string()));
        row.extend([l.hawking, l.center_drift, l.phi_sup()].map(float));
        t.rows.push(row);
    }
    t
}

pub fn expansion_table(rows: &[ExpansionRow]) -> Table {
    let mut t = Table::new(&EXPAND_HEADER);
    for r in rows {
        t.push_floats(&[
            r.eps,
            r.w,
            r.res_we,
            r.res_wediff,
            r.res_h,
            r.res_area_element,
            r.res_reduced,
        ]);
    }
    t
}

pub fn hawking_table(samples: &[HawkingSample]) -> Table {
    let mut t = Table::new(&HAWKING_HEADER);
    for s in samples {
        t.push_floats(&[s.r, s.area, s.willmore, s.hawking]);
    }
    t
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| crate::Error::Numerical(e.to_string()))?;
    text.push('\n');
    write_text(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(-2.0), "-2.0000000000000000e0");
        assert_eq!(float(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn headers() {
        assert_eq!(
            leaves_table(&[]).to_csv(),
            "eps,Px,Py,Pz,Phi,beta0,beta1,beta2,beta3,grad_norm,index,hawking,center_drift,phi_sup\n"
        );
        assert_eq!(
            expansion_table(&[]).to_csv(),
            "eps,W,res_WE,res_WEdiff,res_H,res_area_element,res_Eq41\n"
        );
    }
}
