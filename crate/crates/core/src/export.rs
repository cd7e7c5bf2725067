//! CSV writers for force fields, root loci, trajectories and sweep grids.
//!
//! Numbers carry nine significant digits. Magnitudes outside `[1e-4, 1e6)`
//! are written in lowercase scientific notation.

use std::io::{self, Write};

use crate::eigen::RootLocusTrace;
use crate::simulator::Trajectory;
use crate::stiffness::FieldSample;
use crate::sweep::SweepGrid;

pub const FORCE_FIELD_HEADER: &str = "x,y,fx,fy,fx_sym,fy_sym,fx_asym,fy_asym";
pub const ROOT_LOCUS_HEADER: &str = "d_m,re1,im1,re2,im2,re3,im3,re4,im4";
pub const TRAJECTORY_HEADER: &str = "t,x,y,vx,vy,fx,fy,ke,pe,e_diss,e_curl,v_total";
pub const GRID_HEADER: &str = "ks,ka,d_min,status,d_min_analytic";

/// Formats `v` with nine significant digits.
///
/// ```
/// use admittance::export::fmt_num;
/// assert_eq!(fmt_num(0.0), "0");
/// assert_eq!(fmt_num(0.1), "0.1");
/// assert_eq!(fmt_num(1.0 / 3.0), "0.333333333");
/// assert_eq!(fmt_num(2.5e-7), "2.5e-7");
/// assert_eq!(fmt_num(-1.0e6), "-1e6");
/// ```
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = v.abs();
    if !(1e-4..1e6).contains(&a) {
        let s = format!("{v:.8e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent");
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (8 - a.log10().floor() as i32).max(0) as usize;
    let s = format!("{v:.decimals$}");
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let cells: Vec<String> = values.iter().copied().map(fmt_num).collect();
    writeln!(w, "{}", cells.join(","))
}

pub fn write_force_field<W: Write>(w: &mut W, field: &[FieldSample]) -> io::Result<()> {
    writeln!(w, "{FORCE_FIELD_HEADER}")?;
    for s in field {
        row(
            w,
            &[
                s.position[0],
                s.position[1],
                s.force[0],
                s.force[1],
                s.symmetric[0],
                s.symmetric[1],
                s.antisymmetric[0],
                s.antisymmetric[1],
            ],
        )?;
    }
    Ok(())
}

pub fn write_root_locus<W: Write>(w: &mut W, trace: &RootLocusTrace) -> io::Result<()> {
    writeln!(w, "{ROOT_LOCUS_HEADER}")?;
    for s in &trace.samples {
        let mut values = vec![s.d_m];
        for b in s.branches {
            values.extend([b.re, b.im]);
        }
        row(w, &values)?;
    }
    Ok(())
}

/// Trajectory rows with their energy terms. `v_total` is the stored energy
/// plus dissipated and curl work.
pub fn write_trajectory<W: Write>(w: &mut W, tr: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (s, e) in tr.samples.iter().zip(&tr.energy.samples) {
        let st = s.state;
        row(
            w,
            &[
                st.t,
                st.x,
                st.y,
                st.vx,
                st.vy,
                s.force[0],
                s.force[1],
                e.kinetic,
                e.potential,
                e.dissipated,
                e.curl_work,
                e.total,
            ],
        )?;
    }
    Ok(())
}

/// One row per cell, `ks`-major. Missing values are empty fields.
pub fn write_grid<W: Write>(w: &mut W, grid: &SweepGrid) -> io::Result<()> {
    writeln!(w, "{GRID_HEADER}")?;
    for c in &grid.cells {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_num(c.ks),
            fmt_num(c.ka),
            opt(c.d_min),
            c.status.as_str(),
            opt(c.d_min_analytic)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{simulate, Scenario};
    use crate::stiffness::GridSpec;
    use crate::sweep::analytic_map;
    use crate::{AdmittanceParams, StiffnessMatrix};

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.316227766), "0.316227766");
        assert_eq!(fmt_num(123456.789012), "123456.789");
        assert_eq!(fmt_num(1e-4), "0.0001");
        assert_eq!(fmt_num(9.99e-5), "9.99e-5");
        assert_eq!(fmt_num(1.234567891e10), "1.23456789e10");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn headers_and_row_counts() {
        let k = StiffnessMatrix::new(100.0, 100.0, 0.0, 10.0).unwrap();
        let mut buf = Vec::new();
        write_force_field(&mut buf, &k.force_field(&GridSpec::square(1.0, 3)).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(FORCE_FIELD_HEADER));
        assert_eq!(text.lines().count(), 10);

        let p = AdmittanceParams::reference(0.34);
        let tr = simulate(&p, &Scenario::step_force([0.0, 10.0], 0.01, 1e-3)).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), tr.samples.len() + 1);
        assert!(text.lines().all(|l| l.split(',').count() == 12));

        let grid = analytic_map(&p, &[0.0, 150.0], &[0.0, 10.0]).unwrap();
        let mut buf = Vec::new();
        write_grid(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("0,0,0,analytic,0"));
        assert_eq!(text.lines().nth(3), Some("150,0,,infeasible,"));
    }
}
