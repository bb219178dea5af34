//! Stable file formats. The CSV layouts and the numeric format are pinned by
//! golden-file tests; treat any change here as a format break.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::tomography::{SurfacePoint, SweepPoint};

use super::scenario::ScenarioEcho;

/// Redirects relative output paths when set and nonempty.
pub const OUTDIR_ENV: &str = "WAVEGUIDE_TOMO_OUTDIR";

pub fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUTDIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// 9 significant digits, `e` notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

fn config_line(echo: &ScenarioEcho) -> String {
    // compact JSON keeps the provenance on a single comment line
    format!(
        "# config: {}\n",
        serde_json::to_string(echo).expect("echo has no non-serializable values")
    )
}

pub const TRAJECTORY_HEADER: &str = "t_gamma,p1,p2,p3,d,S,re_b1,im_b1,re_b2,im_b2,re_b3,im_b3";

pub fn trajectory_csv(traj: &Trajectory, echo: &ScenarioEcho) -> String {
    let mut out = config_line(echo);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let [p1, p2, p3] = s.populations();
        let row = [
            s.t_gamma,
            p1,
            p2,
            p3,
            s.edge_difference(),
            s.edge_sum(),
            s.b1.re,
            s.b1.im,
            s.b2.re,
            s.b2.im,
            s.b3.re,
            s.b3.im,
        ];
        out.push_str(&row.map(fmt_num).join(","));
        out.push('\n');
    }
    out
}

pub const SWEEP_HEADER: &str = "a1_sq_true,dphi_true,a1_sq_est,dphi_est,err_pop,err_phase";

pub fn sweep_csv(points: &[SweepPoint], echo: &ScenarioEcho) -> String {
    let mut out = config_line(echo);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let row = [
            p.a1_sq_true,
            p.dphi_true,
            p.a1_sq_est,
            p.dphi_est,
            p.err_pop,
            p.err_phase,
        ];
        out.push_str(&row.map(fmt_num).join(","));
        out.push('\n');
    }
    out
}

pub const OBSERVABLES_HEADER: &str = "p3_true,a3_true,dphi_true,d_half_pi,s_half_pi,d_pi,s_pi";

pub fn observables_csv(points: &[SurfacePoint], echo: &ScenarioEcho) -> String {
    let mut out = config_line(echo);
    out.push_str(OBSERVABLES_HEADER);
    out.push('\n');
    for p in points {
        let row = [
            p.p3_true,
            p.a3_true,
            p.dphi_true,
            p.d_half_pi,
            p.s_half_pi,
            p.d_pi,
            p.s_pi,
        ];
        out.push_str(&row.map(fmt_num).join(","));
        out.push('\n');
    }
    out
}

pub fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// `foo.csv` → `foo.summary.json`, next to the trajectory.
pub fn summary_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("summary.json")
}

/// `foo.csv` → `foo_observables.csv`.
pub fn observables_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sweep");
    csv_path.with_file_name(format!("{stem}_observables.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_format_is_pinned() {
        assert_eq!(fmt_num(0.0), "0.00000000e0");
        assert_eq!(fmt_num(1.0), "1.00000000e0");
        assert_eq!(fmt_num(0.5), "5.00000000e-1");
        assert_eq!(fmt_num(-1.0 / 3.0), "-3.33333333e-1");
        assert_eq!(fmt_num(std::f64::consts::FRAC_1_SQRT_2), "7.07106781e-1");
        assert_eq!(fmt_num(1234.5), "1.23450000e3");
    }

    #[test]
    fn derived_paths() {
        assert_eq!(
            summary_path(Path::new("out/run.csv")),
            Path::new("out/run.summary.json")
        );
        assert_eq!(
            observables_path(Path::new("out/sweep.csv")),
            Path::new("out/sweep_observables.csv")
        );
    }

    #[test]
    fn outdir_redirects_relative_paths_only() {
        // single test mutates the variable to avoid races between tests
        std::env::remove_var(OUTDIR_ENV);
        assert_eq!(resolve_out_path(Path::new("a.csv")), Path::new("a.csv"));
        std::env::set_var(OUTDIR_ENV, "/tmp/waveguide");
        assert_eq!(
            resolve_out_path(Path::new("a.csv")),
            Path::new("/tmp/waveguide/a.csv")
        );
        assert_eq!(
            resolve_out_path(Path::new("/abs/a.csv")),
            Path::new("/abs/a.csv")
        );
        std::env::remove_var(OUTDIR_ENV);
    }
}
