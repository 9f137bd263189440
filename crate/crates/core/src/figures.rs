//! The forecast systems behind the five figures and the tables that
//! reproduce their data.

use crate::analysis::{figure1_curve, find_preference_flip, relative_score_curve, FIGURE1_COLUMNS};
use crate::distributions::{Density, Forecast, MixtureDensity, Transform};
use crate::error::{Error, Result};
use crate::report::{round_sig9, Table};
use crate::scores::{relative_crps, ScoreOptions, ScoreSpec};

fn bimodal(left: f64, right: f64) -> MixtureDensity {
    MixtureDensity::gaussian_mixture(&[(0.5, left, 0.1), (0.5, right, 0.1)]).expect("valid mixture")
}

/// 0.5·N(−1, 0.1²) + 0.5·N(1, 0.1²): median 0 in an empty gap.
pub fn fig2_system_a() -> MixtureDensity {
    bimodal(-1.0, 1.0)
}

/// 0.5·N(0, 0.1²) + 0.5·N(2, 0.1²): a mode at 0.
pub fn fig2_system_b() -> MixtureDensity {
    bimodal(0.0, 2.0)
}

pub fn fig3_system_a() -> MixtureDensity {
    MixtureDensity::gaussian(-3.0, 0.5).expect("valid")
}

pub fn fig3_system_b() -> MixtureDensity {
    MixtureDensity::gaussian(3.0, 1.0).expect("valid")
}

pub fn fig4_system_a() -> MixtureDensity {
    MixtureDensity::gaussian(0.0, 1.0).expect("valid")
}

pub fn fig4_system_b() -> MixtureDensity {
    MixtureDensity::gaussian(0.0, 5.0).expect("valid")
}

/// The figure-2 pair moved to positive support.
pub fn fig5_system_a() -> MixtureDensity {
    bimodal(10.0, 12.0)
}

pub fn fig5_system_b() -> MixtureDensity {
    bimodal(11.0, 13.0)
}

pub fn fig5_transform() -> Transform {
    Transform::Cubic
}

/// Grid overrides; `None` keeps the figure's default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FigureOptions {
    pub points: Option<usize>,
    pub sigma_max: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
}

/// Score, systems and default outcome range of figures 2 to 4.
pub fn pair_figure(id: u8) -> Option<(ScoreSpec, MixtureDensity, MixtureDensity, (f64, f64))> {
    match id {
        2 => Some((ScoreSpec::Crps, fig2_system_a(), fig2_system_b(), (-2.0, 3.0))),
        3 => Some((
            ScoreSpec::Power { alpha: 2.0 },
            fig3_system_a(),
            fig3_system_b(),
            (-7.0, 6.0),
        )),
        4 => Some((
            ScoreSpec::Pseudospherical { beta: 2.0 },
            fig4_system_a(),
            fig4_system_b(),
            (-6.0, 6.0),
        )),
        _ => None,
    }
}

/// `n` points from `lo` to `hi` inclusive, each rounded to 9 significant
/// digits so that a printed grid reproduces exactly.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![round_sig9(lo)];
    }
    (0..n)
        .map(|i| round_sig9(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn check_points(points: usize) -> Result<usize> {
    if points == 0 {
        return Err(Error::domain("points must be at least 1"));
    }
    Ok(points)
}

fn outcome_range(opts: &FigureOptions, default: (f64, f64)) -> Result<(f64, f64)> {
    let lo = opts.y_min.unwrap_or(default.0);
    let hi = opts.y_max.unwrap_or(default.1);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("invalid outcome range [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

/// The data behind figure `id` (1 to 5).
pub fn figure_table(id: u8, opts: &FigureOptions) -> Result<Table> {
    match id {
        1 => figure1_table(opts),
        2..=4 => pair_table(id, opts),
        5 => figure5_table(opts),
        _ => Err(Error::domain(format!("figure id must be 1 to 5, got {id}"))),
    }
}

fn figure1_table(opts: &FigureOptions) -> Result<Table> {
    if opts.y_min.is_some() || opts.y_max.is_some() {
        return Err(Error::domain("figure 1 has no outcome range"));
    }
    let points = check_points(opts.points.unwrap_or(40))?;
    let sigma_max = opts.sigma_max.unwrap_or(3.0);
    if !(sigma_max > 1.0 && sigma_max.is_finite()) {
        return Err(Error::domain(format!("sigma-max must exceed 1, got {sigma_max}")));
    }
    let sigmas: Vec<f64> = (1..=points)
        .map(|i| round_sig9(1.0 + (sigma_max - 1.0) * i as f64 / points as f64))
        .collect();
    let curve = figure1_curve(&sigmas)?;
    let mut columns = vec!["sigma"];
    columns.extend(FIGURE1_COLUMNS);
    let mut t = Table::new(&columns);
    t.meta("figure", 1)
        .meta("system_a", "N(0, sigma^2)")
        .meta("system_b", "N(0, 1/sigma^2)")
        .meta("truth", json(&Forecast::gaussian(0.0, 1.0)?))
        .meta("relative", "expected score of A minus B")
        .meta("pls", json(&ScoreSpec::Power { alpha: 2.0 }))
        .meta("sps", json(&ScoreSpec::Pseudospherical { beta: 2.0 }))
        .meta("sigma_max", sigma_max)
        .meta("points", points);
    for (i, s) in curve.sigma.iter().enumerate() {
        let mut row = vec![*s];
        row.extend(curve.columns.iter().map(|(_, v)| v[i]));
        t.push(row);
    }
    Ok(t)
}

fn pair_table(id: u8, opts: &FigureOptions) -> Result<Table> {
    if opts.sigma_max.is_some() {
        return Err(Error::domain(format!("figure {id} has no sigma grid")));
    }
    let (spec, a, b, default) = pair_figure(id).expect("id checked");
    let (lo, hi) = outcome_range(opts, default)?;
    let points = check_points(opts.points.unwrap_or(501))?;
    let ys = grid(lo, hi, points);
    let rel = relative_score_curve(&spec, &a, &b, &ys, &ScoreOptions::default())?;
    let mut t = Table::new(&["y", "pdf_a", "pdf_b", "relative"]);
    t.meta("figure", id)
        .meta("score", json(&spec))
        .meta("system_a", json(&Forecast::Base(a.clone())))
        .meta("system_b", json(&Forecast::Base(b.clone())))
        .meta("relative", "score of A minus B")
        .meta("y_min", lo)
        .meta("y_max", hi)
        .meta("points", points);
    for (y, r) in rel {
        t.push(vec![y, a.pdf(y), b.pdf(y), r]);
    }
    Ok(t)
}

/// Untransformed and transformed relative CRPS at one outcome.
pub fn figure5_row(y: f64) -> Result<(f64, f64)> {
    let (a, b, t) = (fig5_system_a(), fig5_system_b(), fig5_transform());
    let ta = crate::distributions::pushforward(&a, t)?;
    let tb = crate::distributions::pushforward(&b, t)?;
    Ok((relative_crps(&a, &b, y)?, relative_crps(&ta, &tb, t.forward(y))?))
}

fn figure5_table(opts: &FigureOptions) -> Result<Table> {
    if opts.sigma_max.is_some() {
        return Err(Error::domain("figure 5 has no sigma grid"));
    }
    let (lo, hi) = outcome_range(opts, (10.0, 13.0))?;
    let points = check_points(opts.points.unwrap_or(301))?;
    let (a, b, tr) = (fig5_system_a(), fig5_system_b(), fig5_transform());
    let flip = find_preference_flip(
        &ScoreSpec::Crps,
        &a,
        &b,
        tr,
        (lo, hi),
        &ScoreOptions::default(),
    )?;
    let ys = grid(lo, hi, points);
    let rows = {
        use rayon::prelude::*;
        ys.par_iter()
            .map(|&y| figure5_row(y).map(|(p, q)| vec![y, tr.forward(y), p, q]))
            .collect::<Result<Vec<_>>>()?
    };
    let mut t = Table::new(&["y", "y_transformed", "pre", "post"]);
    let fmt = |v: Option<f64>| v.map_or("none".to_string(), |x| round_sig9(x).to_string());
    t.meta("figure", 5)
        .meta("score", json(&ScoreSpec::Crps))
        .meta("system_a", json(&Forecast::Base(a.clone())))
        .meta("system_b", json(&Forecast::Base(b.clone())))
        .meta("transform", json(&tr))
        .meta("relative", "score of A minus B; post is evaluated at the transformed outcome")
        .meta("pre_threshold", fmt(flip.as_ref().and_then(|f| f.pre_threshold)))
        .meta("post_threshold", fmt(flip.as_ref().and_then(|f| f.post_threshold)))
        .meta("flip_y", fmt(flip.as_ref().map(|f| f.y)))
        .meta("y_min", lo)
        .meta("y_max", hi)
        .meta("points", points);
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

/// A gnuplot script plotting the CSV written for figure `id` to `data_path`.
pub fn gnuplot_script(id: u8, data_path: &str) -> Result<String> {
    let body = match id {
        1 => format!(
            "set xlabel 'sigma'\nset ylabel 'relative expected score'\n\
             plot '{data_path}' using 1:3 with lines title 'IGN/20', \\\n  \
             '' using 1:4 with lines title 'CRPS', \\\n  \
             '' using 1:5 with lines title 'PLS', \\\n  \
             '' using 1:6 with lines title 'SPS'\n"
        ),
        2..=4 => format!(
            "set xlabel 'y'\nset y2tics\n\
             plot '{data_path}' using 1:2 with lines title 'pdf A', \\\n  \
             '' using 1:3 with lines title 'pdf B', \\\n  \
             '' using 1:4 axes x1y2 with lines title 'relative score'\n"
        ),
        5 => format!(
            "set multiplot layout 1,2\nset xlabel 'y'\n\
             plot '{data_path}' using 1:3 with lines title 'relative CRPS'\n\
             set xlabel 'y^3'\n\
             plot '{data_path}' using 2:4 with lines title 'relative CRPS after transform'\n\
             unset multiplot\n"
        ),
        _ => return Err(Error::domain(format!("figure id must be 1 to 5, got {id}"))),
    };
    Ok(format!(
        "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n{body}"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure3_regions() {
        let t = figure_table(3, &FigureOptions { points: Some(131), ..Default::default() }).unwrap();
        let ys = t.column("y").unwrap();
        let rel = t.column("relative").unwrap();
        let pa = t.column("pdf_a").unwrap();
        let pb = t.column("pdf_b").unwrap();
        // A assigns more probability at y = −5 yet scores worse
        let i = ys.iter().position(|y| (*y + 5.0).abs() < 1e-9).unwrap();
        assert!(pa[i] > pb[i] && rel[i] > 0.0);
        assert!((rel[i] - 0.281_559_5).abs() < 1e-7);
        assert_eq!(ys.len(), 131);
        assert_eq!((ys[0], ys[130]), (-7.0, 6.0));
    }

    #[test]
    fn figure1_table_layout() {
        let t = figure_table(1, &FigureOptions { points: Some(4), ..Default::default() }).unwrap();
        assert_eq!(t.columns, ["sigma", "ign", "ign_div20", "crps", "pls", "sps"]);
        assert_eq!(t.column("sigma").unwrap(), [1.5, 2.0, 2.5, 3.0]);
        assert!(figure_table(1, &FigureOptions { y_min: Some(0.0), ..Default::default() }).is_err());
        assert!(figure_table(6, &FigureOptions::default()).is_err());
        assert!(figure_table(2, &FigureOptions { y_min: Some(1.0), y_max: Some(0.0), ..Default::default() }).is_err());
    }

    #[test]
    fn figure5_flip_metadata() {
        let t = figure_table(5, &FigureOptions { points: Some(31), ..Default::default() }).unwrap();
        let pre: f64 = t.meta_value("pre_threshold").unwrap().parse().unwrap();
        let post: f64 = t.meta_value("post_threshold").unwrap().parse().unwrap();
        assert!((pre - 11.5).abs() < 1e-3, "{pre}");
        assert!(post > pre, "{post}");
    }

    #[test]
    fn grid_is_exact() {
        let g = grid(-2.0, 3.0, 501);
        assert_eq!(g[0], -2.0);
        assert_eq!(g[500], 3.0);
        assert_eq!(g[200], 0.0);
        assert_eq!(grid(1.0, 2.0, 1), [1.0]);
    }

    #[test]
    fn gnuplot_mentions_data() {
        for id in 1..=5 {
            assert!(gnuplot_script(id, "fig.csv").unwrap().contains("'fig.csv'"));
        }
    }
}
