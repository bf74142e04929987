//! ecplane and boundaries subcommands.

use spotbot_core::ecplane::{
    boundary_curves, chaotic_area_test, entropy_complexity, ln_factorial, multidim_distribution,
};
use spotbot_core::embed::load_paths;

use super::{fmt_f64, parse_grid, require_dir, CliError, CliResult};
use crate::{BoundariesArgs, EcplaneArgs};

/// (n!)^m as an exact integer when it fits the budget.
pub fn alphabet_size(n: usize, m: usize, budget: f64) -> Option<u64> {
    let ln_alpha = m as f64 * ln_factorial(n);
    if ln_alpha.exp() > budget {
        None
    } else {
        Some(ln_alpha.exp().round() as u64)
    }
}

pub fn ecplane(args: EcplaneArgs) -> CliResult {
    require_dir(&args.paths, "--paths")?;
    let m_grid = parse_grid(&args.m)?;
    let n_grid = parse_grid(&args.n)?;
    if n_grid.iter().any(|&n| n < 2) {
        return Err(CliError::validation("pattern length n must be >= 2"));
    }
    if m_grid.iter().any(|&m| m == 0) {
        return Err(CliError::validation("m must be >= 1"));
    }
    if args.stride == 0 {
        return Err(CliError::validation("--stride must be >= 1"));
    }
    let paths = load_paths(&args.paths).map_err(CliError::runtime)?;
    if paths.is_empty() {
        return Err(CliError::validation("no paths found"));
    }
    let width = paths[0].points.ncols();
    if m_grid.iter().any(|&m| m > width) {
        return Err(CliError::validation(format!(
            "m grid exceeds path dimension {width}"
        )));
    }

    let mut rows = Vec::new();
    let mut sweep_rows = Vec::new();
    for &m in &m_grid {
        for &n in &n_grid {
            let Some(alphabet) = alphabet_size(n, m, args.budget) else {
                sweep_rows.push(vec![
                    m.to_string(),
                    n.to_string(),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "0".into(),
                    "alphabet-exceeds-budget".into(),
                ]);
                continue;
            };
            let curves =
                boundary_curves(alphabet, args.boundary_samples).map_err(CliError::runtime)?;
            let margin = args.delta_frac * curves.max_upper_c();

            let mut sum_h = 0.0;
            let mut sum_c = 0.0;
            let mut chaotic_count = 0usize;
            let mut used = 0usize;
            for p in &paths {
                if p.points.nrows() < n {
                    continue;
                }
                let dist = multidim_distribution(p.points.view(), m, n, args.stride)
                    .map_err(CliError::runtime)?;
                let pt = entropy_complexity(&dist);
                let (chaotic, to_upper) =
                    chaotic_area_test(&pt, &curves, margin).map_err(CliError::runtime)?;
                rows.push(vec![
                    p.doc_id.clone(),
                    m.to_string(),
                    n.to_string(),
                    fmt_f64(pt.h),
                    fmt_f64(pt.c),
                    fmt_f64(to_upper),
                    chaotic.to_string(),
                ]);
                sum_h += pt.h;
                sum_c += pt.c;
                chaotic_count += chaotic as usize;
                used += 1;
            }
            if used > 0 {
                sweep_rows.push(vec![
                    m.to_string(),
                    n.to_string(),
                    fmt_f64(sum_h / used as f64),
                    fmt_f64(sum_c / used as f64),
                    fmt_f64(chaotic_count as f64 / used as f64),
                    used.to_string(),
                    String::new(),
                ]);
            } else {
                sweep_rows.push(vec![
                    m.to_string(),
                    n.to_string(),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "0".into(),
                    "no-text-long-enough".into(),
                ]);
            }
        }
    }

    super::write_csv(&args.out, "doc_id,m,n,H,C,dist_to_upper,chaotic", &rows)?;
    println!("wrote {} ec rows -> {}", rows.len(), args.out.display());
    if let Some(sweep_path) = &args.sweep_out {
        super::write_csv(
            sweep_path,
            "m,n,mean_H,mean_C,chaotic_fraction,texts_used,skipped",
            &sweep_rows,
        )?;
        println!("wrote sweep table -> {}", sweep_path.display());
    }
    Ok(())
}

pub fn boundaries(args: BoundariesArgs) -> CliResult {
    if args.n < 2 {
        return Err(CliError::validation("--n must be >= 2"));
    }
    if args.m == 0 {
        return Err(CliError::validation("--m must be >= 1"));
    }
    if args.grid < 2 {
        return Err(CliError::validation("--grid must be >= 2"));
    }
    let Some(alphabet) = alphabet_size(args.n, args.m, 1e15) else {
        return Err(CliError::validation(
            "alphabet (n!)^m too large to enumerate",
        ));
    };
    let curves = boundary_curves(alphabet, args.samples).map_err(CliError::runtime)?;
    // resample both polylines onto a shared h grid for plotting
    let mut rows = Vec::with_capacity(args.grid);
    for t in 0..args.grid {
        let h = t as f64 / (args.grid - 1) as f64;
        rows.push(vec![
            fmt_f64(h),
            fmt_f64(curves.lower_at(h)),
            fmt_f64(curves.upper_at(h)),
        ]);
    }
    super::write_csv(&args.out, "h,c_lower,c_upper", &rows)?;
    println!(
        "boundary curves for alphabet {alphabet} -> {}",
        args.out.display()
    );
    Ok(())
}
