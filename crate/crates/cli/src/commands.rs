use std::path::Path;

use minphase::lifting::{measure_gamma_psd_on, waterfall_sweep_with};
use minphase::signal::{amplitude_extremum, max_zero_modulus, Extremum};
use minphase::taps::read_taps;
use minphase::{
    amplitude_response, build_gramian, design_minphase, frequency_response_magnitude, mmse_transform, zeros,
    DesignOptions, FirFilter, FrequencyGrid, LinearPhasePrototype, MmseConfig, ResidualReport, TransformResult,
};
use serde::Serialize;

use crate::args::{AnalyzeArgs, DesignArgs, SweepArgs, TransformArgs};
use crate::config::FileConfig;
use crate::output::{Artifacts, Cell, ResolvedConfig};
use crate::ranges::{parse_offsets, parse_padding_sweep};
use crate::Failure;

fn read_prototype(path: &Path) -> Result<LinearPhasePrototype, Failure> {
    read_taps(path)
        .and_then(|f| f.into_prototype())
        .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn read_fir(path: &Path) -> Result<FirFilter, Failure> {
    read_taps(path)
        .and_then(|f| f.into_fir())
        .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Zero {
    re: f64,
    im: f64,
    modulus: f64,
}

fn zero_list(h: &FirFilter) -> Result<Vec<Zero>, Failure> {
    let mut z: Vec<Zero> = zeros(h)?
        .into_iter()
        .map(|z| Zero {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
        })
        .collect();
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

fn design_options(
    g: &LinearPhasePrototype,
    q: Option<usize>,
    grid: Option<usize>,
    gamma_psd: Option<f64>,
    scale: Option<&str>,
    file: &FileConfig,
) -> Result<DesignOptions, Failure> {
    let mut opts = DesignOptions::for_prototype(g);
    if let Some(q) = q.or(file.q) {
        opts.padding = q;
    }
    opts.grid = file.grid(grid)?;
    opts.gamma_psd = gamma_psd.or(file.gamma_psd);
    opts.scaling = file.scaling(scale)?;
    opts.solver = file.solver()?;
    if opts.padding < g.factor_len() {
        return Err(Failure::Usage(format!(
            "padding {} is shorter than the factor length {}",
            opts.padding,
            g.factor_len()
        )));
    }
    Ok(opts)
}

#[derive(Serialize)]
struct DesignReport<'a> {
    lift: &'a minphase::LiftReport,
    residual: &'a ResidualReport,
    c_approx: &'a [f64],
    max_zero_modulus: Option<f64>,
}

pub fn design(a: &DesignArgs, file: &FileConfig, cfg_path: Option<String>) -> Result<(), Failure> {
    let g = read_prototype(&a.prototype)?;
    let mut opts = design_options(&g, a.common.q, a.common.grid, a.gamma_psd, a.scale.as_deref(), file)?;
    opts.offset = file.offset(a.epsilon.as_deref())?;
    let d = design_minphase(&g, &opts)?;

    let mut out = Artifacts::create(&a.common.out)?;
    out.taps("c.txt", d.c.taps())?;
    out.json(
        "report.json",
        &DesignReport {
            lift: &d.lift,
            residual: &d.residual,
            c_approx: d.c_approx.taps(),
            max_zero_modulus: max_zero_modulus(&d.c).ok(),
        },
    )?;
    let grid = FrequencyGrid::new(opts.grid)?;
    let mag = frequency_response_magnitude(&d.c, &grid);
    let amp = amplitude_response(&d.g_adj, &grid);
    let rows = grid
        .samples()
        .iter()
        .zip(mag.iter().zip(&amp))
        .map(|(w, (m, a))| vec![Cell::Real(*w), Cell::Real(*m), Cell::Real(*a)]);
    out.csv("response.csv", "omega,c_magnitude,lifted_amplitude", rows)?;
    out.finish(
        "design",
        &[&a.prototype],
        ResolvedConfig {
            padding: Some(opts.padding),
            offset: Some(opts.offset),
            gamma_psd: opts.gamma_psd,
            scaling: Some(opts.scaling),
            grid: opts.grid,
            solver: Some(opts.solver),
            config_file: cfg_path,
            ..Default::default()
        },
    )
}

#[derive(Serialize)]
struct TransformReport<'a> {
    #[serde(flatten)]
    result: &'a TransformResult,
    zeros: Vec<Zero>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mmse: Option<MmseReport<'a>>,
}

#[derive(Serialize)]
struct MmseReport<'a> {
    #[serde(flatten)]
    result: &'a TransformResult,
    /// MMSE residual over factorization residual.
    residual_ratio: f64,
}

pub fn transform(a: &TransformArgs, file: &FileConfig, cfg_path: Option<String>) -> Result<(), Failure> {
    let h = read_fir(&a.fir)?;
    let padding = a.common.q.or(file.q).unwrap_or(20 * h.len());
    if padding < h.len() {
        return Err(Failure::Usage(format!(
            "padding {padding} is shorter than the filter length {}",
            h.len()
        )));
    }
    let grid = file.grid(a.common.grid)?;
    let r = minphase::transform(&h, padding)?;
    let mmse_cfg = a.mmse.then(|| {
        let d = MmseConfig::for_filter(&h);
        MmseConfig {
            taps: a.plen.or(file.plen).unwrap_or(d.taps),
            sigma2: a.sigma2.or(file.sigma2).unwrap_or(d.sigma2),
        }
    });
    let mmse = mmse_cfg.map(|cfg| mmse_transform(&h, &cfg)).transpose()?;

    let mut out = Artifacts::create(&a.common.out)?;
    out.taps("c.txt", r.c.taps())?;
    out.taps("f.txt", &r.f_taps)?;
    if let Some(m) = &mmse {
        out.taps("c_mmse.txt", m.c.taps())?;
    }
    out.json(
        "report.json",
        &TransformReport {
            result: &r,
            zeros: zero_list(&r.c)?,
            mmse: mmse.as_ref().map(|m| MmseReport {
                result: m,
                residual_ratio: m.residual.e_l2 / r.residual.e_l2,
            }),
        },
    )?;
    out.finish(
        "transform",
        &[&a.fir],
        ResolvedConfig {
            padding: Some(padding),
            grid,
            mmse: mmse_cfg,
            config_file: cfg_path,
            ..Default::default()
        },
    )
}

pub fn sweep(a: &SweepArgs, file: &FileConfig, cfg_path: Option<String>) -> Result<(), Failure> {
    let offsets = parse_offsets(&a.offsets)?;
    let g = read_prototype(&a.prototype)?;
    let opts = design_options(&g, a.common.q, a.common.grid, a.gamma_psd, a.scale.as_deref(), file)?;
    let jobs = a.jobs.or(file.jobs);
    let points = match jobs {
        Some(0) => return Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Failure::Domain(format!("cannot start worker pool: {e}")))?
            .install(|| waterfall_sweep_with(&g, &offsets, &opts)),
        None => waterfall_sweep_with(&g, &offsets, &opts),
    };

    let mut out = Artifacts::create(&a.common.out)?;
    let rows = points.iter().map(|p| {
        vec![
            Cell::Real(p.gamma),
            Cell::Real(p.offset),
            Cell::Real(p.e_l2),
            Cell::Flag(p.converged),
        ]
    });
    out.csv("waterfall.csv", "gamma,offset,E_L2,converged", rows)?;
    out.finish(
        "sweep",
        &[&a.prototype],
        ResolvedConfig {
            padding: Some(opts.padding),
            gamma_psd: Some(opts.gamma_psd.unwrap_or_else(|| measure_gamma_psd_on(&g, opts.grid))),
            scaling: Some(opts.scaling),
            grid: opts.grid,
            solver: Some(opts.solver),
            jobs,
            config_file: cfg_path,
            ..Default::default()
        },
    )
}

#[derive(Serialize)]
struct Extreme {
    omega: f64,
    value: f64,
}

#[derive(Serialize)]
struct Analysis {
    gamma_psd: f64,
    min_amplitude: Extreme,
    max_amplitude: Extreme,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeros: Option<Vec<Zero>>,
}

pub fn analyze(a: &AnalyzeArgs, file: &FileConfig, cfg_path: Option<String>) -> Result<(), Failure> {
    let qs = a.eig_sweep.as_deref().map(parse_padding_sweep).transpose()?;
    let g = read_prototype(&a.prototype)?;
    let grid = file.grid(a.grid)?;

    let mut out = Artifacts::create(&a.out)?;
    if let Some(qs) = &qs {
        let rows = qs
            .iter()
            .map(|&q| {
                Ok(vec![
                    Cell::Int(q),
                    Cell::Real(build_gramian(&g, q, 0.0)?.min_eigenvalue()),
                ])
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        out.csv("eig_sweep.csv", "Q,lambda_min", rows)?;
    }
    let zeros = if a.zeros { Some(zero_list(&g.as_fir())?) } else { None };
    if let Some(z) = &zeros {
        out.json("zeros.json", &serde_json::json!({ "zeros": z }))?;
    }
    if a.response {
        let grid = FrequencyGrid::new(grid)?;
        let amp = amplitude_response(&g, &grid);
        let rows = grid
            .samples()
            .iter()
            .zip(&amp)
            .map(|(w, v)| vec![Cell::Real(*w), Cell::Real(*v)]);
        out.csv("response.csv", "omega,amplitude", rows)?;
    }
    let lo = amplitude_extremum(&g, grid, Extremum::Min);
    let hi = amplitude_extremum(&g, grid, Extremum::Max);
    out.json(
        "analysis.json",
        &Analysis {
            gamma_psd: measure_gamma_psd_on(&g, grid),
            min_amplitude: Extreme {
                omega: lo.omega,
                value: lo.value,
            },
            max_amplitude: Extreme {
                omega: hi.omega,
                value: hi.value,
            },
            zeros,
        },
    )?;
    out.finish(
        "analyze",
        &[&a.prototype],
        ResolvedConfig {
            grid,
            paddings: qs,
            config_file: cfg_path,
            ..Default::default()
        },
    )
}
