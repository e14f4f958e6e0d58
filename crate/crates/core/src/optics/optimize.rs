use serde::{Deserialize, Serialize};

use super::device::{device_point, FractalMixing};
use super::materials::MaterialLibrary;
use super::stack::LayerStack;
use super::{OpticsError, Polarization, Result};

/// Maximum number of free parameters.
pub const MAX_FREE_PARAMS: usize = 6;

/// Layer thickness driven by a parameter: `scale * p + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThicknessLink {
    pub layer: usize,
    pub scale: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub name: String,
    pub links: Vec<ThicknessLink>,
    pub bounds: (f64, f64),
}

impl FreeParam {
    /// The thickness of one layer.
    pub fn layer(name: &str, layer: usize, bounds: (f64, f64)) -> Self {
        FreeParam { name: name.into(), links: vec![ThicknessLink { layer, scale: 1.0, offset: 0.0 }], bounds }
    }

    /// Total defect thickness: the two layers around the grating share it
    /// equally, the grating keeps its own thickness.
    pub fn defect(stack: &LayerStack, bounds: (f64, f64)) -> Result<Self> {
        let g = stack.grating_index().ok_or_else(|| OpticsError::Optimize("stack has no grating layer".into()))?;
        if g == 0 || g + 1 >= stack.layers.len() {
            return Err(OpticsError::Optimize("grating layer must sit between two defect layers".into()));
        }
        let half_film = stack.layers[g].thickness_nm / 2.0;
        let link = |layer| ThicknessLink { layer, scale: 0.5, offset: -half_film };
        Ok(FreeParam { name: "defect_nm".into(), links: vec![link(g - 1), link(g + 1)], bounds })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeOptions {
    /// Samples per coordinate sweep.
    pub grid_points: usize,
    /// Coordinate sweeps, each narrowing the window around the best sample.
    pub rounds: usize,
    pub max_polish_evaluations: usize,
    /// Simplex spread in objective at which the polish stops.
    pub polish_tol: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions { grid_points: 11, rounds: 4, max_polish_evaluations: 400, polish_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub stack: LayerStack,
    pub params: Vec<f64>,
    /// Nanowire absorptance at the target wavelength.
    pub achieved: f64,
    pub evaluations: usize,
    /// Set when nothing absorbs, so every parameter choice is equally bad.
    pub degenerate: bool,
    /// Per parameter: the optimum sits on a bound, so the true optimum may lie outside.
    pub at_bound: Vec<bool>,
}

fn apply(template: &LayerStack, params: &[FreeParam], x: &[f64]) -> LayerStack {
    let mut s = template.clone();
    for (p, &v) in params.iter().zip(x) {
        for l in &p.links {
            s.layers[l.layer].thickness_nm = l.scale * v + l.offset;
        }
    }
    s
}

struct Objective<'a> {
    template: &'a LayerStack,
    lib: &'a MaterialLibrary,
    params: &'a [FreeParam],
    wavelength: f64,
    pol: Polarization,
    mixing: FractalMixing,
    evaluations: usize,
    best: (f64, Vec<f64>),
}

impl Objective<'_> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let s = apply(self.template, self.params, x);
        let v = if s.validate().is_err() {
            f64::NEG_INFINITY
        } else {
            device_point(&s, self.lib, self.wavelength, self.pol, self.mixing)
                .map_or(f64::NEG_INFINITY, |p| p.a_nanowire)
        };
        if v > self.best.0 {
            self.best = (v, x.to_vec());
        }
        v
    }
}

fn clamp_to(params: &[FreeParam], x: &mut [f64]) {
    for (v, p) in x.iter_mut().zip(params) {
        *v = v.clamp(p.bounds.0, p.bounds.1);
    }
}

/// Maximizes the nanowire absorptance at `wavelength` over the free
/// thicknesses: coordinate grid sweeps with shrinking windows, then a
/// bound-projected Nelder-Mead polish. Fully deterministic.
#[allow(clippy::too_many_arguments)]
pub fn optimize_stack(
    template: &LayerStack,
    lib: &MaterialLibrary,
    params: &[FreeParam],
    wavelength: f64,
    pol: Polarization,
    mixing: FractalMixing,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    template.validate()?;
    template.check_materials(lib)?;
    if params.is_empty() || params.len() > MAX_FREE_PARAMS {
        return Err(OpticsError::Optimize(format!("need 1 to {MAX_FREE_PARAMS} free parameters, got {}", params.len())));
    }
    for p in params {
        let (lo, hi) = p.bounds;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(OpticsError::Optimize(format!("parameter '{}' bounds ({lo}, {hi}) must be positive and increasing", p.name)));
        }
        if let Some(l) = p.links.iter().find(|l| l.layer >= template.layers.len()) {
            return Err(OpticsError::Optimize(format!("parameter '{}' links missing layer {}", p.name, l.layer)));
        }
    }
    if opts.grid_points < 3 {
        return Err(OpticsError::Optimize("grid_points must be at least 3".into()));
    }
    // surface material range errors instead of hiding them behind -inf
    device_point(template, lib, wavelength, pol, mixing)?;

    let n = params.len();
    let mut x: Vec<f64> = params.iter().map(|p| 0.5 * (p.bounds.0 + p.bounds.1)).collect();
    let mut obj = Objective {
        template,
        lib,
        params,
        wavelength,
        pol,
        mixing,
        evaluations: 0,
        best: (f64::NEG_INFINITY, x.clone()),
    };
    let mut windows: Vec<(f64, f64)> = params.iter().map(|p| p.bounds).collect();
    let g = opts.grid_points;
    for _ in 0..opts.rounds.max(1) {
        for k in 0..n {
            let (lo, hi) = windows[k];
            let step = (hi - lo) / (g - 1) as f64;
            let mut best = (f64::NEG_INFINITY, x[k]);
            for s in 0..g {
                x[k] = lo + step * s as f64;
                let v = obj.eval(&x);
                if v > best.0 {
                    best = (v, x[k]);
                }
            }
            x[k] = best.1;
            let (blo, bhi) = params[k].bounds;
            windows[k] = ((best.1 - step).max(blo), (best.1 + step).min(bhi));
        }
    }

    nelder_mead(&mut obj, windows.iter().map(|w| 0.25 * (w.1 - w.0)).collect(), opts);

    let (achieved, best_x) = obj.best.clone();
    if !achieved.is_finite() {
        return Err(OpticsError::Optimize("no valid stack inside the bounds".into()));
    }
    let at_bound = params
        .iter()
        .zip(&best_x)
        .map(|(p, &v)| {
            let tol = 1e-6 * (p.bounds.1 - p.bounds.0);
            v - p.bounds.0 <= tol || p.bounds.1 - v <= tol
        })
        .collect();
    Ok(OptimizeResult {
        stack: apply(template, params, &best_x),
        params: best_x,
        achieved,
        evaluations: obj.evaluations,
        degenerate: achieved <= 1e-12,
        at_bound,
    })
}

fn nelder_mead(obj: &mut Objective<'_>, steps: Vec<f64>, opts: &OptimizeOptions) {
    let params = obj.params;
    let n = steps.len();
    let x0 = obj.best.1.clone();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((-obj.best.0, x0.clone()));
    for (k, &st) in steps.iter().enumerate() {
        let mut v = x0.clone();
        let (lo, hi) = params[k].bounds;
        v[k] = if v[k] + st <= hi { v[k] + st } else { (v[k] - st).max(lo) };
        let f = -obj.eval(&v);
        simplex.push((f, v));
    }
    let budget = obj.evaluations + opts.max_polish_evaluations;
    let point = |obj: &mut Objective<'_>, mut v: Vec<f64>| {
        clamp_to(params, &mut v);
        (-obj.eval(&v), v)
    };
    while obj.evaluations < budget {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !simplex[0].0.is_finite() || (simplex[n].0 - simplex[0].0).abs() <= opts.polish_tol {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|s| s.1[k]).sum::<f64>() / n as f64).collect();
        let toward = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(&c, &w)| c + t * (w - c)).collect()
        };
        let worst = simplex[n].1.clone();
        let refl = point(obj, toward(-1.0, &worst));
        if refl.0 < simplex[0].0 {
            let exp = point(obj, toward(-2.0, &worst));
            simplex[n] = if exp.0 < refl.0 { exp } else { refl };
        } else if refl.0 < simplex[n - 1].0 {
            simplex[n] = refl;
        } else {
            let con = if refl.0 < simplex[n].0 { point(obj, toward(-0.5, &worst)) } else { point(obj, toward(0.5, &worst)) };
            if con.0 < simplex[n].0.min(refl.0) {
                simplex[n] = con;
            } else {
                let best = simplex[0].1.clone();
                for s in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = best.iter().zip(&s.1).map(|(&b, &w)| b + 0.5 * (w - b)).collect();
                    *s = point(obj, v);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{reference_stack, GratingKind, Layer};

    #[test]
    fn defect_thickness_optimum_near_reference() {
        let lib = MaterialLibrary::builtin();
        let s = reference_stack(GratingKind::Fractal, 0.31);
        let p = FreeParam::defect(&s, (400.0, 650.0)).unwrap();
        let r = optimize_stack(&s, &lib, &[p], 1550.0, Polarization::Te, FractalMixing::default(), &OptimizeOptions::default())
            .unwrap();
        assert!((r.params[0] - 529.0).abs() <= 30.0, "defect {}", r.params[0]);
        assert!(r.achieved >= 0.9 && !r.degenerate && !r.at_bound[0]);
        let total: f64 = r.stack.layers[6..9].iter().map(|l| l.thickness_nm).sum();
        assert!((total - r.params[0]).abs() < 1e-9);
    }

    #[test]
    fn lossless_stack_is_degenerate() {
        let lib = MaterialLibrary::builtin();
        let mut s = reference_stack(GratingKind::Fractal, 0.31);
        let g = s.grating_index().unwrap();
        s.layers[g].material = "sio2".into();
        s.substrate = "sio2".into();
        let p = FreeParam::defect(&s, (400.0, 650.0)).unwrap();
        let r = optimize_stack(&s, &lib, &[p], 1550.0, Polarization::Te, FractalMixing::default(), &OptimizeOptions::default())
            .unwrap();
        assert!(r.degenerate && r.achieved.abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let lib = MaterialLibrary::builtin();
        let s = LayerStack::new("air", vec![Layer::plain("sio2", 100.0)], "si").unwrap();
        let o = OptimizeOptions::default();
        let f = FractalMixing::default();
        assert!(optimize_stack(&s, &lib, &[], 1550.0, Polarization::Te, f, &o).is_err());
        let bad = FreeParam::layer("d", 0, (-1.0, 10.0));
        assert!(optimize_stack(&s, &lib, &[bad], 1550.0, Polarization::Te, f, &o).is_err());
        let many: Vec<FreeParam> = (0..7).map(|_| FreeParam::layer("d", 0, (1.0, 10.0))).collect();
        assert!(optimize_stack(&s, &lib, &many, 1550.0, Polarization::Te, f, &o).is_err());
    }
}
