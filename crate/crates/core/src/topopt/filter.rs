use super::{DensityField, FilterSpec};

/// Conic smoothing operator on a pixel lattice, stored row by row.
///
/// Row `p` lists `(q, w)` with weights normalized over the pixels that fall
/// inside the design region, so a constant field maps to itself.
#[derive(Debug, Clone)]
pub struct ConicFilter {
    rows: Vec<Vec<(usize, f64)>>,
}

impl ConicFilter {
    pub fn new(px: usize, py: usize, radius_pixels: f64) -> Self {
        let reach = radius_pixels.floor() as isize;
        let mut rows = Vec::with_capacity(px * py);
        for x in 0..px as isize {
            for y in 0..py as isize {
                let mut row = Vec::new();
                for dx in -reach..=reach {
                    for dy in -reach..=reach {
                        let (qx, qy) = (x + dx, y + dy);
                        if qx < 0 || qy < 0 || qx >= px as isize || qy >= py as isize {
                            continue;
                        }
                        let w = radius_pixels - ((dx * dx + dy * dy) as f64).sqrt();
                        if w > 0.0 {
                            row.push((qx as usize * py + qy as usize, w));
                        }
                    }
                }
                if row.is_empty() {
                    row.push((x as usize * py + y as usize, 1.0));
                }
                let total: f64 = row.iter().map(|(_, w)| w).sum();
                row.iter_mut().for_each(|(_, w)| *w /= total);
                rows.push(row);
            }
        }
        Self { rows }
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(q, w)| w * values[q]).sum()).collect()
    }

    /// Adjoint of [`Self::apply`].
    pub fn apply_transpose(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        for (p, row) in self.rows.iter().enumerate() {
            for &(q, w) in row {
                out[q] += w * values[p];
            }
        }
        out
    }
}

/// Smoothed Heaviside threshold at `eta` with sharpness `beta`.
pub fn project(value: f64, beta: f64, eta: f64) -> f64 {
    let a = (beta * eta).tanh();
    let b = (beta * (1.0 - eta)).tanh();
    (a + (beta * (value - eta)).tanh()) / (a + b)
}

/// Derivative of [`project`] with respect to `value`.
pub fn project_derivative(value: f64, beta: f64, eta: f64) -> f64 {
    let a = (beta * eta).tanh();
    let b = (beta * (1.0 - eta)).tanh();
    let t = (beta * (value - eta)).tanh();
    beta * (1.0 - t * t) / (a + b)
}

/// Filter then project, keeping the intermediate filtered values for the
/// chain rule.
#[derive(Debug, Clone)]
pub struct FilterChain {
    spec: FilterSpec,
    filter: ConicFilter,
}

impl FilterChain {
    pub fn new(spec: FilterSpec, px: usize, py: usize, pitch: f64) -> Self {
        Self { spec, filter: ConicFilter::new(px, py, spec.radius / pitch) }
    }

    pub fn spec(&self) -> FilterSpec {
        self.spec
    }

    /// Returns `(filtered, projected)`.
    pub fn forward(&self, rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let filtered = self.filter.apply(rho);
        let projected = filtered.iter().map(|&v| project(v, self.spec.beta, self.spec.eta)).collect();
        (filtered, projected)
    }

    /// Pull a gradient with respect to the projected density back to raw densities.
    pub fn backward(&self, filtered: &[f64], grad_projected: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = filtered
            .iter()
            .zip(grad_projected)
            .map(|(&v, &g)| g * project_derivative(v, self.spec.beta, self.spec.eta))
            .collect();
        self.filter.apply_transpose(&g)
    }
}

/// Smoothed-then-thresholded densities.
pub fn filter_and_project(rho: &DensityField, spec: FilterSpec) -> DensityField {
    let chain = FilterChain::new(spec, rho.px(), rho.py(), rho.pitch());
    let (_, projected) = chain.forward(rho.values());
    rho.with_values(projected.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}
