//! Browser bindings: build a flat system in the page and poke at it.
//!
//! The math lives in [`core`] as plain Rust so it can be tested natively;
//! the `#[wasm_bindgen]` layer is a thin error-translating shell.

use wasm_bindgen::prelude::*;

pub mod core {
    use flatsphere::cutoff::KernelSpec;
    use flatsphere::gramian::build_gram;
    use flatsphere::harmonic::space_dimension;
    use flatsphere::points::{approximate_fekete, candidate_mesh, shrink_degree};
    use flatsphere::system::{build_system, FlatSystem};
    use flatsphere::Result;

    /// Everything the page displays about one built system.
    pub struct DemoSystem {
        pub system: FlatSystem,
        pub lambda_min: f64,
        pub lambda_max: f64,
        pub residual: f64,
        pub sup_max: f64,
    }

    pub fn build_demo(degree_cutoff: u32, epsilon: f64) -> Result<DemoSystem> {
        let degree = shrink_degree(degree_cutoff, epsilon)?;
        let mesh = candidate_mesh(2, 1.0 / (4.0 * degree.max(1) as f64), None)?;
        let points = approximate_fekete(2, degree, &mesh)?;
        let spec = KernelSpec::new(2, degree_cutoff, epsilon)?;
        let gram = build_gram(&points, &spec)?;
        let (lambda_min, lambda_max) = gram.extreme_eigenvalues()?;
        let system = build_system(&points, &spec, 1e-8)?;
        let residual = system.orthonormality_residual()?;
        let scan = system.probe_scan(1.0 / (4.0 * degree_cutoff.max(1) as f64))?;
        let sup_max = scan.sup_norms.iter().cloned().fold(0.0f64, f64::max);
        Ok(DemoSystem { system, lambda_min, lambda_max, residual, sup_max })
    }

    pub fn summary_json(demo: &DemoSystem) -> Result<String> {
        let spec = demo.system.spec();
        let k_l = space_dimension(2, spec.degree_cutoff())?;
        Ok(serde_json::json!({
            "n": demo.system.len(),
            "k_L": k_l,
            "ratio": demo.system.len() as f64 / k_l as f64,
            "degree_cutoff": spec.degree_cutoff(),
            "epsilon": spec.epsilon(),
            "node_degree": demo.system.points().degree(),
            "separation": demo.system.points().separation(),
            "lambda_min": demo.lambda_min,
            "lambda_max": demo.lambda_max,
            "orthonormality_residual": demo.residual,
            "sup_max": demo.sup_max,
        })
        .to_string())
    }

    pub fn nodes_json(demo: &DemoSystem) -> String {
        serde_json::to_string(demo.system.points().points()).expect("plain float arrays serialize")
    }

    /// |s_index| on an equirectangular grid, row-major from the north edge;
    /// longitude spans [-pi, pi), latitude [pi/2, -pi/2].
    pub fn heatmap(demo: &DemoSystem, index: usize, width: u32, height: u32) -> Result<Vec<f64>> {
        let (w, h) = (width as usize, height as usize);
        let mut out = Vec::with_capacity(w * h);
        for row in 0..h {
            let lat = std::f64::consts::FRAC_PI_2 * (1.0 - 2.0 * (row as f64 + 0.5) / h as f64);
            let (sin_lat, cos_lat) = lat.sin_cos();
            for col in 0..w {
                let lon = std::f64::consts::PI * (2.0 * (col as f64 + 0.5) / w as f64 - 1.0);
                let z = [cos_lat * lon.cos(), cos_lat * lon.sin(), sin_lat];
                out.push(demo.system.evaluate(index, &z)?.norm());
            }
        }
        Ok(out)
    }
}

fn to_js<T>(r: flatsphere::Result<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// A built system held by the page across interactions.
#[wasm_bindgen]
pub struct Demo {
    inner: core::DemoSystem,
}

#[wasm_bindgen]
impl Demo {
    /// Select nodes, build the flat system, and precompute its summary
    /// statistics for the given cutoff and taper width.
    #[wasm_bindgen(constructor)]
    pub fn new(degree_cutoff: u32, epsilon: f64) -> Result<Demo, JsError> {
        Ok(Demo { inner: to_js(core::build_demo(degree_cutoff, epsilon))? })
    }

    /// JSON object of system invariants (sizes, frame bounds, sup norm...).
    #[wasm_bindgen(js_name = summaryJson)]
    pub fn summary_json(&self) -> Result<String, JsError> {
        to_js(core::summary_json(&self.inner))
    }

    /// JSON array of the selected nodes as [x, y, z] triples.
    #[wasm_bindgen(js_name = nodesJson)]
    pub fn nodes_json(&self) -> String {
        core::nodes_json(&self.inner)
    }

    /// |s_index| sampled on a width x height equirectangular grid.
    pub fn heatmap(&self, index: usize, width: u32, height: u32) -> Result<Vec<f64>, JsError> {
        if index >= self.inner.system.len() {
            return Err(JsError::new("function index out of range"));
        }
        to_js(core::heatmap(&self.inner, index, width, height))
    }

    /// Number of functions in the system.
    pub fn size(&self) -> usize {
        self.inner.system.len()
    }
}
