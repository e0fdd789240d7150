//! Point-evaluable fields on the reflected strip. The frequency machinery
//! integrates over circles and balls centered at the origin of the (x, y)
//! plane; it only needs values and gradients at arbitrary points, provided by
//! this trait.

use crate::extension::ExtensionField;

/// A field U(x, y) on the reflected strip with a gradient.
pub trait EvalField {
    fn eval(&self, x: f64, y: f64) -> f64;
    /// (∂_x U, ∂_y U).
    fn grad(&self, x: f64, y: f64) -> (f64, f64);
    /// Smallest length scale the field can resolve (grid spacing for
    /// tabulated fields, `None` for closed forms). Zoomed views report the
    /// spacing as seen in their own coordinates.
    fn resolution(&self) -> Option<f64> {
        None
    }
}

/// Even reflection of an [`ExtensionField`] with bilinear interpolation.
///
/// Values are interpolated bilinearly on the tensor mesh (uniform in x,
/// graded in |y|); gradients are formed at the nodes by three-point
/// differences (exact through quadratics, one-sided at the outer edges, and
/// ∂_y = 0 on the trace row of an even field — its exact value there) and
/// then interpolated bilinearly themselves.
#[derive(Debug, Clone)]
pub struct GridField {
    xs: Vec<f64>,
    hx: f64,
    /// Full strip levels −Y … 0 … Y, ascending.
    ys: Vec<f64>,
    /// values[i][j] on xs × ys.
    vals: Vec<Vec<f64>>,
    gx: Vec<Vec<f64>>,
    gy: Vec<Vec<f64>>,
    /// Whether the field is even in y; even fields are evaluated at |y| so
    /// the symmetry is exact in floating point.
    even: bool,
}

impl GridField {
    /// Builds the even reflection Ũ(x, −y) = U(x, y).
    pub fn reflect_even(f: &ExtensionField) -> Self {
        let m = f.xgrid.len();
        let nl = f.levels();
        let jmax = nl - 1;
        let xs = f.xgrid.coords[0].clone();
        let hx = f.xgrid.spacing[0];
        let mut ys = Vec::with_capacity(2 * jmax + 1);
        for j in (1..=jmax).rev() {
            ys.push(-f.ygrid.ys[j]);
        }
        ys.extend(f.ygrid.ys.iter().copied());
        let ny = ys.len();
        let mut vals = vec![vec![0.0; ny]; m];
        for i in 0..m {
            for j in 0..ny {
                let src = (j as isize - jmax as isize).unsigned_abs();
                vals[i][j] = f.value(i, src);
            }
        }
        Self::build(xs, hx, ys, vals, true)
    }

    /// Wraps an arbitrary full-strip value table (rows need not be even in
    /// y). `ys` must be strictly ascending; `vals[i][j]` sits at
    /// (xs\[i\], ys\[j\]).
    pub fn from_table(xs: Vec<f64>, hx: f64, ys: Vec<f64>, vals: Vec<Vec<f64>>) -> Self {
        Self::build(xs, hx, ys, vals, false)
    }

    fn build(xs: Vec<f64>, hx: f64, ys: Vec<f64>, vals: Vec<Vec<f64>>, even: bool) -> Self {
        let m = xs.len();
        let ny = ys.len();
        // Index of the trace row (y = 0) if the table is even around it.
        let jmid = (ny - 1) / 2;
        let mut gx = vec![vec![0.0; ny]; m];
        let mut gy = vec![vec![0.0; ny]; m];
        for j in 0..ny {
            for i in 0..m {
                // Uniform x with Dirichlet ghosts just outside.
                let left = if i == 0 { 0.0 } else { vals[i - 1][j] };
                let right = if i + 1 == m { 0.0 } else { vals[i + 1][j] };
                gx[i][j] = (right - left) / (2.0 * hx);
            }
        }
        for i in 0..m {
            for j in 0..ny {
                gy[i][j] = if even && j == jmid {
                    0.0 // evenness across the trace plane
                } else if j == 0 {
                    (vals[i][1] - vals[i][0]) / (ys[1] - ys[0])
                } else if j + 1 == ny {
                    (vals[i][j] - vals[i][j - 1]) / (ys[j] - ys[j - 1])
                } else {
                    let hm = ys[j] - ys[j - 1];
                    let hp = ys[j + 1] - ys[j];
                    // Nonuniform three-point derivative, exact on quadratics.
                    -hp / (hm * (hm + hp)) * vals[i][j - 1]
                        + (hp - hm) / (hm * hp) * vals[i][j]
                        + hm / (hp * (hm + hp)) * vals[i][j + 1]
                };
            }
        }
        GridField {
            xs,
            hx,
            ys,
            vals,
            gx,
            gy,
            even,
        }
    }

    /// Locator: cell index and barycentric weight along a sorted axis;
    /// clamps outside the covered range.
    fn locate(coords: &[f64], v: f64) -> (usize, f64) {
        let n = coords.len();
        if v <= coords[0] {
            return (0, 0.0);
        }
        if v >= coords[n - 1] {
            return (n - 2, 1.0);
        }
        let k = coords.partition_point(|c| *c <= v) - 1;
        let k = k.min(n - 2);
        let t = (v - coords[k]) / (coords[k + 1] - coords[k]);
        (k, t)
    }

    fn bilinear(&self, table: &[Vec<f64>], x: f64, y: f64) -> f64 {
        let (i, tx) = Self::locate(&self.xs, x);
        let (j, ty) = Self::locate(&self.ys, y);
        let v00 = table[i][j];
        let v10 = table[i + 1][j];
        let v01 = table[i][j + 1];
        let v11 = table[i + 1][j + 1];
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty
            + v11 * tx * ty
    }

    pub fn x_spacing(&self) -> f64 {
        self.hx
    }
}

impl EvalField for GridField {
    fn eval(&self, x: f64, y: f64) -> f64 {
        // An even field is folded onto |y|, which makes the symmetry exact
        // in floating point: mirrored quadrature nodes contribute identical
        // values.
        let y = if self.even { y.abs() } else { y };
        self.bilinear(&self.vals, x, y)
    }

    fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        if self.even {
            let gx = self.bilinear(&self.gx, x, y.abs());
            let gy = self.bilinear(&self.gy, x, y.abs());
            // ∂_y is odd under the even reflection.
            let gy = if y < 0.0 { -gy } else { gy };
            (gx, gy)
        } else {
            (self.bilinear(&self.gx, x, y), self.bilinear(&self.gy, x, y))
        }
    }

    fn resolution(&self) -> Option<f64> {
        Some(self.hx)
    }
}

/// Closed-form fields for exactness checks.
#[derive(Debug, Clone, Copy)]
pub enum AnalyticField {
    /// U(x, y) = x — weighted-harmonic for every s, homogeneous of degree 1.
    LinearX,
    /// U ≡ c — degenerate (zero-energy) field.
    Constant(f64),
}

impl EvalField for AnalyticField {
    fn eval(&self, x: f64, _y: f64) -> f64 {
        match self {
            AnalyticField::LinearX => x,
            AnalyticField::Constant(c) => *c,
        }
    }

    fn grad(&self, _x: f64, _y: f64) -> (f64, f64) {
        match self {
            AnalyticField::LinearX => (1.0, 0.0),
            AnalyticField::Constant(_) => (0.0, 0.0),
        }
    }
}

/// Zoomed rescaling U_τ(z) = U(τ z) / scale.
pub struct RescaledField<'a> {
    pub inner: &'a dyn EvalField,
    pub tau: f64,
    pub scale: f64,
}

impl EvalField for RescaledField<'_> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.inner.eval(self.tau * x, self.tau * y) / self.scale
    }

    fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let (gx, gy) = self.inner.grad(self.tau * x, self.tau * y);
        (self.tau * gx / self.scale, self.tau * gy / self.scale)
    }

    fn resolution(&self) -> Option<f64> {
        // A cell of physical width h spans h/τ in the zoomed coordinates.
        self.inner.resolution().map(|h| h / self.tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::ExtensionRoute;
    use crate::grid::SpatialGrid;
    use crate::spectral::FractionalOrder;
    use crate::ygrid::YGrid;

    /// Hand-built extension field holding U(x, y) = 2x + y² on the half
    /// strip (even in y after reflection).
    fn quadratic_field() -> ExtensionField {
        let xg = SpatialGrid::line(-1.0, 1.0, 39).unwrap();
        let yg = YGrid::new(1.5, 24, 2.0).unwrap();
        let nl = yg.ys.len();
        let mut values = vec![0.0; xg.len() * nl];
        for i in 0..xg.len() {
            let x = xg.coords[0][i];
            for (j, y) in yg.ys.iter().enumerate() {
                values[i * nl + j] = 2.0 * x + y * y;
            }
        }
        ExtensionField {
            xgrid: xg,
            ygrid: yg,
            s: FractionalOrder::new(0.5).unwrap(),
            route: ExtensionRoute::Semigroup,
            values,
            truncation_warning: None,
        }
    }

    #[test]
    fn reflection_is_exactly_even() {
        let f = GridField::reflect_even(&quadratic_field());
        for (x, y) in [(0.3, 0.7), (-0.52, 0.11), (0.0, 1.2)] {
            assert_eq!(f.eval(x, y), f.eval(x, -y));
            let (gxp, gyp) = f.grad(x, y);
            let (gxm, gym) = f.grad(x, -y);
            assert_eq!(gxp, gxm);
            assert_eq!(gyp, -gym);
        }
    }

    #[test]
    fn values_exact_at_nodes_and_linear_between() {
        let f = GridField::reflect_even(&quadratic_field());
        // Node (coordinates from the construction above).
        assert!((f.eval(0.35, 0.0) - 0.7).abs() < 1e-14);
        // Bilinear interpolation reproduces functions linear in each
        // variable exactly; y² incurs the usual second-order error.
        for (x, y) in [(0.123, 0.456), (-0.61, 0.89)] {
            let err = (f.eval(x, y) - (2.0 * x + y * y)).abs();
            assert!(err < 5e-3, "interp error {err} at ({x},{y})");
        }
    }

    #[test]
    fn gradients_are_exact_for_quadratics() {
        let f = GridField::reflect_even(&quadratic_field());
        // Three-point formulas are exact on quadratics, and the gradient
        // tables are bilinear in between, so ∇(2x + y²) = (2, 2y) holds to
        // interpolation accuracy away from the outer edges.
        for (x, y) in [(0.3, 0.4), (-0.2, 0.9), (0.05, 0.0)] {
            let (gx, gy) = f.grad(x, y);
            assert!((gx - 2.0).abs() < 1e-10, "gx {gx}");
            assert!((gy - 2.0 * y).abs() < 2e-2, "gy {gy} at y={y}");
        }
        // Trace plane: ∂_y U = 0 exactly by evenness.
        let (_, gy0) = f.grad(0.4, 0.0);
        assert_eq!(gy0, 0.0);
    }

    #[test]
    fn rescaled_field_identities() {
        let base = AnalyticField::LinearX;
        let r = RescaledField {
            inner: &base,
            tau: 0.25,
            scale: 2.0,
        };
        assert!((r.eval(0.8, 0.1) - 0.25 * 0.8 / 2.0).abs() < 1e-15);
        let (gx, gy) = r.grad(0.3, 0.3);
        assert!((gx - 0.125).abs() < 1e-15);
        assert_eq!(gy, 0.0);
    }
}
