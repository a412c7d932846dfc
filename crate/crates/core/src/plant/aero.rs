#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::PlantError;

/// Lift and drag coefficients on a rectangular `(α, V)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroTable {
    alphas: Vec<f64>,
    speeds: Vec<f64>,
    /// Row-major: `cl[ia * speeds.len() + iv]`.
    cl: Vec<f64>,
    cd: Vec<f64>,
}

/// Interpolated coefficients and whether the query was clamped to the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoefficients {
    pub cl: f64,
    pub cd: f64,
    pub clamped: bool,
}

/// Shape of the built-in coefficient model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AeroModelParams {
    pub aspect_ratio: f64,
    pub stall_deg: f64,
    /// Sharpness of the attached/separated blend, 1/rad.
    pub blend_rate: f64,
    pub cd0: f64,
    pub oswald: f64,
}

impl Default for AeroModelParams {
    fn default() -> Self {
        let area = 0.9 * 0.2 * (1.0 + 0.48) / 2.0;
        Self {
            aspect_ratio: 0.9 * 0.9 / area,
            stall_deg: 12.0,
            blend_rate: 50.0,
            cd0: 0.02,
            oswald: 0.9,
        }
    }
}

impl AeroModelParams {
    /// Thin-airfoil lift below stall blended into flat-plate coefficients
    /// after it.
    pub fn coefficients(&self, alpha: f64) -> (f64, f64) {
        let a = wrap_pi(alpha);
        let slope = 2.0 * PI / (1.0 + 2.0 / self.aspect_ratio);
        let plate_cl = 2.0 * a.sin() * a.cos();
        let plate_cd = 2.0 * a.sin() * a.sin() + self.cd0;
        if a.abs() > PI / 2.0 {
            return (plate_cl, plate_cd);
        }
        let s = self.stall_deg.to_radians();
        let m = self.blend_rate;
        let sigma = (1.0 + (-m * (a - s)).exp() + (m * (a + s)).exp())
            / ((1.0 + (-m * (a - s)).exp()) * (1.0 + (m * (a + s)).exp()));
        let lin_cl = slope * a;
        let lin_cd = self.cd0 + lin_cl * lin_cl / (PI * self.oswald * self.aspect_ratio);
        (
            (1.0 - sigma) * lin_cl + sigma * plate_cl,
            (1.0 - sigma) * lin_cd + sigma * plate_cd,
        )
    }
}

fn wrap_pi(a: f64) -> f64 {
    let mut x = (a + PI) % (2.0 * PI);
    if x < 0.0 {
        x += 2.0 * PI;
    }
    x - PI
}

impl AeroTable {
    pub fn new(alphas: Vec<f64>, speeds: Vec<f64>, cl: Vec<f64>, cd: Vec<f64>) -> Result<Self, PlantError> {
        let inc = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| x.is_finite());
        if alphas.len() < 2 || speeds.is_empty() || !inc(&alphas) || !inc(&speeds) {
            return Err(PlantError::InvalidParameter("aero grid axes must be strictly increasing"));
        }
        let n = alphas.len() * speeds.len();
        if cl.len() != n || cd.len() != n {
            return Err(PlantError::InvalidParameter("aero table is not rectangular"));
        }
        if cl.iter().chain(cd.iter()).any(|x| !x.is_finite()) {
            return Err(PlantError::InvalidParameter("aero coefficients must be finite"));
        }
        if cd.iter().any(|x| *x < 0.0) {
            return Err(PlantError::InvalidParameter("drag coefficient must be >= 0"));
        }
        if speeds[0] < 0.0 {
            return Err(PlantError::InvalidParameter("airspeed grid must be >= 0"));
        }
        Ok(Self { alphas, speeds, cl, cd })
    }

    /// Table sampled from `model` every degree of α on a speed grid
    /// 0–40 m/s; the built-in model does not depend on speed.
    pub fn from_model(model: &AeroModelParams) -> Self {
        let alphas: Vec<f64> = (0..=360).map(|i| (i as f64 - 180.0).to_radians()).collect();
        let speeds: Vec<f64> = [0.0, 10.0, 20.0, 40.0].to_vec();
        let mut cl = Vec::with_capacity(alphas.len() * speeds.len());
        let mut cd = Vec::with_capacity(alphas.len() * speeds.len());
        for a in &alphas {
            let (l, d) = model.coefficients(*a);
            for _ in &speeds {
                cl.push(l);
                cd.push(d);
            }
        }
        Self { alphas, speeds, cl, cd }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    /// `(alpha, V, CL, CD)` for every node, α-major.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let nv = self.speeds.len();
        (0..self.cl.len()).map(move |k| {
            (self.alphas[k / nv], self.speeds[k % nv], self.cl[k], self.cd[k])
        })
    }

    /// Builds a table from `(alpha, V, CL, CD)` rows in any order.
    pub fn from_rows(rows: &[(f64, f64, f64, f64)]) -> Result<Self, PlantError> {
        let mut alphas: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut speeds: Vec<f64> = rows.iter().map(|r| r.1).collect();
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        speeds.sort_by(f64::total_cmp);
        speeds.dedup();
        let n = alphas.len() * speeds.len();
        if rows.len() != n {
            return Err(PlantError::InvalidParameter("aero table is not rectangular"));
        }
        let mut cl = alloc::vec![f64::NAN; n];
        let mut cd = alloc::vec![f64::NAN; n];
        for r in rows {
            let ia = alphas.binary_search_by(|x| x.total_cmp(&r.0)).unwrap_or(0);
            let iv = speeds.binary_search_by(|x| x.total_cmp(&r.1)).unwrap_or(0);
            let k = ia * speeds.len() + iv;
            if !cl[k].is_nan() {
                return Err(PlantError::InvalidParameter("duplicate aero table node"));
            }
            cl[k] = r.2;
            cd[k] = r.3;
        }
        Self::new(alphas, speeds, cl, cd)
    }

    /// Bilinear interpolation; queries outside the grid are clamped to its
    /// edge and flagged.
    pub fn lookup(&self, alpha: f64, speed: f64) -> AeroCoefficients {
        let (ia, ta, ca) = locate(&self.alphas, alpha);
        let (iv, tv, cv) = locate(&self.speeds, speed);
        let nv = self.speeds.len();
        let at = |tab: &[f64], i: usize, j: usize| tab[i * nv + j];
        let interp = |tab: &[f64]| {
            let jv = (iv + 1).min(nv - 1);
            let v00 = at(tab, ia, iv);
            let v01 = at(tab, ia, jv);
            let v10 = at(tab, ia + 1, iv);
            let v11 = at(tab, ia + 1, jv);
            (1.0 - ta) * ((1.0 - tv) * v00 + tv * v01) + ta * ((1.0 - tv) * v10 + tv * v11)
        };
        AeroCoefficients {
            cl: interp(&self.cl),
            cd: interp(&self.cd),
            clamped: ca || cv,
        }
    }
}

impl Default for AeroTable {
    fn default() -> Self {
        Self::from_model(&AeroModelParams::default())
    }
}

/// Cell index, fraction within the cell, and whether `x` was clamped.
fn locate(grid: &[f64], x: f64) -> (usize, f64, bool) {
    let n = grid.len();
    if n == 1 {
        return (0, 0.0, x != grid[0]);
    }
    if !(x >= grid[0]) {
        return (0, 0.0, true);
    }
    if x > grid[n - 1] {
        return (n - 2, 1.0, true);
    }
    let i = grid.partition_point(|g| *g <= x).clamp(1, n - 1) - 1;
    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    (i, t, false)
}

/// Lift and drag magnitudes in newtons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroForces {
    pub lift: f64,
    pub drag: f64,
    pub clamped: bool,
}

/// `L = ½ρV²S·C_L`, `D = ½ρV²S·C_D`.
pub fn aero_forces(alpha: f64, speed: f64, table: &AeroTable, rho: f64, area: f64) -> AeroForces {
    let v = speed.max(0.0);
    let c = table.lookup(alpha, v);
    let q = 0.5 * rho * v * v * area;
    AeroForces {
        lift: q * c.cl,
        drag: q * c.cd,
        clamped: c.clamped,
    }
}

/// Velocity-frame axes expressed in the body frame: `x_v` along the body
/// velocity, `z_v` perpendicular to it in the symmetry plane with a
/// positive component along body `z`.
pub fn velocity_axes_body(v_body: &Vector3<f64>) -> Option<(Vector3<f64>, Vector3<f64>)> {
    let speed = v_body.norm();
    if speed < 1e-9 {
        return None;
    }
    let xv = v_body / speed;
    let mut zv = Vector3::new(-v_body.z, 0.0, v_body.x);
    if zv.z < 0.0 {
        zv = -zv;
    }
    // Already orthogonal to the velocity; zero only for pure sideslip.
    let n = zv.norm();
    if n < 1e-12 {
        return Some((xv, Vector3::zeros()));
    }
    Some((xv, zv / n))
}

pub fn angle_of_attack(v_body: &Vector3<f64>) -> f64 {
    v_body.z.atan2(v_body.x)
}

/// Aerodynamic force in the body frame, `−D·x_v − L·z_v`.
pub fn aero_force_body(
    v_body: &Vector3<f64>,
    table: &AeroTable,
    rho: f64,
    area: f64,
) -> (Vector3<f64>, bool) {
    match velocity_axes_body(v_body) {
        None => (Vector3::zeros(), false),
        Some((xv, zv)) => {
            let f = aero_forces(angle_of_attack(v_body), v_body.norm(), table, rho, area);
            (-xv * f.drag - zv * f.lift, f.clamped)
        }
    }
}
