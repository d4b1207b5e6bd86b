use std::f64::consts::PI;

/// Constants of the rotating-translating-stretching body. Defaults are the
/// reference values used throughout the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyParams {
    pub z0: f64,
    pub v_z: f64,
    pub l_x: f64,
    pub l_y: f64,
    pub a_x: f64,
    pub b_x: f64,
    pub a_y: f64,
    pub b_y: f64,
    pub theta0: f64,
    pub v_theta: f64,
    pub omega_theta: f64,
    pub t_end: f64,
    pub phi_theta: f64,
    pub s0: f64,
    pub v_s: f64,
    pub omega_s: f64,
    pub phi_s: f64,
    pub x_c0: f64,
    pub y_c0: f64,
    pub v_xi: f64,
    pub omega_xi: f64,
}

impl Default for RigidBodyParams {
    fn default() -> Self {
        let t_end = 10.0;
        Self {
            z0: 1.0,
            v_z: 0.2,
            l_x: 8.0,
            l_y: 6.0,
            a_x: 10.0,
            b_x: 10.0,
            a_y: 10.0,
            b_y: 10.0,
            theta0: 0.0,
            v_theta: PI,
            omega_theta: 2.0 * PI / t_end * PI,
            t_end,
            phi_theta: 2.0,
            s0: 2.0,
            v_s: 1.0,
            omega_s: 2.0 * PI / t_end * PI,
            phi_s: 0.0,
            x_c0: 1.0,
            y_c0: -0.5,
            v_xi: 0.5,
            omega_xi: 5.0 * PI / 18.0,
        }
    }
}

impl RigidBodyParams {
    /// Rotation angle theta(t) = theta0 + v_theta cos(omega_theta t + phi_theta).
    pub fn theta(&self, t: f64) -> f64 {
        self.theta0 + self.v_theta * (self.omega_theta * t + self.phi_theta).cos()
    }

    /// Stretch factor s(t) = s0 + v_s sin(omega_s t + phi_s).
    pub fn stretch(&self, t: f64) -> f64 {
        self.s0 + self.v_s * (self.omega_s * t + self.phi_s).sin()
    }

    /// Spiral center (x_c, y_c)(t) with xi = omega_xi t.
    pub fn center(&self, t: f64) -> (f64, f64) {
        let xi = self.omega_xi * t;
        (self.x_c0 + self.v_xi * xi * xi.cos(), self.y_c0 + self.v_xi * xi * xi.sin())
    }

    /// Coordinates in the rotated-stretched-shifted frame:
    /// [x_I, y_I] = s(t) R(theta(t)) [x, y]^T + [x_c(t), y_c(t)]^T.
    pub fn frame(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let th = self.theta(t);
        let s = self.stretch(t);
        let (xc, yc) = self.center(t);
        let (sin, cos) = th.sin_cos();
        (s * (cos * x - sin * y) + xc, s * (sin * x + cos * y) + yc)
    }
}

/// Field value z(x, y; t) = exp(z_x + z_y) * (z0 + v_z t), where z_x and z_y
/// are half-tanh pairs in the moving-frame coordinates.
pub fn rigid_body_field(x: f64, y: f64, t: f64, p: &RigidBodyParams) -> f64 {
    let (xi_c, yi_c) = p.frame(x, y, t);
    let zx = 0.5 * (p.a_x * (xi_c + p.l_x)).tanh() + 0.5 * (p.b_x * (xi_c - p.l_x)).tanh();
    let zy = 0.5 * (p.a_y * (yi_c + p.l_y)).tanh() + 0.5 * (p.b_y * (yi_c - p.l_y)).tanh();
    (zx + zy).exp() * (p.z0 + p.v_z * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_at_t0_matches_hand_substitution() {
        let p = RigidBodyParams::default();
        assert!((p.stretch(0.0) - 2.0).abs() < 1e-15);
        assert!((p.theta(0.0) - PI * 2.0f64.cos()).abs() < 1e-15);
        let (xc, yc) = p.center(0.0);
        assert!((xc - 1.0).abs() < 1e-15);
        assert!((yc + 0.5).abs() < 1e-15);
    }

    #[test]
    fn deep_interior_sits_on_plateau() {
        let p = RigidBodyParams::default();
        for i in 0..=20 {
            let t = i as f64 * 0.5;
            // invert the frame map to find the original-coordinates point that
            // lands on the transformed center
            let th = p.theta(t);
            let s = p.stretch(t);
            let (xc, yc) = p.center(t);
            let (sin, cos) = th.sin_cos();
            let (ux, uy) = (-xc / s, -yc / s);
            let (x, y) = (cos * ux + sin * uy, -sin * ux + cos * uy);
            let z = rigid_body_field(x, y, t, &p);
            let plateau = p.z0 + p.v_z * t;
            assert!((z - plateau).abs() < 1e-6, "t={t}: {z} vs {plateau}");
        }
    }

    /// Second implementation of the field equations, written directly from the
    /// generating laws with no shared code path, as an oracle.
    fn field_reference(x: f64, y: f64, t: f64) -> f64 {
        let t_end = 10.0;
        let theta = 0.0 + PI * ((2.0 * PI / t_end * PI) * t + 2.0).cos();
        let s = 2.0 + 1.0 * ((2.0 * PI / t_end * PI) * t + 0.0).sin();
        let xi = 5.0 * PI / 18.0 * t;
        let xc = 1.0 + 0.5 * xi * xi.cos();
        let yc = -0.5 + 0.5 * xi * xi.sin();
        let x_i = s * (theta.cos() * x - theta.sin() * y) + xc;
        let y_i = s * (theta.sin() * x + theta.cos() * y) + yc;
        let zx = 0.5 * (10.0 * (x_i + 8.0)).tanh() + 0.5 * (10.0 * (x_i - 8.0)).tanh();
        let zy = 0.5 * (10.0 * (y_i + 6.0)).tanh() + 0.5 * (10.0 * (y_i - 6.0)).tanh();
        (zx + zy).exp() * (1.0 + 0.2 * t)
    }

    #[test]
    fn matches_independent_reimplementation() {
        let p = RigidBodyParams::default();
        let mut probe = 0.37f64;
        for _ in 0..200 {
            // cheap deterministic quasi-random sweep of (x, y, t)
            probe = (probe * 9301.0 + 0.2113).fract();
            let x = -15.0 + 30.0 * probe;
            let y = -15.0 + 30.0 * ((probe * 7.7).fract());
            let t = 10.0 * ((probe * 3.3).fract());
            let a = rigid_body_field(x, y, t, &p);
            let b = field_reference(x, y, t);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "({x},{y},{t}): {a} vs {b}");
        }
    }
}
