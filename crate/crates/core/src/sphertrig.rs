//! Trigonometry of a single spherical bigon.
//!
//! A bigon of angle `theta` is the intersection of two round disks of radii
//! `r1, r2 < pi/2` on the unit sphere, neither containing the other. It is
//! parametrised by the log geodesic curvatures `K_i = log cot r_i`, which
//! range over all of the plane.
//!
//! The triangle `o1 v o2` formed by the two centers and one corner of the
//! bigon has sides `r1, r2, r3` and angles `alpha'_1, alpha'_2` at the
//! centers and `pi - theta` at the corner. The sector of disk `i` spanned by
//! side `i` of the bigon has angle `2 alpha'_i`.
//!
//! Index `0` of every `[f64; 2]` field refers to side 1, index `1` to side 2.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrigError {
    #[error("bigon angle {0} outside (0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("non-finite input to bigon construction")]
    NonFinite,
    #[error("totals ({0}, {1}) outside the open triangle T1, T2 > 0, T1 + T2 < 2*theta = {2}")]
    TotalsOutOfRange(f64, f64, f64),
    #[error("quadrature did not settle after {0} panels")]
    QuadratureDiverged(usize),
    #[error("inverse bigon solve stalled after {iterations} iterations (residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },
}

/// Checks that `theta` is an admissible bigon angle, i.e. lies in `(0, pi/2]`.
pub fn check_angle(theta: f64) -> Result<(), TrigError> {
    if !theta.is_finite() {
        return Err(TrigError::NonFinite);
    }
    if theta <= 0.0 || theta > FRAC_PI_2 {
        return Err(TrigError::AngleOutOfRange(theta));
    }
    Ok(())
}

/// `(r, sin r, cos r)` for `r = arctan(exp(-K))`.
///
/// Sine and cosine are formed from `exp(-|K|)` so that neither underflows to
/// a meaningless value before the other.
fn radius_from_log_curvature(log_k: f64) -> (f64, f64, f64) {
    let t = (-log_k.abs()).exp();
    let d = 1.0_f64.hypot(t);
    let (s, c) = if log_k >= 0.0 { (t / d, 1.0 / d) } else { (1.0 / d, t / d) };
    (s.atan2(c), s, c)
}

/// One spherical bigon together with all of its derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigonShape {
    pub theta: f64,
    /// `pi - theta`, the corner angle of the triangle `o1 v o2`.
    pub theta_prime: f64,
    pub log_curvatures: [f64; 2],
    pub curvatures: [f64; 2],
    pub radii: [f64; 2],
    /// Distance between the two disk centers.
    pub center_distance: f64,
    /// `alpha'_i`, half of the sector angle spanned by side `i`.
    pub half_sector_angles: [f64; 2],
    pub side_lengths: [f64; 2],
    /// Total geodesic curvature `T_i = k_i * l_i` of each side.
    pub totals: [f64; 2],
    pub area: f64,
    sin_r: [f64; 2],
    cos_r: [f64; 2],
    // atan2 arguments of the two half sector angles, reused by the jacobian
    cot_parts: [(f64, f64); 2],
}

impl BigonShape {
    /// The unique bigon of angle `theta` with log curvatures `(k1, k2)`.
    pub fn from_log_curvatures(theta: f64, log_k1: f64, log_k2: f64) -> Result<Self, TrigError> {
        check_angle(theta)?;
        if !log_k1.is_finite() || !log_k2.is_finite() {
            return Err(TrigError::NonFinite);
        }
        let (sin_t, cos_t) = theta.sin_cos();
        let (r1, s1, c1) = radius_from_log_curvature(log_k1);
        let (r2, s2, c2) = radius_from_log_curvature(log_k2);

        // Cotangent four-part formula in the triangle o1 v o2, multiplied
        // through by sin r_j so that both atan2 arguments stay bounded:
        //   cot a'_1 = (cot r2 sin r1 - cos r1 cos theta') / sin theta'.
        let x1 = c2 * s1 + c1 * cos_t * s2;
        let y1 = sin_t * s2;
        let x2 = c1 * s2 + c2 * cos_t * s1;
        let y2 = sin_t * s1;
        let a1 = y1.atan2(x1);
        let a2 = y2.atan2(x2);

        // Haversine form of the cosine law, accurate for small r3.
        let h = ((r1 - r2) / 2.0).sin().powi(2) + s1 * s2 * ((std::f64::consts::PI - theta) / 2.0).sin().powi(2);
        let r3 = 2.0 * h.sqrt().min(1.0).asin();

        let totals = [2.0 * a1 * c1, 2.0 * a2 * c2];
        Ok(BigonShape {
            theta,
            theta_prime: std::f64::consts::PI - theta,
            log_curvatures: [log_k1, log_k2],
            curvatures: [log_k1.exp(), log_k2.exp()],
            radii: [r1, r2],
            center_distance: r3,
            half_sector_angles: [a1, a2],
            side_lengths: [2.0 * a1 * s1, 2.0 * a2 * s2],
            totals,
            area: 2.0 * theta - totals[0] - totals[1],
            sin_r: [s1, s2],
            cos_r: [c1, c2],
            cot_parts: [(x1, y1), (x2, y2)],
        })
    }

    /// The unique bigon of angle `theta` whose sides have total geodesic
    /// curvatures `(t1, t2)`.
    ///
    /// Newton's method on `T(K) = (t1, t2)` from `K = 0`, globalised by an
    /// Armijo search on the strictly convex `Omega_theta(K) - t1 K1 - t2 K2`.
    /// That function is proper for every target inside the triangle, so the
    /// iteration cannot escape to infinity. Its change along a trial step is
    /// the line integral of the residual, evaluated with one Gauss-Legendre
    /// panel; the absolute primitive is never needed.
    pub fn from_totals(theta: f64, t1: f64, t2: f64) -> Result<Self, TrigError> {
        check_angle(theta)?;
        if !t1.is_finite() || !t2.is_finite() {
            return Err(TrigError::NonFinite);
        }
        if t1 <= 0.0 || t2 <= 0.0 || t1 + t2 >= 2.0 * theta {
            return Err(TrigError::TotalsOutOfRange(t1, t2, 2.0 * theta));
        }
        const MAX_ITER: usize = 200;
        const TOL: f64 = 1e-12;
        const MAX_STEP: f64 = 2.0;
        const POLISH: usize = 4;
        let target = [t1, t2];
        let residual = |b: &BigonShape| [b.totals[0] - target[0], b.totals[1] - target[1]];
        let sup = |r: [f64; 2]| r[0].abs().max(r[1].abs());
        let (nodes, weights) = gauss_legendre();

        let mut b = Self::from_log_curvatures(theta, 0.0, 0.0)?;
        let mut res = residual(&b);
        let mut polished = 0;
        for iteration in 0..MAX_ITER {
            let k = b.log_curvatures;
            let j = b.jacobian().entries;
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let mut d = [
                -(j[1][1] * res[0] - j[0][1] * res[1]) / det,
                -(-j[1][0] * res[0] + j[0][0] * res[1]) / det,
            ];
            let len = sup(d);
            if !len.is_finite() {
                return Err(TrigError::IterationLimit { iterations: iteration, residual: sup(res) });
            }
            if len > MAX_STEP {
                d = [d[0] * MAX_STEP / len, d[1] * MAX_STEP / len];
            }

            if sup(res) <= TOL {
                // Converged; a few plain Newton steps take K to rounding level
                // where the jacobian is small.
                let nb = Self::from_log_curvatures(theta, k[0] + d[0], k[1] + d[1])?;
                let nr = residual(&nb);
                if polished >= POLISH || sup(nr) > sup(res) {
                    return Ok(b);
                }
                polished += 1;
                b = nb;
                res = nr;
                continue;
            }

            let slope = res[0] * d[0] + res[1] * d[1];
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-14 {
                let mut change = 0.0;
                for (x, w) in nodes.iter().zip(weights.iter()) {
                    let s = 0.5 * step * (1.0 + x);
                    let p = Self::from_log_curvatures(theta, k[0] + s * d[0], k[1] + s * d[1])?;
                    let r = residual(&p);
                    change += w * (r[0] * d[0] + r[1] * d[1]);
                }
                change *= 0.5 * step;
                if change <= 1e-4 * step * slope {
                    let nb = Self::from_log_curvatures(theta, k[0] + step * d[0], k[1] + step * d[1])?;
                    accepted = Some(nb);
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some(nb) => {
                    res = residual(&nb);
                    b = nb;
                }
                None => {
                    return Err(TrigError::IterationLimit { iterations: iteration, residual: sup(res) });
                }
            }
        }
        if sup(res) <= TOL {
            Ok(b)
        } else {
            Err(TrigError::IterationLimit { iterations: MAX_ITER, residual: sup(res) })
        }
    }

    pub fn sin_radii(&self) -> [f64; 2] {
        self.sin_r
    }

    pub fn cos_radii(&self) -> [f64; 2] {
        self.cos_r
    }

    /// Area of the full disk sector of disk `i` spanned by side `i`.
    pub fn sector_area(&self, i: usize) -> f64 {
        2.0 * self.half_sector_angles[i] * (1.0 - self.cos_r[i])
    }

    /// Partial derivatives of `(T1, T2)` with respect to `(K1, K2)`.
    ///
    /// The off-diagonal entries use `dT_i/dK_j = k_i k_j dl_i/dk_j` with
    /// `dl_1/dk_2 = -2 sin^2 r1 sin^2 a'_1 / sin theta'`, each evaluated from
    /// its own side so that their agreement is a genuine check of the sine
    /// law. The diagonal entries differentiate `T_i = 2 a'_i cos r_i` through
    /// the cotangent formula using `dr_i/dK_i = -sin r_i cos r_i`.
    pub fn jacobian(&self) -> BigonJacobian {
        let sin_t = self.theta.sin();
        let cos_t = self.theta.cos();
        let [s1, s2] = self.sin_r;
        let [c1, c2] = self.cos_r;
        let [(x1, y1), (x2, y2)] = self.cot_parts;
        let q1 = x1 * x1 + y1 * y1;
        let q2 = x2 * x2 + y2 * y2;
        let [a1, a2] = self.half_sector_angles;

        // k_1 k_2 sin^2 r1 sin^2 a'_1 with sin^2 a'_1 = y1^2 / q1
        let off12 = -2.0 * c1 * s1 * c2 * sin_t * s2 / q1;
        let off21 = -2.0 * c2 * s2 * c1 * sin_t * s1 / q2;

        // d a'_1 / d r1 = -sin^2 a'_1 d(cot a'_1)/d r1
        let da1_dr1 = -(sin_t * s2 / q1) * (c2 * c1 - s2 * s1 * cos_t);
        let da2_dr2 = -(sin_t * s1 / q2) * (c1 * c2 - s1 * s2 * cos_t);
        let dt1_dr1 = 2.0 * c1 * da1_dr1 - 2.0 * a1 * s1;
        let dt2_dr2 = 2.0 * c2 * da2_dr2 - 2.0 * a2 * s2;
        let d11 = -s1 * c1 * dt1_dr1;
        let d22 = -s2 * c2 * dt2_dr2;

        BigonJacobian { entries: [[d11, off12], [off21, d22]] }
    }
}

/// Free-function form of [`BigonShape::from_log_curvatures`].
pub fn bigon_from_k(theta: f64, log_k1: f64, log_k2: f64) -> Result<BigonShape, TrigError> {
    BigonShape::from_log_curvatures(theta, log_k1, log_k2)
}

/// Free-function form of [`BigonShape::from_totals`].
pub fn bigon_from_totals(theta: f64, t1: f64, t2: f64) -> Result<BigonShape, TrigError> {
    BigonShape::from_totals(theta, t1, t2)
}

/// `entries[i][j] = dT_{i+1} / dK_{j+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigonJacobian {
    pub entries: [[f64; 2]; 2],
}

impl BigonJacobian {
    pub fn asymmetry(&self) -> f64 {
        (self.entries[0][1] - self.entries[1][0]).abs()
    }

    /// Eigenvalues of the symmetrised matrix, smallest first.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0];
        let d = self.entries[1][1];
        let b = 0.5 * (self.entries[0][1] + self.entries[1][0]);
        let mean = 0.5 * (a + d);
        let rad = (0.5 * (a - d)).hypot(b);
        // the smaller root via the determinant avoids cancellation
        let large = mean + rad;
        let det = a * d - b * b;
        [det / large, large]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

// ---------------------------------------------------------------------------
// Primitive of the closed one-form T1 dK1 + T2 dK2.

const GAUSS_ORDER: usize = 16;
const PRIMITIVE_TOL: f64 = 1e-10;
const MAX_PANELS: usize = 1 << 14;

/// Nodes and weights of the Gauss-Legendre rule on `[-1, 1]`.
pub(crate) fn gauss_legendre() -> &'static ([f64; GAUSS_ORDER], [f64; GAUSS_ORDER]) {
    static RULE: OnceLock<([f64; GAUSS_ORDER], [f64; GAUSS_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_ORDER;
        let mut nodes = [0.0; GAUSS_ORDER];
        let mut weights = [0.0; GAUSS_ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for m in 2..=n {
                    let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Integral of `T1 dK1 + T2 dK2` along the straight segment `from -> to`.
pub fn line_integral(theta: f64, from: [f64; 2], to: [f64; 2]) -> Result<f64, TrigError> {
    check_angle(theta)?;
    if from.iter().chain(to.iter()).any(|v| !v.is_finite()) {
        return Err(TrigError::NonFinite);
    }
    let delta = [to[0] - from[0], to[1] - from[1]];
    if delta == [0.0, 0.0] {
        return Ok(0.0);
    }
    let (nodes, weights) = gauss_legendre();
    let estimate = |panels: usize| -> Result<f64, TrigError> {
        let h = 1.0 / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            let mut panel = 0.0;
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let s = mid + 0.5 * h * x;
                let b = BigonShape::from_log_curvatures(theta, from[0] + s * delta[0], from[1] + s * delta[1])?;
                panel += w * (b.totals[0] * delta[0] + b.totals[1] * delta[1]);
            }
            total += 0.5 * h * panel;
        }
        Ok(total)
    };
    let mut panels = 1;
    let mut prev = estimate(panels)?;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = estimate(panels)?;
        if (next - prev).abs() < PRIMITIVE_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(TrigError::QuadratureDiverged(panels))
}

/// `Omega_theta(K1, K2)`: the primitive of `T1 dK1 + T2 dK2` vanishing at
/// the origin, integrated along the straight segment from `(0, 0)`.
pub fn primitive_value(theta: f64, log_k1: f64, log_k2: f64) -> Result<f64, TrigError> {
    line_integral(theta, [0.0, 0.0], [log_k1, log_k2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    /// Independent construction on the unit sphere in R^3: put o1 at the
    /// north pole, bisect on the center distance until the tangent lines
    /// at an intersection point meet at `theta`, and measure everything
    /// with vectors. Returns `(r3, [a'_1, a'_2], area)`.
    fn embedded_lens(theta: f64, r1: f64, r2: f64) -> (f64, [f64; 2], f64) {
        type V = [f64; 3];
        fn dot(a: V, b: V) -> f64 {
            a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
        }
        fn cross(a: V, b: V) -> V {
            [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
        }
        fn sub(a: V, b: V) -> V {
            [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
        }
        fn scale(a: V, s: f64) -> V {
            [a[0] * s, a[1] * s, a[2] * s]
        }
        fn unit(a: V) -> V {
            scale(a, 1.0 / dot(a, a).sqrt())
        }
        // tangent at p of the great circle towards q
        fn toward(p: V, q: V) -> V {
            unit(sub(q, scale(p, dot(p, q))))
        }
        fn tri_area(a: V, b: V, c: V) -> f64 {
            let num = dot(a, cross(b, c)).abs();
            let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
            2.0 * num.atan2(den)
        }
        let o1: V = [0.0, 0.0, 1.0];
        let center2 = |d: f64| -> V { [d.sin(), 0.0, d.cos()] };
        // circle points: {p : p.o1 = cos r1, p.o2 = cos r2}
        let corners = |d: f64| -> (V, V) {
            let o2 = center2(d);
            let z = r1.cos();
            let x = (r2.cos() - z * d.cos()) / d.sin();
            let y = (1.0 - x * x - z * z).max(0.0).sqrt();
            let _ = o2;
            ([x, y, z], [x, -y, z])
        };
        let angle_at = |d: f64| -> f64 {
            let o2 = center2(d);
            let (v, _) = corners(d);
            // interior angle of the lens = pi - angle between the radii at v
            PI - dot(toward(v, o1), toward(v, o2)).clamp(-1.0, 1.0).acos()
        };
        let (mut lo, mut hi) = ((r1 - r2).abs() + 1e-15, r1 + r2 - 1e-15);
        // lens angle shrinks as the centers separate
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if angle_at(mid) > theta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let d = 0.5 * (lo + hi);
        let o2 = center2(d);
        let (v, w) = corners(d);
        let half = |c: V, o: V| dot(toward(c, v), toward(c, o)).clamp(-1.0, 1.0).acos();
        let a1 = half(o1, o2);
        let a2 = half(o2, o1);
        // lens = two circular segments cut by the geodesic chord v w
        let seg = |a: f64, r: f64, c: V| 2.0 * a * (1.0 - r.cos()) - tri_area(c, v, w);
        let area = seg(a1, r1, o1) + seg(a2, r2, o2);
        (d, [a1, a2], area)
    }

    #[test]
    fn right_angle_unit_curvatures() {
        let b = bigon_from_k(FRAC_PI_2, 0.0, 0.0).unwrap();
        assert!((b.radii[0] - FRAC_PI_4).abs() < 1e-15);
        assert!((b.center_distance - PI / 3.0).abs() < 1e-14);
        assert!((b.half_sector_angles[0] - 2f64.sqrt().atan()).abs() < 1e-14);
        assert!((b.half_sector_angles[0] - 0.9553166181245093).abs() < 1e-12);
        assert!((b.totals[0] - 1.35102171771208).abs() < 1e-12);
        assert_eq!(b.totals[0], b.totals[1]);
        assert!((b.area - 0.4395492181656331).abs() < 1e-12);
    }

    #[test]
    fn matches_embedded_lens() {
        let cases = [
            (FRAC_PI_2, 0.0, 0.0),
            (1.0, 0.3, -0.4),
            (0.4, 1.2, 0.7),
            (1.3, -0.2, 0.9),
        ];
        for (theta, k1, k2) in cases {
            let b = bigon_from_k(theta, k1, k2).unwrap();
            let (d, a, area) = embedded_lens(theta, b.radii[0], b.radii[1]);
            assert!((b.center_distance - d).abs() < 1e-9, "{theta} {k1} {k2}");
            assert!((b.half_sector_angles[0] - a[0]).abs() < 1e-9);
            assert!((b.half_sector_angles[1] - a[1]).abs() < 1e-9);
            if a[0] < FRAC_PI_2 && a[1] < FRAC_PI_2 {
                assert!((b.area - area).abs() < 1e-9, "area {} vs {}", b.area, area);
            }
        }
    }

    #[test]
    fn equal_curvatures_are_symmetric() {
        for &theta in &[0.1, 0.7, FRAC_PI_2] {
            for &k in &[-3.0, 0.0, 2.5] {
                let b = bigon_from_k(theta, k, k).unwrap();
                assert_eq!(b.totals[0], b.totals[1]);
                assert_eq!(b.half_sector_angles[0], b.half_sector_angles[1]);
                let j = b.jacobian().entries;
                assert!((j[0][0] - j[1][1]).abs() < 1e-15);
                assert!((j[0][1] - j[1][0]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(matches!(bigon_from_k(0.0, 0.0, 0.0), Err(TrigError::AngleOutOfRange(_))));
        assert!(matches!(bigon_from_k(1.6, 0.0, 0.0), Err(TrigError::AngleOutOfRange(_))));
        assert!(matches!(bigon_from_k(f64::NAN, 0.0, 0.0), Err(TrigError::NonFinite)));
        assert!(matches!(bigon_from_k(1.0, f64::INFINITY, 0.0), Err(TrigError::NonFinite)));
        assert!(bigon_from_k(FRAC_PI_2, 0.0, 0.0).is_ok());
    }

    #[test]
    fn large_curvatures_stay_finite() {
        for &(k1, k2) in &[(40.0, -40.0), (-300.0, -300.0), (300.0, 300.0), (700.0, -700.0)] {
            let b = bigon_from_k(1.0, k1, k2).unwrap();
            assert!(b.totals.iter().all(|t| t.is_finite() && *t >= 0.0));
            assert!(b.area.is_finite());
            let j = b.jacobian().entries;
            assert!(j.iter().flatten().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = 1e-5;
        let b = bigon_from_k(FRAC_PI_2, 0.0, 0.0).unwrap();
        let j = b.jacobian().entries;
        for col in 0..2 {
            let mut kp = [0.0, 0.0];
            let mut km = [0.0, 0.0];
            kp[col] += h;
            km[col] -= h;
            let bp = bigon_from_k(FRAC_PI_2, kp[0], kp[1]).unwrap();
            let bm = bigon_from_k(FRAC_PI_2, km[0], km[1]).unwrap();
            for row in 0..2 {
                let fd = (bp.totals[row] - bm.totals[row]) / (2.0 * h);
                assert!(((fd - j[row][col]) / j[row][col]).abs() < 1e-6, "{row}{col}");
            }
        }
        assert!(j[0][1] < 0.0);
        assert!(b.jacobian().min_eigenvalue() > 0.0);
    }

    #[test]
    fn totals_round_trip_at_origin() {
        let b = bigon_from_k(FRAC_PI_2, 0.0, 0.0).unwrap();
        let back = bigon_from_totals(FRAC_PI_2, b.totals[0], b.totals[1]).unwrap();
        assert!(back.log_curvatures[0].abs() < 1e-12);
        assert!(back.log_curvatures[1].abs() < 1e-12);
    }

    #[test]
    fn totals_outside_triangle_rejected() {
        let theta = 1.0;
        for (t1, t2) in [(1.0, 1.0), (1.5, 0.6), (0.0, 0.5), (-0.1, 0.5), (0.5, 0.0)] {
            assert!(matches!(bigon_from_totals(theta, t1, t2), Err(TrigError::TotalsOutOfRange(..))));
        }
    }

    #[test]
    fn primitive_vanishes_at_origin_and_is_symmetric() {
        assert_eq!(primitive_value(0.8, 0.0, 0.0).unwrap(), 0.0);
        let a = primitive_value(0.8, 1.3, -0.7).unwrap();
        let b = primitive_value(0.8, -0.7, 1.3).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn primitive_is_path_independent() {
        let (theta, k1, k2) = (1.1, -1.4, 2.2);
        let straight = primitive_value(theta, k1, k2).unwrap();
        let l_path = line_integral(theta, [0.0, 0.0], [k1, 0.0]).unwrap()
            + line_integral(theta, [k1, 0.0], [k1, k2]).unwrap();
        assert!((straight - l_path).abs() < 1e-9);
    }

    #[test]
    fn primitive_gradient_is_totals() {
        let (theta, k1, k2) = (0.9, 0.4, -0.3);
        let h = 1e-4;
        let b = bigon_from_k(theta, k1, k2).unwrap();
        let g1 = (primitive_value(theta, k1 + h, k2).unwrap() - primitive_value(theta, k1 - h, k2).unwrap()) / (2.0 * h);
        let g2 = (primitive_value(theta, k1, k2 + h).unwrap() - primitive_value(theta, k1, k2 - h).unwrap()) / (2.0 * h);
        assert!(((g1 - b.totals[0]) / b.totals[0]).abs() < 1e-6);
        assert!(((g2 - b.totals[1]) / b.totals[1]).abs() < 1e-6);
    }

    #[test]
    fn degenerate_limits() {
        let theta = 1.2;
        let mut prev_sum = f64::INFINITY;
        let mut prev_gap = f64::INFINITY;
        for n in 1..=8 {
            let n = n as f64;
            let a = bigon_from_k(theta, -n, -n).unwrap();
            let sum = a.totals[0] + a.totals[1];
            assert!(sum < prev_sum);
            prev_sum = sum;
            let b = bigon_from_k(theta, n, -n).unwrap();
            // side 1 sits on the shrinking disk and takes nearly all of 2 theta
            let gap = (2.0 * theta - b.totals[0]) + b.totals[1];
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_sum < 1e-2);
        assert!(prev_gap < 1e-2);
    }

    #[test]
    fn shrinking_second_disk() {
        let theta = 0.9;
        let k1 = 0.5;
        let mut prev = bigon_from_k(theta, k1, -3.0).unwrap();
        for i in 1..40 {
            let b = bigon_from_k(theta, k1, -3.0 + 0.2 * i as f64).unwrap();
            assert!(b.totals[0] < prev.totals[0]);
            assert!(b.area < prev.area);
            prev = b;
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre();
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // degree 30 monomial is exact for a 16 point rule
        let m: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
    }
}
