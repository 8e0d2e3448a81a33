//! Plane curves in the tangent-angle gauge.
//!
//! A convex curve with curvature `k(x)` at tangent angle `x` has position
//! `∫ (cos ξ, sin ξ) / k(ξ) dξ`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::periodic::PeriodicProfile;

/// Default truncation of the soliton's tangent-angle range.
pub const SOLITON_EPS: f64 = 1e-3;

/// How a curve was moved by [`normalize_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub anchor: usize,
    pub k_max: f64,
    /// Tangent angle that was rotated to zero.
    pub rotation: f64,
    /// Another sample ties the maximal curvature within tolerance.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneCurve {
    pub points: Vec<(f64, f64)>,
    pub tangent_angles: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Distance from the last point back to the first.
    pub closed_gap: f64,
    pub rotation_index: Option<u32>,
    pub normalization: Option<Normalization>,
}

/// Relative gap below which a reconstruction counts as closed.
pub const CLOSED_TOL: f64 = 1e-6;

impl PlaneCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polyline length.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Rotates by `angle`, scales by `scale`, then translates by `shift`.
    pub fn transformed(&self, shift: (f64, f64), angle: f64, scale: f64) -> PlaneCurve {
        let (s, c) = angle.sin_cos();
        let mut out = self.clone();
        for p in &mut out.points {
            let (x, y) = *p;
            *p = (scale * (c * x - s * y) + shift.0, scale * (s * x + c * y) + shift.1);
        }
        for t in &mut out.tangent_angles {
            *t += angle;
        }
        for k in &mut out.curvature {
            *k /= scale;
        }
        out.closed_gap *= scale;
        out.normalization = None;
        out
    }

    /// Curvature of the polyline by central differences in the (uniform) tangent-angle parameter.
    pub fn discrete_curvature(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut out = vec![f64::NAN; n];
        for i in 1..n.saturating_sub(1) {
            let h = 0.5 * (self.tangent_angles[i + 1] - self.tangent_angles[i - 1]);
            let (a, b, c) = (self.points[i - 1], self.points[i], self.points[i + 1]);
            let d1 = ((c.0 - a.0) / (2.0 * h), (c.1 - a.1) / (2.0 * h));
            let d2 = ((c.0 - 2.0 * b.0 + a.0) / (h * h), (c.1 - 2.0 * b.1 + a.1) / (h * h));
            let speed = d1.0.hypot(d1.1);
            out[i] = (d1.0 * d2.1 - d1.1 * d2.0) / speed.powi(3);
        }
        out
    }

    /// CSV with header `x,y,theta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,theta\n");
        for (p, t) in self.points.iter().zip(&self.tangent_angles) {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", p.0, p.1, t);
        }
        out
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Cumulative trapezoid integration of `(cos ξ, sin ξ)/k` over `[-mπ, mπ]`.
///
/// Returns `n + 1` points; the last one closes the tangent-angle sweep.
pub fn reconstruct_curve(k: &PeriodicProfile) -> PlaneCurve {
    let n = k.len();
    let h = k.dx();
    let m = k.m();
    let angle = |i: usize| if i == n { -k.x(0) } else { k.x(i) };
    let kv = |i: usize| k.values()[i % n];
    let integrand = |i: usize| {
        let (s, c) = angle(i).sin_cos();
        (c / kv(i), s / kv(i))
    };
    let mut points = Vec::with_capacity(n + 1);
    let mut pos = (0.0, 0.0);
    points.push(pos);
    let mut prev = integrand(0);
    for i in 1..=n {
        let cur = integrand(i);
        pos = (pos.0 + 0.5 * h * (prev.0 + cur.0), pos.1 + 0.5 * h * (prev.1 + cur.1));
        points.push(pos);
        prev = cur;
    }
    let gap = dist(points[0], points[n]);
    let length: f64 = k.values().iter().map(|k| h / k).sum();
    PlaneCurve {
        tangent_angles: (0..=n).map(angle).collect(),
        curvature: (0..=n).map(kv).collect(),
        points,
        closed_gap: gap,
        rotation_index: (gap <= CLOSED_TOL * length).then_some(m),
        normalization: None,
    }
}

/// Pointwise `k = v^{1/α}`.
pub fn curvature_from_v(v: &PeriodicProfile, alpha: f64) -> Result<PeriodicProfile> {
    if !(alpha > 0.0) {
        return Err(FlowError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    v.map(|x| x.powf(1.0 / alpha))
}

/// Pointwise `v = k^α`.
pub fn v_from_curvature(k: &PeriodicProfile, alpha: f64) -> Result<PeriodicProfile> {
    if !(alpha > 0.0) {
        return Err(FlowError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    k.map(|x| x.powf(alpha))
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| crate::profiles::gauss_legendre(16))
}

fn gl_integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl16();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Point of the translating soliton at tangent angle `x`, `|x| < π/2`.
pub fn soliton_point(alpha: f64, x: f64) -> (f64, f64) {
    let c = x.cos();
    let y = if alpha == 1.0 {
        -c.ln()
    } else {
        alpha / (alpha - 1.0) * (1.0 - c.powf(1.0 - 1.0 / alpha))
    };
    let xc = if alpha == 1.0 {
        x
    } else {
        // Composite Gauss–Legendre on panels that shrink toward the singular end.
        let e = 1.0 - 1.0 / alpha;
        let f = |t: f64| t.cos().powf(e);
        let (sign, end) = (x.signum(), x.abs());
        let mut total = 0.0;
        let mut a = 0.0;
        while a < end {
            let room = FRAC_PI_2 - a;
            let b = (a + 0.25 * room.max(1e-12)).min(end);
            let b = if end - b < 1e-14 { end } else { b };
            total += gl_integral(f, a, b);
            a = b;
        }
        sign * total
    };
    (xc, y)
}

/// The soliton sampled at `n` tangent angles on `[-(π/2 - ε), π/2 - ε]`.
pub fn soliton_curve(alpha: f64, eps: f64, n: usize) -> Result<PlaneCurve> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FlowError::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(eps > 0.0 && eps < FRAC_PI_2) || n < 3 {
        return Err(FlowError::InvalidParameter(format!("need eps in (0, π/2) and n >= 3, got {eps}, {n}")));
    }
    let lim = FRAC_PI_2 - eps;
    let angles: Vec<f64> = (0..n).map(|i| -lim + 2.0 * lim * i as f64 / (n - 1) as f64).collect();
    Ok(PlaneCurve {
        points: angles.iter().map(|&x| soliton_point(alpha, x)).collect(),
        curvature: angles.iter().map(|x| x.cos().powf(1.0 / alpha)).collect(),
        tangent_angles: angles,
        closed_gap: f64::INFINITY,
        rotation_index: None,
        normalization: None,
    })
}

/// Relative tolerance for ties of the maximal curvature.
pub const TIE_TOL: f64 = 1e-12;

/// Moves the maximal-curvature point to the origin with tangent `(1, 0)` and
/// dilates so that the maximal curvature is one.
pub fn normalize_curve(c: &PlaneCurve) -> Result<PlaneCurve> {
    if c.is_empty() {
        return Err(FlowError::InvalidParameter("empty curve".into()));
    }
    let k_max = c.curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let anchor = c.curvature.iter().position(|&k| k >= k_max * (1.0 - TIE_TOL)).unwrap_or(0);
    let ambiguous = c.curvature.iter().filter(|&&k| k >= k_max * (1.0 - TIE_TOL)).count() > 1;
    let rotation = c.tangent_angles[anchor];
    let origin = c.points[anchor];
    let moved = c.transformed((-origin.0, -origin.1), 0.0, 1.0).transformed((0.0, 0.0), -rotation, k_max);
    Ok(PlaneCurve { normalization: Some(Normalization { anchor, k_max, rotation, ambiguous }), ..moved })
}

/// Sup distance between a normalized curve and the soliton at matching
/// tangent angles with `|x| ≤ window`.
pub fn distance_to_soliton(c: &PlaneCurve, alpha: f64, window: f64) -> f64 {
    c.points
        .iter()
        .zip(&c.tangent_angles)
        .filter(|(_, t)| t.abs() <= window)
        .map(|(p, &t)| dist(*p, soliton_point(alpha, t)))
        .fold(0.0, f64::max)
}

/// Polylines in a fixed 800×800 viewport, auto-scaled, stroke width 1.
pub fn curves_to_svg(curves: &[&PlaneCurve]) -> String {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 20.0;
    let pts = || curves.iter().flat_map(|c| c.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts() {
        x0 = x0.min(p.0);
        x1 = x1.max(p.0);
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-300);
    let scale = if span.is_finite() { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">"
    );
    out.push_str("<rect width=\"800\" height=\"800\" fill=\"white\"/>\n");
    for c in curves {
        out.push_str("<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"");
        for (i, p) in c.points.iter().enumerate() {
            let sx = MARGIN + (p.0 - x0) * scale;
            let sy = SIZE - MARGIN - (p.1 - y0) * scale;
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{sx:.3},{sy:.3}");
        }
        out.push_str("\"/>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circles_close() {
        for m in [1, 2] {
            let k = PeriodicProfile::constant(m, 512, 1.0).unwrap();
            let c = reconstruct_curve(&k);
            assert!(c.closed_gap < 1e-10);
            assert_eq!(c.rotation_index, Some(m));
            let centre = c.points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            let centre = (centre.0 / (c.len() - 1) as f64, centre.1 / (c.len() - 1) as f64);
            for p in &c.points {
                assert!((dist(*p, centre) - 1.0).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn ellipse_profile_closes() {
        let alpha = 1.0 / 3.0;
        let w = crate::profiles::ellipse_profile(1.3, 16).unwrap().on_circle(1, 512).unwrap();
        let k = curvature_from_v(&w, alpha).unwrap();
        let c = reconstruct_curve(&k);
        assert!(c.closed_gap < 1e-6);
        assert_eq!(c.rotation_index, Some(1));
    }

    #[test]
    fn arc_length_element() {
        let k = PeriodicProfile::from_fn(1, 2048, |x| 2.0 + x.cos()).unwrap();
        let c = reconstruct_curve(&k);
        let h = k.dx();
        for i in 0..c.len() - 1 {
            let ds = dist(c.points[i], c.points[i + 1]);
            let mid = 0.5 * (c.tangent_angles[i] + c.tangent_angles[i + 1]);
            let expect = h / (2.0 + mid.cos());
            assert!((ds - expect).abs() < 1e-4 * h, "{i}");
        }
    }

    #[test]
    fn soliton_examples() {
        let (x, y) = soliton_point(1.0, PI / 3.0);
        assert!((x - PI / 3.0).abs() < 1e-15 && (y - 2f64.ln()).abs() < 1e-15);
        assert_eq!(soliton_point(1.0, 0.0), (0.0, 0.0));
        let (_, y) = soliton_point(0.5, PI / 3.0);
        assert!((y - 1.0).abs() < 1e-14);
        // For α = 1/2 the abscissa is ∫ sec = ln(sec x + tan x).
        let (x, _) = soliton_point(0.5, 1.2);
        let exact = (1.0 / 1.2f64.cos() + 1.2f64.tan()).ln();
        assert!((x - exact).abs() < 1e-12, "{x} vs {exact}");
        let c = soliton_curve(1.0, SOLITON_EPS, 101).unwrap();
        assert!((c.curvature[50] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn soliton_curvature_law() {
        for alpha in [1.0, 0.5] {
            let c = soliton_curve(alpha, 0.2, 40001).unwrap();
            let k = c.discrete_curvature();
            for i in 1..c.len() - 1 {
                let exact = c.tangent_angles[i].cos().powf(1.0 / alpha);
                assert!((k[i] - exact).abs() < 1e-6, "alpha {alpha} node {i}: {} vs {exact}", k[i]);
            }
        }
    }

    #[test]
    fn normalization() {
        let s = soliton_curve(1.0, SOLITON_EPS, 201).unwrap();
        let n = normalize_curve(&s).unwrap();
        for (a, b) in s.points.iter().zip(&n.points) {
            assert!(dist(*a, *b) < 1e-12);
        }
        assert!(!n.normalization.unwrap().ambiguous);

        let k = PeriodicProfile::constant(1, 2048, 1.0).unwrap();
        let circle = reconstruct_curve(&k).transformed((3.0, -2.0), 0.7, 2.5);
        let n = normalize_curve(&circle).unwrap();
        let norm = n.normalization.unwrap();
        assert!(norm.ambiguous);
        assert_eq!(norm.anchor, 0);
        assert!((norm.k_max - 0.4).abs() < 1e-12);
        assert!(dist(n.points[0], (0.0, 0.0)) < 1e-12);
        assert!(n.tangent_angles[0].abs() < 1e-12);
        // Unit circle through the origin with tangent (1, 0) has centre (0, 1).
        for p in &n.points {
            assert!((dist(*p, (0.0, 1.0)) - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn curvature_round_trip() {
        let v = PeriodicProfile::constant(1, 16, 1.0).unwrap();
        assert_eq!(curvature_from_v(&v, 0.5).unwrap(), v);
        let v = PeriodicProfile::constant(1, 16, 4.0).unwrap();
        assert!((curvature_from_v(&v, 0.5).unwrap().values()[3] - 16.0).abs() < 1e-14);
        let k = PeriodicProfile::from_fn(2, 64, |x| 1.5 + (x / 2.0).cos()).unwrap();
        let back = curvature_from_v(&v_from_curvature(&k, 0.3).unwrap(), 0.3).unwrap();
        assert!(crate::periodic::sup_norm_distance(&k, &back).unwrap() < 1e-14);
    }

    #[test]
    fn svg_shape() {
        let s = soliton_curve(1.0, 0.1, 11).unwrap();
        let svg = curves_to_svg(&[&s]);
        assert!(svg.starts_with("<svg") && svg.contains("width=\"800\"") && svg.contains("stroke-width=\"1\""));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
