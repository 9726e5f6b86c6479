//! Test-only adaptive Gauss–Kronrod (7/15) oracle with dyadic grading
//! toward s = 0, absolute tolerance 1e-14 overall.

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut mag = WGK[7] * fc.abs();
    for j in 0..7 {
        let (l, r) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        let fs = l + r;
        mag += WGK[j] * (l.abs() + r.abs());
        k += WGK[j] * fs;
        if j % 2 == 1 {
            g += WG[j / 2] * fs;
        }
    }
    (k * h, (k - g).abs() * h, mag * h.abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err, mag) = gk15(f, a, b);
    // The halved tolerance can drop below rounding in the rule itself.
    if err <= tol.max(64.0 * f64::EPSILON * mag) || depth > 60 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth + 1) + adapt(f, m, b, 0.5 * tol, depth + 1)
}

/// ∫₀¹ f(s) ds, graded dyadically toward 0 and split at `hint` (a point
/// where the integrand may peak).
pub fn graded_integral<F: Fn(f64) -> f64>(f: F, hint: f64) -> f64 {
    let mut cuts = alloc::vec![0.0, 1.0];
    let mut x = 0.5;
    for _ in 0..60 {
        cuts.push(x);
        x *= 0.5;
    }
    if hint > 0.0 && hint < 1.0 {
        cuts.push(hint);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let tol = 1e-14 / cuts.len() as f64;
    cuts.windows(2).map(|w| adapt(&f, w[0], w[1], tol, 0)).sum()
}

/// ∫_a^b f(s) ds adaptively.
pub fn integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    adapt(&f, a, b, 1e-14, 0)
}

#[test]
fn oracle_sanity() {
    let v = graded_integral(|s| s.sqrt(), 0.3);
    assert!((v - 2.0 / 3.0).abs() < 1e-14);
    let v = graded_integral(|s| 1.0 / s.sqrt(), -1.0);
    assert!((v - 2.0).abs() < 1e-12);
    let v = integral(|s| 1e-3 / (s * s + 1e-6), -1.0, 1.0);
    assert!((v - 2.0 * 1000.0f64.atan()).abs() < 1e-12);
}

extern crate std;
use alloc::vec;
use alloc::vec::Vec;
use std::sync::OnceLock;

use crate::cornerbasis::{build_corner_rule, CornerRule};
use crate::geometry::{CompositeMesh, EdgeInput, Region, Vec2};

/// Shared corner rule for tests (β_max = 50, tol = 1e-13).
pub fn rule() -> &'static CornerRule {
    static RULE: OnceLock<CornerRule> = OnceLock::new();
    RULE.get_or_init(|| build_corner_rule(50.0, 1e-13).unwrap())
}

/// Unit square of material (mu_in, nu_in) in an exterior of ones.
pub fn square(mu_in: f64, nu_in: f64, ppe: usize) -> CompositeMesh {
    let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
    let regions = vec![Region { id: 0, mu: 1.0, nu: 1.0 }, Region { id: 1, mu: mu_in, nu: nu_in }];
    let edges: Vec<EdgeInput> = (0..4)
        .map(|k| EdgeInput { v_start: k, v_end: (k + 1) % 4, left: 1, right: 0, panels: ppe })
        .collect();
    CompositeMesh::new(v, regions, &edges).unwrap()
}
