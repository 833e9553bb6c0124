//! Gauss-Kronrod quadrature: fixed 15-point rule, adaptive driver, and
//! helpers for long oscillatory ranges (fixed panels plus compensated sums).

use crate::Complex64;

// 7-15 Gauss-Kronrod abscissae and weights on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
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

/// One 15-point Kronrod panel. Returns (integral, error estimate).
pub fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let fsum = f(mid - dx) + f(mid + dx);
        resk += fsum * WGK[i];
        if i % 2 == 1 {
            resg += fsum * WG[i / 2];
        }
    }
    ((resk * half), ((resk - resg) * half).norm())
}

pub fn gk15_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let wrap = |x: f64| Complex64::new(f(x), 0.0);
    let (v, e) = gk15(&wrap, a, b);
    (v.re, e)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResultC {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Globally adaptive bisection driven by the panel error estimates.
/// Stops when the summed estimate drops below `tol` or the panel budget
/// runs out; the returned error field is the achieved estimate either way.
pub fn adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> QuadResultC {
    struct Seg {
        a: f64,
        b: f64,
        val: Complex64,
        err: f64,
    }
    let (v0, e0) = gk15(f, a, b);
    let mut segs = vec![Seg {
        a,
        b,
        val: v0,
        err: e0,
    }];
    loop {
        let total_err: f64 = segs.iter().map(|s| s.err).sum();
        if total_err <= tol || segs.len() >= max_panels {
            let mut acc = KahanC::new();
            for s in &segs {
                acc.add(s.val);
            }
            return QuadResultC {
                value: acc.sum(),
                error: total_err,
                panels: segs.len(),
            };
        }
        // split the worst panel
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .unwrap();
        let Seg { a, b, .. } = segs.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        segs.push(Seg {
            a,
            b: m,
            val: v1,
            err: e1,
        });
        segs.push(Seg {
            a: m,
            b,
            val: v2,
            err: e2,
        });
    }
}

pub fn adaptive_real<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> QuadResult {
    let wrap = |x: f64| Complex64::new(f(x), 0.0);
    let r = adaptive(&wrap, a, b, tol, max_panels);
    QuadResult {
        value: r.value.re,
        error: r.error,
        panels: r.panels,
    }
}

/// Fixed-width panel sweep for long oscillatory ranges: one GK15 panel per
/// step of length `panel_len`, values accumulated with compensation. The
/// caller picks `panel_len` so each panel sees a bounded phase increment.
pub fn panel_sweep<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panel_len: f64) -> QuadResultC {
    assert!(b >= a && panel_len > 0.0);
    let n = ((b - a) / panel_len).ceil().max(1.0) as usize;
    let step = (b - a) / n as f64;
    let mut acc = KahanC::new();
    let mut err = KahanSum::new();
    for i in 0..n {
        let lo = a + i as f64 * step;
        let hi = if i + 1 == n { b } else { lo + step };
        let (v, e) = gk15(f, lo, hi);
        acc.add(v);
        err.add(e);
    }
    QuadResultC {
        value: acc.sum(),
        error: err.sum(),
        panels: n,
    }
}

/// Compensated (Kahan) accumulator for f64.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    s: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum { s: 0.0, c: 0.0 }
    }

    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    pub fn sum(&self) -> f64 {
        self.s
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KahanC {
    re: KahanSum,
    im: KahanSum,
}

impl KahanC {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.re.sum(), self.im.sum())
    }
}
