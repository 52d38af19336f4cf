use std::cell::Cell;

use crate::error::{Error, Result};

/// Where the root of a strictly monotone function is sought.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SearchRegion {
    /// Closed interval; both ends must straddle the target.
    Interval { lo: f64, hi: f64 },
    /// `(lower, inf)`, starting from the bracket `initial` with `lower < initial.0 < initial.1`.
    /// The upper end doubles its distance to `lower`, the lower end halves it.
    UpperHalfLine { lower: f64, initial: (f64, f64) },
    /// `(-inf, upper)`, mirrored version of [`SearchRegion::UpperHalfLine`].
    LowerHalfLine { upper: f64, initial: (f64, f64) },
    /// The whole line; the bracket width doubles in the needed direction.
    Line { initial: (f64, f64) },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `f(x) - target`.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

pub struct MonotoneRootProblem<F> {
    pub f: F,
    pub target: f64,
    pub region: SearchRegion,
    /// Stop when `|f(x) - target| <= f_tol`.
    pub f_tol: f64,
    /// Stop when the bracket is narrower than `x_tol`.
    pub x_tol: f64,
    pub max_expansions: usize,
    pub max_iterations: usize,
}

impl<F: FnMut(f64) -> Result<f64>> MonotoneRootProblem<F> {
    pub fn new(f: F, target: f64, region: SearchRegion) -> Self {
        MonotoneRootProblem {
            f,
            target,
            region,
            f_tol: 0.0,
            x_tol: 1e-10,
            max_expansions: 60,
            max_iterations: 200,
        }
    }

    pub fn with_tolerances(mut self, f_tol: f64, x_tol: f64) -> Self {
        self.f_tol = f_tol;
        self.x_tol = x_tol;
        self
    }

    pub fn with_max_expansions(mut self, n: usize) -> Self {
        self.max_expansions = n;
        self
    }

    pub fn solve(self) -> Result<Root> {
        solve_monotone(self)
    }
}

/// Brackets the target by expansion, then runs Brent's method inside the bracket.
pub fn solve_monotone<F: FnMut(f64) -> Result<f64>>(problem: MonotoneRootProblem<F>) -> Result<Root> {
    let MonotoneRootProblem {
        mut f,
        target,
        region,
        f_tol,
        x_tol,
        max_expansions,
        max_iterations,
    } = problem;
    let evaluations = Cell::new(0usize);
    let mut g = |x: f64| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        let v = f(x)? - target;
        if v.is_nan() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(v)
    };

    let (mut a, mut b) = match region {
        SearchRegion::Interval { lo, hi } => (lo, hi),
        SearchRegion::UpperHalfLine { initial, .. }
        | SearchRegion::LowerHalfLine { initial, .. }
        | SearchRegion::Line { initial } => initial,
    };
    if !(a < b) {
        return Err(Error::InvalidProblem(format!("empty search bracket [{a}, {b}]")));
    }
    let mut ga = g(a)?;
    let mut gb = g(b)?;
    let mut expansions = 0;
    while ga.signum() == gb.signum() && ga != 0.0 && gb != 0.0 {
        // The root lies beyond whichever end is closer to the target.
        let increasing = gb > ga;
        let go_right = (ga < 0.0) == increasing;
        let unreachable = |reached: f64, expansions: usize| Error::TargetUnattainable {
            target,
            reached,
            expansions,
        };
        if expansions >= max_expansions {
            return Err(unreachable(if go_right { b } else { a }, expansions));
        }
        expansions += 1;
        match (region, go_right) {
            (SearchRegion::Interval { .. }, _) => {
                return Err(unreachable(if go_right { b } else { a }, expansions));
            }
            (SearchRegion::UpperHalfLine { lower, .. }, true) => {
                a = b;
                ga = gb;
                b = lower + 2.0 * (b - lower);
                gb = g(b)?;
            }
            (SearchRegion::LowerHalfLine { upper, .. }, true) => {
                a = b;
                ga = gb;
                b = upper - 0.5 * (upper - b);
                gb = g(b)?;
            }
            (SearchRegion::UpperHalfLine { lower, .. }, false) => {
                b = a;
                gb = ga;
                a = lower + 0.5 * (a - lower);
                ga = g(a)?;
            }
            (SearchRegion::LowerHalfLine { upper, .. }, false) => {
                b = a;
                gb = ga;
                a = upper - 2.0 * (upper - a);
                ga = g(a)?;
            }
            (SearchRegion::Line { .. }, true) => {
                let w = b - a;
                a = b;
                ga = gb;
                b += 2.0 * w;
                gb = g(b)?;
            }
            (SearchRegion::Line { .. }, false) => {
                let w = b - a;
                b = a;
                gb = ga;
                a -= 2.0 * w;
                ga = g(a)?;
            }
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(unreachable(if go_right { b } else { a }, expansions));
        }
    }

    let done = |x: f64, gx: f64, lo: f64, hi: f64| Root {
        x,
        residual: gx,
        bracket: (lo.min(hi), lo.max(hi)),
        evaluations: evaluations.get(),
    };
    if ga == 0.0 {
        return Ok(done(a, ga, a, b));
    }
    if gb == 0.0 {
        return Ok(done(b, gb, a, b));
    }

    // Brent-Dekker: b is the best iterate, [b, c] brackets the root.
    let (mut c, mut gc) = (a, ga);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iterations {
        if gb.signum() == gc.signum() {
            c = a;
            gc = ga;
            d = b - a;
            e = d;
        }
        if gc.abs() < gb.abs() {
            a = b;
            b = c;
            c = a;
            ga = gb;
            gb = gc;
            gc = ga;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if gb.abs() <= f_tol || m.abs() <= tol || gb == 0.0 {
            return Ok(done(b, gb, b, c));
        }
        if e.abs() >= tol && ga.abs() > gb.abs() {
            let s = gb / ga;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = ga / gc;
                let r = gb / gc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        ga = gb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        gb = g(b)?;
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        lo: b.min(c),
        hi: b.max(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    const HALF_LINE: SearchRegion = SearchRegion::UpperHalfLine {
        lower: 0.0,
        initial: (1e-6, 1.0),
    };

    #[test]
    fn negation_on_half_line() {
        let root = MonotoneRootProblem::new(ok(|x| -x), -5.0, HALF_LINE)
            .with_tolerances(1e-12, 1e-12)
            .solve()
            .unwrap();
        assert!((root.x - 5.0).abs() < 1e-10);
    }

    #[test]
    fn exponential_unattainable() {
        let err = MonotoneRootProblem::new(ok(|x| (-x).exp()), 2.0, HALF_LINE)
            .solve()
            .unwrap_err();
        assert!(matches!(err, Error::TargetUnattainable { expansions: 60, .. }));
    }

    #[test]
    fn interval_must_straddle() {
        let err = MonotoneRootProblem::new(ok(|x| x), 3.0, SearchRegion::Interval { lo: 0.0, hi: 1.0 })
            .solve()
            .unwrap_err();
        assert!(matches!(err, Error::TargetUnattainable { .. }));
    }

    #[test]
    fn lower_half_line_and_line() {
        let root = MonotoneRootProblem::new(
            ok(|x| x * x * x),
            -1000.0,
            SearchRegion::LowerHalfLine {
                upper: 0.0,
                initial: (-1.0, -0.5),
            },
        )
        .with_tolerances(0.0, 1e-13)
        .solve()
        .unwrap();
        assert!((root.x + 10.0).abs() < 1e-10);

        let root = MonotoneRootProblem::new(ok(|x| -x + 0.5 * x.sin()), 40.0, SearchRegion::Line { initial: (0.0, 1.0) })
            .with_tolerances(0.0, 1e-13)
            .solve()
            .unwrap();
        assert!((-root.x + 0.5 * root.x.sin() - 40.0).abs() < 1e-10);
    }

    #[test]
    fn bracket_independence() {
        let f = |x: f64| 1.0 / (1.0 + x) - 0.8 * x.ln_1p();
        let mut roots = Vec::new();
        for initial in [(1e-6, 1.0), (0.3, 0.4), (10.0, 20.0), (1e-9, 1e-8)] {
            let r = MonotoneRootProblem::new(
                ok(f),
                0.0,
                SearchRegion::UpperHalfLine { lower: 0.0, initial },
            )
            .with_tolerances(1e-14, 1e-14)
            .solve()
            .unwrap();
            assert!(r.residual.abs() <= 1e-14 || r.bracket.1 - r.bracket.0 <= 1e-13);
            roots.push(r.x);
        }
        for r in &roots {
            assert!((r - roots[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn propagates_function_errors() {
        let err = MonotoneRootProblem::new(|_| Err(Error::NoPositiveRoot(1.0)), 0.0, HALF_LINE)
            .solve()
            .unwrap_err();
        assert_eq!(err, Error::NoPositiveRoot(1.0));
    }
}
